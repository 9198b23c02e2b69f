"""Turn raw list terms into clauses.

Clause lists use the variable-naming rule (``u``-``z`` by default, upper
case with ``prolog_style_variables``).  Formulas are closed, and are
transformed by NNF, Skolemization and distribution into clauses.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .frontend import OpTable, print_term
from .terms import Compound, DomainElement, Term, Variable, variables_in_order

CONNECTIVES = {"~": 1, "&": 2, "|": 2, "->": 2, "<-": 2, "<->": 2}
QUANTIFIERS = ("all", "exists")


class ClausifyError(Exception):
    pass


def looks_like_variable(name: str, prolog_style: bool = False) -> bool:
    if not name:
        return False
    if prolog_style:
        return "A" <= name[0] <= "Z"
    return "u" <= name[0] <= "z"


@dataclass(frozen=True)
class Literal:
    sign: bool
    atom: Term

    def is_equality(self) -> bool:
        return isinstance(self.atom, Compound) and self.atom.symbol == "=" and len(self.atom.args) == 2


@dataclass(frozen=True)
class Clause:
    literals: tuple

    @property
    def variables(self) -> list:
        acc = []
        for lit in self.literals:
            variables_in_order(lit.atom, acc)
        return acc

    def to_term(self) -> Term:
        parts = []
        for lit in self.literals:
            a = lit.atom
            if lit.sign:
                parts.append(a)
            elif lit.is_equality():
                parts.append(Compound("!=", a.args))
            else:
                parts.append(Compound("~", (a,)))
        if not parts:
            return Compound("$F", ())
        t = parts[-1]
        for p in reversed(parts[:-1]):
            t = Compound("|", (p, t))
        return t

    def render(self, ops: OpTable | None = None) -> str:
        return print_term(self.to_term(), ops) + "."


def _is_connective(t: Term) -> bool:
    return isinstance(t, Compound) and CONNECTIVES.get(t.symbol) == len(t.args)


def _is_quantified(t: Term) -> bool:
    return (
        isinstance(t, Compound)
        and t.symbol in QUANTIFIERS
        and len(t.args) == 2
        and isinstance(t.args[0], Compound)
        and not t.args[0].args
    )


def _check_atom_args(t: Term, where: str):
    for a in t.args:
        if isinstance(a, Compound):
            if _is_connective(a) or _is_quantified(a) or a.symbol in ("=", "!="):
                raise ClausifyError(f"logic symbol {a.symbol!r} inside a term in {where}")
            _check_atom_args(a, where)


def _atom(t: Term, where: str) -> Literal:
    if not isinstance(t, Compound):
        raise ClausifyError(f"{t} is not an atomic formula in {where}")
    if t.symbol in QUANTIFIERS and _is_quantified(t):
        raise ClausifyError(f"quantifier inside {where}")
    if _is_connective(t):
        raise ClausifyError(f"connective {t.symbol!r} not allowed in {where}")
    _check_atom_args(t, where)
    if t.symbol == "!=" and len(t.args) == 2:
        return Literal(False, Compound("=", t.args))
    return Literal(True, t)


def _mark_variables(t: Term, is_var) -> Term:
    if isinstance(t, Compound):
        if not t.args:
            return Variable(t.symbol) if is_var(t.symbol) else t
        return Compound(t.symbol, tuple(_mark_variables(a, is_var) for a in t.args))
    return t


def term_to_clause(raw: Term, prolog_style: bool = False) -> Clause:
    """Interpret a clause-list entry as a clause (implicit universal closure)."""
    where = "clause"
    lits = []
    stack = [raw]
    while stack:
        t = stack.pop()
        if isinstance(t, Compound) and t.symbol == "|" and len(t.args) == 2:
            stack.append(t.args[1])
            stack.append(t.args[0])
            continue
        if isinstance(t, Compound) and t.symbol == "~" and len(t.args) == 1:
            lit = _atom(t.args[0], where)
            lits.append(Literal(not lit.sign, lit.atom))
            continue
        lits.append(_atom(t, where))
    if any(isinstance(l.atom, Compound) and not l.atom.args and looks_like_variable(l.atom.symbol, prolog_style)
           for l in lits):
        raise ClausifyError("a variable cannot be an atomic formula")

    def is_var(name):
        return looks_like_variable(name, prolog_style)

    return Clause(tuple(Literal(l.sign, _mark_variables(l.atom, is_var)) for l in lits))


# ---------------------------------------------------------------- formulas


def check_closed(formula: Term, prolog_style: bool = False) -> list:
    """Names that look like variables but are not bound by a quantifier.

    An empty result means the formula is acceptable.
    """
    bad = []

    def walk(t, bound):
        if not isinstance(t, Compound):
            return
        if _is_quantified(t):
            walk(t.args[1], bound | {t.args[0].symbol})
            return
        if not t.args:
            if t.symbol not in bound and looks_like_variable(t.symbol, prolog_style) and t.symbol not in bad:
                bad.append(t.symbol)
            return
        for a in t.args:
            walk(a, bound)

    walk(formula, frozenset())
    return bad


class SkolemNames:
    """Fresh Skolem symbol supply, skipping names already in use."""

    def __init__(self, used=()):
        self.used = set(used)
        self.counter = itertools.count(1)

    def fresh(self) -> str:
        while True:
            name = f"sk{next(self.counter)}"
            if name not in self.used:
                self.used.add(name)
                return name


def _to_internal(t: Term, bound: dict, fresh) -> Term:
    """Replace bound names by unique Variables, check atoms, desugar !=."""
    if _is_quantified(t):
        v = fresh(t.args[0].symbol)
        inner = dict(bound)
        inner[t.args[0].symbol] = v
        return Compound(t.symbol, (v, _to_internal(t.args[1], inner, fresh)))
    if _is_connective(t):
        return Compound(t.symbol, tuple(_to_internal(a, bound, fresh) for a in t.args))
    lit = _atom(t, "formula")

    def subst(s):
        if isinstance(s, Compound):
            if not s.args and s.symbol in bound:
                return bound[s.symbol]
            return Compound(s.symbol, tuple(subst(a) for a in s.args))
        return s

    atom = subst(lit.atom)
    return atom if lit.sign else Compound("~", (atom,))


def _nnf(t: Term, positive: bool = True) -> Term:
    if isinstance(t, Compound):
        s, a = t.symbol, t.args
        if s == "~" and len(a) == 1:
            return _nnf(a[0], not positive)
        if s == "->" and len(a) == 2:
            return _nnf(Compound("|", (Compound("~", (a[0],)), a[1])), positive)
        if s == "<-" and len(a) == 2:
            return _nnf(Compound("|", (a[0], Compound("~", (a[1],)))), positive)
        if s == "<->" and len(a) == 2:
            both = Compound("&", (
                Compound("|", (Compound("~", (a[0],)), a[1])),
                Compound("|", (a[0], Compound("~", (a[1],)))),
            ))
            return _nnf(both, positive)
        if s in ("&", "|") and len(a) == 2:
            op = s if positive else ("|" if s == "&" else "&")
            return Compound(op, (_nnf(a[0], positive), _nnf(a[1], positive)))
        if s in QUANTIFIERS and len(a) == 2 and isinstance(a[0], Variable):
            q = s if positive else ("exists" if s == "all" else "all")
            return Compound(q, (a[0], _nnf(a[1], positive)))
    return t if positive else Compound("~", (t,))


def _substitute(t: Term, sub: dict) -> Term:
    if isinstance(t, Variable):
        return sub.get(t, t)
    if isinstance(t, Compound) and t.args:
        return Compound(t.symbol, tuple(_substitute(a, sub) for a in t.args))
    return t


def _skolemize(t: Term, universals: tuple, sub: dict, names: SkolemNames) -> Term:
    if isinstance(t, Compound):
        s, a = t.symbol, t.args
        if s in QUANTIFIERS and len(a) == 2 and isinstance(a[0], Variable):
            if s == "all":
                return _skolemize(a[1], universals + (a[0],), sub, names)
            sk = Compound(names.fresh(), universals)
            inner = dict(sub)
            inner[a[0]] = sk
            return _skolemize(a[1], universals, inner, names)
        if s in ("&", "|") and len(a) == 2:
            return Compound(s, tuple(_skolemize(x, universals, sub, names) for x in a))
        if s == "~":
            return Compound("~", (_substitute(a[0], sub),))
    return _substitute(t, sub)


def _cnf(t: Term) -> list:
    """List of clauses; each clause is a list of literal terms."""
    if isinstance(t, Compound) and t.symbol == "&" and len(t.args) == 2:
        return _cnf(t.args[0]) + _cnf(t.args[1])
    if isinstance(t, Compound) and t.symbol == "|" and len(t.args) == 2:
        left, right = _cnf(t.args[0]), _cnf(t.args[1])
        return [l + r for l in left for r in right]
    return [[t]]


def _standard_names(prolog_style: bool):
    base = ["X", "Y", "Z", "U", "W"] if prolog_style else ["x", "y", "z", "u", "w"]
    for name in base:
        yield name
    for i in itertools.count(len(base)):
        yield f"{base[0]}{i}"


def rename_variables(clause: Clause, prolog_style: bool = False) -> Clause:
    names = _standard_names(prolog_style)
    sub = {v: Variable(next(names)) for v in clause.variables}
    return Clause(tuple(Literal(l.sign, _substitute(l.atom, sub)) for l in clause.literals))


def clausify(formula: Term, prolog_style: bool = False, skolem: SkolemNames | None = None) -> list:
    """Transform a closed formula into an equisatisfiable list of clauses."""
    bad = check_closed(formula, prolog_style)
    if bad:
        raise ClausifyError(
            f"formula {print_term(formula)} has unbound variable-like symbol(s): {', '.join(bad)}"
        )
    skolem = skolem if skolem is not None else SkolemNames(symbols_of(formula))
    counter = itertools.count()

    def fresh(name):
        return Variable(f"{name}#{next(counter)}")

    f = _to_internal(formula, {}, fresh)
    f = _nnf(f)
    f = _skolemize(f, (), {}, skolem)
    clauses = []
    for lits in _cnf(f):
        out = []
        for lit in lits:
            if isinstance(lit, Compound) and lit.symbol == "~" and len(lit.args) == 1:
                out.append(Literal(False, lit.args[0]))
            else:
                out.append(Literal(True, lit))
        clauses.append(rename_variables(Clause(tuple(out)), prolog_style))
    return clauses


def symbols_of(t: Term) -> set:
    out = set()
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Compound):
            out.add(s.symbol)
            stack.extend(s.args)
    return out


def clauses_from_program(program, prolog_style: bool = False) -> list:
    """All clauses of an input program, formulas clausified in list order."""
    used = set()
    for lst in program.lists:
        for t in lst.terms:
            used |= symbols_of(t)
    skolem = SkolemNames(used)
    out = []
    for lst in program.lists:
        for t in lst.terms:
            if lst.kind == "clauses":
                out.append(term_to_clause(t, prolog_style))
            else:
                out.extend(clausify(t, prolog_style, skolem))
    return out


def domain_elements(clauses) -> list:
    out = []
    for c in clauses:
        for lit in c.literals:
            stack = [lit.atom]
            while stack:
                s = stack.pop()
                if isinstance(s, DomainElement):
                    out.append(s.value)
                elif isinstance(s, Compound):
                    stack.extend(s.args)
    return out
