"""Finished interpretations: printing, portable format, evaluation, isomorphism."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .clausifier import Clause
from .frontend import OpTable, ParseError, _name_text, _Parser, tokenize
from .terms import LIST_SYMBOL, Compound, DomainElement, Term, Variable


class EvaluationError(Exception):
    pass


@dataclass(frozen=True)
class SymbolTable:
    name: str
    arity: int
    kind: str  # "function" or "predicate"
    values: tuple  # row-major over index tuples


@dataclass(frozen=True)
class Interpretation:
    size: int
    symbols: tuple

    def __post_init__(self):
        n = self.size
        for s in self.symbols:
            if len(s.values) != n**s.arity:
                raise ValueError(f"table {s.name}/{s.arity} has {len(s.values)} entries, expected {n**s.arity}")
            limit = 2 if s.kind == "predicate" else n
            if any(not 0 <= v < limit for v in s.values):
                raise ValueError(f"table {s.name}/{s.arity} has a value out of range")

    def table(self, name: str, arity: int) -> SymbolTable:
        for s in self.symbols:
            if s.name == name and s.arity == arity:
                return s
        raise EvaluationError(f"symbol {name}/{arity} is not interpreted")

    def lookup(self, name: str, args=()) -> int:
        t = self.table(name, len(args))
        idx = 0
        for a in args:
            idx = idx * self.size + a
        return t.values[idx]

    def signature(self) -> tuple:
        return tuple((s.name, s.arity, s.kind) for s in self.symbols)


def from_state(state) -> Interpretation:
    """Extract the interpretation of a search state whose cells are all set."""
    syms = []
    for t in state.tables:
        vals = tuple(state.value[t.base : t.base + t.size])
        if any(v < 0 for v in vals):
            raise ValueError(f"table {t.name} is not complete")
        syms.append(SymbolTable(t.name, t.arity, t.kind, vals))
    return Interpretation(state.n, tuple(syms))


# ---------------------------------------------------------------- standard format


def _row(values, width) -> str:
    return " ".join(str(v).rjust(width) for v in values)


def print_standard(interp: Interpretation, number: int | None = None, seconds: float | None = None) -> str:
    n = interp.size
    w = len(str(max(n - 1, 1)))
    header = _row(range(n), w)
    lines = []
    if number is not None:
        lines.append(f"- Model {number} at {seconds or 0:.2f} seconds -")
        lines.append("")
    consts = [s for s in interp.symbols if s.arity == 0]
    if consts:
        lines.append("  " + "    ".join(f"{_name_text(s.name)} : {s.values[0]}" for s in consts))
    for s in sorted((s for s in interp.symbols if s.arity > 0), key=lambda s: s.arity):
        if lines:
            lines.append("")
        prefix = f"  {_name_text(s.name)} :"
        if s.arity == 1:
            lines.append(f"{prefix}    {header}")
            lines.append(" " * 5 + "-" * (len(prefix) + 4 + len(header) - 5))
            lines.append(" " * (len(prefix) + 4) + _row(s.values, w))
        elif s.arity == 2:
            lines.append(f"{prefix}{' ' * (w + 1)}| {header}")
            lines.append(" " * len(prefix) + "-" * (w + 1) + "+" + "-" * (len(header) + 1))
            for i in range(n):
                lines.append(" " * len(prefix) + str(i).rjust(w) + " | " + _row(s.values[i * n : (i + 1) * n], w))
        else:
            lines.append(f"{prefix}")
            for args, v in zip(itertools.product(range(n), repeat=s.arity), s.values):
                lines.append(f"    {_name_text(s.name)}({','.join(map(str, args))}) = {v}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- portable format


def _symbol_pattern(s: SymbolTable) -> str:
    if s.arity == 0:
        return _name_text(s.name)
    return f"{_name_text(s.name)}({','.join('_' * s.arity)})"


def print_portable(interp: Interpretation) -> str:
    items = []
    for s in interp.symbols:
        kind = "relation" if s.kind == "predicate" else "function"
        items.append(f"{kind}({_symbol_pattern(s)}, [{', '.join(map(str, s.values))}])")
    return f"interpretation({interp.size}, [{', '.join(items)}])."


def interp_from_term(t: Term) -> Interpretation:
    """Convert a parsed ``interpretation(N, [...])`` term."""
    if not (isinstance(t, Compound) and t.symbol == "interpretation" and len(t.args) == 2):
        raise ParseError("expected interpretation(N, [...])")
    size, items = t.args
    if not isinstance(size, DomainElement) or size.value < 1:
        raise ParseError("interpretation size must be a positive integer")
    if not (isinstance(items, Compound) and items.symbol == LIST_SYMBOL):
        raise ParseError("interpretation items must be a list")
    syms = []
    for k, item in enumerate(items.args, 1):
        if not (isinstance(item, Compound) and item.symbol in ("function", "relation") and len(item.args) == 2):
            raise ParseError(f"item {k}: expected function(...) or relation(...)")
        pattern, vals = item.args
        if not isinstance(pattern, Compound) or any(
            not (isinstance(a, Compound) and a.symbol == "_" and not a.args) for a in pattern.args
        ):
            raise ParseError(f"item {k}: bad symbol pattern")
        if not (isinstance(vals, Compound) and vals.symbol == LIST_SYMBOL) or not all(
            isinstance(v, DomainElement) for v in vals.args
        ):
            raise ParseError(f"item {k}: values must be a list of natural numbers")
        kind = "predicate" if item.symbol == "relation" else "function"
        values = tuple(v.value for v in vals.args)
        arity = len(pattern.args)
        if len(values) != size.value**arity:
            raise ParseError(f"item {k}: {pattern.symbol} needs {size.value**arity} values, got {len(values)}")
        limit = 2 if kind == "predicate" else size.value
        if any(v >= limit for v in values):
            raise ParseError(f"item {k}: value out of range for {pattern.symbol}")
        syms.append(SymbolTable(pattern.symbol, arity, kind, values))
    try:
        return Interpretation(size.value, tuple(syms))
    except ValueError as e:
        raise ParseError(str(e))


def parse_portable(text: str, ops: OpTable | None = None) -> list:
    """Parse a stream of portable interpretations."""
    ops = ops if ops is not None else OpTable()
    tokens = tokenize(text)
    p = _Parser(tokens, ops)
    out = []
    while p.peek() is not None:
        start = p.peek()
        t = p.parse_sentence()
        try:
            out.append(interp_from_term(t))
        except ParseError as e:
            raise ParseError(f"interpretation {len(out) + 1}: {e}", start.line, start.col) from None
    return out


# ---------------------------------------------------------------- evaluation


def _compile_term(t: Term, interp: Interpretation, var_index: dict):
    """Return a function env -> value."""
    n = interp.size
    if isinstance(t, Variable):
        i = var_index[t]
        return lambda env: env[i]
    if isinstance(t, DomainElement):
        if t.value >= n:
            raise EvaluationError(f"domain element {t.value} out of range for size {n}")
        v = t.value
        return lambda env: v
    table = interp.table(t.symbol, len(t.args))
    if table.kind != "function":
        raise EvaluationError(f"{t.symbol}/{len(t.args)} is a relation, used as a function")
    vals = table.values
    subs = [_compile_term(a, interp, var_index) for a in t.args]
    if not subs:
        v = vals[0]
        return lambda env: v
    if len(subs) == 1:
        f0 = subs[0]
        return lambda env: vals[f0(env)]
    if len(subs) == 2:
        f0, f1 = subs
        return lambda env: vals[f0(env) * n + f1(env)]

    def apply(env):
        idx = 0
        for f in subs:
            idx = idx * n + f(env)
        return vals[idx]

    return apply


def _compile_literal(lit, interp, var_index):
    atom = lit.atom
    sign = lit.sign
    if lit.is_equality():
        l, r = (_compile_term(a, interp, var_index) for a in atom.args)
        if sign:
            return lambda env: l(env) == r(env)
        return lambda env: l(env) != r(env)
    table = interp.table(atom.symbol, len(atom.args))
    if table.kind != "predicate":
        raise EvaluationError(f"{atom.symbol}/{len(atom.args)} is a function, used as a relation")
    vals = table.values
    n = interp.size
    subs = [_compile_term(a, interp, var_index) for a in atom.args]

    def truth(env):
        idx = 0
        for f in subs:
            idx = idx * n + f(env)
        return vals[idx] == 1

    if sign:
        return truth
    return lambda env: not truth(env)


def evaluate_clause(interp: Interpretation, clause: Clause) -> bool:
    """True iff the universal closure of ``clause`` holds in ``interp``."""
    variables = clause.variables
    var_index = {v: i for i, v in enumerate(variables)}
    lits = [_compile_literal(l, interp, var_index) for l in clause.literals]
    for env in itertools.product(range(interp.size), repeat=len(variables)):
        if not any(f(env) for f in lits):
            return False
    return True


def is_model(interp: Interpretation, clauses) -> bool:
    return all(evaluate_clause(interp, c) for c in clauses)


# ---------------------------------------------------------------- isomorphism


class IsoStats:
    def __init__(self):
        self.checks = 0
        self.perms = 0


def _invariants(interp: Interpretation) -> list:
    n = interp.size
    inv = [[] for _ in range(n)]
    for s in interp.symbols:
        vals = s.values
        if s.arity == 0:
            for x in range(n):
                inv[x].append(vals[0] == x)
            continue
        tuples = list(itertools.product(range(n), repeat=s.arity))
        if s.kind == "function":
            pre = [0] * n
            for v in vals:
                pre[v] += 1
            for x in range(n):
                diag = vals[sum(x * n**i for i in range(s.arity))]
                inv[x].append((pre[x], diag == x))
        else:
            for x in range(n):
                per_pos = tuple(
                    sum(1 for args, v in zip(tuples, vals) if v and args[p] == x) for p in range(s.arity)
                )
                diag = vals[sum(x * n**i for i in range(s.arity))]
                inv[x].append((per_pos, diag))
    return [tuple(i) for i in inv]


def find_isomorphism(a: Interpretation, b: Interpretation, stats: IsoStats | None = None):
    """A permutation p with p(a) = b, or None.

    Function tables must satisfy p(f_a(x..)) = f_b(p(x)..) and relation
    tables r_a(x..) = r_b(p(x)..).  Symbols are never permuted.
    """
    if a.size != b.size or a.signature() != b.signature():
        raise EvaluationError("interpretations have different sizes or signatures")
    if stats is not None:
        stats.checks += 1
    n = a.size
    inv_a, inv_b = _invariants(a), _invariants(b)
    if sorted(inv_a) != sorted(inv_b):
        return None
    cands = [[y for y in range(n) if inv_b[y] == inv_a[x]] for x in range(n)]
    perm = [-1] * n
    inv = [-1] * n
    tables = [(sa.arity, sa.kind, sa.values, sb.values) for sa, sb in zip(a.symbols, b.symbols)]
    tuples = {ar: list(itertools.product(range(n), repeat=ar)) for ar, _, _, _ in tables}

    def idx(args):
        i = 0
        for x in args:
            i = i * n + x
        return i

    def extend(x, y):
        """Map x->y and everything it forces; returns the new pairs or None."""
        added = []
        pending = [(x, y)]
        while pending:
            x, y = pending.pop()
            if perm[x] == y:
                continue
            if perm[x] != -1 or inv[y] != -1 or y not in cands[x]:
                for u in added:
                    inv[perm[u]] = -1
                    perm[u] = -1
                return None
            perm[x], inv[y] = y, x
            added.append(x)
            changed = True
            while changed and not pending:
                changed = False
                for ar, kind, va, vb in tables:
                    for args in tuples[ar]:
                        mapped = [perm[t] for t in args]
                        if -1 in mapped:
                            continue
                        ia, ib = idx(args), idx(mapped)
                        if kind == "function":
                            src, dst = va[ia], vb[ib]
                            if perm[src] == -1:
                                pending.append((src, dst))
                            elif perm[src] != dst:
                                for u in added:
                                    inv[perm[u]] = -1
                                    perm[u] = -1
                                return None
                        elif va[ia] != vb[ib]:
                            for u in added:
                                inv[perm[u]] = -1
                                perm[u] = -1
                            return None
        return added

    def undo(added):
        for u in added:
            inv[perm[u]] = -1
            perm[u] = -1

    def search():
        if stats is not None:
            stats.perms += 1
        x = next((i for i in range(n) if perm[i] == -1), None)
        if x is None:
            return True
        for y in cands[x]:
            if inv[y] != -1:
                continue
            added = extend(x, y)
            if added is None:
                continue
            if search():
                return True
            undo(added)
        return False

    # constants fix their images up front
    for (ar, kind, va, vb) in tables:
        if ar == 0 and kind == "function":
            if extend(va[0], vb[0]) is None:
                return None
    if search():
        return list(perm)
    return None


def isomorphic(a: Interpretation, b: Interpretation, stats: IsoStats | None = None) -> bool:
    return find_isomorphism(a, b, stats) is not None


def permute(interp: Interpretation, perm) -> Interpretation:
    """The image of ``interp`` under the element permutation ``perm``."""
    n = interp.size
    inv = [0] * n
    for x, y in enumerate(perm):
        inv[y] = x
    syms = []
    for s in interp.symbols:
        vals = []
        for args in itertools.product(range(n), repeat=s.arity):
            pre = [inv[y] for y in args]
            i = 0
            for x in pre:
                i = i * n + x
            v = s.values[i]
            vals.append(perm[v] if s.kind == "function" else v)
        syms.append(SymbolTable(s.name, s.arity, s.kind, tuple(vals)))
    return Interpretation(n, tuple(syms))
