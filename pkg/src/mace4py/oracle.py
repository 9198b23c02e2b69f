"""Brute-force model enumeration and the explicit ground encoding.

This module is a test instrument.  It shares the clause evaluator with
``models`` but nothing with the grounder or the propagation engine, so
agreement between the two is meaningful.
"""

from __future__ import annotations

import argparse
import itertools
import math
import sys
from dataclasses import dataclass, field

from .clausifier import Clause, Literal, clauses_from_program
from .frontend import ParseError, parse_input
from .models import Interpretation, SymbolTable, is_model
from .terms import Compound, DomainElement, Variable

MAX_INTERPRETATIONS = 10**8


class OracleRefusal(Exception):
    """The enumeration would visit more interpretations than allowed."""


def signature_of(clauses) -> list:
    """(name, arity, kind) in first-appearance order."""
    seen: dict = {}

    def term(t):
        if isinstance(t, Compound):
            seen.setdefault((t.symbol, len(t.args)), "function")
            for a in t.args:
                term(a)

    for c in clauses:
        for lit in c.literals:
            a = lit.atom
            if lit.is_equality():
                for x in a.args:
                    term(x)
            else:
                seen.setdefault((a.symbol, len(a.args)), "predicate")
                for x in a.args:
                    term(x)
    return [(name, arity, kind) for (name, arity), kind in seen.items()]


@dataclass
class EnumerationSpec:
    n: int
    clauses: list
    signature: list = field(default_factory=list)

    def __post_init__(self):
        if not self.signature:
            self.signature = signature_of(self.clauses)

    def total(self) -> int:
        t = 1
        for _, arity, kind in self.signature:
            t *= (2 if kind == "predicate" else self.n) ** (self.n**arity)
        return t


def _partial_term(t, tables, n, env):
    """Value of ``t`` under a partial interpretation, or None if unknown."""
    if isinstance(t, Variable):
        return env[t]
    if isinstance(t, DomainElement):
        return t.value
    args = []
    for a in t.args:
        v = _partial_term(a, tables, n, env)
        if v is None:
            return None
        args.append(v)
    idx = 0
    for a in args:
        idx = idx * n + a
    v = tables[(t.symbol, len(t.args))][idx]
    return None if v < 0 else v


def _partial_literal(lit: Literal, tables, n, env):
    a = lit.atom
    if lit.is_equality():
        l = _partial_term(a.args[0], tables, n, env)
        r = _partial_term(a.args[1], tables, n, env)
        if l is None or r is None:
            return None
        truth = l == r
    else:
        v = _partial_term(a, tables, n, env)
        if v is None:
            return None
        truth = v == 1
    return truth if lit.sign else not truth


def _falsified(clause: Clause, tables, n) -> bool:
    """True if some instance of ``clause`` is already false."""
    variables = clause.variables
    for vals in itertools.product(range(n), repeat=len(variables)):
        env = dict(zip(variables, vals))
        if all(_partial_literal(l, tables, n, env) is False for l in clause.literals):
            return True
    return False


def enumerate_models(spec: EnumerationSpec, limit: int = MAX_INTERPRETATIONS):
    """Yield every model of ``spec.clauses`` of size ``spec.n``.

    Cells are filled in lexicographic order (symbols in signature order,
    index tuples row-major, smaller values first), so models come out in
    lexicographic order of their tables.  Partial assignments that already
    falsify a clause instance are pruned; every complete candidate is then
    confirmed with the shared evaluator.
    """
    total = spec.total()
    if total > limit:
        raise OracleRefusal(f"{total} interpretations exceed the bound {limit}")
    n = spec.n
    for c in spec.clauses:
        for lit in c.literals:
            stack = [lit.atom]
            while stack:
                s = stack.pop()
                if isinstance(s, DomainElement) and s.value >= n:
                    return
                if isinstance(s, Compound):
                    stack.extend(s.args)
    tables = {(name, arity): [-1] * n**arity for name, arity, _ in spec.signature}
    cells = []
    for name, arity, kind in spec.signature:
        rng = 2 if kind == "predicate" else n
        cells.extend(((name, arity), i, rng) for i in range(n**arity))

    def build():
        return Interpretation(
            n,
            tuple(SymbolTable(name, arity, kind, tuple(tables[(name, arity)])) for name, arity, kind in spec.signature),
        )

    def fill(k):
        if any(_falsified(c, tables, n) for c in spec.clauses):
            return
        if k == len(cells):
            interp = build()
            if is_model(interp, spec.clauses):
                yield interp
            return
        key, i, rng = cells[k]
        for v in range(rng):
            tables[key][i] = v
            yield from fill(k + 1)
        tables[key][i] = -1

    yield from fill(0)


def count_models(clauses, n: int, signature=None) -> int:
    return sum(1 for _ in enumerate_models(EnumerationSpec(n, list(clauses), list(signature or []))))


# ---------------------------------------------------------------- ground encoding


def _substitute(t, env):
    if isinstance(t, Variable):
        return DomainElement(env[t])
    if isinstance(t, Compound) and t.args:
        return Compound(t.symbol, tuple(_substitute(a, env) for a in t.args))
    return t


@dataclass
class GroundEncoding:
    instances: list
    distinctness: list
    cell_clauses: list

    def all_clauses(self) -> list:
        return self.instances + self.distinctness + self.cell_clauses


def ground_encoding(clauses, n: int, signature=None) -> GroundEncoding:
    """Instances, distinctness of the domain and one positive clause per cell."""
    signature = signature or signature_of(clauses)
    instances = []
    for c in clauses:
        variables = c.variables
        for vals in itertools.product(range(n), repeat=len(variables)):
            env = dict(zip(variables, vals))
            instances.append(Clause(tuple(Literal(l.sign, _substitute(l.atom, env)) for l in c.literals)))
    distinct = [
        Clause((Literal(False, Compound("=", (DomainElement(i), DomainElement(j)))),))
        for i, j in itertools.combinations(range(n), 2)
    ]
    cells = []
    for name, arity, kind in signature:
        if kind == "predicate":
            continue
        for args in itertools.product(range(n), repeat=arity):
            term = Compound(name, tuple(DomainElement(a) for a in args))
            cells.append(Clause(tuple(Literal(True, Compound("=", (term, DomainElement(v)))) for v in range(n))))
    return GroundEncoding(instances, distinct, cells)


def emit_ground_encoding(clauses, n: int, ops=None, signature=None) -> str:
    """The encoding as a clauses list in input syntax."""
    enc = ground_encoding(clauses, n, signature)
    lines = ["clauses(ground_encoding)."]
    lines.extend(c.render(ops) for c in enc.all_clauses())
    lines.append("end_of_list.")
    return "\n".join(lines) + "\n"


def expected_encoding_size(clauses, n: int, signature=None) -> int:
    signature = signature or signature_of(clauses)
    inst = sum(n ** len(c.variables) for c in clauses)
    cells = sum(n**arity for _, arity, kind in signature if kind == "function")
    return inst + math.comb(n, 2) + cells


# ---------------------------------------------------------------- command line


def main(argv=None, out=None, err=None) -> int:
    """``oracle-count FILE -n 2 -N 3``: brute-force model counts per size."""
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    p = argparse.ArgumentParser(prog="oracle-count")
    p.add_argument("input_file")
    p.add_argument("-n", type=int, default=2, help="first domain size")
    p.add_argument("-N", type=int, default=0, help="last domain size")
    p.add_argument("--prolog-style", action="store_true")
    p.add_argument("--encoding", action="store_true", help="print the ground encoding instead of counting")
    try:
        args = p.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1
    try:
        with open(args.input_file) as fh:
            program = parse_input(fh.read())
        clauses = clauses_from_program(program, args.prolog_style)
        for n in range(args.n, max(args.n, args.N) + 1):
            if args.encoding:
                out.write(emit_ground_encoding(clauses, n, program.ops))
            else:
                print(f"size {n}: {count_models(clauses, n)} models", file=out)
    except (OSError, ParseError, OracleRefusal) as e:
        print(f"oracle-count: {e}", file=err)
        return 1
    return 0
