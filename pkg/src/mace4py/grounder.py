"""Build the tables and ground clauses for one domain size."""

from __future__ import annotations

import itertools

from .clausifier import Clause, domain_elements
from .propagation import EQ, FUNC, PRED, GroundClause, Node, State, Table
from .terms import Compound, DomainElement, Variable

DEFAULT_CELL_CAP = 10**7

_VAR, _APP = 0, 1


class GroundingError(Exception):
    """Fatal problem with the input for this domain size."""


class MemoryLimitExceeded(Exception):
    """The memory budget ran out while building the ground clauses."""


def collect_symbols(clauses) -> list:
    """(name, arity, kind) for every symbol, in order of first appearance."""
    seen: dict = {}

    def term(t):
        if isinstance(t, Compound):
            key = (t.symbol, len(t.args))
            if seen.get(key, "function") != "function":
                raise GroundingError(f"symbol {t.symbol}/{len(t.args)} used as both predicate and function")
            seen.setdefault(key, "function")
            for a in t.args:
                term(a)

    for c in clauses:
        for lit in c.literals:
            atom = lit.atom
            if not isinstance(atom, Compound):
                raise GroundingError(f"bad atom {atom}")
            if lit.is_equality():
                for a in atom.args:
                    term(a)
                continue
            key = (atom.symbol, len(atom.args))
            if seen.get(key, "predicate") != "predicate":
                raise GroundingError(f"symbol {atom.symbol}/{len(atom.args)} used as both predicate and function")
            seen.setdefault(key, "predicate")
            for a in atom.args:
                term(a)
    return [(name, arity, kind) for (name, arity), kind in seen.items()]


def build_tables(clauses, n: int, cell_cap: int = DEFAULT_CELL_CAP, extra_symbols=()) -> list:
    """One table per symbol; validates domain elements against ``n``."""
    if n < 1:
        raise GroundingError("domain size must be at least 1")
    for k in domain_elements(clauses):
        if k >= n:
            raise GroundingError(f"domain element {k} is out of range for domain size {n}")
    symbols = collect_symbols(clauses)
    known = {(s[0], s[1]) for s in symbols}
    for s in extra_symbols:
        if (s[0], s[1]) not in known:
            symbols.append(tuple(s))
    tables = []
    for i, (name, arity, kind) in enumerate(symbols):
        if n**arity > cell_cap:
            raise GroundingError(f"table for {name}/{arity} needs {n**arity} cells (cap {cell_cap})")
        tables.append(Table(name, arity, kind, i))
    return tables


def init_max_constrained(clauses) -> int:
    return max(domain_elements(clauses), default=-1)


def _compile(t, var_index, tables):
    if isinstance(t, Variable):
        return (_VAR, var_index[t])
    if isinstance(t, DomainElement):
        return t.value
    return (_APP, tables[(t.symbol, len(t.args))], tuple(_compile(a, var_index, tables) for a in t.args))


def _ground(tmpl, vals):
    if tmpl.__class__ is int:
        return tmpl
    if tmpl[0] == _VAR:
        return vals[tmpl[1]]
    return (tmpl[1], tuple([_ground(s, vals) for s in tmpl[2]]))


def compile_clause(clause: Clause, tables: dict):
    variables = clause.variables
    var_index = {v: i for i, v in enumerate(variables)}
    lits = []
    for lit in clause.literals:
        atom = lit.atom
        if lit.is_equality():
            l, r = (_compile(a, var_index, tables) for a in atom.args)
            lits.append((1 if lit.sign else 0, EQ, (l, r)))
        else:
            args = tuple(_compile(a, var_index, tables) for a in atom.args)
            lits.append((1 if lit.sign else 0, PRED, (tables[(atom.symbol, len(atom.args))], args)))
    return len(variables), lits


def instantiate(state: State, clauses) -> bool:
    """Generate all ground instances; False if some instance is empty.

    Each clause with v variables gets exactly n**v instances, variables
    taken in order of first occurrence and tuples in lexicographic order.
    Trivially true instances are stored already satisfied.
    """
    n = state.n
    tables = state.table_by_key
    nodes = state.nodes
    occ = state.occ
    memory = state.memory
    unsat = False

    def build(gt, parent, pos, clause):
        if gt.__class__ is int:
            return gt
        table, gargs = gt
        node = Node(FUNC, table, None, parent, pos, clause)
        args = [build(a, node, i, clause) for i, a in enumerate(gargs)]
        node.args = args
        node.nopen = sum(1 for a in args if a.__class__ is Node)
        nodes.append(node)
        if not node.nopen:
            occ[state.cell_id(table, args)].append(node)
        return node

    for ci, clause in enumerate(clauses):
        nvars, lits = compile_clause(clause, tables)
        for vals in itertools.product(range(n), repeat=nvars):
            gc = GroundClause(len(state.clauses), ci, vals)
            state.clauses.append(gc)
            grounded = []
            for sign, kind, body in lits:
                if kind == EQ:
                    l, r = _ground(body[0], vals), _ground(body[1], vals)
                    if l == r:
                        if sign:
                            gc.sat = True
                            break
                        continue  # t != t is false; drop the literal
                    if l.__class__ is int and r.__class__ is int:
                        if not sign:
                            gc.sat = True
                            break
                        continue
                    grounded.append((sign, kind, (l, r)))
                else:
                    grounded.append((sign, kind, (body[0], tuple([_ground(a, vals) for a in body[1]]))))
            if gc.sat:
                continue
            for sign, kind, body in grounded:
                pos = len(gc.args)
                if kind == EQ:
                    atom = Node(EQ, None, None, gc, pos, gc)
                    atom.args = [build(body[0], atom, 0, gc), build(body[1], atom, 1, gc)]
                else:
                    atom = Node(PRED, body[0], None, gc, pos, gc)
                    atom.args = [build(a, atom, i, gc) for i, a in enumerate(body[1])]
                atom.nopen = sum(1 for a in atom.args if a.__class__ is Node)
                nodes.append(atom)
                if kind == PRED and not atom.nopen:
                    occ[state.cell_id(atom.table, atom.args)].append(atom)
                gc.args.append(atom)
                gc.signs.append(sign)
            gc.nopen = len(gc.args)
            if gc.nopen == 0:
                state.conflict = gc
                unsat = True
            if memory is not None and not len(state.clauses) % 4096:
                memory.set_usage("ground", memory.estimate_ground(len(state.clauses), len(nodes)))
                if memory.breached():
                    raise MemoryLimitExceeded(memory.describe())
        if memory is not None:
            memory.set_usage("ground", memory.estimate_ground(len(state.clauses), len(nodes)))
            if memory.breached():
                raise MemoryLimitExceeded(memory.describe())
    return not unsat


def instance_counts(state: State, nclauses: int) -> list:
    counts = [0] * nclauses
    for gc in state.clauses:
        counts[gc.origin] += 1
    return counts


def initial_propagation(state: State) -> bool:
    """Propagate unit ground clauses; the results become the base state."""
    for gc in state.clauses:
        if not gc.sat and gc.nopen == 1:
            if not state._check_unit(gc):
                return False
    ok = state.propagate()
    # nothing above this point is ever undone
    state.trail.clear()
    return ok


def build_state(clauses, n: int, flags: dict | None = None, out=None, memory=None,
                cell_cap: int = DEFAULT_CELL_CAP, extra_symbols=()):
    """Tables, instances and initial propagation.  Returns (state, ok)."""
    tables = build_tables(clauses, n, cell_cap, extra_symbols)
    state = State(n, tables, flags, out)
    state.memory = memory
    if memory is not None:
        memory.set_usage("tables", memory.estimate_tables(state.ncells))
        if memory.breached():
            raise MemoryLimitExceeded(memory.describe())
    state.max_constrained = init_max_constrained(clauses)
    if not instantiate(state, clauses):
        return state, False
    return state, initial_propagation(state)


def partial_model(state: State) -> dict:
    """Values of assigned cells, keyed by cell name."""
    return {state.cell_name(c): state.value[c] for c in range(state.ncells) if state.value[c] >= 0}
