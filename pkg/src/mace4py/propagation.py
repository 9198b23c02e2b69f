"""Ground-clause state, positive/negative propagation and the undo trail.

Ground clauses are trees of ``Node`` objects.  An application node whose
arguments are all domain elements *is* a cell term: it sits on the
occurrence list of its cell until that cell gets a value, at which point
the node is overwritten in its parent by the value (and the overwrite is
recorded on the trail).  Atoms are nodes too; a ground clause is the
parent of its atoms and an atom that resolves is overwritten by its truth
value (1 or 0).

Every change goes on ``State.trail`` so ``undo_to(mark)`` restores the
exact earlier state.  Trail entries are either a bare ``Node`` (a
rewrite) or a tuple whose first item is one of the ``T_*`` codes.
"""

from __future__ import annotations

import hashlib
from collections import deque

FUNC, PRED, EQ, CLAUSE = 0, 1, 2, 3

# trail codes (a bare Node means "rewrite")
T_ASSIGN, T_ELIM, T_OCC, T_SAT, T_INDEX, T_MAXC = range(6)

# queue codes
Q_ASSIGN, Q_ELIM = 0, 1


class Node:
    __slots__ = ("kind", "table", "args", "nopen", "parent", "pos", "clause")

    def __init__(self, kind, table, args, parent, pos, clause):
        self.kind = kind
        self.table = table
        self.args = args
        self.nopen = 0
        self.parent = parent
        self.pos = pos
        self.clause = clause


class GroundClause:
    """A ground instance of an input clause.

    ``args`` holds the atoms (or their truth values once resolved) and
    ``signs`` the literal signs (1 positive, 0 negative), so a resolved
    literal is true iff ``args[i] == signs[i]``.
    """

    __slots__ = ("kind", "id", "args", "signs", "nopen", "sat", "origin", "subst", "clause")

    def __init__(self, cid, origin, subst):
        self.kind = CLAUSE
        self.id = cid
        self.args = []
        self.signs = []
        self.nopen = 0
        self.sat = False
        self.origin = origin
        self.subst = subst
        self.clause = self


class Table:
    """Cells of one function or predicate symbol."""

    __slots__ = ("name", "arity", "kind", "number", "base", "size", "strides", "range", "leaf_base")

    def __init__(self, name, arity, kind, number):
        self.name = name
        self.arity = arity
        self.kind = kind  # "function" or "predicate"
        self.number = number
        self.base = 0
        self.size = 0
        self.strides = ()
        self.range = 0
        self.leaf_base = ()

    @property
    def is_predicate(self) -> bool:
        return self.kind == "predicate"

    def __repr__(self):
        return f"Table({self.name}/{self.arity}, {self.kind})"


class Stats:
    __slots__ = ("selections", "decisions", "assignments", "eliminations", "negprop",
                 "near", "backtracks", "contradictions", "models")

    def __init__(self):
        for s in self.__slots__:
            setattr(self, s, 0)

    @property
    def propagations(self) -> int:
        """Assignments made by propagation rather than by selection."""
        return self.assignments - self.decisions

    def as_dict(self) -> dict:
        d = {s: getattr(self, s) for s in self.__slots__}
        d["propagations"] = self.propagations
        return d


class State:
    """Everything the search mutates for one domain size."""

    def __init__(self, n: int, tables: list, flags: dict | None = None, out=None):
        flags = flags or {}
        self.n = n
        self.tables = tables
        self.table_by_key = {(t.name, t.arity): t for t in tables}
        negprop = flags.get("negprop", True)
        self.neg_assign = negprop and flags.get("neg_assign", True)
        self.neg_assign_near = negprop and flags.get("neg_assign_near", True)
        self.neg_elim = negprop and flags.get("neg_elim", True)
        self.neg_elim_near = negprop and flags.get("neg_elim_near", True)
        self.index_near = negprop and (self.neg_assign or self.neg_assign_near or self.neg_elim or self.neg_elim_near)
        self.trace = flags.get("trace", False)
        self.out = out

        # cells
        value, poss, cell_table, cell_args, max_index, cell_keys = [], [], [], [], [], []
        nleaves = 0
        import itertools

        for t in tables:
            t.base = len(value)
            t.size = n ** t.arity
            t.strides = tuple(n ** (t.arity - 1 - i) for i in range(t.arity))
            t.range = 2 if t.is_predicate else n
            full = (1 << t.range) - 1
            per_pos = (n ** (t.arity - 1)) * t.range if t.arity else 0
            t.leaf_base = tuple(nleaves + p * per_pos for p in range(t.arity))
            nleaves += per_pos * t.arity
            for args in itertools.product(range(n), repeat=t.arity):
                value.append(-1)
                poss.append(full)
                cell_table.append(t)
                cell_args.append(args)
                max_index.append(max(args) if args else -1)
                keys = []
                for p in range(t.arity):
                    code = 0
                    for i, a in enumerate(args):
                        if i != p:
                            code = code * n + a
                    keys.append(t.leaf_base[p] + code * t.range)
                cell_keys.append(tuple(keys))
        self.ncells = len(value)
        self.value = value
        self.poss = poss
        self.cell_table = cell_table
        self.cell_args = cell_args
        self.max_index = max_index
        self.cell_keys = cell_keys
        self.occ = [[] for _ in range(self.ncells)]
        self.near_assign = [[] for _ in range(nleaves)]
        self.near_elim = [[] for _ in range(nleaves)]

        self.clauses: list[GroundClause] = []
        self.nodes: list[Node] = []
        self.trail: list = []
        self.queue: deque = deque()
        self.max_constrained = -1
        self.stats = Stats()
        self.conflict = None
        self.memory = None  # optional MemoryGuard

    # ------------------------------------------------------------ cells

    def cell_id(self, table: Table, args) -> int:
        idx = 0
        n = self.n
        for a in args:
            idx = idx * n + a
        return table.base + idx

    def cell_name(self, cell: int) -> str:
        t = self.cell_table[cell]
        if not t.arity:
            return t.name
        return f"{t.name}({','.join(map(str, self.cell_args[cell]))})"

    def possible_values(self, cell: int) -> list:
        m = self.poss[cell]
        return [v for v in range(self.cell_table[cell].range) if m >> v & 1]

    def open_cells(self) -> list:
        return [c for c in range(self.ncells) if self.value[c] < 0]

    # ------------------------------------------------------------ trail

    def mark(self) -> int:
        return len(self.trail)

    def undo_to(self, mark: int) -> None:
        trail = self.trail
        value, poss, occ = self.value, self.poss, self.occ
        while len(trail) > mark:
            e = trail.pop()
            if e.__class__ is Node:
                parent = e.parent
                parent.args[e.pos] = e
                parent.nopen += 1
                continue
            code = e[0]
            if code == T_OCC:
                occ[e[1]].pop()
            elif code == T_ASSIGN:
                value[e[1]] = -1
                poss[e[1]] = e[2]
            elif code == T_ELIM:
                poss[e[1]] = e[2]
            elif code == T_SAT:
                e[1].sat = False
            elif code == T_INDEX:
                e[1].pop()
            elif code == T_MAXC:
                self.max_constrained = e[1]
        self.queue.clear()

    def set_max_constrained(self, value: int) -> None:
        if value > self.max_constrained:
            self.trail.append((T_MAXC, self.max_constrained))
            self.max_constrained = value

    # ------------------------------------------------------------ rewriting

    def _resolve(self, node: Node, v: int) -> bool:
        """Overwrite ``node`` by value ``v`` in its parent and cascade upward."""
        trail = self.trail
        while True:
            parent = node.parent
            parent.args[node.pos] = v
            parent.nopen -= 1
            trail.append(node)
            kind = parent.kind
            if kind == FUNC or kind == PRED:
                if parent.nopen:
                    return self._check_unit(parent.clause)
                idx = 0
                n = self.n
                for a in parent.args:
                    idx = idx * n + a
                cell = parent.table.base + idx
                val = self.value[cell]
                if val >= 0:
                    node, v = parent, val
                    continue
                self.occ[cell].append(parent)
                trail.append((T_OCC, cell))
                return self._check_unit(parent.clause)
            if kind == EQ:
                if parent.nopen:
                    return self._check_unit(parent.clause)
                a = parent.args
                node, v = parent, (1 if a[0] == a[1] else 0)
                continue
            # the parent is the clause; the literal is resolved
            cl = parent
            if v == cl.signs[node.pos]:
                cl.sat = True
                trail.append((T_SAT, cl))
                return True
            if cl.nopen == 0:
                self.conflict = cl
                return False
            if cl.nopen == 1:
                return self._check_unit(cl)
            return True

    def _check_unit(self, cl: GroundClause) -> bool:
        """Derive an assignment/elimination/near event from a unit clause."""
        if cl.nopen != 1 or cl.sat:
            return True
        i = 0
        for a in cl.args:
            if a.__class__ is Node:
                break
            i += 1
        atom = cl.args[i]
        sign = cl.signs[i]
        if atom.kind == PRED:
            if atom.nopen == 0:
                cell = self.cell_id(atom.table, atom.args)
                self.queue.append((Q_ASSIGN, cell, sign))
                return True
            if atom.nopen == 1 and self.index_near:
                return self._near(atom, 1, sign == 1)
            return True
        left, right = atom.args
        if left.__class__ is Node:
            if right.__class__ is Node:
                return True
            x, k = left, right
        elif right.__class__ is Node:
            x, k = right, left
        else:
            return True
        if x.nopen == 0:
            cell = self.cell_id(x.table, x.args)
            if sign:
                self.queue.append((Q_ASSIGN, cell, k))
                return True
            return self.eliminate(cell, k)
        if x.nopen == 1 and self.index_near:
            return self._near(x, k, sign == 1)
        return True

    # ------------------------------------------------------------ events

    def assign(self, cell: int, v: int) -> bool:
        """Give ``cell`` the value ``v`` and rewrite its occurrences."""
        cur = self.value[cell]
        if cur >= 0:
            if cur == v:
                return True
            self.conflict = None
            return False
        m = self.poss[cell]
        if not (m >> v) & 1:
            self.conflict = None
            return False
        self.trail.append((T_ASSIGN, cell, m))
        self.value[cell] = v
        self.poss[cell] = 1 << v
        self.stats.assignments += 1
        if self.trace:
            self._log(f"assign {self.cell_name(cell)} = {v}")
        resolve = self._resolve
        for node in self.occ[cell]:
            if not node.clause.sat:
                if not resolve(node, v):
                    return False
        if self.neg_assign:
            return self._neg_assign(cell, v)
        return True

    def eliminate(self, cell: int, v: int) -> bool:
        """Remove ``v`` from the possible values of ``cell``."""
        cur = self.value[cell]
        if cur >= 0:
            if cur == v:
                self.conflict = None
                return False
            return True
        m = self.poss[cell]
        bit = 1 << v
        if not m & bit:
            return True
        m2 = m & ~bit
        self.trail.append((T_ELIM, cell, m))
        self.poss[cell] = m2
        self.stats.eliminations += 1
        if self.trace:
            self._log(f"eliminate {self.cell_name(cell)} != {v}")
        if m2 == 0:
            self.conflict = None
            return False
        if m2 & (m2 - 1) == 0:
            self.queue.append((Q_ASSIGN, cell, m2.bit_length() - 1))
        if self.neg_elim and self.cell_table[cell].kind == "function":
            self.queue.append((Q_ELIM, cell, v))
        return True

    def propagate(self) -> bool:
        """Process queued events until the queue is empty or a contradiction."""
        q = self.queue
        assign = self.assign
        while q:
            code, cell, v = q.popleft()
            if code == Q_ASSIGN:
                ok = assign(cell, v)
            else:
                ok = self._neg_elim(cell, v)
            if not ok:
                q.clear()
                self.stats.contradictions += 1
                if self.trace:
                    self._log("contradiction" + (f" in clause {self.conflict.id}" if self.conflict else ""))
                return False
        return True

    def assign_and_propagate(self, cell: int, v: int) -> bool:
        """Assign and propagate to fixpoint.  On failure nothing is undone."""
        self.queue.append((Q_ASSIGN, cell, v))
        return self.propagate()

    def eliminate_and_propagate(self, cell: int, v: int) -> bool:
        if not self.eliminate(cell, v):
            self.stats.contradictions += 1
            return False
        return self.propagate()

    # ------------------------------------------------------------ negative propagation

    def _near(self, x: Node, k: int, positive: bool) -> bool:
        """Record a near assignment (positive) or near elimination and pair it."""
        args = x.args
        p = 0
        for a in args:
            if a.__class__ is Node:
                break
            p += 1
        inner = args[p]
        if inner.nopen:
            return True  # deeper than depth 2
        ycell = self.cell_id(inner.table, inner.args)
        t = x.table
        n = self.n
        code = 0
        base = t.base
        strides = t.strides
        for i, a in enumerate(args):
            if i != p:
                code = code * n + a
                base += a * strides[i]
        leaf = (self.near_assign if positive else self.near_elim)[t.leaf_base[p] + code * t.range + k]
        leaf.append(ycell)
        self.trail.append((T_INDEX, leaf))
        self.stats.near += 1
        step = strides[p]
        poss = self.poss
        m = poss[ycell]
        if positive:
            if not self.neg_assign_near:
                return True
            for j in range(n):
                if m >> j & 1 and not (poss[base + j * step] >> k) & 1:
                    self.stats.negprop += 1
                    if not self.eliminate(ycell, j):
                        return False
        else:
            if not self.neg_elim_near:
                return True
            value = self.value
            for j in range(n):
                if m >> j & 1 and value[base + j * step] == k:
                    self.stats.negprop += 1
                    if not self.eliminate(ycell, j):
                        return False
        return True

    def _neg_assign(self, cell: int, v: int) -> bool:
        keys = self.cell_keys[cell]
        if not keys:
            return True
        t = self.cell_table[cell]
        args = self.cell_args[cell]
        if t.kind == "function":
            leaves, off = self.near_elim, v
        elif v == 1:
            leaves, off = self.near_elim, 1
        else:
            # P(...) false is the elimination of truth value 1
            leaves, off = self.near_assign, 1
        for p, key in enumerate(keys):
            entries = leaves[key + off]
            if entries:
                a = args[p]
                for y in list(entries):
                    self.stats.negprop += 1
                    if not self.eliminate(y, a):
                        return False
        return True

    def _neg_elim(self, cell: int, v: int) -> bool:
        keys = self.cell_keys[cell]
        args = self.cell_args[cell]
        leaves = self.near_assign
        for p, key in enumerate(keys):
            entries = leaves[key + v]
            if entries:
                a = args[p]
                for y in list(entries):
                    self.stats.negprop += 1
                    if not self.eliminate(y, a):
                        return False
        return True

    def index_lookup(self, positive: bool, table: Table, position: int, others, value: int) -> list:
        """Inner cells recorded for near events with the given outer key."""
        code = 0
        for a in others:
            code = code * self.n + a
        leaves = self.near_assign if positive else self.near_elim
        return list(leaves[table.leaf_base[position] + code * table.range + value])

    # ------------------------------------------------------------ inspection

    def occurrences(self, cell: int) -> int:
        return sum(1 for node in self.occ[cell] if not node.clause.sat)

    def live_clauses(self):
        return [c for c in self.clauses if not c.sat]

    def fingerprint(self) -> str:
        """Digest of the complete mutable state."""
        h = hashlib.sha256()
        node_ids = {id(nd): i for i, nd in enumerate(self.nodes)}

        def enc(a):
            return f"n{node_ids[id(a)]}" if a.__class__ is Node else str(a)

        h.update(repr((self.value, self.poss, self.max_constrained)).encode())
        for c in self.clauses:
            h.update(f"{c.sat}{c.nopen}{[enc(a) for a in c.args]}".encode())
        for nd in self.nodes:
            h.update(f"{nd.nopen}{[enc(a) for a in nd.args]}".encode())
        h.update(repr([[node_ids[id(nd)] for nd in lst] for lst in self.occ]).encode())
        h.update(repr(self.near_assign).encode())
        h.update(repr(self.near_elim).encode())
        h.update(repr(list(self.queue)).encode())
        return h.hexdigest()

    def _log(self, msg: str) -> None:
        if self.out is not None:
            print(msg, file=self.out)
