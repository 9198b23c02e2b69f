"""Recursive backtracking over cells with the least-number heuristic."""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field

from .models import from_state
from .propagation import State

ORDER_LINEAR, ORDER_CONCENTRIC, ORDER_BAND = 0, 1, 2
MEASURE_FIRST, MEASURE_OCCURRENCES, MEASURE_PROPAGATIONS, MEASURE_CONTRADICTIONS, MEASURE_FEWEST = range(5)


@dataclass
class SelectionConfig:
    order: int = ORDER_BAND
    measure: int = MEASURE_FEWEST
    lnh: bool = True


@dataclass
class Limits:
    max_models: int = 1  # -1: no limit; counts models already found in earlier sizes
    deadline: float | None = None  # absolute clock value, None: no limit
    models_before: int = 0
    clock: object = time.process_time
    memory: object = None


@dataclass
class SearchOutcome:
    models: int = 0
    status: str = "exhausted"  # exhausted, model_limit, time_limit, mem_limit
    interpretations: list = field(default_factory=list)


class _Stop(Exception):
    def __init__(self, status):
        self.status = status


def select_cell(state: State, config: SelectionConfig):
    """The next cell to branch on, or None when every cell has a value."""
    value = state.value
    max_index = state.max_index
    mc = state.max_constrained
    order = config.order
    open_cells = [c for c in range(state.ncells) if value[c] < 0]
    if not open_cells:
        return None
    if order == ORDER_LINEAR:
        cands = open_cells
    else:
        cands = []
        if order == ORDER_BAND:
            cands = [c for c in open_cells if max_index[c] <= mc]
        if not cands:
            low = min(max_index[c] for c in open_cells)
            cands = [c for c in open_cells if max_index[c] == low]
    measure = config.measure
    if measure == MEASURE_FIRST or len(cands) == 1:
        return cands[0]
    if measure == MEASURE_FEWEST:
        poss = state.poss
        best, best_count = cands[0], poss[cands[0]].bit_count()
        for c in cands:
            k = poss[c].bit_count()
            if k < best_count:
                best, best_count = c, k
                if k <= 2:
                    break
        return best
    if measure == MEASURE_OCCURRENCES:
        return max(cands, key=lambda c: (state.occurrences(c), -c))
    return _lookahead(state, config, cands, measure)


def _lookahead(state: State, config: SelectionConfig, cands, measure):
    best, best_score = cands[0], -1
    stats = state.stats
    for c in cands:
        score = 0
        for v in values_to_consider(state, c, config):
            mark = state.mark()
            before = stats.assignments
            ok = state.assign_and_propagate(c, v)
            if measure == MEASURE_PROPAGATIONS:
                score += stats.assignments - before
            elif not ok:
                score += 1
            state.undo_to(mark)
        if score > best_score:
            best, best_score = c, score
    return best


def values_to_consider(state: State, cell: int, config: SelectionConfig) -> list:
    """Candidate values for ``cell``, filtered by its possible values.

    With the LNH, values above the constrained prefix are interchangeable,
    so only the least of them is tried.  The prefix includes the indices of
    the cell itself, since selecting the cell constrains them.
    """
    t = state.cell_table[cell]
    m = state.poss[cell]
    if t.is_predicate:
        top = 1
    elif config.lnh:
        top = min(max(state.max_constrained, state.max_index[cell]) + 1, state.n - 1)
    else:
        top = state.n - 1
    return [v for v in range(top + 1) if m >> v & 1]


def update_max_constrained(state: State, cell: int, value: int) -> None:
    """Selection assignments constrain the value and the cell's indices."""
    t = state.cell_table[cell]
    top = state.max_index[cell]
    if not t.is_predicate and value > top:
        top = value
    state.set_max_constrained(top)


def search(state: State, config: SelectionConfig, limits: Limits, sink=None, out=None) -> SearchOutcome:
    """Depth-first search for models; ``sink(interp)`` receives each model."""
    outcome = SearchOutcome()
    stats = state.stats
    clock = limits.clock
    deadline = limits.deadline
    memory = limits.memory
    trace = state.trace
    total_limit = limits.max_models

    def recurse(depth):
        if deadline is not None and clock() >= deadline:
            raise _Stop("time_limit")
        if memory is not None:
            memory.set_usage("trail", memory.estimate_trail(len(state.trail)))
            if memory.breached():
                raise _Stop("mem_limit")
        cell = select_cell(state, config)
        if cell is None:
            interp = from_state(state)
            outcome.models += 1
            stats.models += 1
            if sink is not None:
                sink(interp)
            if total_limit != -1 and limits.models_before + outcome.models >= total_limit:
                raise _Stop("model_limit")
            return
        stats.selections += 1
        for v in values_to_consider(state, cell, config):
            mark = state.mark()
            update_max_constrained(state, cell, v)
            if trace and out is not None:
                print(f"{'  ' * depth}select {state.cell_name(cell)} = {v}", file=out)
            stats.decisions += 1
            if state.assign_and_propagate(cell, v):
                recurse(depth + 1)
            state.undo_to(mark)
            stats.backtracks += 1

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 4 * state.ncells + 1000))
    try:
        recurse(0)
    except _Stop as stop:
        outcome.status = stop.status
    finally:
        sys.setrecursionlimit(old_limit)
    return outcome
