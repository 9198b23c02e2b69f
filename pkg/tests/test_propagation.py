import random

import pytest

from mace4py.clausifier import domain_elements
from mace4py.grounder import build_state
from mace4py.oracle import EnumerationSpec, enumerate_models
from mace4py.propagation import Q_ASSIGN

from conftest import GROUP, ORTHOLATTICE, clauses_of, random_theory, state_for


def cell(state, name, *args):
    return state.cell_id(state.table_by_key[(name, len(args))], args)


# ---------------------------------------------------------------- positive propagation


def test_rewrite_produces_assignment():
    state, ok = state_for("clauses(t). g(f(2,3)) = 5. end_of_list.", 6)
    assert ok
    assert state.assign_and_propagate(cell(state, "f", 2, 3), 4)
    assert state.value[cell(state, "g", 4)] == 5


def test_assignment_flows_into_constant():
    state, ok = state_for("clauses(t). a = f(2,3). end_of_list.", 5)
    assert ok
    assert state.assign_and_propagate(cell(state, "f", 2, 3), 4)
    assert state.value[cell(state, "a")] == 4


def test_predicate_assignment_against_unit():
    state, ok = state_for("clauses(t). ~P(0,0) | Q. end_of_list.", 2)
    assert ok
    mark = state.mark()
    assert state.assign_and_propagate(cell(state, "Q"), 0)
    assert not state.assign_and_propagate(cell(state, "P", 0, 0), 1)
    state.undo_to(mark)
    state, _ = state_for("clauses(t). ~P(0,0). end_of_list.", 2)
    assert state.value[cell(state, "P", 0, 0)] == 0


def test_contradiction_does_not_undo():
    state, ok = state_for("clauses(t). a = b. a = c. b != c. end_of_list.", 3)
    assert ok
    fp = state.fingerprint()
    mark = state.mark()
    assert not state.assign_and_propagate(cell(state, "a"), 1)
    assert len(state.trail) > mark and state.value[cell(state, "a")] == 1
    state.undo_to(mark)
    assert state.fingerprint() == fp


# ---------------------------------------------------------------- eliminations


def test_last_value_is_assigned():
    state, _ = state_for("clauses(t). a = a. end_of_list.", 5)
    a = cell(state, "a")
    for v in (0, 1, 2):
        assert state.eliminate(a, v)
    assert state.possible_values(a) == [3, 4]
    state.queue.clear()
    assert state.eliminate(a, 4)
    assert (Q_ASSIGN, a, 3) in state.queue
    assert state.propagate() and state.value[a] == 3


def test_eliminating_absent_value_is_noop():
    state, _ = state_for("clauses(t). a = a. end_of_list.", 4)
    a = cell(state, "a")
    assert state.eliminate(a, 2)
    fp = state.fingerprint()
    assert state.eliminate(a, 2)
    assert state.fingerprint() == fp


def test_boolean_elimination_assigns_other_value():
    state, _ = state_for("clauses(t). p(0) | p(1). end_of_list.", 2)
    c = cell(state, "p", 0)
    assert state.eliminate_and_propagate(c, 0)
    assert state.value[c] == 1


def test_empty_possible_values_is_contradiction():
    state, _ = state_for("clauses(t). a = a. end_of_list.", 2)
    a = cell(state, "a")
    assert state.eliminate(a, 0)
    state.queue.clear()
    assert not state.eliminate(a, 1)


# ---------------------------------------------------------------- negative propagation


def _single_inference(state, act, target, value):
    before = state.stats.negprop
    assert act()
    assert value not in state.possible_values(target)
    return state.stats.negprop - before


def test_assignment_pairs_with_near_elimination():
    state, ok = state_for("clauses(t). f(2,g(5)) != 4. end_of_list.", 6)
    assert ok
    g5 = cell(state, "g", 5)
    assert state.index_lookup(False, state.table_by_key[("f", 2)], 1, (2,), 4) == [g5]
    fired = _single_inference(state, lambda: state.assign_and_propagate(cell(state, "f", 2, 3), 4), g5, 3)
    assert fired == 1
    assert state.possible_values(g5) == [0, 1, 2, 4, 5]


def test_elimination_pairs_with_near_assignment():
    state, ok = state_for("clauses(t). f(2,g(5)) = 4. end_of_list.", 6)
    assert ok
    g5 = cell(state, "g", 5)
    assert state.index_lookup(True, state.table_by_key[("f", 2)], 1, (2,), 4) == [g5]
    fired = _single_inference(state, lambda: state.eliminate_and_propagate(cell(state, "f", 2, 3), 4), g5, 3)
    assert fired == 1


def test_boolean_analogue():
    state, ok = state_for("clauses(t). ~P(3,g(5)). end_of_list.", 6)
    assert ok
    g5 = cell(state, "g", 5)
    fired = _single_inference(state, lambda: state.assign_and_propagate(cell(state, "P", 3, 4), 1), g5, 4)
    assert fired == 1


def test_negprop_off_derives_nothing():
    state, _ = build_state(clauses_of("clauses(t). f(2,g(5)) != 4. end_of_list."), 6, {"negprop": False})
    g5 = cell(state, "g", 5)
    assert state.assign_and_propagate(cell(state, "f", 2, 3), 4)
    assert 3 in state.possible_values(g5)
    assert state.stats.negprop == 0


def test_per_rule_flag():
    flags = {"neg_assign": False}
    state, _ = build_state(clauses_of("clauses(t). f(2,g(5)) != 4. end_of_list."), 6, flags)
    assert state.assign_and_propagate(cell(state, "f", 2, 3), 4)
    # the near-elimination side can still fire when it is added later; here it was added first
    assert 3 in state.possible_values(cell(state, "g", 5))


def test_near_event_added_after_the_assignment():
    # the near elimination appears only once a(=2) is known
    state, ok = state_for("clauses(t). f(a,g(5)) != 4. end_of_list.", 6)
    assert ok
    assert state.assign_and_propagate(cell(state, "f", 2, 3), 4)
    assert state.assign_and_propagate(cell(state, "a"), 2)
    assert 3 not in state.possible_values(cell(state, "g", 5))


def test_index_lookup_empty():
    state, _ = state_for("clauses(t). f(x,y) = f(y,x). end_of_list.", 3)
    assert state.index_lookup(True, state.table_by_key[("f", 2)], 0, (1,), 2) == []


# ---------------------------------------------------------------- trail


def test_undo_at_top_is_noop():
    state, _ = state_for(GROUP, 4)
    fp = state.fingerprint()
    state.undo_to(state.mark())
    assert state.fingerprint() == fp


def _random_walk(state, rng, cycles):
    """Random nested assign/eliminate steps; every undo must restore the fingerprint."""
    stack = []
    checked = 0
    while checked < cycles:
        open_cells = state.open_cells()
        if open_cells and len(stack) < 8 and rng.random() < 0.6:
            c = rng.choice(open_cells)
            v = rng.choice(state.possible_values(c))
            stack.append((state.mark(), state.fingerprint()))
            if rng.random() < 0.7:
                state.set_max_constrained(max(state.max_constrained, v))
                ok = state.assign_and_propagate(c, v)
            else:
                ok = state.eliminate_and_propagate(c, v)
            if ok:
                continue
        if not stack:
            continue
        mark, fp = stack.pop()
        state.undo_to(mark)
        assert state.fingerprint() == fp
        checked += 1
    while stack:
        mark, fp = stack.pop()
        state.undo_to(mark)
        assert state.fingerprint() == fp
    return checked


def test_trail_restores_fingerprint(rng):
    state, ok = state_for(ORTHOLATTICE, 5)
    assert ok
    base = state.fingerprint()
    assert _random_walk(state, rng, 500) == 500
    assert state.fingerprint() == base


def test_nested_marks_on_group(rng):
    state, ok = state_for(GROUP, 5)
    assert ok
    base = state.fingerprint()
    _random_walk(state, rng, 300)
    assert state.fingerprint() == base


def test_index_matches_shadow_after_undo(rng):
    state, _ = state_for(ORTHOLATTICE, 4)

    def leaves():
        return [sorted(l) for l in state.near_assign] + [sorted(l) for l in state.near_elim]

    for _ in range(100):
        shadow = leaves()
        mark = state.mark()
        for _ in range(rng.randint(1, 4)):
            open_cells = state.open_cells()
            if not open_cells:
                break
            c = rng.choice(open_cells)
            if not state.assign_and_propagate(c, rng.choice(state.possible_values(c))):
                break
        state.undo_to(mark)
        assert leaves() == shadow


# ---------------------------------------------------------------- soundness against the oracle


def _decisions_sound(clauses, n, rng, negprop):
    state, ok = build_state(clauses, n, {"negprop": negprop})
    spec = EnumerationSpec(n, clauses)
    if spec.total() > 10**5:
        return None
    models = list(enumerate_models(spec))
    if not ok:
        assert models == []
        return True
    decisions = []
    for _ in range(rng.randint(0, 2)):
        open_cells = state.open_cells()
        if not open_cells:
            break
        c = rng.choice(open_cells)
        v = rng.choice(state.possible_values(c))
        decisions.append((c, v))
        ok = state.assign_and_propagate(c, v)
        if not ok:
            break

    def lookup(m, c):
        t = state.cell_table[c]
        return m.lookup(t.name, state.cell_args[c])

    extending = [m for m in models if all(lookup(m, c) == v for c, v in decisions)]
    if not ok:
        assert extending == []
        return True
    for m in extending:
        for c in range(state.ncells):
            assert state.poss[c] >> lookup(m, c) & 1, state.cell_name(c)
    return True


@pytest.mark.parametrize("negprop", [True, False])
def test_propagation_is_sound(negprop):
    rng = random.Random(11 if negprop else 12)
    done = 0
    while done < 40:
        clauses = random_theory(rng)
        n = max(domain_elements(clauses), default=0) + 1
        n = max(n, rng.choice([2, 3]))
        if _decisions_sound(clauses, n, rng, negprop):
            done += 1
