import random

import pytest

from mace4py.clausifier import domain_elements
from mace4py.grounder import (
    GroundingError,
    build_state,
    build_tables,
    init_max_constrained,
    instance_counts,
    partial_model,
)
from mace4py.oracle import count_models

from conftest import ORTHOLATTICE, clauses_of, random_theory, state_for


def test_binary_table_size():
    state, _ = state_for("clauses(t). f(x,y) = f(y,x). end_of_list.", 6)
    (f,) = state.tables
    assert f.size == 36 and state.ncells == 36


def test_constant_has_one_cell():
    state, _ = state_for("clauses(t). E = E. end_of_list.", 5)
    assert state.tables[0].size == 1


def test_domain_element_out_of_range():
    with pytest.raises(GroundingError, match="7"):
        build_tables(clauses_of("clauses(t). f(7) = 0. end_of_list."), 4)


def test_cell_cap():
    with pytest.raises(GroundingError, match="cap"):
        build_tables(clauses_of("clauses(t). f(x,y,z) = x. end_of_list."), 10, cell_cap=999)


def test_mixed_use_of_a_symbol():
    with pytest.raises(GroundingError):
        build_tables(clauses_of("clauses(t). p(a) | f(p(a)) = a. end_of_list."), 2)


def test_three_variables_give_n_cubed_instances():
    state, _ = state_for("clauses(t). (x * y) * z = x * (y * z). end_of_list.", 4)
    assert instance_counts(state, 1) == [64]


def test_ground_clause_has_one_instance():
    state, _ = state_for("clauses(t). a = b. end_of_list.", 4)
    assert instance_counts(state, 1) == [1]


def test_reflexivity_instances_are_satisfied():
    state, ok = state_for("clauses(t). x = x. end_of_list.", 3)
    assert ok and len(state.clauses) == 3 and all(c.sat for c in state.clauses)


def test_instances_in_lexicographic_order():
    state, _ = state_for("clauses(t). f(y, x) = x. end_of_list.", 2)
    # first-occurrence order puts y before x
    assert [gc.subst for gc in state.clauses] == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_distinct_elements_simplify():
    state, ok = state_for("clauses(t). 0 = 1 | a = 0. end_of_list.", 2)
    assert ok and state.value[0] == 0  # the false literal dropped, a=0 became a unit
    state, ok = state_for("clauses(t). 0 != 1 | a = 0. end_of_list.", 2)
    assert ok and state.clauses[0].sat


def test_empty_instance_is_unsat():
    _, ok = state_for("clauses(t). x != x. end_of_list.", 2)
    assert not ok


@pytest.mark.parametrize(
    "src, expected",
    [
        (ORTHOLATTICE, 1),
        ("clauses(t). f(x,y) = f(y,x). end_of_list.", -1),
        ("clauses(t). a = 3. end_of_list.", 3),
    ],
)
def test_init_max_constrained(src, expected):
    assert init_max_constrained(clauses_of(src)) == expected


def test_idempotence_fills_the_diagonal():
    state, ok = state_for("clauses(t). f(x,x) = x. end_of_list.", 4)
    assert ok
    assert partial_model(state) == {f"f({i},{i})": i for i in range(4)}


def test_no_units_no_assignments():
    state, ok = state_for("clauses(t). f(x,y) = f(y,x). end_of_list.", 3)
    assert ok and partial_model(state) == {}


@pytest.mark.parametrize("n", [2, 3])
def test_contradictory_units(n):
    clauses = clauses_of("clauses(t). a = 0. a = 1. end_of_list.")
    _, ok = build_state(clauses, n)
    assert not ok
    assert count_models(clauses, n) == 0


def test_instance_counts_on_random_inputs():
    rng = random.Random(7)
    for _ in range(20):
        clauses = random_theory(rng)
        n = rng.randint(max(domain_elements(clauses), default=0) + 1, 4)
        state, _ = build_state(clauses, n)
        assert instance_counts(state, len(clauses)) == [n ** len(c.variables) for c in clauses]


def test_rebuilding_is_deterministic():
    a, _ = state_for(ORTHOLATTICE, 5)
    b, _ = state_for(ORTHOLATTICE, 5)
    assert a.fingerprint() == b.fingerprint()


def test_initial_assignments_are_consistent():
    state, ok = state_for(ORTHOLATTICE, 4)
    assert ok
    # every live instance still has an unresolved literal
    for gc in state.clauses:
        if not gc.sat:
            assert gc.nopen > 0 or any(a == s for a, s in zip(gc.args, gc.signs))
