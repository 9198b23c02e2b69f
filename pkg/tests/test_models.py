import itertools
import random
import textwrap

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mace4py.clausifier import term_to_clause
from mace4py.frontend import ParseError, parse_term
from mace4py.models import (
    EvaluationError,
    Interpretation,
    IsoStats,
    SymbolTable,
    evaluate_clause,
    find_isomorphism,
    isomorphic,
    parse_portable,
    permute,
    print_portable,
    print_standard,
)

from conftest import GROUP6, Z6, clauses_of, engine_models

def clause(text, prolog=False):
    return term_to_clause(parse_term(text), prolog)


def const(name, v):
    return SymbolTable(name, 0, "function", (v,))


# ---------------------------------------------------------------- printing


def test_group_layout():
    expected = textwrap.dedent(
        """\
        - Model 1 at 0.01 seconds -

          E : 0    A : 1    B : 2

          ' :    0 1 2 3 4 5
             ---------------
                 0 1 2 4 3 5

          * :  | 0 1 2 3 4 5
             --+------------
             0 | 0 1 2 3 4 5
             1 | 1 0 3 2 5 4
             2 | 2 4 0 5 1 3
             3 | 3 5 1 4 0 2
             4 | 4 2 5 0 3 1
             5 | 5 3 4 1 2 0
        """
    )
    assert print_standard(GROUP6, 1, 0.01) == expected


def test_single_constant_layout():
    assert print_standard(Interpretation(1, (const("c", 0),))) == "  c : 0\n"


def test_ternary_listing():
    interp = Interpretation(2, (SymbolTable("h", 3, "function", (0, 1, 1, 0, 1, 0, 0, 1)),))
    text = print_standard(interp)
    assert "h(1,1,1) = 1" in text and text.count("h(") == 8


def test_portable_constant():
    assert print_portable(Interpretation(2, (const("c", 0),))) == "interpretation(2, [function(c, [0])])."


def test_portable_stream_of_two():
    text = print_portable(GROUP6) + "\n" + print_portable(Z6) + "\n"
    assert parse_portable(text) == [GROUP6, Z6]


def test_portable_errors_report_the_item():
    with pytest.raises(ParseError, match="item 2"):
        parse_portable("interpretation(2, [function(c, [0]), function(d(_), [0, 5])]).")
    with pytest.raises(ParseError, match="interpretation 2"):
        parse_portable("interpretation(2, [function(c, [0])]). interpretation(2, [nonsense]).")


def test_relation_round_trip():
    interp = Interpretation(2, (SymbolTable("r", 2, "predicate", (1, 0, 0, 1)),))
    assert print_portable(interp) == "interpretation(2, [relation(r(_,_), [1, 0, 0, 1])])."
    assert parse_portable(print_portable(interp)) == [interp]


_NAMES = ["a", "f", "g", "p", "*", "+", "'", "v", "c1"]


@st.composite
def interpretations(draw):
    n = draw(st.integers(1, 4))
    names = draw(st.lists(st.sampled_from(_NAMES), min_size=1, max_size=4, unique=True))
    syms = []
    for name in names:
        arity = draw(st.integers(0, 2 if n > 2 else 3))
        kind = draw(st.sampled_from(["function", "predicate"]))
        limit = 2 if kind == "predicate" else n
        values = draw(st.lists(st.integers(0, limit - 1), min_size=n**arity, max_size=n**arity))
        syms.append(SymbolTable(name, arity, kind, tuple(values)))
    return Interpretation(n, tuple(syms))


@settings(max_examples=200, deadline=None)
@given(interpretations())
def test_portable_round_trip(interp):
    assert parse_portable(print_portable(interp)) == [interp]


# ---------------------------------------------------------------- evaluation


def test_group_is_not_commutative():
    assert not evaluate_clause(GROUP6, clause("x * y = y * x"))
    assert GROUP6.lookup("*", (1, 2)) == 3 and GROUP6.lookup("*", (2, 1)) == 4


def test_reflexivity_always_holds():
    assert evaluate_clause(GROUP6, clause("x = x"))


def test_group_axioms_hold():
    for text in ("(x * y) * z = x * (y * z)", "E * x = x", "x' * x = E", "A * B != B * A"):
        assert evaluate_clause(GROUP6, clause(text))


def test_uninterpreted_symbol():
    with pytest.raises(EvaluationError, match="g/1"):
        evaluate_clause(GROUP6, clause("g(x) = x"))


def test_predicate_evaluation():
    interp = Interpretation(2, (SymbolTable("p", 1, "predicate", (0, 1)), const("a", 1)))
    assert evaluate_clause(interp, clause("p(a)"))
    assert not evaluate_clause(interp, clause("p(x)"))
    assert evaluate_clause(interp, clause("p(x) | x != a"))


# ---------------------------------------------------------------- isomorphism


def test_identity():
    assert find_isomorphism(GROUP6, GROUP6) == list(range(6))


def test_swap_of_single_constant():
    a = Interpretation(2, (const("c", 0),))
    b = Interpretation(2, (const("c", 1),))
    assert find_isomorphism(a, b) == [1, 0]


def test_noncommutative_and_cyclic_groups_differ():
    assert not isomorphic(GROUP6, Z6)


def test_signature_mismatch():
    with pytest.raises(EvaluationError):
        isomorphic(GROUP6, Interpretation(6, (const("E", 0),)))


def test_permuted_copy_is_isomorphic():
    rng = random.Random(3)
    for _ in range(20):
        perm = list(range(6))
        rng.shuffle(perm)
        other = permute(GROUP6, perm)
        p = find_isomorphism(GROUP6, other)
        assert p is not None and permute(GROUP6, p) == other


def _lattice_dual(interp):
    join, meet = interp.table("v", 2), interp.table("^", 2)
    return Interpretation(
        interp.size,
        (SymbolTable("v", 2, "function", meet.values), SymbolTable("^", 2, "function", join.values)),
    )


def test_dual_lattices_need_not_be_isomorphic():
    lattice = clauses_of(
        """\
        op(400, infix, ^).  op(400, infix, v).
        clauses(t).
        x v y = y v x.   x ^ y = y ^ x.
        (x v y) v z = x v (y v z).   (x ^ y) ^ z = x ^ (y ^ z).
        x v (x ^ y) = x.   x ^ (x v y) = x.
        end_of_list.
        """
    )
    _, models = engine_models(lattice, 5, max_models=-1)
    lonely = [m for m in models if not isomorphic(m, _lattice_dual(m))]
    assert lonely, "some five-element lattice is not self-dual"
    m = lonely[0]
    assert evaluate_clause(_lattice_dual(m), lattice[0])


def _random_small(rng):
    vals = tuple(rng.randrange(3) for _ in range(9))
    return Interpretation(3, (SymbolTable("f", 2, "function", vals), const("a", rng.randrange(3))))


def test_isomorphism_is_an_equivalence():
    rng = random.Random(17)
    pool = [_random_small(rng) for _ in range(25)]
    pool += [permute(p, rng.sample(range(3), 3)) for p in pool[:10]]
    stats = IsoStats()
    rel = {(i, j): isomorphic(a, b, stats) for (i, a), (j, b) in itertools.product(enumerate(pool), repeat=2)}
    for i in range(len(pool)):
        assert rel[i, i]
    for (i, j), v in rel.items():
        assert rel[j, i] == v
    for i, j, k in itertools.product(range(len(pool)), repeat=3):
        if rel[i, j] and rel[j, k]:
            assert rel[i, k]
    assert stats.checks == len(pool) ** 2


def test_isomorphism_agrees_with_brute_force():
    rng = random.Random(23)
    for _ in range(60):
        a, b = _random_small(rng), _random_small(rng)
        brute = any(permute(a, list(p)) == b for p in itertools.permutations(range(3)))
        assert isomorphic(a, b) == brute
