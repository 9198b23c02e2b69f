import random
import textwrap

import pytest

from mace4py.clausifier import Clause, Literal, clauses_from_program
from mace4py.frontend import parse_input
from mace4py.grounder import build_state
from mace4py.models import Interpretation, SymbolTable
from mace4py.search import Limits, SelectionConfig, search
from mace4py.terms import Compound, DomainElement, Variable

GROUP = textwrap.dedent(
    """\
    assign(iterate_up_to, 10).
    clauses(theory).
    E * x = x.
    x' * x = E.
    (x * y) * z = x * (y * z).
    A * B != B * A.
    end_of_list.
    """
)

ORTHOLATTICE = textwrap.dedent(
    """\
    op(400, infix, ^).  op(400, infix, v).
    assign(iterate_up_to, 10).
    set(print_models_portable).
    assign(max_models, 100000).

    clauses(theory).
        x v y = y v x.              x ^ y = y ^ x.
        (x v y) v z = x v (y v z).  (x ^ y) ^ z = x ^ (y ^ z).
        x v (x ^ y) = x.            x ^ (x v y) = x.
        x v c(x) = 1.
        x ^ c(x) = 0.
        c(x ^ y) = c(x) v c(y).
        c(x v y) = c(x) ^ c(y).
        c(c(x)) = x.
    end_of_list.
    """
)

# the order-6 group from the motivating example
GROUP6 = Interpretation(
    6,
    (
        SymbolTable("E", 0, "function", (0,)),
        SymbolTable("A", 0, "function", (1,)),
        SymbolTable("B", 0, "function", (2,)),
        SymbolTable("'", 1, "function", (0, 1, 2, 4, 3, 5)),
        SymbolTable(
            "*",
            2,
            "function",
            (0, 1, 2, 3, 4, 5,
             1, 0, 3, 2, 5, 4,
             2, 4, 0, 5, 1, 3,
             3, 5, 1, 4, 0, 2,
             4, 2, 5, 0, 3, 1,
             5, 3, 4, 1, 2, 0),
        ),
    ),
)

# cyclic group of order 6 with the same signature
Z6 = Interpretation(
    6,
    (
        SymbolTable("E", 0, "function", (0,)),
        SymbolTable("A", 0, "function", (1,)),
        SymbolTable("B", 0, "function", (2,)),
        SymbolTable("'", 1, "function", tuple((-x) % 6 for x in range(6))),
        SymbolTable("*", 2, "function", tuple((x + y) % 6 for x in range(6) for y in range(6))),
    ),
)


def clauses_of(text, prolog_style=False):
    return clauses_from_program(parse_input(text), prolog_style)


def state_for(text, n, **flags):
    state, ok = build_state(clauses_of(text), n, flags)
    return state, ok


def engine_models(clauses, n, lnh=True, negprop=True, order=2, measure=4, max_models=-1):
    """(number of models, list of interpretations) from the search engine."""
    state, ok = build_state(clauses, n, {"negprop": negprop})
    if not ok:
        return 0, []
    found = []
    outcome = search(state, SelectionConfig(order, measure, lnh), Limits(max_models=max_models), found.append)
    return outcome.models, found


# ---------------------------------------------------------------- random theories

SYMBOLS = [
    ("f", 2, "function"),
    ("g", 1, "function"),
    ("a", 0, "function"),
    ("b", 0, "function"),
    ("p", 1, "predicate"),
    ("r", 2, "predicate"),
]
VARS = [Variable("x"), Variable("y")]


def _random_term(rng, funcs, variables, depth):
    choices = []
    if variables:
        choices.append("var")
    choices.append("elem")
    if funcs:
        choices.extend(["app"] * 2)
    kind = rng.choice(choices)
    if kind == "app" and depth > 0:
        name, arity, _ = rng.choice(funcs)
        return Compound(name, tuple(_random_term(rng, funcs, variables, depth - 1) for _ in range(arity)))
    if kind == "var" or (kind == "app" and variables):
        return rng.choice(variables)
    if kind == "app":
        consts = [s for s in funcs if s[1] == 0]
        if consts:
            return Compound(consts[0][0], ())
    return DomainElement(rng.randrange(2))


def random_theory(rng):
    """Up to 2 symbols of arity <= 2, up to 3 clauses, up to 2 variables each."""
    symbols = rng.sample(SYMBOLS, rng.randint(1, 2))
    funcs = [s for s in symbols if s[2] == "function"]
    preds = [s for s in symbols if s[2] == "predicate"]
    clauses = []
    for _ in range(rng.randint(1, 3)):
        variables = VARS[: rng.randint(0, 2)]
        lits = []
        for _ in range(rng.randint(1, 3)):
            sign = rng.random() < 0.6
            if preds and (not funcs or rng.random() < 0.5):
                name, arity, _ = rng.choice(preds)
                atom = Compound(name, tuple(_random_term(rng, funcs, variables, 1) for _ in range(arity)))
            else:
                atom = Compound("=", (_random_term(rng, funcs, variables, 2), _random_term(rng, funcs, variables, 2)))
            lits.append(Literal(sign, atom))
        clauses.append(Clause(tuple(lits)))
    return clauses


@pytest.fixture
def rng():
    return random.Random(20240521)
