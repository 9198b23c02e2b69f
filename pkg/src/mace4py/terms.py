"""Term data structures shared by the parser, clausifier and evaluator."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union


@dataclass(frozen=True, slots=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class DomainElement:
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise ValueError(f"domain element must be a natural number, got {self.value}")

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, slots=True)
class Compound:
    symbol: str
    args: tuple = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def is_constant(self) -> bool:
        return not self.args


Term = Union[Variable, DomainElement, Compound]

# Pseudo-symbol used for bracketed lists, e.g. the value lists of portable models.
LIST_SYMBOL = "$list"


def const(name: str) -> Compound:
    return Compound(name, ())


def app(symbol: str, *args: Term) -> Compound:
    return Compound(symbol, tuple(args))


def subterms(t: Term) -> Iterator[Term]:
    """Pre-order traversal."""
    stack = [t]
    while stack:
        s = stack.pop()
        yield s
        if isinstance(s, Compound):
            stack.extend(reversed(s.args))


def variables_in_order(t: Term, acc: list | None = None) -> list:
    """Variables of ``t`` by first occurrence (left to right)."""
    if acc is None:
        acc = []
    for s in subterms(t):
        if isinstance(s, Variable) and s not in acc:
            acc.append(s)
    return acc


def term_depth(t: Term) -> int:
    if isinstance(t, Compound) and t.args:
        return 1 + max(term_depth(a) for a in t.args)
    return 0
