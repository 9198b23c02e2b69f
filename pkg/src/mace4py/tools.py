"""Stream tools over interpretations and clauses.

get-interps, isofilter, modfilter, modtester and interpfilter read from
standard input and write to standard output, so they compose in shell
pipelines after ``mace4``.
"""

from __future__ import annotations

import argparse
import enum
import sys
import time

from .clausifier import ClausifyError, SkolemNames, clausify, term_to_clause
from .frontend import InputProgram, OpTable, ParseError, _op_command, _Parser, print_term, tokenize
from .models import EvaluationError, IsoStats, _invariants, evaluate_clause, interp_from_term, isomorphic, print_portable
from .terms import Compound

LIST_HEADERS = ("terms", "list", "clauses", "formulas", "interpretations")


class FilterKind(enum.Enum):
    TRUE_IN_ALL = "true_in_all"
    TRUE_IN_SOME = "true_in_some"
    FALSE_IN_ALL = "false_in_all"
    FALSE_IN_SOME = "false_in_some"


class ToolError(Exception):
    pass


# ---------------------------------------------------------------- readers


def read_sentences(text: str, ops: OpTable):
    """Yield (list_kind, term) for each sentence, honoring op declarations.

    List headers such as ``terms(interpretations).`` and ``end_of_list.``
    are consumed; ``list_kind`` is the kind of the enclosing list or None.
    """
    tokens = tokenize(text)
    p = _Parser(tokens, ops)
    scratch = InputProgram(ops=ops)
    kind = None
    while p.peek() is not None:
        start = p.peek()
        t = p.parse_sentence()
        if isinstance(t, Compound):
            if t.symbol == "op" and len(t.args) == 3:
                _op_command(t.args, ops, scratch, start)
                continue
            if t.symbol == "end_of_list" and not t.args:
                kind = None
                continue
            if t.symbol in LIST_HEADERS and len(t.args) == 1 and isinstance(t.args[0], Compound) and not t.args[0].args:
                kind = t.symbol
                continue
        yield kind, t


def read_interpretations(text: str, ops: OpTable | None = None) -> list:
    """Interpretations from a file, wrapped in a list or bare."""
    ops = ops if ops is not None else OpTable()
    out = []
    for _, t in read_sentences(text, ops):
        try:
            out.append(interp_from_term(t))
        except ParseError as e:
            raise ParseError(f"interpretation {len(out) + 1}: {e}") from None
    return out


def read_clauses(text: str, ops: OpTable, prolog_style: bool = False) -> list:
    """(source term, clauses) pairs; formulas lists are clausified."""
    out = []
    skolem = SkolemNames()
    for kind, t in read_sentences(text, ops):
        if kind == "formulas":
            out.append((t, clausify(t, prolog_style, skolem)))
        else:
            out.append((t, [term_to_clause(t, prolog_style)]))
    return out


# ---------------------------------------------------------------- get-interps


def get_interps(text: str) -> list:
    """The ``interpretation(...).`` items of ``text``, verbatim."""
    items = []
    i, end = 0, len(text)
    key = "interpretation("
    while i < end:
        c = text[i]
        if c == "%":
            nl = text.find("\n", i)
            i = end if nl < 0 else nl + 1
            continue
        if text.startswith(key, i) and (i == 0 or not (text[i - 1].isalnum() or text[i - 1] == "_")):
            j = i + len(key)
            depth = 1
            while j < end and depth:
                if text[j] in "([":
                    depth += 1
                elif text[j] in ")]":
                    depth -= 1
                j += 1
            k = j
            while k < end and text[k] in " \t":
                k += 1
            if depth == 0 and k < end and text[k] == ".":
                items.append(text[i : k + 1])
                i = k + 1
                continue
        i += 1
    return items


# ---------------------------------------------------------------- isofilter


def isofilter(interps: list, stats: IsoStats | None = None) -> list:
    """First representative of each isomorphism class, in input order."""
    stats = stats if stats is not None else IsoStats()
    kept: dict = {}
    out = []
    for interp in interps:
        key = (interp.size, interp.signature(), tuple(sorted(_invariants(interp))))
        bucket = kept.setdefault(key, [])
        if any(isomorphic(k, interp, stats) for k in bucket):
            continue
        bucket.append(interp)
        out.append(interp)
    return out


# ---------------------------------------------------------------- clause tests


def true_in(interps: list, clauses: list) -> list:
    """1-based indices of the interpretations where all ``clauses`` hold."""
    return [i for i, interp in enumerate(interps, 1) if all(evaluate_clause(interp, c) for c in clauses)]


def admits(kind: FilterKind, interps: list, clauses: list) -> bool:
    hits = len(true_in(interps, clauses))
    total = len(interps)
    if kind is FilterKind.TRUE_IN_ALL:
        return hits == total
    if kind is FilterKind.TRUE_IN_SOME:
        return hits > 0
    if kind is FilterKind.FALSE_IN_ALL:
        return hits == 0
    return hits < total


def modfilter(interps: list, kind: FilterKind, clause_items: list) -> list:
    return [item for item in clause_items if admits(kind, interps, item[1])]


def modtester(interps: list, clause_items: list) -> list:
    return [(item, true_in(interps, item[1])) for item in clause_items]


def interpfilter(clauses: list, test: str, interps: list) -> list:
    if test not in ("models", "nonmodels"):
        raise ToolError(f"unknown test {test!r} (expected models or nonmodels)")
    want = test == "models"
    return [i for i in interps if all(evaluate_clause(i, c) for c in clauses) == want]


# ---------------------------------------------------------------- command line


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        raise ToolError(message)


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def _interps_file(path: str):
    ops = OpTable()
    interps = read_interpretations(_read(path), ops)
    return interps, ops


def main(name: str, argv, stdin=None, out=None, err=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    p = _ArgParser(prog=name)
    if name in ("modfilter", "modtester"):
        p.add_argument("interps_file")
        if name == "modfilter":
            p.add_argument("kind", choices=[k.value for k in FilterKind])
        p.add_argument("--prolog-style", action="store_true", help="upper-case names are variables")
    elif name == "interpfilter":
        p.add_argument("clauses_file")
        p.add_argument("test", choices=["models", "nonmodels"])
        p.add_argument("--prolog-style", action="store_true", help="upper-case names are variables")
    elif name not in ("get-interps", "isofilter"):
        print(f"{name}: unknown tool", file=err)
        return 1
    try:
        args = p.parse_args(argv)
        if name == "get-interps":
            for item in get_interps(stdin.read()):
                print(item, file=out)
        elif name == "isofilter":
            start = time.process_time()
            interps = read_interpretations(stdin.read())
            stats = IsoStats()
            kept = isofilter(interps, stats)
            for interp in kept:
                print(print_portable(interp), file=out)
            print(
                f"isofilter: input={len(interps)}, kept={len(kept)}, checks={stats.checks}, "
                f"perms={stats.perms}, {time.process_time() - start:.2f} sec.",
                file=out,
            )
        elif name in ("modfilter", "modtester"):
            interps, ops = _interps_file(args.interps_file)
            items = read_clauses(stdin.read(), ops, args.prolog_style)
            if name == "modfilter":
                for t, _ in modfilter(interps, FilterKind(args.kind), items):
                    print(print_term(t, ops) + ".", file=out)
            else:
                for (t, _), hits in modtester(interps, items):
                    print(f"{print_term(t, ops)}. [{','.join(map(str, hits))}]", file=out)
        else:
            ops = OpTable()
            items = read_clauses(_read(args.clauses_file), ops, args.prolog_style)
            clauses = [c for _, cs in items for c in cs]
            for interp in interpfilter(clauses, args.test, read_interpretations(stdin.read(), ops)):
                print(print_portable(interp), file=out)
    except (ToolError, ParseError, ClausifyError, EvaluationError, OSError) as e:
        print(f"{name}: {e}", file=err)
        return 1
    return 0


def _entry(name):
    def run():
        sys.exit(main(name, sys.argv[1:]))

    return run


get_interps_entry = _entry("get-interps")
isofilter_entry = _entry("isofilter")
modfilter_entry = _entry("modfilter")
modtester_entry = _entry("modtester")
interpfilter_entry = _entry("interpfilter")
