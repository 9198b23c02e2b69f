"""The ``mace4`` driver: options, domain-size iteration, limits, exit codes."""

from __future__ import annotations

import argparse
import sys
import time

from . import options as opts
from .clausifier import ClausifyError, clauses_from_program
from .frontend import Assign, ClearFlag, OpDecl, ParseError, SetFlag, check_arities, parse_input, print_term
from .grounder import GroundingError, MemoryLimitExceeded, build_state, instance_counts, partial_model
from .models import print_portable, print_standard
from .options import Options
from .search import Limits, SelectionConfig, search

EXIT_MAX_MODELS = 0
EXIT_FATAL = 1
EXIT_NO_MODELS = 2
EXIT_SOME_MODELS = 3
EXIT_TIME_SOME = 4
EXIT_TIME_NONE = 5

MEGABYTE = 1 << 20


class MemoryGuard:
    """Approximate memory accounting for the search structures.

    Usage is estimated from object counts rather than measured; the
    per-object sizes were calibrated with tracemalloc on CPython 3.10.
    A negative limit disables the guard.  The budget is global: the
    ground store of a finished domain size is replaced by the next one.
    """

    CLAUSE_BYTES = 300
    NODE_BYTES = 220
    CELL_BYTES = 400
    TRAIL_BYTES = 80

    def __init__(self, megs: int):
        self.limit = -1 if megs < 0 else megs * MEGABYTE
        self.usage: dict = {}
        self.peak = 0

    def charge(self, kind: str, k: int) -> None:
        self.usage[kind] = self.usage.get(kind, 0) + k

    def set_usage(self, kind: str, nbytes: int) -> None:
        self.usage[kind] = nbytes
        total = self.total()
        if total > self.peak:
            self.peak = total

    def total(self) -> int:
        return sum(self.usage.values())

    def estimate_ground(self, nclauses: int, nnodes: int) -> int:
        return nclauses * self.CLAUSE_BYTES + nnodes * self.NODE_BYTES

    def estimate_tables(self, ncells: int) -> int:
        return ncells * self.CELL_BYTES

    def estimate_trail(self, length: int) -> int:
        return length * self.TRAIL_BYTES

    def breached(self) -> bool:
        return self.limit >= 0 and self.total() > self.limit

    def describe(self) -> str:
        return f"memory limit of {self.limit // MEGABYTE} megabytes exceeded (estimated {self.total()} bytes)"


class UsageError(Exception):
    pass


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _arg_parser() -> argparse.ArgumentParser:
    p = _ArgParser(prog="mace4", add_help=False, allow_abbrev=False)
    for short, (kind, name) in opts.SHORT_OPTIONS.items():
        if kind == "param":
            p.add_argument(short, dest=name, type=int, metavar="N")
        else:
            p.add_argument(short, dest=name, action="store_true", default=None)
    p.add_argument("-c", dest="compatible", action="store_true")
    p.add_argument("-f", dest="input_file", metavar="FILE")
    p.add_argument("-s", "--set", dest="set_flags", action="append", default=[], metavar="FLAG")
    p.add_argument("-x", "--clear", dest="clear_flags", action="append", default=[], metavar="FLAG")
    return p


def parse_args(argv):
    """Split the command line into (namespace, warnings).

    Unknown options are fatal unless ``-c`` is present, in which case they
    are skipped.
    """
    p = _arg_parser()
    ns, rest = p.parse_known_args(argv)
    warnings = []
    if rest:
        if not ns.compatible:
            raise UsageError(f"unrecognized arguments: {' '.join(rest)}")
        warnings.append(f"ignoring unrecognized arguments: {' '.join(rest)}")
    return ns, warnings


def apply_overrides(options: Options, ns, warnings: list | None = None) -> Options:
    """Command-line values win over the ones from the input file."""
    out = options.copy()
    for short, (kind, name) in opts.SHORT_OPTIONS.items():
        value = getattr(ns, name, None)
        if value is None:
            continue
        if kind == "param":
            out.assign(name, value)
        else:
            out.set_flag(name, True)
    for names, on in ((ns.set_flags, True), (ns.clear_flags, False)):
        for name in names:
            if opts.is_flag(name):
                out.set_flag(name, on)
            elif ns.compatible:
                if warnings is not None:
                    warnings.append(f"ignoring unrecognized flag {name!r}")
            else:
                raise UsageError(f"unrecognized flag {name!r}")
    return out


def options_from_program(program) -> Options:
    options = Options()
    for c in program.commands:
        if isinstance(c, SetFlag):
            options.set_flag(c.name, True)
        elif isinstance(c, ClearFlag):
            options.set_flag(c.name, False)
        elif isinstance(c, Assign):
            options.assign(c.name, c.value)
    return options


def help_text() -> str:
    lines = [
        "usage: mace4 [options] < input > output",
        "       mace4 [options] -f input > output",
        "       mace4 {isofilter,get-interps,modfilter,modtester,interpfilter,oracle-count} ...",
        "",
        "Command-line options override the settings in the input file.",
        "",
    ]
    for short, (kind, name) in opts.SHORT_OPTIONS.items():
        if kind == "param":
            cmd = f"assign({name}, N)."
            lines.append(f"  {short} N        {cmd:<32}default {opts.PARAM_DEFAULTS[name]}")
        else:
            lines.append(f"  {short}          set({name}).")
    lines += [
        "  -s FLAG     set(FLAG).",
        "  -x FLAG     clear(FLAG).",
        "  -c          compatibility mode: ignore unrecognized commands, lists and options",
        "  -f FILE     read the input from FILE instead of standard input",
        "",
        "Exit codes: 0 max_models found; 1 fatal error or memory limit; 2 no models;",
        "3 some models, search complete; 4 some models, time limit; 5 time limit, no models.",
    ]
    return "\n".join(lines) + "\n"


def _echo(options: Options, program, clauses, out) -> None:
    print("% ===== input (after command-line overrides) =====", file=out)
    for line in options.as_commands():
        print(line, file=out)
    for c in program.commands:
        if isinstance(c, OpDecl):
            print(c.render(), file=out)
    for lst in program.lists:
        print(f"{lst.kind}({lst.name}).", file=out)
        for t in lst.terms:
            print(print_term(t, program.ops) + ".", file=out)
        print("end_of_list.", file=out)
    if any(lst.kind == "formulas" for lst in program.lists) or options.verbose:
        print("% ===== clauses used for the search =====", file=out)
        for c in clauses:
            print("% " + c.render(program.ops), file=out)
    print("% ===== end of input =====", file=out)


def _stats_line(n, state, seconds) -> str:
    s = state.stats
    return (
        f"% stats for size {n}: selections={s.selections}, assignments={s.assignments}, "
        f"propagations={s.propagations}, eliminations={s.eliminations}, negprop={s.negprop}, "
        f"backtracks={s.backtracks}, models={s.models}, {seconds:.2f} sec."
    )


def run(options: Options, program, out=None, err=None, clock=time.process_time) -> int:
    """Search every domain size in turn and return the exit code."""
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    start = clock()
    prolog = options.prolog_style_variables
    try:
        check_arities(t for lst in program.lists for t in lst.terms)
        clauses = clauses_from_program(program, prolog)
    except (ClausifyError, ParseError) as e:
        print(f"% Fatal error: {e}", file=out)
        print(f"mace4: fatal error: {e}", file=err)
        return EXIT_FATAL
    _echo(options, program, clauses, out)

    config = SelectionConfig(options.selection_order, options.selection_measure, options.lnh)
    memory = MemoryGuard(options.max_megs)
    deadline = None if options.max_seconds < 0 else start + options.max_seconds
    max_models = options.max_models
    first = options.domain_size
    last = max(first, options.iterate_up_to)
    total = 0
    printed = [0]

    def fatal(message):
        print(f"% Fatal error: {message}", file=out)
        print(f"mace4: fatal error: {message}", file=err)
        return EXIT_FATAL

    for n in range(first, last + 1):
        size_start = clock()
        print(f"% ----- domain size {n} -----", file=out)
        try:
            state, ok = build_state(clauses, n, options.flags, out, memory)
        except GroundingError as e:
            return fatal(e)
        except MemoryLimitExceeded as e:
            return fatal(e)
        if options.verbose:
            counts = instance_counts(state, len(clauses))
            print(f"% ground instances: {len(state.clauses)} {counts}", file=out)
            pm = partial_model(state)
            print("% initial partial model: " + (", ".join(f"{k}={v}" for k, v in pm.items()) or "(empty)"), file=out)
        if not ok:
            print(f"% size {n}: contradiction during initialization", file=out)
            continue

        def sink(interp):
            printed[0] += 1
            if options.print_models_portable:
                print(print_portable(interp), file=out)
            elif options.print_models:
                print(print_standard(interp, printed[0], clock() - start), file=out)
            out.flush()

        limits = Limits(max_models=max_models, deadline=deadline, models_before=total, clock=clock, memory=memory)
        outcome = search(state, config, limits, sink, out)
        total += outcome.models
        if options.verbose:
            print(_stats_line(n, state, clock() - size_start), file=out)
        if outcome.status == "model_limit":
            print(f"% Exiting with {total} model(s): max_models reached.", file=out)
            return EXIT_MAX_MODELS
        if outcome.status == "time_limit":
            print(f"% Exiting with {total} model(s): max_seconds reached.", file=out)
            return EXIT_TIME_SOME if total else EXIT_TIME_NONE
        if outcome.status == "mem_limit":
            return fatal(memory.describe())
    if total:
        print(f"% Exiting with {total} model(s): search complete.", file=out)
        return EXIT_SOME_MODELS
    print("% Exiting with no models: search complete.", file=out)
    return EXIT_NO_MODELS


def mace4_main(argv=None, stdin=None, out=None, err=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdin = stdin if stdin is not None else sys.stdin
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    if argv and argv[0] in ("help", "-h", "--help"):
        out.write(help_text())
        return 0
    try:
        ns, warnings = parse_args(argv)
        if ns.input_file:
            with open(ns.input_file) as fh:
                source = fh.read()
        else:
            source = stdin.read()
        program = parse_input(source, compatible=ns.compatible)
        options = apply_overrides(options_from_program(program), ns, warnings)
    except (UsageError, ParseError, KeyError, ValueError, OSError) as e:
        print(f"mace4: {e}", file=err)
        print(f"% Fatal error: {e}", file=out)
        return EXIT_FATAL
    for w in program.warnings + warnings:
        print(f"% Warning: {w}", file=out)
    return run(options, program, out, err)


SUBCOMMANDS = ("isofilter", "get-interps", "get_interps", "modfilter", "modtester", "interpfilter", "oracle-count")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] in SUBCOMMANDS:
        from . import oracle, tools

        name, rest = argv[0], argv[1:]
        if name == "oracle-count":
            return oracle.main(rest)
        return tools.main(name.replace("_", "-"), rest)
    return mace4_main(argv)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
