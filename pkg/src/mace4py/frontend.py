"""Tokenizer, operator-precedence term parser, term printer and input reader.

Precedences follow the usual convention for this input language: numbers
run from 1 to 998 and a *lower* number binds more tightly.  Atoms,
parenthesized terms and applications have precedence 0.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable

from . import options as opts
from .terms import LIST_SYMBOL, Compound, DomainElement, Term, Variable

WHITESPACE = " \t\n\r\v\f"
SYMBOL_CHARS = set("+-*/\\^<>=`~?@&|!#$:;")
PUNCTUATION = set("(),.[]")
NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
QUANTIFIERS = ("all", "exists")

MAX_PREC = 999
OP_TYPES = ("infix", "infix_left", "infix_right", "prefix", "postfix")
BINARY_TYPES = ("infix", "infix_left", "infix_right")
MAX_ARITY = 10

PREDECLARED = [
    (800, "infix", "->"),
    (800, "infix", "<-"),
    (800, "infix", "<->"),
    (790, "infix_right", "|"),
    (780, "infix_right", "&"),
    (300, "prefix", "~"),
    (700, "infix", "="),
    (700, "infix", "!="),
    (500, "infix", "+"),
    (400, "infix", "*"),
    (300, "prefix", "-"),
    (300, "postfix", "'"),
]


class ParseError(Exception):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)


# ---------------------------------------------------------------- tokens


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # "name", "num", "sym", "punct", "eof"
    text: str
    line: int
    col: int
    start: int
    end: int


def tokenize(source: str) -> list[Token]:
    """Split ``source`` into tokens, dropping whitespace and ``%`` comments."""
    tokens = []
    i = 0
    line, line_start = 1, 0
    length = len(source)
    while i < length:
        c = source[i]
        if c == "\n":
            line += 1
            line_start = i + 1
            i += 1
            continue
        if c in WHITESPACE:
            i += 1
            continue
        if c == "%":
            j = source.find("\n", i)
            i = length if j < 0 else j
            continue
        col = i - line_start + 1
        if c.isalpha() or c == "_":
            m = NAME_RE.match(source, i)
            kind, j = "name", m.end()
            text = source[i:j]
        elif c.isdigit():
            j = i
            while j < length and source[j].isdigit():
                j += 1
            kind, text = "num", source[i:j]
        elif c == '"':
            j = source.find('"', i + 1)
            nl = source.find("\n", i + 1)
            if j < 0 or (0 <= nl < j):
                raise ParseError("unterminated quoted name", line, col)
            kind, text = "name", source[i + 1 : j]
            j += 1
        elif c == "'":
            kind, text, j = "sym", "'", i + 1
        elif c in SYMBOL_CHARS:
            j = i
            while j < length and source[j] in SYMBOL_CHARS:
                j += 1
            kind, text = "sym", source[i:j]
        elif c in PUNCTUATION:
            kind, text, j = "punct", c, i + 1
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
        tokens.append(Token(kind, text, line, col, i, j))
        i = j
    return tokens


# ---------------------------------------------------------------- op table


class OpTable:
    """Parsing/printing declarations for operator symbols.

    A symbol may carry one binary and one unary declaration at a time.
    """

    def __init__(self, predeclared: bool = True):
        self.binary: dict[str, tuple[int, str]] = {}
        self.unary: dict[str, tuple[int, str]] = {}
        if predeclared:
            for prec, typ, sym in PREDECLARED:
                self.declare(prec, typ, sym)

    def declare(self, prec: int, typ: str, symbol: str) -> bool:
        """Add a declaration; returns True if it replaced an existing one."""
        if typ not in OP_TYPES:
            raise ValueError(f"unknown operator type {typ!r}")
        if not 1 <= prec <= 998:
            raise ValueError(f"operator precedence {prec} outside 1..998")
        table = self.binary if typ in BINARY_TYPES else self.unary
        replaced = symbol in table
        table[symbol] = (prec, typ)
        return replaced

    def binary_op(self, symbol: str):
        return self.binary.get(symbol)

    def unary_op(self, symbol: str):
        return self.unary.get(symbol)

    def is_op(self, symbol: str) -> bool:
        return symbol in self.binary or symbol in self.unary

    def copy(self) -> "OpTable":
        t = OpTable(predeclared=False)
        t.binary = dict(self.binary)
        t.unary = dict(self.unary)
        return t

    def __eq__(self, other):
        return isinstance(other, OpTable) and self.binary == other.binary and self.unary == other.unary


# ---------------------------------------------------------------- parser

_TERMINATORS = {",", ")", "]", "."}


class _Parser:
    def __init__(self, tokens: list[Token], ops: OpTable, pos: int = 0):
        self.tokens = tokens
        self.ops = ops
        self.pos = pos

    def peek(self, k: int = 0) -> Token | None:
        j = self.pos + k
        return self.tokens[j] if j < len(self.tokens) else None

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            if last is None:
                raise ParseError(message + " at end of input")
            raise ParseError(message + " at end of input", last.line, last.col + len(last.text))
        raise ParseError(f"{message} near {tok.text!r}", tok.line, tok.col)

    def advance(self) -> Token:
        tok = self.peek()
        if tok is None:
            self.error("unexpected end of input")
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind not in ("punct", "sym") or tok.text != text:
            self.error(f"expected {text!r}")
        return self.advance()

    def _at_terminator(self, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok is None or (tok.kind == "punct" and tok.text in _TERMINATORS)

    def _application_follows(self, tok: Token) -> bool:
        nxt = self.peek(1)
        return nxt is not None and nxt.kind == "punct" and nxt.text == "(" and nxt.start == tok.end

    def parse_expr(self, maxp: int):
        left, lp = self.parse_primary(maxp)
        ops = self.ops
        while True:
            tok = self.peek()
            if tok is None or tok.kind not in ("name", "sym"):
                break
            sym = tok.text
            b = ops.binary_op(sym)
            if b is not None and not self._at_terminator(1):
                p, typ = b
                left_ok = lp <= p if typ == "infix_left" else lp < p
                if p > maxp or not left_ok:
                    break
                self.advance()
                right, _ = self.parse_expr(p if typ == "infix_right" else p - 1)
                left, lp = Compound(sym, (left, right)), p
                continue
            u = ops.unary_op(sym)
            if u is not None and u[1] == "postfix":
                p = u[0]
                if p > maxp or lp > p:
                    break
                self.advance()
                left, lp = Compound(sym, (left,)), p
                continue
            break
        return left, lp

    def parse_primary(self, maxp: int):
        tok = self.peek()
        if tok is None:
            self.error("unexpected end of input")
        if tok.kind == "num":
            self.advance()
            return DomainElement(int(tok.text)), 0
        if tok.kind == "punct":
            if tok.text == "(":
                self.advance()
                t, _ = self.parse_expr(MAX_PREC)
                self._close(")", tok)
                return t, 0
            if tok.text == "[":
                self.advance()
                items = []
                if not (self.peek() and self.peek().text == "]"):
                    items = self._arguments()
                self._close("]", tok)
                return Compound(LIST_SYMBOL, tuple(items)), 0
            self.error("unexpected punctuation")
        sym = tok.text
        if self._application_follows(tok):
            self.advance()
            self.advance()
            args = self._arguments()
            self._close(")", tok)
            if len(args) > MAX_ARITY:
                self.error(f"symbol {sym!r} has arity {len(args)} > {MAX_ARITY}", tok)
            return Compound(sym, tuple(args)), 0
        if tok.kind == "name" and sym in QUANTIFIERS:
            var = self.peek(1)
            if var is not None and var.kind == "name" and not self.ops.is_op(var.text):
                self.advance()
                self.advance()
                body, _ = self.parse_expr(maxp)
                return Compound(sym, (Compound(var.text, ()), body)), 0
        u = self.ops.unary_op(sym)
        if u is not None and u[1] == "prefix" and not self._at_terminator(1):
            p = u[0]
            if p > maxp:
                self.error(f"prefix operator {sym!r} (precedence {p}) not allowed here", tok)
            self.advance()
            arg, _ = self.parse_expr(p)
            return Compound(sym, (arg,)), p
        self.advance()
        return Compound(sym, ()), 0

    def _arguments(self) -> list:
        args = [self.parse_expr(MAX_PREC)[0]]
        while self.peek() is not None and self.peek().text == "," and self.peek().kind == "punct":
            self.advance()
            args.append(self.parse_expr(MAX_PREC)[0])
        return args

    def _close(self, text: str, opener: Token):
        tok = self.peek()
        if tok is None:
            raise ParseError(f"unbalanced {opener.text!r}: missing {text!r}", opener.line, opener.col)
        if tok.kind != "punct" or tok.text != text:
            if tok.kind in ("name", "sym") and self.ops.is_op(tok.text):
                self.error("operator precedence conflict")
            self.error(f"expected {text!r}")
        self.advance()

    def parse_sentence(self) -> Term:
        """A term followed by a period."""
        t, _ = self.parse_expr(MAX_PREC)
        tok = self.peek()
        if tok is None or tok.text != "." or tok.kind != "punct":
            if tok is not None and tok.kind in ("name", "sym") and self.ops.is_op(tok.text):
                self.error("operator precedence conflict (add parentheses)")
            self.error("expected '.'")
        self.advance()
        return t


def parse_term(source, ops: OpTable | None = None) -> Term:
    """Parse a single term from text or a token list (no trailing period)."""
    ops = ops if ops is not None else OpTable()
    tokens = tokenize(source) if isinstance(source, str) else list(source)
    if not tokens:
        raise ParseError("empty term")
    p = _Parser(tokens, ops)
    t, _ = p.parse_expr(MAX_PREC)
    if p.peek() is not None:
        tok = p.peek()
        if tok.kind in ("name", "sym") and ops.is_op(tok.text):
            p.error("operator precedence conflict (add parentheses)")
        p.error("unexpected token")
    return t


def check_arities(terms: Iterable[Term]) -> None:
    """Reject any symbol used with more than MAX_ARITY arguments."""
    for t in terms:
        stack = [t]
        while stack:
            s = stack.pop()
            if isinstance(s, Compound):
                if len(s.args) > MAX_ARITY and s.symbol != LIST_SYMBOL:
                    raise ParseError(f"symbol {s.symbol!r} has arity {len(s.args)} > {MAX_ARITY}")
                stack.extend(s.args)


# ---------------------------------------------------------------- printer


def _needs_quotes(name: str) -> bool:
    if NAME_RE.fullmatch(name):
        return False
    if name == "'" or (name and all(c in SYMBOL_CHARS for c in name)):
        return False
    return True


def _name_text(name: str) -> str:
    return f'"{name}"' if _needs_quotes(name) else name


def _char_class(c: str) -> int:
    if c.isalnum() or c == "_":
        return 1
    if c in SYMBOL_CHARS:
        return 2
    return 0


def _join(a: str, b: str) -> str:
    """Concatenate two printed fragments, inserting a space if they would fuse."""
    if a and b:
        ca, cb = _char_class(a[-1]), _char_class(b[0])
        if ca and ca == cb:
            return a + " " + b
    return a + b


def _render(t: Term, ops: OpTable):
    """Return (text, precedence, reach).

    ``reach`` is the largest operator precedence that a parser would pull
    into the trailing scope of the printed text; -1 when the text is closed.
    """
    if isinstance(t, DomainElement):
        return str(t.value), 0, -1
    if isinstance(t, Variable):
        return _name_text(t.name), 0, -1
    sym, args = t.symbol, t.args
    if sym == LIST_SYMBOL:
        return "[" + ", ".join(_render(a, ops)[0] for a in args) + "]", 0, -1
    if not args:
        if ops.is_op(sym):
            return "(" + sym + ")", 0, -1
        return _name_text(sym), 0, -1
    if (
        sym in QUANTIFIERS
        and len(args) == 2
        and isinstance(args[0], (Compound, Variable))
        and (isinstance(args[0], Variable) or not args[0].args)
        and NAME_RE.fullmatch(_var_name(args[0]))
        and not ops.is_op(_var_name(args[0]))
    ):
        body = _render(args[1], ops)[0]
        return f"({sym} {_var_name(args[0])} {body})", 0, -1
    if len(args) == 2 and ops.binary_op(sym):
        p, typ = ops.binary_op(sym)
        lmax = p if typ == "infix_left" else p - 1
        rmax = p if typ == "infix_right" else p - 1
        lt, lp, lr = _render(args[0], ops)
        if lp > lmax or lr >= p:
            lt = "(" + lt + ")"
        rt, rp, rr = _render(args[1], ops)
        if rp > rmax:
            rt, rr = "(" + rt + ")", -1
        own = p if typ == "infix_right" else p - 1
        return f"{lt} {_name_text(sym)} {rt}", p, max(own, rr)
    if len(args) == 1 and ops.unary_op(sym):
        q, typ = ops.unary_op(sym)
        at, ap, ar = _render(args[0], ops)
        if typ == "prefix":
            if ap > q:
                at, ar = "(" + at + ")", -1
            # "-(" would read back as an application of "-"
            text = f"{sym} {at}" if at.startswith("(") else _join(sym, at)
            return text, q, max(q, ar)
        if ap > q or ar >= q:
            at = "(" + at + ")"
        return _join(at, sym), q, -1
    inner = ", ".join(_render(a, ops)[0] for a in args)
    return f"{_name_text(sym)}({inner})", 0, -1


def _var_name(t) -> str:
    return t.name if isinstance(t, Variable) else t.symbol


def print_term(t: Term, ops: OpTable | None = None) -> str:
    return _render(t, ops if ops is not None else OpTable())[0]


# ---------------------------------------------------------------- input files


@dataclass(frozen=True)
class SetFlag:
    name: str

    def render(self) -> str:
        return f"set({self.name})."


@dataclass(frozen=True)
class ClearFlag:
    name: str

    def render(self) -> str:
        return f"clear({self.name})."


@dataclass(frozen=True)
class Assign:
    name: str
    value: int

    def render(self) -> str:
        return f"assign({self.name}, {self.value})."


@dataclass(frozen=True)
class OpDecl:
    precedence: int
    op_type: str
    symbols: tuple

    def render(self) -> str:
        syms = self.symbols[0] if len(self.symbols) == 1 else "[" + ", ".join(self.symbols) + "]"
        return f"op({self.precedence}, {self.op_type}, {syms})."


Command = SetFlag | ClearFlag | Assign | OpDecl


@dataclass
class TermList:
    name: str
    kind: str  # "clauses", "formulas" or "terms"
    terms: list = field(default_factory=list)


@dataclass
class InputProgram:
    commands: list = field(default_factory=list)
    lists: list = field(default_factory=list)
    ops: OpTable = field(default_factory=OpTable)
    warnings: list = field(default_factory=list)

    def echo(self) -> str:
        """Re-print the program in input syntax.

        Ops declared in the file are emitted before any list so the echo
        parses to the same terms.
        """
        out = [c.render() for c in self.commands]
        for lst in self.lists:
            out.append(f"{lst.kind}({lst.name}).")
            out.extend(print_term(t, self.ops) + "." for t in lst.terms)
            out.append("end_of_list.")
        return "\n".join(out) + ("\n" if out else "")


def _int_value(t: Term) -> int | None:
    if isinstance(t, DomainElement):
        return t.value
    if isinstance(t, Compound) and t.symbol == "-" and len(t.args) == 1 and isinstance(t.args[0], DomainElement):
        return -t.args[0].value
    return None


def _symbol_of(t: Term) -> str | None:
    if isinstance(t, Compound) and not t.args:
        return t.symbol
    return None


LIST_KINDS = ("clauses", "formulas")
FOREIGN_LIST_KINDS = ("clauses", "formulas", "terms", "list", "weights")


def parse_input(
    source: str,
    compatible: bool = False,
    list_kinds: tuple = LIST_KINDS,
    ops: OpTable | None = None,
    validate_options: bool = True,
) -> InputProgram:
    """Read commands and term lists.

    Unrecognized commands and lists are fatal unless ``compatible`` is set,
    in which case they are skipped (and noted in ``warnings``).
    """
    ops = ops if ops is not None else OpTable()
    tokens = tokenize(source)
    prog = InputProgram(ops=ops)
    p = _Parser(tokens, ops)

    def unknown(what: str, tok: Token):
        if not compatible:
            raise ParseError(f"unrecognized {what}", tok.line, tok.col)
        prog.warnings.append(f"ignoring unrecognized {what}")

    while p.peek() is not None:
        start = p.peek()
        t = p.parse_sentence()
        if not isinstance(t, Compound):
            raise ParseError("expected a command or list header", start.line, start.col)
        head, args = t.symbol, t.args
        if head in ("set", "clear") and len(args) == 1 and _symbol_of(args[0]):
            name = opts.canonical_flag(_symbol_of(args[0]))
            if validate_options and not opts.is_flag(name):
                unknown(f"flag {name!r}", start)
                continue
            prog.commands.append(SetFlag(name) if head == "set" else ClearFlag(name))
        elif head == "assign" and len(args) == 2 and _symbol_of(args[0]):
            name = _symbol_of(args[0])
            value = _int_value(args[1])
            if validate_options and not opts.is_param(name):
                unknown(f"parameter {name!r}", start)
                continue
            if value is None:
                if compatible and not validate_options:
                    continue
                raise ParseError(f"assign({name}, ...) needs an integer value", start.line, start.col)
            prog.commands.append(Assign(name, value))
        elif head == "op" and len(args) == 3:
            prog.commands.append(_op_command(args, ops, prog, start))
        elif len(args) == 1 and _symbol_of(args[0]) is not None and (
            head in list_kinds or head in FOREIGN_LIST_KINDS
        ):
            items = _read_list(p, start)
            if head in list_kinds:
                prog.lists.append(TermList(_symbol_of(args[0]), head, items))
            else:
                unknown(f"list {head}({_symbol_of(args[0])})", start)
        else:
            unknown(f"command {print_term(t, ops)!r}", start)
    return prog


def _read_list(p: _Parser, header: Token) -> list:
    items = []
    while True:
        tok = p.peek()
        if tok is None:
            raise ParseError("list is missing end_of_list", header.line, header.col)
        if tok.kind == "name" and tok.text == "end_of_list":
            nxt = p.peek(1)
            if nxt is not None and nxt.kind == "punct" and nxt.text == ".":
                p.advance()
                p.advance()
                return items
        items.append(p.parse_sentence())


def _op_command(args, ops: OpTable, prog: InputProgram, tok: Token) -> OpDecl:
    prec = _int_value(args[0])
    typ = _symbol_of(args[1])
    if prec is None or typ is None:
        raise ParseError("malformed op command", tok.line, tok.col)
    if not 1 <= prec <= 998:
        raise ParseError(f"op precedence {prec} outside 1..998", tok.line, tok.col)
    if typ not in OP_TYPES:
        raise ParseError(f"unknown op type {typ!r}", tok.line, tok.col)
    target = args[2]
    if isinstance(target, Compound) and target.symbol == LIST_SYMBOL:
        symbols = [_symbol_of(a) for a in target.args]
    else:
        symbols = [_symbol_of(target)]
    if any(s is None for s in symbols):
        raise ParseError("op symbols must be names or symbols", tok.line, tok.col)
    predeclared = {s for _, _, s in PREDECLARED}
    for s in symbols:
        ops.declare(prec, typ, s)
        if s in predeclared:
            prog.warnings.append(f"op redeclares predeclared symbol {s!r}")
    return OpDecl(prec, typ, tuple(symbols))
