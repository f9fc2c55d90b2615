"""Recursive-descent parser for "="-prefixed cell formulas.

Precedence, tightest first: parentheses, function calls, unary minus,
``^`` (right-associative), ``*`` ``/``, ``+`` ``-``.  Function names are
case-insensitive; unknown names parse and are rejected at evaluation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .addresses import MAX_COL, AddressError, letters_to_col, parse_a1
from .dates import DateParseError, is_date_text, parse_date
from .formula_ast import (
    AstNode,
    BinaryOp,
    BrokenRef,
    CellRef,
    DateLit,
    FuncCall,
    NumberLit,
    RangeRef,
    TextLit,
    UnaryOp,
)


@dataclass(frozen=True)
class FormulaSyntaxError:
    """Parse failure with the character offset of the offending input."""

    position: int
    message: str

    def __str__(self) -> str:
        return f"{self.message} (offset {self.position})"


class _ParseFailure(Exception):
    def __init__(self, position: int, message: str) -> None:
        super().__init__(message)
        self.position = position
        self.message = message


@dataclass(frozen=True)
class _Token:
    kind: str  # NUM STR REF FUNC BROKEN OP END
    pos: int
    text: str = ""
    value: object = None


_NUMBER_RE = re.compile(r"\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?")
_STRING_RE = re.compile(r'"([^"]*)"')
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*")
_REF_RE = re.compile(r"(?:[A-Za-z_][A-Za-z0-9_]*!)?\$?[A-Za-z]{1,3}\$?\d+")
_REF_BOUNDARY = frozenset("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_$.!")


def _next_nonspace(src: str, pos: int) -> str:
    while pos < len(src) and src[pos] == " ":
        pos += 1
    return src[pos] if pos < len(src) else ""


def _tokenize(src: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 1  # skip the leading "="
    n = len(src)
    while pos < n:
        ch = src[pos]
        if ch == " ":
            pos += 1
            continue
        if src.startswith("#REF!", pos):
            tokens.append(_Token("BROKEN", pos, "#REF!"))
            pos += 5
            continue
        if ch.isdigit() or ch == ".":
            m = _NUMBER_RE.match(src, pos)
            if m is None:
                raise _ParseFailure(pos, f"malformed number at {src[pos:pos + 8]!r}")
            tokens.append(_Token("NUM", pos, m.group(), float(m.group())))
            pos = m.end()
            continue
        if ch == '"':
            m = _STRING_RE.match(src, pos)
            if m is None:
                raise _ParseFailure(pos, "unterminated text literal")
            tokens.append(_Token("STR", pos, m.group(), m.group(1)))
            pos = m.end()
            continue
        if ch.isalpha() or ch in "_$":
            name_m = _NAME_RE.match(src, pos)
            if name_m is not None and _next_nonspace(src, name_m.end()) == "(":
                tokens.append(_Token("FUNC", pos, name_m.group(), name_m.group().upper()))
                pos = name_m.end()
                continue
            ref_m = _REF_RE.match(src, pos)
            if ref_m is not None and (
                ref_m.end() >= n or src[ref_m.end()] not in _REF_BOUNDARY
            ):
                try:
                    addr = parse_a1(ref_m.group())
                except AddressError as exc:
                    raise _ParseFailure(pos, str(exc)) from None
                tokens.append(_Token("REF", pos, ref_m.group(), addr))
                pos = ref_m.end()
                continue
            bad = name_m.group() if name_m else src[pos]
            raise _ParseFailure(pos, f"unrecognized name {bad!r}")
        if ch in "+-*/^(),:":
            tokens.append(_Token("OP", pos, ch))
            pos += 1
            continue
        raise _ParseFailure(pos, f"unrecognized character {ch!r}")
    tokens.append(_Token("END", n))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]) -> None:
        self.tokens = tokens
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def take(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> None:
        tok = self.peek()
        if tok.kind != "OP" or tok.text != op:
            raise _ParseFailure(tok.pos, f"expected {op!r}")
        self.take()

    def at_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok.kind == "OP" and tok.text in ops

    def parse(self) -> AstNode:
        node = self.addsub()
        tok = self.peek()
        if tok.kind != "END":
            raise _ParseFailure(tok.pos, f"unexpected input {tok.text!r}")
        return node

    def addsub(self) -> AstNode:
        node = self.muldiv()
        while self.at_op("+", "-"):
            op = self.take().text
            node = BinaryOp(op, node, self.muldiv())
        return node

    def muldiv(self) -> AstNode:
        node = self.power()
        while self.at_op("*", "/"):
            op = self.take().text
            node = BinaryOp(op, node, self.power())
        return node

    def power(self) -> AstNode:
        node = self.unary()
        if self.at_op("^"):
            self.take()
            node = BinaryOp("^", node, self.power())
        return node

    def unary(self) -> AstNode:
        if self.at_op("-"):
            self.take()
            return UnaryOp("-", self.unary())
        return self.atom()

    def atom(self) -> AstNode:
        tok = self.peek()
        if tok.kind == "NUM":
            self.take()
            return NumberLit(tok.value)
        if tok.kind == "STR":
            self.take()
            text = tok.value
            if is_date_text(text):
                try:
                    return DateLit(parse_date(text))
                except DateParseError:
                    pass
            return TextLit(text)
        if tok.kind == "BROKEN":
            self.take()
            return BrokenRef()
        if tok.kind == "REF":
            self.take()
            start = tok.value
            if self.at_op(":"):
                self.take()
                end_tok = self.peek()
                if end_tok.kind != "REF":
                    raise _ParseFailure(end_tok.pos, "expected a cell reference after ':'")
                self.take()
                end = end_tok.value
                if not end.sheet and start.sheet:
                    end = replace(end, sheet=start.sheet)
                if end.sheet != start.sheet:
                    raise _ParseFailure(end_tok.pos, "range endpoints on different sheets")
                return RangeRef(start, end)
            return CellRef(start)
        if tok.kind == "FUNC":
            self.take()
            self.expect_op("(")
            args: list[AstNode] = []
            if self.at_op(")"):
                self.take()
                return FuncCall(tok.value, ())
            while True:
                args.append(self.addsub())
                if self.at_op(","):
                    self.take()
                    continue
                closing = self.peek()
                if closing.kind == "OP" and closing.text == ")":
                    self.take()
                    return FuncCall(tok.value, tuple(args))
                raise _ParseFailure(closing.pos, "expected ',' or ')' in argument list")
        if tok.kind == "OP" and tok.text == "(":
            self.take()
            node = self.addsub()
            closing = self.peek()
            if closing.kind != "OP" or closing.text != ")":
                raise _ParseFailure(closing.pos, "expected ')'")
            self.take()
            return replace(node, grouped=True)
        raise _ParseFailure(tok.pos, "expected a value, reference, or '('")


def parse_formula(src: str) -> AstNode | FormulaSyntaxError:
    """Parse formula text into an AST, or report where it fails.

    ``src`` must be non-empty and begin with ``=``.  The returned
    :class:`FormulaSyntaxError` carries a character offset into ``src``.
    """
    if not src or not src.startswith("="):
        return FormulaSyntaxError(0, "formula text must start with '='")
    try:
        tokens = _tokenize(src)
        return _Parser(tokens).parse()
    except _ParseFailure as failure:
        return FormulaSyntaxError(failure.position, failure.message)


__all__ = ["FormulaSyntaxError", "parse_formula"]
