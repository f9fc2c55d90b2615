"""Formula expression trees: printing, reference extraction, rebasing.

Nodes are immutable.  The ``grouped`` flag records that a node was
explicitly parenthesized in source text; it is excluded from structural
equality and :func:`serialize` re-derives parentheses from precedence, so
redundant source parentheses do not affect comparisons.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Union

from .addresses import MAX_COL, MAX_ROW, CellAddress, to_a1
from .dates import format_date

KNOWN_FUNCTIONS = frozenset({"SUM", "AVERAGE", "MIN", "MAX", "COUNT", "IF"})


@dataclass(frozen=True)
class NumberLit:
    value: float
    grouped: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class TextLit:
    value: str
    grouped: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class DateLit:
    value: dt.date
    grouped: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class CellRef:
    addr: CellAddress
    grouped: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class RangeRef:
    start: CellAddress
    end: CellAddress
    grouped: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class BrokenRef:
    """Marker for a reference pushed off the grid by rebasing."""

    grouped: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class FuncCall:
    name: str  # stored uppercase
    args: tuple[AstNode, ...]
    grouped: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class UnaryOp:
    op: str  # "-"
    operand: AstNode
    grouped: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class BinaryOp:
    op: str  # one of + - * / ^
    left: AstNode
    right: AstNode
    grouped: bool = field(default=False, compare=False)


AstNode = Union[
    NumberLit, TextLit, DateLit, CellRef, RangeRef, BrokenRef, FuncCall, UnaryOp, BinaryOp
]

_PREC_ADD = 1
_PREC_MUL = 2
_PREC_POW = 3
_PREC_UNARY = 4
_PREC_ATOM = 5

_BINARY_PREC = {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}


def format_number(value: float) -> str:
    """Shortest literal text that parses back to the same float."""
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _prec(node: AstNode) -> int:
    if isinstance(node, BinaryOp):
        return _BINARY_PREC[node.op]
    if isinstance(node, UnaryOp):
        return _PREC_UNARY
    return _PREC_ATOM


def _range_text(node: RangeRef) -> str:
    # The end corner inherits the start's sheet on reparse, so only print
    # the prefix once.
    end = node.end
    if end.sheet and end.sheet == node.start.sheet:
        end = replace(end, sheet="")
    return f"{to_a1(node.start)}:{to_a1(end)}"


def _emit(node: AstNode) -> str:
    if isinstance(node, NumberLit):
        return format_number(node.value)
    if isinstance(node, TextLit):
        return f'"{node.value}"'
    if isinstance(node, DateLit):
        return f'"{format_date(node.value)}"'
    if isinstance(node, CellRef):
        return to_a1(node.addr)
    if isinstance(node, RangeRef):
        return _range_text(node)
    if isinstance(node, BrokenRef):
        return "#REF!"
    if isinstance(node, FuncCall):
        return f"{node.name}({','.join(_emit(a) for a in node.args)})"
    if isinstance(node, UnaryOp):
        inner = _emit(node.operand)
        if _prec(node.operand) < _PREC_UNARY:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, BinaryOp):
        prec = _BINARY_PREC[node.op]
        left, right = _emit(node.left), _emit(node.right)
        lprec, rprec = _prec(node.left), _prec(node.right)
        # Equal-precedence children are parenthesized on the side the
        # operator does not associate to, preserving tree shape on reparse.
        if lprec < prec or (lprec == prec and node.op == "^"):
            left = f"({left})"
        if rprec < prec or (rprec == prec and node.op != "^"):
            right = f"({right})"
        return f"{left}{node.op}{right}"
    raise TypeError(f"not an AST node: {node!r}")


def serialize(ast: AstNode) -> str:
    """Render an AST as canonical "="-prefixed formula text.

    Parentheses are minimal: reparsing the output yields a structurally
    identical tree.
    """
    return "=" + _emit(ast)


def extract_refs(ast: AstNode) -> list[CellAddress | RangeRef]:
    """All references in left-to-right source order, duplicates preserved."""
    out: list[CellAddress | RangeRef] = []

    def walk(node: AstNode) -> None:
        if isinstance(node, CellRef):
            out.append(node.addr)
        elif isinstance(node, RangeRef):
            out.append(node)
        elif isinstance(node, FuncCall):
            for arg in node.args:
                walk(arg)
        elif isinstance(node, UnaryOp):
            walk(node.operand)
        elif isinstance(node, BinaryOp):
            walk(node.left)
            walk(node.right)

    walk(ast)
    return out


def walk_nodes(ast: AstNode) -> Iterator[AstNode]:
    """Pre-order traversal in source order."""
    yield ast
    if isinstance(ast, FuncCall):
        for arg in ast.args:
            yield from walk_nodes(arg)
    elif isinstance(ast, UnaryOp):
        yield from walk_nodes(ast.operand)
    elif isinstance(ast, BinaryOp):
        yield from walk_nodes(ast.left)
        yield from walk_nodes(ast.right)


def transform(ast: AstNode, fn: Callable[[AstNode], AstNode | None]) -> AstNode:
    """Rebuild a tree bottom-up via ``fn``.

    ``fn`` is offered each node pre-order; returning a node replaces the
    whole subtree, returning ``None`` recurses into children.
    """
    replacement = fn(ast)
    if replacement is not None:
        return replacement
    if isinstance(ast, FuncCall):
        return FuncCall(ast.name, tuple(transform(a, fn) for a in ast.args), grouped=ast.grouped)
    if isinstance(ast, UnaryOp):
        return UnaryOp(ast.op, transform(ast.operand, fn), grouped=ast.grouped)
    if isinstance(ast, BinaryOp):
        return BinaryOp(
            ast.op, transform(ast.left, fn), transform(ast.right, fn), grouped=ast.grouped
        )
    return ast


def rebase(ast: AstNode, src: CellAddress, dst: CellAddress) -> AstNode:
    """Shift relative reference axes by the src->dst offset.

    Models copying a formula from ``src`` to ``dst``: relative columns and
    rows shift, absolute axes stay put.  A shift that leaves the grid turns
    the reference into a :class:`BrokenRef` marker.
    """
    if src.sheet and dst.sheet and src.sheet != dst.sheet:
        raise ValueError("rebase endpoints must be on the same sheet")
    dcol = dst.col - src.col
    drow = dst.row - src.row

    def shift(addr: CellAddress) -> CellAddress | None:
        col = addr.col if addr.col_absolute else addr.col + dcol
        row = addr.row if addr.row_absolute else addr.row + drow
        if not (1 <= col <= MAX_COL and 1 <= row <= MAX_ROW):
            return None
        return replace(addr, col=col, row=row)

    def rewrite(node: AstNode) -> AstNode | None:
        if isinstance(node, CellRef):
            moved = shift(node.addr)
            return BrokenRef() if moved is None else CellRef(moved, grouped=node.grouped)
        if isinstance(node, RangeRef):
            start, end = shift(node.start), shift(node.end)
            if start is None or end is None:
                return BrokenRef()
            return RangeRef(start, end, grouped=node.grouped)
        return None

    return transform(ast, rewrite)
