"""Cell evaluation in dependency order, plus display-format rendering.

Semantics in brief: blanks behave as 0 in arithmetic; aggregates over
ranges use only numeric cells; cycle members evaluate to a cycle error and
errors flow through to every dependent, leftmost operand first.  Evaluation
is a pure function of the workbook, so repeated runs agree.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Context, Decimal, localcontext
from enum import Enum

from .addresses import CellAddress, expand_range
from .dates import days_in_year, format_date, parse_date
from .depgraph import DepGraph, build_graph, topo_order
from .formula_ast import (
    AstNode,
    BinaryOp,
    BrokenRef,
    CellRef,
    DateLit,
    FuncCall,
    KNOWN_FUNCTIONS,
    NumberLit,
    RangeRef,
    TextLit,
    UnaryOp,
    format_number,
)
from .model import CellKind, CellMeta, Workbook

__all__ = [
    "CellValue",
    "ErrorKind",
    "ValueKind",
    "display",
    "evaluate",
    "parse_date",
    "days_in_year",
]


class ValueKind(Enum):
    NUMBER = "number"
    TEXT = "text"
    DATE = "date"
    BLANK = "blank"
    ERROR = "error"


class ErrorKind(Enum):
    DIV0 = "div0"
    CYCLE = "cycle"
    UNKNOWN_FUNCTION = "unknown-function"
    BROKEN_REF = "broken-ref"
    TYPE = "type"


ERROR_DISPLAY = {
    ErrorKind.CYCLE: "#CYCLE!",
    ErrorKind.DIV0: "#DIV/0!",
    ErrorKind.BROKEN_REF: "#REF!",
    ErrorKind.UNKNOWN_FUNCTION: "#NAME?",
    ErrorKind.TYPE: "#VALUE!",
}


@dataclass(frozen=True)
class CellValue:
    kind: ValueKind
    number: float | None = None
    text: str | None = None
    date: dt.date | None = None
    error: ErrorKind | None = None

    @property
    def is_error(self) -> bool:
        return self.kind is ValueKind.ERROR

    @property
    def is_number(self) -> bool:
        return self.kind is ValueKind.NUMBER


BLANK = CellValue(ValueKind.BLANK)


def number_value(value: float) -> CellValue:
    return CellValue(ValueKind.NUMBER, number=value)


def text_value(value: str) -> CellValue:
    return CellValue(ValueKind.TEXT, text=value)


def date_value(value) -> CellValue:
    return CellValue(ValueKind.DATE, date=value)


def error_value(kind: ErrorKind) -> CellValue:
    return CellValue(ValueKind.ERROR, error=kind)


_TYPE_ERROR = error_value(ErrorKind.TYPE)


def _finite(value: float) -> CellValue:
    if not math.isfinite(value):
        return _TYPE_ERROR
    if value == 0:
        value = 0.0  # normalize -0.0
    return number_value(value)


class _Env:
    def __init__(self, wb: Workbook, values: dict[CellAddress, CellValue], sheet: str) -> None:
        self.wb = wb
        self.values = values
        self.sheet = sheet

    def lookup(self, addr: CellAddress) -> CellValue:
        return self.values.get(addr.resolved(self.sheet), BLANK)

    def range_cells(self, ref: RangeRef) -> list[CellAddress]:
        return expand_range(ref.start.resolved(self.sheet), ref.end.resolved(self.sheet))


def _as_number(value: CellValue) -> float | CellValue:
    """Numeric coercion; returns an error CellValue when impossible."""
    if value.kind is ValueKind.NUMBER:
        return value.number
    if value.kind is ValueKind.BLANK:
        return 0.0
    if value.is_error:
        return value
    return _TYPE_ERROR


def _eval_binary(node: BinaryOp, env: _Env) -> CellValue:
    left = _as_number(_eval(node.left, env))
    if isinstance(left, CellValue):
        return left
    right = _as_number(_eval(node.right, env))
    if isinstance(right, CellValue):
        return right
    op = node.op
    try:
        if op == "+":
            return _finite(left + right)
        if op == "-":
            return _finite(left - right)
        if op == "*":
            return _finite(left * right)
        if op == "/":
            if right == 0:
                return error_value(ErrorKind.DIV0)
            return _finite(left / right)
        result = left**right
        if isinstance(result, complex):
            return _TYPE_ERROR
        return _finite(result)
    except ZeroDivisionError:
        return error_value(ErrorKind.DIV0)
    except (OverflowError, ValueError):
        return _TYPE_ERROR


def _collect_numbers(args: tuple[AstNode, ...], env: _Env) -> list[float] | CellValue:
    """Numeric inputs for an aggregate.

    Range cells contribute only their numbers (text, dates, and blanks are
    skipped); scalar arguments must be numeric, with blanks skipped.  The
    first error encountered wins.
    """
    numbers: list[float] = []
    for arg in args:
        if isinstance(arg, RangeRef):
            for cell in env.range_cells(arg):
                value = env.lookup(cell)
                if value.is_error:
                    return value
                if value.is_number:
                    numbers.append(value.number)
            continue
        value = _eval(arg, env)
        if value.is_error:
            return value
        if value.is_number:
            numbers.append(value.number)
        elif value.kind is ValueKind.BLANK:
            continue
        else:
            return _TYPE_ERROR
    return numbers


def _eval_call(node: FuncCall, env: _Env) -> CellValue:
    name = node.name
    if name not in KNOWN_FUNCTIONS:
        return error_value(ErrorKind.UNKNOWN_FUNCTION)
    if name == "IF":
        if len(node.args) != 3:
            return _TYPE_ERROR
        cond, then, other = (_eval(arg, env) for arg in node.args)
        for value in (cond, then, other):
            if value.is_error:
                return value
        test = _as_number(cond)
        if isinstance(test, CellValue):
            return test
        return then if test != 0 else other
    if name == "SUM":
        numbers = _collect_numbers(node.args, env)
        if isinstance(numbers, CellValue):
            return numbers
        return _finite(math.fsum(numbers))
    if name == "AVERAGE":
        numbers = _collect_numbers(node.args, env)
        if isinstance(numbers, CellValue):
            return numbers
        if not numbers:
            return error_value(ErrorKind.DIV0)
        return _finite(math.fsum(numbers) / len(numbers))
    if name == "MIN" or name == "MAX":
        numbers = _collect_numbers(node.args, env)
        if isinstance(numbers, CellValue):
            return numbers
        if not numbers:
            return number_value(0.0)
        return _finite(min(numbers) if name == "MIN" else max(numbers))
    # COUNT: text and blanks count for nothing, errors still propagate.
    count = 0
    for arg in node.args:
        if isinstance(arg, RangeRef):
            for cell in env.range_cells(arg):
                value = env.lookup(cell)
                if value.is_error:
                    return value
                if value.is_number:
                    count += 1
            continue
        value = _eval(arg, env)
        if value.is_error:
            return value
        if value.is_number:
            count += 1
    return number_value(float(count))


def _eval(node: AstNode, env: _Env) -> CellValue:
    if isinstance(node, NumberLit):
        return number_value(node.value)
    if isinstance(node, TextLit):
        return text_value(node.value)
    if isinstance(node, DateLit):
        return date_value(node.value)
    if isinstance(node, BrokenRef):
        return error_value(ErrorKind.BROKEN_REF)
    if isinstance(node, CellRef):
        return env.lookup(node.addr)
    if isinstance(node, RangeRef):
        return _TYPE_ERROR
    if isinstance(node, UnaryOp):
        operand = _as_number(_eval(node.operand, env))
        if isinstance(operand, CellValue):
            return operand
        return number_value(-operand if operand != 0 else 0.0)
    if isinstance(node, BinaryOp):
        return _eval_binary(node, env)
    return _eval_call(node, env)


def evaluate(wb: Workbook, graph: DepGraph | None = None) -> dict[CellAddress, CellValue]:
    """Compute a value for every stored cell.

    Keys are canonical addresses.  Cells participating in a circular
    reference hold a cycle error; their dependents see it propagate.
    """
    if graph is None:
        graph = build_graph(wb)
    order, cycles = topo_order(graph)
    values: dict[CellAddress, CellValue] = {}

    formulas: dict[CellAddress, object] = {}
    for addr, cell in wb.iter_cells():
        content = cell.content
        node = addr.resolved(addr.sheet)
        if content.kind is CellKind.NUMBER:
            values[node] = number_value(content.number)
        elif content.kind is CellKind.TEXT:
            values[node] = text_value(content.text)
        elif content.kind is CellKind.DATE:
            values[node] = date_value(content.date)
        elif content.kind is CellKind.FORMULA:
            formulas[node] = content

    for cycle in cycles:
        for addr in cycle:
            values[addr] = error_value(ErrorKind.CYCLE)

    for addr in order:
        content = formulas.get(addr)
        if content is None or addr in values:
            continue
        if content.formula_ast is None:
            values[addr] = _TYPE_ERROR
            continue
        values[addr] = _eval(content.formula_ast, _Env(wb, values, addr.sheet))
    return values


def display(value: CellValue, meta: CellMeta) -> str:
    """Render a value the way the grid shows it.

    Numbers honor ``display_decimals`` using half-away-from-zero rounding
    (so 2.88 at one decimal place shows "2.9"); without a format they print
    at full precision.  Errors render as their marker text.
    """
    if value.kind is ValueKind.ERROR:
        return ERROR_DISPLAY[value.error]
    if value.kind is ValueKind.BLANK:
        return ""
    if value.kind is ValueKind.TEXT:
        return value.text
    if value.kind is ValueKind.DATE:
        return format_date(value.date)
    number = value.number
    decimals = meta.display_decimals
    if decimals is None:
        return format_number(number)
    with localcontext(Context(prec=500)):
        quantized = Decimal(repr(number)).quantize(
            Decimal(1).scaleb(-decimals), rounding=ROUND_HALF_UP
        )
    return str(quantized)
