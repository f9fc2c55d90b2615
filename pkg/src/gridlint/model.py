"""Workbook data model: sheets, cell contents, display metadata.

Workbooks are treated as immutable after load; "edits" (fix application,
defect injection) go through :meth:`Workbook.with_cell`, which returns a
new workbook sharing untouched sheets.  That keeps analysis passes free to
share a workbook across threads.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

from .addresses import CellAddress
from .formula_ast import AstNode
from .formula_parser import FormulaSyntaxError


class CellKind(Enum):
    EMPTY = "empty"
    NUMBER = "number"
    TEXT = "text"
    DATE = "date"
    FORMULA = "formula"


@dataclass(frozen=True)
class CellContent:
    """Value or formula stored in one cell; only the active kind's fields are set.

    ``date_src`` keeps the original date text so century inference stays
    auditable; ``parse_error`` marks a formula whose source failed to parse.
    """

    kind: CellKind
    number: float | None = None
    text: str | None = None
    date: dt.date | None = None
    date_src: str | None = None
    formula_src: str | None = None
    formula_ast: AstNode | None = None
    parse_error: FormulaSyntaxError | None = None


EMPTY_CONTENT = CellContent(CellKind.EMPTY)


def number_cell(value: float) -> CellContent:
    return CellContent(CellKind.NUMBER, number=float(value))


def text_cell(value: str) -> CellContent:
    return CellContent(CellKind.TEXT, text=value)


def date_cell(value: dt.date, src: str) -> CellContent:
    return CellContent(CellKind.DATE, date=value, date_src=src)


def formula_cell(src: str, parsed: AstNode | FormulaSyntaxError) -> CellContent:
    if isinstance(parsed, FormulaSyntaxError):
        return CellContent(CellKind.FORMULA, formula_src=src, parse_error=parsed)
    return CellContent(CellKind.FORMULA, formula_src=src, formula_ast=parsed)


@dataclass(frozen=True)
class CellMeta:
    """Per-cell display and provenance metadata."""

    display_decimals: int | None = None
    last_updated: dt.date | None = None

    def __post_init__(self) -> None:
        dd = self.display_decimals
        if dd is not None and not 0 <= dd <= 15:
            raise ValueError(f"display_decimals {dd} outside 0..15")


NO_META = CellMeta()


@dataclass(frozen=True)
class Cell:
    content: CellContent
    meta: CellMeta = NO_META


EMPTY_CELL = Cell(EMPTY_CONTENT)


@dataclass
class Sheet:
    """Sparse cell store; absent (col, row) keys are semantically empty."""

    name: str
    cells: dict[tuple[int, int], Cell] = field(default_factory=dict)

    def cell(self, col: int, row: int) -> Cell:
        return self.cells.get((col, row), EMPTY_CELL)

    def bounds(self) -> tuple[int, int]:
        """(max_col, max_row) over stored cells, or (0, 0) when empty."""
        if not self.cells:
            return (0, 0)
        return (max(c for c, _ in self.cells), max(r for _, r in self.cells))

    def sorted_keys(self) -> list[tuple[int, int]]:
        return sorted(self.cells, key=lambda k: (k[1], k[0]))


@dataclass
class Workbook:
    sheets: dict[str, Sheet] = field(default_factory=dict)

    def sheet(self, name: str) -> Sheet | None:
        return self.sheets.get(name)

    def cell(self, addr: CellAddress) -> Cell:
        sheet = self.sheets.get(addr.sheet)
        if sheet is None:
            return EMPTY_CELL
        return sheet.cell(addr.col, addr.row)

    def content(self, addr: CellAddress) -> CellContent:
        return self.cell(addr).content

    def meta(self, addr: CellAddress) -> CellMeta:
        return self.cell(addr).meta

    def iter_cells(self) -> Iterator[tuple[CellAddress, Cell]]:
        """Stored cells in sheet order, row-major within a sheet."""
        for sheet in self.sheets.values():
            for col, row in sheet.sorted_keys():
                yield CellAddress(col, row, sheet.name), sheet.cells[(col, row)]

    def formula_cells(self) -> Iterator[tuple[CellAddress, CellContent]]:
        for addr, cell in self.iter_cells():
            if cell.content.kind is CellKind.FORMULA:
                yield addr, cell.content

    def with_cell(self, addr: CellAddress, cell: Cell | None) -> Workbook:
        """Functional update; ``None`` deletes the cell.  Sheets are created on demand."""
        sheets = dict(self.sheets)
        old = sheets.get(addr.sheet)
        cells = dict(old.cells) if old is not None else {}
        key = (addr.col, addr.row)
        if cell is None:
            cells.pop(key, None)
        else:
            cells[key] = cell
        sheets[addr.sheet] = Sheet(addr.sheet, cells)
        return Workbook(sheets)
