"""Workbook file formats.

Two formats are supported:

* ``grid`` -- UTF-8 text, LF-separated rows, TAB-separated cells.  A cell
  starting with ``=`` is a formula, decimal text is a number, dd/mm/yy(yy)
  text is a date, a leading apostrophe forces text, anything else is text.
  The format carries no per-cell metadata and holds a single sheet.
* ``json`` -- ``{"sheets": [{"name": ..., "cells": {"A1": {...}}}]}`` where
  each cell object holds exactly one of ``"v"`` (value) or ``"f"`` (formula
  text), plus optional ``"fmt"`` (displayed decimal places) and
  ``"updated"`` (ISO date).  Save-then-load round-trips a workbook exactly.
"""

from __future__ import annotations

import datetime as dt
import json
import re

from .addresses import AddressError, CellAddress, col_to_letters, parse_a1, to_a1
from .dates import DEFAULT_PIVOT_YEAR, DateParseError, is_date_text, parse_date
from .formula_ast import format_number
from .formula_parser import parse_formula
from .model import (
    Cell,
    CellContent,
    CellKind,
    CellMeta,
    EMPTY_CONTENT,
    NO_META,
    Sheet,
    Workbook,
    date_cell,
    formula_cell,
    number_cell,
    text_cell,
)

DEFAULT_SHEET = "Sheet1"

_NUMBER_TEXT_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


class LoadError(ValueError):
    """Raised when workbook bytes cannot be understood."""


def classify_cell_text(text: str, pivot: int = DEFAULT_PIVOT_YEAR) -> CellContent:
    """Interpret raw cell text the way the grid format does.

    May raise :class:`~gridlint.dates.DateParseError` for date-shaped text
    with an impossible day/month.
    """
    if text == "":
        return EMPTY_CONTENT
    if text.startswith("="):
        return formula_cell(text, parse_formula(text))
    if text.startswith("'"):
        return text_cell(text[1:])
    if _NUMBER_TEXT_RE.match(text):
        return number_cell(float(text))
    if is_date_text(text):
        return date_cell(parse_date(text, pivot), text)
    return text_cell(text)


def _content_to_text(content: CellContent) -> str:
    """Cell text that classifies back to the same content."""
    if content.kind is CellKind.EMPTY:
        return ""
    if content.kind is CellKind.FORMULA:
        return content.formula_src or ""
    if content.kind is CellKind.NUMBER:
        return format_number(content.number)
    if content.kind is CellKind.DATE:
        return content.date_src or ""
    text = content.text or ""
    needs_escape = (
        text.startswith("'")
        or text.startswith("=")
        or _NUMBER_TEXT_RE.match(text)
        or is_date_text(text)
    )
    return f"'{text}" if needs_escape else text


def _decode(data: bytes | str) -> str:
    if isinstance(data, str):
        return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise LoadError(f"workbook is not UTF-8: {exc}") from None


def load_workbook(
    data: bytes | str, format_hint: str, pivot: int = DEFAULT_PIVOT_YEAR
) -> Workbook:
    """Parse workbook file content.  ``format_hint`` is ``"grid"`` or ``"json"``."""
    if format_hint == "grid":
        return _load_grid(_decode(data), pivot)
    if format_hint == "json":
        return _load_json(_decode(data), pivot)
    raise LoadError(f"unknown workbook format {format_hint!r}")


def _load_grid(text: str, pivot: int) -> Workbook:
    sheet = Sheet(DEFAULT_SHEET)
    for row_idx, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        for col_idx, raw in enumerate(line.split("\t"), start=1):
            try:
                content = classify_cell_text(raw, pivot)
            except DateParseError as exc:
                where = to_a1(CellAddress(col_idx, row_idx))
                raise LoadError(f"line {row_idx}, cell {where}: {exc}") from None
            if content.kind is not CellKind.EMPTY:
                sheet.cells[(col_idx, row_idx)] = Cell(content)
    return Workbook({DEFAULT_SHEET: sheet})


def _cell_from_json(key: str, obj: object, where: str, pivot: int) -> Cell:
    if not isinstance(obj, dict):
        raise LoadError(f"{where}: cell {key!r} must be an object")
    has_v = "v" in obj
    has_f = "f" in obj
    if has_v == has_f:
        raise LoadError(f"{where}: cell {key!r} needs exactly one of 'v' or 'f'")
    if has_f:
        src = obj["f"]
        if not isinstance(src, str) or not src.startswith("="):
            raise LoadError(f"{where}: cell {key!r}: 'f' must be text starting with '='")
        content = formula_cell(src, parse_formula(src))
    else:
        value = obj["v"]
        if isinstance(value, bool) or value is None:
            raise LoadError(f"{where}: cell {key!r}: 'v' must be a number or string")
        if isinstance(value, (int, float)):
            content = number_cell(float(value))
        elif isinstance(value, str):
            try:
                content = _scalar_from_text(value, pivot)
            except DateParseError as exc:
                raise LoadError(f"{where}: cell {key!r}: {exc}") from None
        else:
            raise LoadError(f"{where}: cell {key!r}: 'v' must be a number or string")

    display_decimals = None
    if "fmt" in obj:
        fmt = obj["fmt"]
        if not isinstance(fmt, int) or isinstance(fmt, bool) or not 0 <= fmt <= 15:
            raise LoadError(f"{where}: cell {key!r}: 'fmt' must be an integer in 0..15")
        display_decimals = fmt
    last_updated = None
    if "updated" in obj:
        try:
            last_updated = dt.date.fromisoformat(obj["updated"])
        except (TypeError, ValueError):
            raise LoadError(f"{where}: cell {key!r}: 'updated' must be YYYY-MM-DD") from None
    meta = CellMeta(display_decimals, last_updated) if (display_decimals is not None or last_updated) else NO_META
    return Cell(content, meta)


def _scalar_from_text(text: str, pivot: int) -> CellContent:
    # JSON "v" strings never hold formulas; otherwise grid rules apply.
    if text.startswith("'"):
        return text_cell(text[1:])
    if _NUMBER_TEXT_RE.match(text):
        return number_cell(float(text))
    if is_date_text(text):
        return date_cell(parse_date(text, pivot), text)
    return text_cell(text)


def _load_json(text: str, pivot: int) -> Workbook:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LoadError(f"malformed JSON: {exc}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("sheets"), list):
        raise LoadError("workbook JSON must be an object with a 'sheets' list")
    wb = Workbook()
    for idx, sheet_obj in enumerate(doc["sheets"]):
        if not isinstance(sheet_obj, dict):
            raise LoadError(f"sheet #{idx} must be an object")
        name = sheet_obj.get("name")
        if not isinstance(name, str) or not name:
            raise LoadError(f"sheet #{idx} needs a non-empty string name")
        if name in wb.sheets:
            raise LoadError(f"duplicate sheet name {name!r}")
        cells_obj = sheet_obj.get("cells", {})
        if not isinstance(cells_obj, dict):
            raise LoadError(f"sheet {name!r}: 'cells' must be an object")
        sheet = Sheet(name)
        for key, obj in cells_obj.items():
            try:
                addr = parse_a1(key)
            except AddressError as exc:
                raise LoadError(f"sheet {name!r}: invalid cell address key {key!r}: {exc}") from None
            if addr.sheet or addr.col_absolute or addr.row_absolute or to_a1(addr) != key:
                raise LoadError(f"sheet {name!r}: cell keys must be plain A1 text, got {key!r}")
            sheet.cells[(addr.col, addr.row)] = _cell_from_json(key, obj, f"sheet {name!r}", pivot)
        wb.sheets[name] = sheet
    return wb


def save_workbook(wb: Workbook, format: str) -> str:
    """Serialize a workbook.  JSON is lossless; grid drops metadata."""
    if format == "grid":
        return _save_grid(wb)
    if format == "json":
        return _save_json(wb)
    raise LoadError(f"unknown workbook format {format!r}")


def _save_grid(wb: Workbook) -> str:
    if len(wb.sheets) != 1:
        raise LoadError("grid format holds exactly one sheet")
    sheet = next(iter(wb.sheets.values()))
    max_col, max_row = sheet.bounds()
    lines = []
    for row in range(1, max_row + 1):
        texts = [_content_to_text(sheet.cell(col, row).content) for col in range(1, max_col + 1)]
        while texts and texts[-1] == "":
            texts.pop()
        for text in texts:
            if "\t" in text or "\n" in text:
                raise LoadError("grid format cannot hold tabs or newlines inside a cell")
        lines.append("\t".join(texts))
    return "\n".join(lines) + ("\n" if lines else "")


def _json_value(content: CellContent) -> object:
    if content.kind is CellKind.NUMBER:
        value = content.number
        if value == int(value) and abs(value) < 1e15:
            return int(value)
        return value
    return _content_to_text(content)


def _save_json(wb: Workbook) -> str:
    sheets = []
    for sheet in wb.sheets.values():
        cells: dict[str, dict] = {}
        for col, row in sheet.sorted_keys():
            cell = sheet.cells[(col, row)]
            key = f"{col_to_letters(col)}{row}"
            obj: dict = {}
            if cell.content.kind is CellKind.FORMULA:
                obj["f"] = cell.content.formula_src
            else:
                obj["v"] = _json_value(cell.content)
            if cell.meta.display_decimals is not None:
                obj["fmt"] = cell.meta.display_decimals
            if cell.meta.last_updated is not None:
                obj["updated"] = cell.meta.last_updated.isoformat()
            cells[key] = obj
        sheets.append({"name": sheet.name, "cells": cells})
    return json.dumps({"sheets": sheets}, indent=2, ensure_ascii=False) + "\n"
