"""A1-notation cell addressing and rectangular range expansion."""

from __future__ import annotations

import re
from dataclasses import dataclass

MAX_COL = 16_384  # column XFD
MAX_ROW = 1_048_576


class AddressError(ValueError):
    """Raised for text that does not denote a valid cell address."""


class RangeError(ValueError):
    """Raised for range endpoints that cannot form a rectangle."""


_A1_RE = re.compile(
    r"^(?:(?P<sheet>[A-Za-z_][A-Za-z0-9_]*)!)?"
    r"(?P<cabs>\$?)(?P<col>[A-Za-z]{1,3})(?P<rabs>\$?)(?P<row>[0-9]+)$"
)


def letters_to_col(letters: str) -> int:
    """Map column letters to a 1-based index: A=1, Z=26, AA=27."""
    col = 0
    for ch in letters.upper():
        col = col * 26 + (ord(ch) - ord("A") + 1)
    return col


def col_to_letters(col: int) -> str:
    """Inverse of :func:`letters_to_col`."""
    out = []
    while col > 0:
        col, rem = divmod(col - 1, 26)
        out.append(chr(ord("A") + rem))
    return "".join(reversed(out))


@dataclass(frozen=True)
class CellAddress:
    """A sheet-qualified cell coordinate with per-axis absolute flags.

    ``sheet`` may be empty, meaning "the sheet the enclosing formula lives
    on"; call :meth:`resolved` to obtain the canonical identity of the cell
    before using an address as a lookup key.
    """

    col: int
    row: int
    sheet: str = ""
    col_absolute: bool = False
    row_absolute: bool = False

    def __post_init__(self) -> None:
        if not 1 <= self.col <= MAX_COL:
            raise AddressError(f"column {self.col} outside 1..{MAX_COL}")
        if not 1 <= self.row <= MAX_ROW:
            raise AddressError(f"row {self.row} outside 1..{MAX_ROW}")

    def resolved(self, sheet: str) -> CellAddress:
        """Canonical cell identity: sheet filled in, absolute flags dropped."""
        return CellAddress(self.col, self.row, self.sheet or sheet)

    @property
    def key(self) -> tuple[str, int, int]:
        """Lexicographic (sheet, col, row) ordering key."""
        return (self.sheet, self.col, self.row)

    def __str__(self) -> str:
        return to_a1(self)


def parse_a1(text: str, sheet: str = "") -> CellAddress:
    """Parse ``[Sheet!][$]COL[$]ROW`` text into a :class:`CellAddress`.

    ``sheet`` supplies the sheet for unqualified references.  Rejects
    malformed text, columns beyond XFD, and rows outside the grid.
    """
    m = _A1_RE.match(text)
    if m is None:
        raise AddressError(f"malformed cell reference: {text!r}")
    col = letters_to_col(m["col"])
    if col > MAX_COL:
        raise AddressError(f"column {m['col']!r} is beyond the last grid column")
    row = int(m["row"])
    if row < 1 or row > MAX_ROW:
        raise AddressError(f"row {row} outside 1..{MAX_ROW}")
    return CellAddress(col, row, m["sheet"] or sheet, bool(m["cabs"]), bool(m["rabs"]))


def to_a1(addr: CellAddress) -> str:
    """Canonical A1 text for an address; inverse of :func:`parse_a1`."""
    prefix = f"{addr.sheet}!" if addr.sheet else ""
    cabs = "$" if addr.col_absolute else ""
    rabs = "$" if addr.row_absolute else ""
    return f"{prefix}{cabs}{col_to_letters(addr.col)}{rabs}{addr.row}"


def expand_range(start: CellAddress, end: CellAddress) -> list[CellAddress]:
    """Enumerate every address in the rectangle spanned by two corners.

    Corners are normalized (either order works) and the result is row-major.
    Endpoints must share a sheet.
    """
    if start.sheet != end.sheet:
        raise RangeError(f"range endpoints on different sheets: {start} vs {end}")
    lo_col, hi_col = sorted((start.col, end.col))
    lo_row, hi_row = sorted((start.row, end.row))
    return [
        CellAddress(col, row, start.sheet)
        for row in range(lo_row, hi_row + 1)
        for col in range(lo_col, hi_col + 1)
    ]
