"""dd/mm/yy(yy) calendar parsing with two-digit-year pivot handling."""

from __future__ import annotations

import datetime as dt
import re

DEFAULT_PIVOT_YEAR = 30

_DATE_RE = re.compile(r"^(\d{2})/(\d{2})/(\d{2}|\d{4})$")


class DateParseError(ValueError):
    """Raised for text that is not a valid dd/mm/yy or dd/mm/yyyy date."""


def is_date_text(text: str) -> bool:
    return _DATE_RE.match(text) is not None


def has_two_digit_year(text: str) -> bool:
    m = _DATE_RE.match(text)
    return m is not None and len(m.group(3)) == 2


def resolve_year(yy: int, pivot: int = DEFAULT_PIVOT_YEAR) -> int:
    """Two-digit years below the pivot land in the 2000s, the rest in the 1900s."""
    return 2000 + yy if yy < pivot else 1900 + yy


def parse_date(text: str, pivot: int = DEFAULT_PIVOT_YEAR) -> dt.date:
    """Parse a dd/mm/yy or dd/mm/yyyy date.

    Two-digit years are resolved against ``pivot``; four-digit years are
    taken verbatim.  Invalid day/month combinations raise
    :class:`DateParseError`.
    """
    m = _DATE_RE.match(text)
    if m is None:
        raise DateParseError(f"not a dd/mm/yy or dd/mm/yyyy date: {text!r}")
    day, month = int(m.group(1)), int(m.group(2))
    year_text = m.group(3)
    year = resolve_year(int(year_text), pivot) if len(year_text) == 2 else int(year_text)
    try:
        return dt.date(year, month, day)
    except ValueError as exc:
        raise DateParseError(f"invalid calendar date {text!r}: {exc}") from None


def days_in_year(year: int) -> int:
    """365 or 366.  Century years follow the 400 rule, so 2000 has 366 days."""
    leap = year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)
    return 366 if leap else 365


def format_date(d: dt.date) -> str:
    return d.strftime("%d/%m/%Y")
