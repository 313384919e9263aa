"""Small shared helpers: line splitting, month math, stable serialization."""

from __future__ import annotations

import json
from datetime import datetime, timezone


def split_lines(text: str) -> list[str]:
    """Split text into physical lines the way a line-based diff does.

    Only "\n" terminates a line; a trailing newline does not create an
    extra empty line. Carriage returns stay part of the line text.
    """
    if not text:
        return []
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    return lines


def month_of(timestamp: int) -> str:
    """UTC calendar month of a unix timestamp, as 'YYYY-MM'."""
    dt = datetime.fromtimestamp(timestamp, tz=timezone.utc)
    return f"{dt.year:04d}-{dt.month:02d}"


def month_range(first: str, last: str) -> list[str]:
    """Inclusive list of 'YYYY-MM' months from first to last."""
    fy, fm = (int(part) for part in first.split("-"))
    ly, lm = (int(part) for part in last.split("-"))
    months = []
    year, month = fy, fm
    while (year, month) <= (ly, lm):
        months.append(f"{year:04d}-{month:02d}")
        month += 1
        if month > 12:
            year, month = year + 1, 1
    return months


def parse_instant(text: str) -> int:
    """Parse an ISO date or datetime into epoch seconds, assuming UTC when naive."""
    value = datetime.fromisoformat(text)
    if value.tzinfo is None:
        value = value.replace(tzinfo=timezone.utc)
    return int(value.timestamp())


def stable_json(obj: object) -> str:
    """Serialize with a fixed key order so artifacts are byte-reproducible."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def csv_bool(flag: bool) -> str:
    return "true" if flag else "false"


def csv_float(value: float | None) -> str:
    """Render a float with shortest round-trip precision; empty when absent."""
    if value is None:
        return ""
    return repr(float(value))
