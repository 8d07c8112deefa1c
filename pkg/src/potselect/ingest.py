"""Reading observation files.

Two layouts are accepted: bare numbers one per line, or a delimited file whose
first line is a header. Blank lines, empty cells and non-finite values are
skipped and counted; anything else that fails to parse is an error.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from pathlib import Path

from .errors import EmptyDataError, FormatError
from .sample import Sample

logger = logging.getLogger(__name__)

_MISSING = {"", "na", "n/a", "null", "--"}


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _resolve_column(header: list[str], column: str | int | None) -> int:
    names = [h.strip() for h in header]
    if column is None:
        if len(names) == 1:
            return 0
        raise FormatError(f"file has columns {names}; choose one with a column name or index", line=1)
    if isinstance(column, int) or (isinstance(column, str) and column.strip().lstrip("-").isdigit()):
        idx = int(column)
        if not -len(names) <= idx < len(names):
            raise FormatError(f"column index {idx} out of range for {len(names)} columns", line=1)
        return idx % len(names)
    if column not in names:
        raise FormatError(f"no column named {column!r}; available: {names}", line=1)
    return names.index(column)


def parse_text(text: str, column: str | int | None = None, source: str = "<text>") -> Sample:
    lines = text.splitlines()
    first = next((i for i, ln in enumerate(lines) if ln.strip()), None)
    if first is None:
        raise EmptyDataError(f"{source}: no data")

    dialect = "excel"
    sample_text = "\n".join(lines[first : first + 20])
    try:
        dialect = csv.Sniffer().sniff(sample_text, delimiters=",;\t")
    except csv.Error:
        pass
    rows = csv.reader(io.StringIO("\n".join(lines[first:])), dialect)

    values: list[float] = []
    skipped = 0
    col_idx: int | None = None
    for offset, row in enumerate(rows):
        lineno = first + offset + 1
        if not row or all(not c.strip() for c in row):
            skipped += 1
            continue
        if col_idx is None:
            cells = [c.strip() for c in row]
            if all(_is_number(c) or c.lower() in _MISSING for c in cells):
                # headerless numeric file
                names = [str(i) for i in range(len(cells))]
                col_idx = _resolve_column(names, column if column is not None or len(cells) > 1 else 0)
            else:
                col_idx = _resolve_column(cells, column)
                continue
        if col_idx >= len(row):
            raise FormatError(f"row has {len(row)} fields, column {col_idx} requested", line=lineno)
        cell = row[col_idx].strip()
        if cell.lower() in _MISSING:
            skipped += 1
            continue
        try:
            v = float(cell)
        except ValueError:
            raise FormatError(f"cannot parse {cell!r} as a number", line=lineno) from None
        if not math.isfinite(v):
            skipped += 1
            continue
        values.append(v)

    if not values:
        raise EmptyDataError(f"{source}: no usable numeric values")
    if skipped:
        logger.info("%s: skipped %d blank or non-finite entries", source, skipped)
    return Sample(values, source=source, meta={"skipped": skipped, "column": column})


def ingest(path: str | Path, column: str | int | None = None) -> Sample:
    """Load a :class:`Sample` from ``path``.

    ``column`` selects the value column of a headed file by name or by
    0-based index; single-column files need no selector.

    Raises:
        FormatError: unparseable content (message carries the line number).
        EmptyDataError: the file holds no usable value.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8-sig")
    except UnicodeDecodeError as err:
        raise FormatError(f"{path}: not UTF-8 text ({err})") from None
    return parse_text(text, column=column, source=str(path))
