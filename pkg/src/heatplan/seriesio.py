"""CSV ingestion and emission for the small time-series files the toolkit reads.

All readers raise InputError with the offending file, line, and column
named, so callers can surface parse problems without a traceback.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


class InputError(Exception):
    """A data or configuration file could not be read or failed validation."""

    def __init__(self, message: str, path=None, line: int | None = None,
                 column: str | None = None):
        self.path = str(path) if path is not None else None
        self.line = line
        self.column = column
        where = ""
        if self.path is not None:
            where = f" [{self.path}"
            if line is not None:
                where += f", line {line}"
            if column is not None:
                where += f", column {column!r}"
            where += "]"
        super().__init__(message + where)


def _open_rows(path: Path):
    try:
        fh = open(path, "r", newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot open file: {exc.strerror}", path) from exc
    return fh


def _read_two_columns(path, first: str, kind: str):
    path = Path(path)
    keys = []
    values = []
    with _open_rows(path) as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError("file is empty", path, line=1) from None
        header = [h.strip().lower() for h in header]
        if len(header) < 2 or header[0] != first:
            raise InputError(
                f"expected header '{first},<value>'", path, line=1, column=first
            )
        value_col = header[1]
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 2:
                raise InputError("row has fewer than 2 fields", path, line=lineno)
            try:
                key = np.datetime64(row[0].strip(), kind)
            except ValueError:
                raise InputError(
                    f"cannot parse {first} {row[0]!r}", path, line=lineno, column=first
                ) from None
            try:
                val = float(row[1])
            except ValueError:
                raise InputError(
                    f"cannot parse value {row[1]!r}", path, line=lineno, column=value_col
                ) from None
            keys.append(key)
            values.append(val)
    if not keys:
        raise InputError("no data rows", path, line=2)
    keys = np.array(keys)
    values = np.array(values, dtype=np.float64)
    if np.isnan(values).any():
        bad = int(np.nonzero(np.isnan(values))[0][0])
        raise InputError("NaN value", path, line=bad + 2, column=value_col)
    if not np.all(keys[1:] > keys[:-1]):
        bad = int(np.nonzero(~(keys[1:] > keys[:-1]))[0][0])
        raise InputError(
            f"{first}s not strictly increasing", path, line=bad + 3, column=first
        )
    return keys, values


def read_time_series(path):
    """Read a (timestamp, value) CSV; timestamps ISO-8601, strictly increasing."""
    return _read_two_columns(path, "timestamp", "s")


def read_daily_series(path):
    """Read a (date, value) CSV; one row per calendar day."""
    return _read_two_columns(path, "date", "D")


def read_shape_table(path):
    """Read a 48-slot intraday shape table: header 'slot,fraction', 48 rows summing to 1."""
    path = Path(path)
    fractions = []
    with _open_rows(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header][:2] != ["slot", "fraction"]:
            raise InputError("expected header 'slot,fraction'", path, line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                slot = int(row[0])
                frac = float(row[1])
            except (ValueError, IndexError):
                raise InputError("cannot parse shape row", path, line=lineno) from None
            if slot != len(fractions):
                raise InputError(
                    f"slots must run 0..47 in order, got {slot}", path, line=lineno,
                    column="slot",
                )
            if frac < 0:
                raise InputError("negative fraction", path, line=lineno, column="fraction")
            fractions.append(frac)
    if len(fractions) != 48:
        raise InputError(f"expected 48 slots, got {len(fractions)}", path)
    shape = np.array(fractions, dtype=np.float64)
    total = shape.sum()
    if abs(total - 1.0) > 1e-6:
        raise InputError(f"fractions sum to {total!r}, expected 1", path, column="fraction")
    return shape / total


def format_float(value: float) -> str:
    """Canonical shortest round-trip text for a float; keeps CSV bodies byte-stable."""
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


def write_csv(path, header: list[str], rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(
                format_float(v) if isinstance(v, float) else str(v) for v in row
            ) + "\n")


def write_time_series(path, timestamps, values, value_name: str) -> None:
    ts = np.asarray(timestamps).astype("datetime64[s]")
    write_csv(path, ["timestamp", value_name],
              zip((str(t) for t in ts), (float(v) for v in values)))


def write_daily_series(path, dates, values, value_name: str) -> None:
    ds = np.asarray(dates).astype("datetime64[D]")
    write_csv(path, ["date", value_name],
              zip((str(d) for d in ds), (float(v) for v in values)))
