"""File formats: price panels, market weights, view records, and CSV/JSON output."""

import csv
import datetime as dt
import hashlib
import json
import math
import re
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .bayes_bl import ViewSet
from .exceptions import DataError

__all__ = [
    "FLOAT_FORMAT",
    "ReconciliationWarning",
    "PriceTable",
    "load_prices",
    "load_weights",
    "reconcile",
    "parse_views",
    "load_views",
    "write_csv",
    "read_csv",
    "write_json",
    "dataset_hash",
]

FLOAT_FORMAT = "%.12g"


class ReconciliationWarning(UserWarning):
    """Price columns outside the weights universe were dropped."""


@dataclass(frozen=True, eq=False)
class PriceTable:
    tickers: list
    dates: list
    prices: np.ndarray


def _read_rows(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc


def _number(cell, line, column):
    try:
        value = float(cell)
    except ValueError:
        raise DataError(f"line {line}, column {column!r}: cannot parse {cell!r} as a number") from None
    if not math.isfinite(value):
        raise DataError(f"line {line}, column {column!r}: value {cell!r} is not finite")
    return value


def load_prices(path):
    """Read ``date,TICKER1,TICKER2,...`` with ISO dates; rows come back sorted by date."""
    rows = _read_rows(path)
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0].lower() != "date":
        raise DataError(f"{path}: header must be 'date,<ticker>,...'")
    tickers = header[1:]
    if len(set(tickers)) != len(tickers):
        raise DataError(f"{path}: duplicate ticker columns")
    records = []
    seen = {}
    for line, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(f"line {line}: expected {len(header)} fields, found {len(row)}")
        try:
            date = dt.date.fromisoformat(row[0].strip())
        except ValueError:
            raise DataError(f"line {line}, column 'date': {row[0]!r} is not an ISO date") from None
        if date in seen:
            raise DataError(f"line {line}: duplicate date {date} (first on line {seen[date]})")
        seen[date] = line
        values = [_number(c.strip(), line, t) for c, t in zip(row[1:], tickers)]
        records.append((date, values))
    if not records:
        raise DataError(f"{path}: no data rows")
    records.sort(key=lambda r: r[0])
    dates = [r[0].isoformat() for r in records]
    return PriceTable(tickers=tickers, dates=dates, prices=np.array([r[1] for r in records]))


def load_weights(path):
    """Read ``ticker,weight`` rows. Returns ``(tickers, weights)``."""
    rows = _read_rows(path)
    if not rows or [h.strip().lower() for h in rows[0]] != ["ticker", "weight"]:
        raise DataError(f"{path}: header must be 'ticker,weight'")
    tickers, weights = [], []
    for line, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise DataError(f"line {line}: expected 2 fields, found {len(row)}")
        ticker = row[0].strip()
        if ticker in tickers:
            raise DataError(f"line {line}: duplicate ticker {ticker!r}")
        tickers.append(ticker)
        weights.append(_number(row[1].strip(), line, "weight"))
    if not tickers:
        raise DataError(f"{path}: no weights")
    return tickers, np.array(weights)


def reconcile(table, tickers):
    """Restrict a price table to ``tickers`` (in that order)."""
    missing = [t for t in tickers if t not in table.tickers]
    if missing:
        raise DataError(f"tickers in the weights file have no price column: {', '.join(missing)}")
    extra = [t for t in table.tickers if t not in tickers]
    if extra:
        warnings.warn(f"ignoring price columns outside the weights universe: {', '.join(extra)}", ReconciliationWarning, stacklevel=2)
    idx = [table.tickers.index(t) for t in tickers]
    return PriceTable(tickers=list(tickers), dates=list(table.dates), prices=table.prices[:, idx])


_TERM = re.compile(r"^\s*([^=\s]+)\s*=\s*(\S+)\s*$")


def parse_views(text, tickers, source="<views>"):
    """Parse view records of the form ``AAPL=1, MSFT=-1 | 0.025 | 0.0001``.

    Each non-blank line is one view: a coefficient map, the view value, and the
    view variance, separated by ``|``. ``#`` starts a comment. Tickers absent
    from a record get coefficient 0.
    """
    index = {t: j for j, t in enumerate(tickers)}
    rows, values, variances = [], [], []
    for line, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        where = f"{source}, line {line}"
        parts = [p.strip() for p in body.split("|")]
        if len(parts) != 3:
            raise DataError(f"{where}: expected 'coefficients | value | variance'")
        row = np.zeros(len(tickers))
        named = set()
        for term in filter(None, (t.strip() for t in parts[0].split(","))):
            m = _TERM.match(term)
            if not m:
                raise DataError(f"{where}: malformed term {term!r}, expected TICKER=coefficient")
            ticker, coef = m.groups()
            if ticker not in index:
                raise DataError(f"{where}: unknown ticker {ticker!r}")
            if ticker in named:
                raise DataError(f"{where}: ticker {ticker!r} appears twice in one view")
            named.add(ticker)
            row[index[ticker]] = _number(coef, line, ticker)
        if not np.any(row):
            raise DataError(f"{where}: view has no non-zero coefficient")
        value = _number(parts[1], line, "value")
        variance = _number(parts[2], line, "variance")
        if variance <= 0:
            raise DataError(f"{where}: view variance must be positive, got {variance}")
        rows.append(row)
        values.append(value)
        variances.append(variance)
    if not rows:
        raise DataError(f"{source}: no views")
    return ViewSet(np.array(rows), np.array(values), np.array(variances))


def load_views(path, tickers):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_views(text, tickers, source=str(path))


def write_csv(frame, path):
    """Write with 12 significant digits and Unix line endings."""
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def read_csv(path):
    return pd.read_csv(path, float_precision="round_trip")


def write_json(obj, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def dataset_hash(*paths):
    """SHA-256 over the bytes of the given input files, in order."""
    digest = hashlib.sha256()
    for path in paths:
        if path is None:
            continue
        digest.update(Path(path).read_bytes())
        digest.update(b"\0")
    return digest.hexdigest()
