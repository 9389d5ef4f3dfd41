"""Price and return panels: ingestion, log-returns and null-model generators.

The wide CSV layout is::

    date,SPX,NDX,...
    2008-01-02,1447.16,2609.63,...

Rows are ISO-8601 dates in strictly ascending order. An empty cell marks a
missing price; any row holding one is dropped so that every pairwise
statistic is computed on a common sample.
"""
from __future__ import annotations

import csv
import datetime as dt
import io
import logging
from dataclasses import dataclass, field
from typing import IO, Optional, Sequence, Union

import numpy as np

from ._rng import make_rng
from .exceptions import BoundsError, DomainError, InsufficientDataError, ParseError, SchemaError

logger = logging.getLogger(__name__)

Source = Union[str, bytes, IO[str], IO[bytes]]

#: first calendar day used to label synthetic rows
SYNTHETIC_EPOCH = dt.date(2000, 1, 1)


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def _check_labels(tickers):
    tickers = tuple(str(t) for t in tickers)
    seen = set()
    for t in tickers:
        if t in seen:
            raise SchemaError(f"duplicate ticker {t!r}")
        seen.add(t)
    return tickers


def _check_dates(dates):
    dates = tuple(dates)
    for a, b in zip(dates, dates[1:]):
        if not a < b:
            raise SchemaError(f"dates must be strictly increasing ({a} then {b})")
    return dates


def _check_regions(regions, n):
    if regions is None:
        return None
    regions = tuple(None if r is None else str(r) for r in regions)
    if len(regions) != n:
        raise SchemaError(f"{len(regions)} region labels for {n} tickers")
    return regions


@dataclass(frozen=True, eq=False)
class PricePanel:
    """Aligned price matrix, rows are dates and columns are tickers."""

    tickers: tuple
    dates: tuple
    prices: np.ndarray
    regions: Optional[tuple] = None
    dropped_rows: int = 0

    def __post_init__(self):
        tickers = _check_labels(self.tickers)
        dates = _check_dates(self.dates)
        prices = _frozen(self.prices)
        if prices.ndim != 2 or prices.shape != (len(dates), len(tickers)):
            raise SchemaError(
                f"price matrix shape {prices.shape} does not match "
                f"{len(dates)} dates x {len(tickers)} tickers"
            )
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0):
            raise DomainError("prices must be finite and strictly positive")
        object.__setattr__(self, "tickers", tickers)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "regions", _check_regions(self.regions, len(tickers)))

    @property
    def shape(self):
        return self.prices.shape

    def with_regions(self, mapping):
        """Copy of the panel with region labels looked up by ticker."""
        return PricePanel(
            self.tickers, self.dates, self.prices,
            regions=tuple(mapping.get(t) for t in self.tickers),
            dropped_rows=self.dropped_rows,
        )


@dataclass(frozen=True, eq=False)
class ReturnPanel:
    """Aligned log-return matrix, rows are dates and columns are tickers."""

    tickers: tuple
    dates: tuple
    returns: np.ndarray
    regions: Optional[tuple] = None

    def __post_init__(self):
        tickers = _check_labels(self.tickers)
        dates = _check_dates(self.dates)
        returns = _frozen(self.returns)
        if returns.ndim != 2 or returns.shape != (len(dates), len(tickers)):
            raise SchemaError(
                f"return matrix shape {returns.shape} does not match "
                f"{len(dates)} dates x {len(tickers)} tickers"
            )
        if not np.all(np.isfinite(returns)):
            raise DomainError("returns must be finite")
        object.__setattr__(self, "tickers", tickers)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "returns", returns)
        object.__setattr__(self, "regions", _check_regions(self.regions, len(tickers)))

    @property
    def shape(self):
        return self.returns.shape

    @property
    def n_rows(self):
        return self.returns.shape[0]

    def degenerate_columns(self):
        """Tickers whose column holds fewer than two distinct values."""
        r = self.returns
        if r.shape[0] == 0:
            return list(self.tickers)
        flat = np.all(r == r[0], axis=0)
        return [t for t, f in zip(self.tickers, flat) if f]

    def with_returns(self, returns):
        return ReturnPanel(self.tickers, self.dates, returns, self.regions)

    @classmethod
    def from_array(cls, X, tickers=None, dates=None, regions=None):
        """Wrap a bare ``(n_samples, n_series)`` array."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise SchemaError(f"expected a 2-D array, got shape {X.shape}")
        if tickers is None:
            tickers = default_tickers(X.shape[1])
        if dates is None:
            dates = synthetic_dates(X.shape[0])
        return cls(tuple(tickers), tuple(dates), X, regions)


def default_tickers(n):
    return tuple(f"R{k:03d}" for k in range(1, n + 1))


def synthetic_dates(n):
    return tuple(SYNTHETIC_EPOCH + dt.timedelta(days=k) for k in range(n))


def _text_stream(source):
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8-sig"))
    if isinstance(source, str):
        return io.StringIO(source)
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8-sig", newline="")


def _read_wide_csv(source, what):
    reader = csv.reader(_text_stream(source))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(f"{what} CSV is empty") from None
    header = [h.strip().lstrip("﻿") for h in header]
    if len(header) < 2 or header[0].lower() != "date":
        raise ParseError(f"{what} CSV header must be 'date,<ticker>,...'")
    tickers = _check_labels(header[1:])
    for t in tickers:
        if not t:
            raise SchemaError("empty ticker label in header")

    dates, rows = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"row {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            date = dt.date.fromisoformat(row[0].strip())
        except ValueError:
            raise ParseError(f"row {lineno}: malformed date {row[0]!r}") from None
        values = []
        for cell in row[1:]:
            cell = cell.strip()
            if not cell:
                values.append(np.nan)
                continue
            try:
                values.append(float(cell))
            except ValueError:
                raise ParseError(f"row {lineno}: malformed number {cell!r}") from None
        dates.append((lineno, date))
        rows.append(values)

    for (la, a), (lb, b) in zip(dates, dates[1:]):
        if not a < b:
            raise ParseError(f"row {lb}: date {b} does not follow {a} in ascending order")
    values = np.array(rows, dtype=float).reshape(len(rows), len(tickers))
    return tickers, [d for _, d in dates], values


def load_panel(source: Source, regions=None) -> PricePanel:
    """Read a wide price CSV into a :class:`PricePanel`.

    Rows with any missing price are dropped; the count is logged and kept on
    ``PricePanel.dropped_rows``.
    """
    tickers, dates, prices = _read_wide_csv(source, "price")
    present = ~np.isnan(prices)
    if np.any(present & (prices <= 0)) or np.any(np.isinf(prices)):
        t, k = np.argwhere(present & ((prices <= 0) | np.isinf(prices)))[0]
        raise DomainError(
            f"non-positive price {prices[t, k]!r} for {tickers[k]!r} on {dates[t]}"
        )
    complete = present.all(axis=1)
    dropped = int((~complete).sum())
    if dropped:
        logger.warning("dropped %d of %d rows with missing prices", dropped, len(dates))
    panel = PricePanel(
        tickers,
        [d for d, ok in zip(dates, complete) if ok],
        prices[complete],
        dropped_rows=dropped,
    )
    if regions is not None:
        panel = panel.with_regions(regions)
    return panel


def load_metadata(source: Source) -> dict:
    """Read a ``ticker,region`` CSV into a mapping."""
    reader = csv.DictReader(_text_stream(source))
    if reader.fieldnames is None or not {"ticker", "region"} <= set(reader.fieldnames):
        raise ParseError("metadata CSV header must contain 'ticker,region'")
    out = {}
    for row in reader:
        if row["ticker"] in out:
            raise SchemaError(f"duplicate ticker {row['ticker']!r} in metadata")
        out[row["ticker"]] = row["region"]
    return out


def load_returns(source: Source) -> ReturnPanel:
    """Read a return panel written by :func:`write_returns`."""
    tickers, dates, values = _read_wide_csv(source, "return")
    if np.isnan(values).any():
        raise ParseError("return CSV must not contain empty cells")
    return ReturnPanel(tickers, dates, values)


def _write_wide(stream, tickers, dates, values):
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["date", *tickers])
    for d, row in zip(dates, values):
        w.writerow([d.isoformat(), *(format(float(v), ".17g") for v in row)])


def write_prices(panel: PricePanel, stream) -> None:
    _write_wide(stream, panel.tickers, panel.dates, panel.prices)


def write_returns(panel: ReturnPanel, stream) -> None:
    _write_wide(stream, panel.tickers, panel.dates, panel.returns)


def log_returns(p: PricePanel) -> ReturnPanel:
    """Log-returns ``ln P[t+1] - ln P[t]``, dated by the later row."""
    if len(p.dates) < 2:
        raise InsufficientDataError(f"need at least 2 dates for returns, got {len(p.dates)}")
    logp = np.log(p.prices)
    return ReturnPanel(p.tickers, p.dates[1:], np.diff(logp, axis=0), p.regions)


def shuffle_returns(r: ReturnPanel, seed: int) -> ReturnPanel:
    """Permute every column independently, destroying cross-correlation.

    Columns are shuffled left to right from one PCG64 stream; numpy's
    ``Generator.shuffle`` is a Fisher-Yates pass.
    """
    rng = make_rng(seed)
    out = np.array(r.returns, copy=True)
    for k in range(out.shape[1]):
        col = out[:, k].copy()
        rng.shuffle(col)
        out[:, k] = col
    return r.with_returns(out)


def synth_gaussian(n_series: int, length: int, mean: float = 0.0, std: float = 1.0,
                   seed: int = 0) -> ReturnPanel:
    """Panel of i.i.d. normal draws with tickers ``R001``, ``R002``, ..."""
    if std <= 0 or not np.isfinite(std):
        raise DomainError(f"std must be positive, got {std}")
    if n_series < 2:
        raise DomainError(f"need at least 2 series, got {n_series}")
    if length < 4:
        raise DomainError(f"need length >= 4, got {length}")
    X = make_rng(seed).normal(mean, std, size=(length, n_series))
    return ReturnPanel.from_array(X)


def prices_from_returns(r: ReturnPanel, start: float = 100.0) -> PricePanel:
    """Inverse of :func:`log_returns` with every series starting at ``start``."""
    n = r.n_rows
    first = r.dates[0] - dt.timedelta(days=1) if n else SYNTHETIC_EPOCH
    levels = np.vstack([np.zeros(r.shape[1]), np.cumsum(r.returns, axis=0)])
    return PricePanel(r.tickers, (first, *r.dates), start * np.exp(levels), r.regions)


def slice_window(r: ReturnPanel, start: int, length: int) -> ReturnPanel:
    if start < 0 or length < 1 or start + length > r.n_rows:
        raise BoundsError(
            f"window [{start}, {start + length}) outside panel of {r.n_rows} rows"
        )
    return ReturnPanel(
        r.tickers, r.dates[start:start + length], r.returns[start:start + length], r.regions
    )


def as_return_panel(X, tickers: Optional[Sequence[str]] = None) -> ReturnPanel:
    """Coerce a ReturnPanel, DataFrame or 2-D array into a ReturnPanel."""
    if isinstance(X, ReturnPanel):
        return X
    if hasattr(X, "columns") and hasattr(X, "to_numpy"):
        cols = [str(c) for c in X.columns] if tickers is None else tickers
        return ReturnPanel.from_array(X.to_numpy(dtype=float), tickers=cols)
    return ReturnPanel.from_array(X, tickers=tickers)
