"""Spearman rank correlation matrices and the linear distance ``d = 1 - c``."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .exceptions import DegenerateSeriesError, InsufficientDataError, ParseError, SchemaError
from .panel import ReturnPanel, _check_labels, _frozen, _text_stream


def _check_square(tickers, m, name):
    tickers = _check_labels(tickers)
    m = _frozen(m)
    if m.shape != (len(tickers), len(tickers)):
        raise SchemaError(f"{name} shape {m.shape} does not match {len(tickers)} tickers")
    if not np.all(np.isfinite(m)):
        raise SchemaError(f"{name} must be finite")
    if not np.array_equal(m, m.T):
        raise SchemaError(f"{name} must be symmetric")
    return tickers, m


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    tickers: tuple
    c: np.ndarray

    def __post_init__(self):
        tickers, c = _check_square(self.tickers, self.c, "correlation matrix")
        if np.any(np.diag(c) != 1.0) or np.any(np.abs(c) > 1.0):
            raise SchemaError("correlation matrix needs unit diagonal and entries in [-1, 1]")
        object.__setattr__(self, "tickers", tickers)
        object.__setattr__(self, "c", c)


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    tickers: tuple
    d: np.ndarray

    def __post_init__(self):
        tickers, d = _check_square(self.tickers, self.d, "distance matrix")
        if np.any(np.diag(d) != 0.0) or np.any(d < 0.0) or np.any(d > 2.0):
            raise SchemaError("distance matrix needs zero diagonal and entries in [0, 2]")
        object.__setattr__(self, "tickers", tickers)
        object.__setattr__(self, "d", d)

    @property
    def n(self):
        return len(self.tickers)


def rank_columns(X):
    """Average (mid-)ranks of every column, ties sharing their mean rank."""
    return rankdata(X, method="average", axis=0)


def spearman_matrix(r: ReturnPanel) -> CorrelationMatrix:
    """Spearman correlation of every pair of columns.

    Each column is replaced by its average ranks and the Pearson correlation
    of the ranks is taken. Results are symmetrised, clamped to [-1, 1] and
    given an exact unit diagonal.
    """
    X = r.returns
    if X.shape[0] < 3:
        raise InsufficientDataError(f"need at least 3 rows for rank correlation, got {X.shape[0]}")
    bad = r.degenerate_columns()
    if bad:
        raise DegenerateSeriesError(bad[0])
    ranks = rank_columns(X)
    ranks -= ranks.mean(axis=0)
    ranks /= np.sqrt((ranks * ranks).sum(axis=0))
    c = ranks.T @ ranks
    c = 0.5 * (c + c.T)
    np.clip(c, -1.0, 1.0, out=c)
    np.fill_diagonal(c, 1.0)
    return CorrelationMatrix(r.tickers, c)


def to_distance(c: CorrelationMatrix) -> DistanceMatrix:
    d = 1.0 - c.c
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(c.tickers, d)


def to_correlation(d: DistanceMatrix) -> CorrelationMatrix:
    c = 1.0 - d.d
    np.fill_diagonal(c, 1.0)
    return CorrelationMatrix(d.tickers, c)


def write_matrix(tickers, m, stream) -> None:
    """Square matrix as CSV with a ticker header row and column."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["", *tickers])
    for t, row in zip(tickers, m):
        w.writerow([t, *(format(float(v), ".17g") for v in row)])


def read_matrix(source):
    rows = list(csv.reader(_text_stream(source)))
    if not rows:
        raise ParseError("matrix CSV is empty")
    tickers = [h.strip() for h in rows[0][1:]]
    body = [r for r in rows[1:] if r]
    if [r[0].strip() for r in body] != tickers:
        raise ParseError("matrix CSV row labels must match the header")
    try:
        m = np.array([[float(v) for v in r[1:]] for r in body], dtype=float)
    except ValueError as exc:
        raise ParseError(f"malformed matrix entry: {exc}") from None
    return tuple(tickers), m.reshape(len(tickers), len(tickers))


def load_correlation(source) -> CorrelationMatrix:
    return CorrelationMatrix(*read_matrix(source))


def load_distance(source) -> DistanceMatrix:
    return DistanceMatrix(*read_matrix(source))
