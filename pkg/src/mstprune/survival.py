"""Connection survival over sliding-window MSTs.

A window sequence ``A(t_0), A(t_1), ...`` of MST adjacency matrices is
folded with a logical AND: a pair survives a span of windows only if it is
connected in every one of them. First order uses ``A`` itself; second order
uses ``A OR A @ A`` (graph distance at most two) with the diagonal cleared.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import BoundsError, DomainError, InsufficientDataError, ParseError, SchemaError
from .mstree import AdjacencyMatrix, adjacency, build_mst
from .nullmodel import parallel_map
from .panel import ReturnPanel, _check_labels, _frozen, _text_stream, slice_window
from .rankcorr import spearman_matrix, to_distance

ORDERS = ("first", "second")


@dataclass(frozen=True)
class WindowSpec:
    length: int = 60
    step: int = 1

    def __post_init__(self):
        if self.length < 4:
            raise DomainError(f"window length must be >= 4, got {self.length}")
        if self.step < 1:
            raise DomainError(f"window step must be >= 1, got {self.step}")

    def starts(self, rows):
        if rows < self.length:
            raise InsufficientDataError(
                f"panel has {rows} rows, fewer than the window length {self.length}"
            )
        return range(0, rows - self.length + 1, self.step)


@dataclass(frozen=True, eq=False)
class AdjacencySequence:
    """Stack of boolean MST adjacencies, shape ``(windows, n, n)``."""

    tickers: tuple
    windows: np.ndarray

    def __post_init__(self):
        tickers = _check_labels(self.tickers)
        w = _frozen(self.windows, dtype=bool)
        n = len(tickers)
        if w.ndim != 3 or w.shape[1:] != (n, n) or w.shape[0] == 0:
            raise SchemaError(f"expected a non-empty (windows, {n}, {n}) stack, got {w.shape}")
        if not np.array_equal(w, w.transpose(0, 2, 1)) or w[:, np.arange(n), np.arange(n)].any():
            raise SchemaError("every adjacency must be symmetric with an empty diagonal")
        object.__setattr__(self, "tickers", tickers)
        object.__setattr__(self, "windows", w)

    def __len__(self):
        return self.windows.shape[0]

    def __getitem__(self, k):
        return AdjacencyMatrix(self.tickers, self.windows[k])

    @classmethod
    def from_matrices(cls, matrices):
        matrices = list(matrices)
        if not matrices:
            raise SchemaError("adjacency sequence must be non-empty")
        return cls(matrices[0].tickers, np.stack([m.a for m in matrices]))


@dataclass(frozen=True, eq=False)
class SurvivalCurve:
    order: str
    counts: tuple

    def __post_init__(self):
        if self.order not in ORDERS:
            raise SchemaError(f"order must be one of {ORDERS}, got {self.order!r}")
        counts = tuple(int(c) for c in self.counts)
        if any(b > a for a, b in zip(counts, counts[1:])):
            raise SchemaError("survival counts must be non-increasing")
        object.__setattr__(self, "counts", counts)

    def __eq__(self, other):
        return isinstance(other, SurvivalCurve) and (self.order, self.counts) == (other.order, other.counts)


@dataclass(frozen=True, eq=False)
class SurvivabilityMap:
    """Per-pair fraction of start windows whose connection lasts ``horizon`` windows.

    ``NaN`` off the diagonal marks a pair with no recorded value.
    """

    tickers: tuple
    s: np.ndarray
    horizon: int
    order: str

    def __post_init__(self):
        tickers = _check_labels(self.tickers)
        s = np.array(self.s, dtype=float)
        n = len(tickers)
        if s.shape != (n, n):
            raise SchemaError(f"survivability shape {s.shape} does not match {n} tickers")
        np.fill_diagonal(s, 0.0)
        known = ~np.isnan(s)
        if np.any(s[known] < 0) or np.any(s[known] > 1):
            raise SchemaError("survivability values must lie in [0, 1]")
        if not np.array_equal(known, known.T) or not np.array_equal(s[known], s.T[known]):
            raise SchemaError("survivability must be symmetric")
        if self.order not in ORDERS:
            raise SchemaError(f"order must be one of {ORDERS}, got {self.order!r}")
        s.setflags(write=False)
        object.__setattr__(self, "tickers", tickers)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "horizon", int(self.horizon))

    def value(self, a, b):
        """Survivability of the pair labelled ``a``/``b``, or ``None`` if unknown."""
        index = {t: k for k, t in enumerate(self.tickers)}
        if a not in index or b not in index:
            return None
        v = self.s[index[a], index[b]]
        return None if np.isnan(v) else float(v)


def _check_order(order):
    if order not in ORDERS:
        raise DomainError(f"order must be one of {ORDERS}, got {order!r}")


def window_adjacency(r: ReturnPanel, w: WindowSpec = WindowSpec(), threads=None) -> AdjacencySequence:
    """MST adjacency for every window start ``0, step, 2*step, ...``."""
    starts = w.starts(r.n_rows)

    def one(start):
        window = slice_window(r, start, w.length)
        return adjacency(build_mst(to_distance(spearman_matrix(window)))).a

    return AdjacencySequence(r.tickers, np.stack(parallel_map(one, starts, threads)))


def second_order(a: np.ndarray) -> np.ndarray:
    """``A OR A @ A`` as booleans with an empty diagonal."""
    a = np.asarray(a, dtype=bool)
    ai = a.astype(np.int64)
    b = a | ((ai @ ai) > 0)
    b[np.arange(len(b)), np.arange(len(b))] = False
    return b


def _stack(seq: AdjacencySequence, order):
    _check_order(order)
    if order == "first":
        return seq.windows
    return np.stack([second_order(a) for a in seq.windows])


def _fold(stack, start, span):
    if span < 1 or start < 0 or start + span > len(stack):
        raise BoundsError(
            f"windows [{start}, {start + span}) outside sequence of {len(stack)} windows"
        )
    return np.logical_and.reduce(stack[start:start + span], axis=0)


def first_order_survival(seq: AdjacencySequence, start: int, span: int) -> AdjacencyMatrix:
    return AdjacencyMatrix(seq.tickers, _fold(seq.windows, start, span))


def second_order_survival(seq: AdjacencySequence, start: int, span: int) -> AdjacencyMatrix:
    if span < 1 or start < 0 or start + span > len(seq):
        raise BoundsError(
            f"windows [{start}, {start + span}) outside sequence of {len(seq)} windows"
        )
    sub = np.stack([second_order(a) for a in seq.windows[start:start + span]])
    return AdjacencyMatrix(seq.tickers, sub.all(axis=0))


def survival(seq: AdjacencySequence, start: int, span: int, order: str = "first") -> AdjacencyMatrix:
    _check_order(order)
    if order == "first":
        return first_order_survival(seq, start, span)
    return second_order_survival(seq, start, span)


def survival_curve(seq: AdjacencySequence, order: str = "first") -> SurvivalCurve:
    """Surviving unordered pairs after ``m`` further windows, from window 0."""
    stack = _stack(seq, order)
    upper = np.triu(np.ones(stack.shape[1:], dtype=bool), 1)
    alive = np.logical_and.accumulate(stack, axis=0) & upper
    return SurvivalCurve(order, tuple(int(c) for c in alive.sum(axis=(1, 2))))


def survivability(seq: AdjacencySequence, horizon: int = 5, order: str = "second") -> SurvivabilityMap:
    """Fraction of starts ``t`` for which a pair is connected in windows ``t .. t+horizon-1``."""
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1, got {horizon}")
    stack = _stack(seq, order)
    if len(stack) < horizon:
        raise InsufficientDataError(
            f"horizon {horizon} exceeds the {len(stack)} available windows"
        )
    n_starts = len(stack) - horizon + 1
    # running count of consecutive connected windows ending at each index
    run = np.zeros(stack.shape[1:], dtype=np.int64)
    hits = np.zeros(stack.shape[1:], dtype=np.int64)
    for k, a in enumerate(stack):
        run = np.where(a, run + 1, 0)
        if k >= horizon - 1:
            hits += run >= horizon
    return SurvivabilityMap(seq.tickers, hits / n_starts, horizon, order)


def write_curve(curve: SurvivalCurve, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["elapsed_windows", "count"])
    for m, c in enumerate(curve.counts):
        w.writerow([m, c])


def load_curve(source, order: str) -> SurvivalCurve:
    rows = list(csv.reader(_text_stream(source)))
    if not rows or rows[0] != ["elapsed_windows", "count"]:
        raise ParseError("curve CSV header must be 'elapsed_windows,count'")
    try:
        counts = [int(c) for _, c in rows[1:]]
    except ValueError as exc:
        raise ParseError(f"malformed curve row: {exc}") from None
    return SurvivalCurve(order, counts)


def write_survivability(m: SurvivabilityMap, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow([f"horizon={m.horizon};order={m.order}", *m.tickers])
    for t, row in zip(m.tickers, m.s):
        w.writerow([t, *("" if np.isnan(v) else format(float(v), ".17g") for v in row)])


def load_survivability(source, horizon: Optional[int] = None, order: Optional[str] = None) -> SurvivabilityMap:
    rows = [r for r in csv.reader(_text_stream(source)) if r]
    if not rows:
        raise ParseError("survivability CSV is empty")
    corner = dict(
        part.split("=", 1) for part in rows[0][0].split(";") if "=" in part
    )
    tickers = [h.strip() for h in rows[0][1:]]
    if [r[0].strip() for r in rows[1:]] != tickers:
        raise ParseError("survivability CSV row labels must match the header")
    try:
        s = [[float(v) if v.strip() else np.nan for v in r[1:]] for r in rows[1:]]
        horizon = int(corner.get("horizon", horizon if horizon is not None else 0))
    except ValueError as exc:
        raise ParseError(f"malformed survivability entry: {exc}") from None
    return SurvivabilityMap(tickers, s, horizon, corner.get("order", order or "second"))
