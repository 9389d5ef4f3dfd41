"""Node-level diagnostics on spanning trees."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError, DomainError, SchemaError
from .mstree import AdjacencyMatrix, SpanningTree, adjacency
from .pruner import count_components


def node_degree(t: SpanningTree) -> np.ndarray:
    deg = np.zeros(t.n, dtype=np.int64)
    for e in t.edges:
        deg[e.i] += 1
        deg[e.j] += 1
    return deg


def node_strength(t: SpanningTree, double: bool = False) -> np.ndarray:
    """Sum of incident edge correlations.

    With ``double=True`` each incident edge counts twice, as if the link
    matrix held both ``C[i, k]`` and ``C[k, i]``.
    """
    strength = np.zeros(t.n)
    for e in t.edges:
        strength[e.i] += e.correlation
        strength[e.j] += e.correlation
    return 2.0 * strength if double else strength


def _subtree_sizes(n, nbrs, root=0):
    """Parent pointers, DFS order and subtree sizes of a tree rooted at ``root``."""
    parent = [-1] * n
    order = [root]
    seen = [False] * n
    seen[root] = True
    for u in order:
        for v in nbrs[u]:
            if not seen[v]:
                seen[v] = True
                parent[v] = u
                order.append(v)
    if len(order) != n:
        raise DomainError("betweenness needs a connected tree")
    size = [1] * n
    for u in reversed(order[1:]):
        size[parent[u]] += size[u]
    return parent, size


def betweenness(t: SpanningTree):
    """Raw and normalised betweenness on a tree.

    Removing node ``k`` splits the tree into branches; every pair of nodes
    taken from two different branches routes through ``k``, so
    ``raw[k] = C(n-1, 2) - sum(C(branch, 2))``.
    """
    n = t.n
    if count_components(n, [(e.i, e.j) for e in t.edges]) != 1:
        raise DomainError("betweenness needs a connected tree")
    nbrs = t.neighbors()
    parent, size = _subtree_sizes(n, nbrs)
    raw = np.zeros(n)
    for k in range(n):
        branches = [size[v] for v in nbrs[k] if parent[v] == k]
        if parent[k] != -1:
            branches.append(n - size[k])
        raw[k] = math.comb(n - 1, 2) - sum(math.comb(b, 2) for b in branches)
    norm = raw * (2.0 / ((n - 1) * (n - 2))) if n >= 3 else np.zeros(n)
    return raw, norm


def eigenvector_centrality(a: AdjacencyMatrix, tol: float = 1e-12, max_iters: int = 100_000) -> np.ndarray:
    """Dominant eigenvector of the 0/1 adjacency, unit L2 norm, nonnegative.

    Iterates on ``A + I``, which has the same eigenvectors as ``A`` but a
    strictly dominant top eigenvalue; plain iteration on ``A`` oscillates on
    bipartite graphs such as trees.
    """
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol}")
    A = np.asarray(a.a, dtype=float)
    n = len(A)
    iu, ju = np.nonzero(np.triu(A, 1))
    if count_components(n, zip(iu.tolist(), ju.tolist())) != 1:
        raise DomainError("eigenvector centrality needs a connected graph")
    v = np.full(n, 1.0 / math.sqrt(n))
    diff = math.inf
    for _ in range(max_iters):
        w = A @ v + v
        w /= np.linalg.norm(w)
        diff = float(np.linalg.norm(w - v))
        v = w
        if diff < tol:
            break
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iters} iterations", diff)
    # A + I is nonnegative and the start vector positive, so v stays nonnegative
    return v


@dataclass(frozen=True)
class HistogramBins:
    bin_start: float
    bin_width: float
    counts: tuple

    def __post_init__(self):
        if not self.bin_width > 0:
            raise SchemaError("bin_width must be positive")
        if any(c < 0 for c in self.counts):
            raise SchemaError("histogram counts must be nonnegative")

    def edges(self):
        return [self.bin_start + k * self.bin_width for k in range(len(self.counts))]


def histogram(values, bin_start: float, bin_width: float) -> HistogramBins:
    """Counts over half-open bins ``[start + k*w, start + (k+1)*w)``, empty ends trimmed."""
    if not bin_width > 0:
        raise DomainError(f"bin_width must be positive, got {bin_width}")
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        return HistogramBins(float(bin_start), float(bin_width), ())
    k = np.floor((values - bin_start) / bin_width).astype(np.int64)
    lo = int(k.min())
    counts = np.bincount(k - lo)
    return HistogramBins(float(bin_start + lo * bin_width), float(bin_width), tuple(int(c) for c in counts))


@dataclass(frozen=True, eq=False)
class CentralityReport:
    tickers: tuple
    degree: np.ndarray
    strength: np.ndarray
    betweenness_raw: np.ndarray
    betweenness_normalized: np.ndarray
    eigenvector: np.ndarray

    COLUMNS = ("ticker", "degree", "strength", "betweenness_raw", "betweenness_norm", "eigenvector")


def centrality_report(t: SpanningTree, strength_double: bool = False, tol: float = 1e-12,
                      max_iters: int = 100_000) -> CentralityReport:
    raw, norm = betweenness(t)
    return CentralityReport(
        t.tickers,
        node_degree(t),
        node_strength(t, double=strength_double),
        raw,
        norm,
        eigenvector_centrality(adjacency(t), tol=tol, max_iters=max_iters),
    )


def write_centrality(r: CentralityReport, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CentralityReport.COLUMNS)
    for k, t in enumerate(r.tickers):
        w.writerow([
            t, int(r.degree[k]), format(float(r.strength[k]), ".17g"),
            format(float(r.betweenness_raw[k]), ".17g"),
            format(float(r.betweenness_normalized[k]), ".17g"),
            format(float(r.eigenvector[k]), ".17g"),
        ])


def write_histogram(h: HistogramBins, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["bin_start", "count"])
    for start, c in zip(h.edges(), h.counts):
        w.writerow([format(start, ".17g"), c])
