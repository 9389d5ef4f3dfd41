"""Minimum spanning trees over dense distance matrices."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .exceptions import DomainError, SchemaError
from .panel import _check_labels, _check_regions, _frozen
from .rankcorr import DistanceMatrix


class Edge(NamedTuple):
    i: int
    j: int
    distance: float
    correlation: float


def _is_spanning_tree(n, pairs):
    if len(pairs) != n - 1:
        return False
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri == rj:
            return False
        parent[ri] = rj
    return True


@dataclass(frozen=True, eq=False)
class SpanningTree:
    """Tree over ``tickers`` with ``n - 1`` edges ``(i, j, distance, correlation)``, ``i < j``."""

    tickers: tuple
    edges: tuple
    regions: Optional[tuple] = None

    def __post_init__(self):
        tickers = _check_labels(self.tickers)
        n = len(tickers)
        edges = []
        for e in self.edges:
            i, j, dist = int(e[0]), int(e[1]), float(e[2])
            if not (0 <= i < j < n):
                raise SchemaError(f"edge ({i}, {j}) must satisfy 0 <= i < j < {n}")
            if not 0.0 <= dist <= 2.0:
                raise SchemaError(f"edge ({i}, {j}) distance {dist} outside [0, 2]")
            edges.append(Edge(i, j, dist, 1.0 - dist))
        if not _is_spanning_tree(n, [(e.i, e.j) for e in edges]):
            raise SchemaError(f"{len(edges)} edges do not form a spanning tree on {n} nodes")
        object.__setattr__(self, "tickers", tickers)
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "regions", _check_regions(self.regions, n))

    @property
    def n(self):
        return len(self.tickers)

    @property
    def weight(self):
        return math.fsum(e.distance for e in self.edges)

    def edge_set(self):
        return {(e.i, e.j) for e in self.edges}

    def neighbors(self):
        nbrs = [[] for _ in range(self.n)]
        for e in self.edges:
            nbrs[e.i].append(e.j)
            nbrs[e.j].append(e.i)
        return nbrs


@dataclass(frozen=True, eq=False)
class AdjacencyMatrix:
    tickers: tuple
    a: np.ndarray

    def __post_init__(self):
        tickers = _check_labels(self.tickers)
        a = _frozen(self.a, dtype=bool)
        if a.shape != (len(tickers), len(tickers)):
            raise SchemaError(f"adjacency shape {a.shape} does not match {len(tickers)} tickers")
        if not np.array_equal(a, a.T) or a.diagonal().any():
            raise SchemaError("adjacency must be symmetric with an empty diagonal")
        object.__setattr__(self, "tickers", tickers)
        object.__setattr__(self, "a", a)

    def pair_count(self):
        """Number of connected unordered pairs."""
        return int(np.triu(self.a, 1).sum())


def build_mst(d: DistanceMatrix, regions=None) -> SpanningTree:
    """Prim's algorithm grown from node 0 with a full scan per step.

    Among equally short crossing edges the lexicographically smallest
    ``(min(i, j), max(i, j))`` is taken, which makes ties deterministic.
    """
    D = np.asarray(d.d, dtype=float)
    n = D.shape[0]
    if n < 2:
        raise DomainError(f"need at least 2 nodes for a spanning tree, got {n}")
    if not np.all(np.isfinite(D)):
        raise DomainError("distances must be finite")

    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    key = D[0].copy()
    parent = np.zeros(n, dtype=np.int64)
    edges = []
    for _ in range(n - 1):
        cand = np.flatnonzero(~in_tree)
        kc = key[cand]
        ties = cand[kc == kc.min()]
        if len(ties) > 1:
            lo = np.minimum(parent[ties], ties)
            hi = np.maximum(parent[ties], ties)
            v = ties[np.lexsort((hi, lo))[0]]
        else:
            v = ties[0]
        u = int(parent[v])
        i, j = min(u, int(v)), max(u, int(v))
        edges.append((i, j, float(D[i, j])))
        in_tree[v] = True

        row = D[v]
        closer = ~in_tree & (row < key)
        key[closer] = row[closer]
        parent[closer] = v
        # an equal-distance link from a smaller tree node wins the tie
        same = ~in_tree & (row == key) & (v < parent) & ~closer
        parent[same] = v
    edges.sort(key=lambda e: (e[0], e[1]))
    return SpanningTree(d.tickers, edges, regions)


def adjacency(t: SpanningTree) -> AdjacencyMatrix:
    a = np.zeros((t.n, t.n), dtype=bool)
    for e in t.edges:
        a[e.i, e.j] = a[e.j, e.i] = True
    return AdjacencyMatrix(t.tickers, a)


class DistanceStats(NamedTuple):
    mean: float
    min: float
    max: float


def tree_distance_stats(t: SpanningTree) -> DistanceStats:
    dist = [e.distance for e in t.edges]
    return DistanceStats(math.fsum(dist) / len(dist), min(dist), max(dist))


def tree_to_dict(t: SpanningTree) -> dict:
    nodes = []
    for k, label in enumerate(t.tickers):
        node = {"id": k, "label": label}
        if t.regions is not None and t.regions[k] is not None:
            node["region"] = t.regions[k]
        nodes.append(node)
    return {
        "nodes": nodes,
        "edges": [
            {"source": e.i, "target": e.j, "distance": e.distance, "correlation": e.correlation}
            for e in t.edges
        ],
    }


def tree_from_dict(data: dict) -> SpanningTree:
    try:
        nodes = sorted(data["nodes"], key=lambda nd: nd["id"])
        if [nd["id"] for nd in nodes] != list(range(len(nodes))):
            raise SchemaError("node ids must be 0..n-1")
        regions = tuple(nd.get("region") for nd in nodes)
        edges = [(e["source"], e["target"], e["distance"]) for e in data["edges"]]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed tree JSON: {exc}") from None
    return SpanningTree(
        tuple(nd["label"] for nd in nodes),
        edges,
        regions if any(r is not None for r in regions) else None,
    )


def dumps_tree(t: SpanningTree) -> str:
    return json.dumps(tree_to_dict(t), indent=2, sort_keys=True) + "\n"


def loads_tree(text: str) -> SpanningTree:
    return tree_from_dict(json.loads(text))


def _dot_id(label):
    return '"' + str(label).replace("\\", "\\\\").replace('"', '\\"') + '"'


def tree_to_dot(t: SpanningTree, name="mst") -> str:
    """Graphviz ``graph`` with ``len`` set to each edge's distance."""
    lines = [f"graph {name} {{"]
    for label in t.tickers:
        lines.append(f"  {_dot_id(label)};")
    for e in t.edges:
        lines.append(
            f"  {_dot_id(t.tickers[e.i])} -- {_dot_id(t.tickers[e.j])} "
            f"[len={e.distance:.6f}, weight={e.correlation:.6f}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
