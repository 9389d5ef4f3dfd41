"""Remove MST edges that look like noise.

An edge is kept when its distance is below the noise threshold (``strong``)
or, failing that, when its survivability reaches ``min_survival``
(``enduring``). Everything else is dropped.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .exceptions import CoverageError, DomainError, SchemaError
from .mstree import SpanningTree, _dot_id, tree_to_dict
from .panel import _check_labels, _check_regions
from .survival import SurvivabilityMap

DEFAULT_MIN_SURVIVAL = 0.8
KEEP_REASONS = ("strong", "enduring")


class KeptEdge(NamedTuple):
    i: int
    j: int
    distance: float
    correlation: float
    keep_reason: str
    survivability: float


class DroppedEdge(NamedTuple):
    i: int
    j: int
    distance: float
    correlation: float
    survivability: float


@dataclass(frozen=True, eq=False)
class PrunedGraph:
    tickers: tuple
    edges: tuple
    dropped: tuple
    threshold: float
    min_survival: float
    regions: Optional[tuple] = None

    def __post_init__(self):
        tickers = _check_labels(self.tickers)
        edges = tuple(KeptEdge(*e) for e in self.edges)
        dropped = tuple(DroppedEdge(*e) for e in self.dropped)
        for e in edges:
            if e.keep_reason not in KEEP_REASONS:
                raise SchemaError(f"unknown keep_reason {e.keep_reason!r}")
            if not (e.distance < self.threshold or e.survivability >= self.min_survival):
                raise SchemaError(f"kept edge ({e.i}, {e.j}) satisfies neither keep condition")
        for e in dropped:
            if e.distance < self.threshold or e.survivability >= self.min_survival:
                raise SchemaError(f"dropped edge ({e.i}, {e.j}) satisfies a keep condition")
        object.__setattr__(self, "tickers", tickers)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "dropped", dropped)
        object.__setattr__(self, "regions", _check_regions(self.regions, len(tickers)))

    @property
    def n(self):
        return len(self.tickers)


class PruneSummary(NamedTuple):
    kept: int
    dropped: int
    strong: int
    enduring: int
    components: int


def prune(t: SpanningTree, threshold: float, surv: SurvivabilityMap,
          min_survival: float = DEFAULT_MIN_SURVIVAL) -> PrunedGraph:
    if not 0.0 <= min_survival <= 1.0:
        raise DomainError(f"min_survival must lie in [0, 1], got {min_survival}")
    kept, dropped = [], []
    for e in t.edges:
        a, b = t.tickers[e.i], t.tickers[e.j]
        s = surv.value(a, b)
        if s is None:
            raise CoverageError(f"no survivability entry for pair ({a}, {b})")
        if e.distance < threshold:
            kept.append(KeptEdge(e.i, e.j, e.distance, e.correlation, "strong", s))
        elif s >= min_survival:
            kept.append(KeptEdge(e.i, e.j, e.distance, e.correlation, "enduring", s))
        else:
            dropped.append(DroppedEdge(e.i, e.j, e.distance, e.correlation, s))
    return PrunedGraph(t.tickers, kept, dropped, float(threshold), float(min_survival), t.regions)


def count_components(n, pairs):
    """Connected components of an ``n``-node graph by union-find."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    components = n
    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            components -= 1
    return components


def prune_report(g: PrunedGraph) -> PruneSummary:
    strong = sum(e.keep_reason == "strong" for e in g.edges)
    return PruneSummary(
        kept=len(g.edges),
        dropped=len(g.dropped),
        strong=strong,
        enduring=len(g.edges) - strong,
        components=count_components(g.n, [(e.i, e.j) for e in g.edges]),
    )


def pruned_to_dict(g: PrunedGraph) -> dict:
    base = tree_to_dict(_as_tree(g))
    base["edges"] = [
        {"source": e.i, "target": e.j, "distance": e.distance, "correlation": e.correlation,
         "keep_reason": e.keep_reason, "survivability": e.survivability}
        for e in g.edges
    ]
    base["dropped"] = [
        {"source": e.i, "target": e.j, "distance": e.distance, "correlation": e.correlation,
         "survivability": e.survivability}
        for e in g.dropped
    ]
    base["threshold"] = g.threshold
    base["min_survival"] = g.min_survival
    base["summary"] = prune_report(g)._asdict()
    return base


def _as_tree(g):
    edges = sorted([(e.i, e.j, e.distance) for e in (*g.edges, *g.dropped)])
    return SpanningTree(g.tickers, edges, g.regions)


def dumps_pruned(g: PrunedGraph) -> str:
    return json.dumps(pruned_to_dict(g), indent=2, sort_keys=True) + "\n"


def loads_pruned(text: str) -> PrunedGraph:
    data = json.loads(text)
    try:
        nodes = sorted(data["nodes"], key=lambda nd: nd["id"])
        regions = tuple(nd.get("region") for nd in nodes)
        return PrunedGraph(
            tuple(nd["label"] for nd in nodes),
            [(e["source"], e["target"], e["distance"], e["correlation"], e["keep_reason"],
              e["survivability"]) for e in data["edges"]],
            [(e["source"], e["target"], e["distance"], e["correlation"], e["survivability"])
             for e in data["dropped"]],
            data["threshold"],
            data["min_survival"],
            regions if any(r is not None for r in regions) else None,
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed pruned-graph JSON: {exc}") from None


def pruned_to_dot(g: PrunedGraph, include_dropped: bool = False, name="pruned_mst") -> str:
    """Kept edges solid; with ``include_dropped`` the removed ones appear dashed."""
    lines = [f"graph {name} {{"]
    for label in g.tickers:
        lines.append(f"  {_dot_id(label)};")
    for e in g.edges:
        lines.append(
            f"  {_dot_id(g.tickers[e.i])} -- {_dot_id(g.tickers[e.j])} "
            f"[len={e.distance:.6f}, weight={e.correlation:.6f}, style=solid, "
            f"keep_reason={e.keep_reason}];"
        )
    if include_dropped:
        for e in g.dropped:
            lines.append(
                f"  {_dot_id(g.tickers[e.i])} -- {_dot_id(g.tickers[e.j])} "
                f"[len={e.distance:.6f}, weight={e.correlation:.6f}, style=dashed];"
            )
    lines.append("}")
    return "\n".join(lines) + "\n"
