"""Noise thresholds from MSTs of shuffled replicas.

Every replica shuffles the columns of the input panel independently, which
keeps each series' distribution but removes co-movement, and records the
mean, minimum and maximum edge distance of the resulting MST. The threshold
is the across-replica mean of one of those three statistics.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from ._rng import check_seed, replica_seed
from .exceptions import DomainError, SchemaError
from .mstree import build_mst, tree_distance_stats
from .panel import ReturnPanel, shuffle_returns
from .rankcorr import spearman_matrix, to_distance

STATISTICS = ("mean-min", "mean", "mean-max")
DEFAULT_REPLICAS = 1000
DEFAULT_STATISTIC = "mean-min"
THREADS_ENV = "MSTPRUNE_THREADS"


def default_threads():
    """Thread cap from ``MSTPRUNE_THREADS``, else 1."""
    value = os.environ.get(THREADS_ENV, "").strip()
    if not value:
        return 1
    try:
        threads = int(value)
    except ValueError:
        raise DomainError(f"{THREADS_ENV} must be an integer, got {value!r}") from None
    return max(1, threads)


def parallel_map(func, items, threads=None):
    """``[func(x) for x in items]`` on up to ``threads`` worker threads, order preserved."""
    items = list(items)
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(items) < 2:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


@dataclass(frozen=True)
class ThresholdReport:
    replicas: int
    mean_dist: float
    mean_dist_std: float
    mean_min: float
    mean_min_std: float
    mean_max: float
    mean_max_std: float
    threshold: float
    statistic: str
    seed: int

    def __post_init__(self):
        if self.statistic not in STATISTICS:
            raise SchemaError(f"unknown statistic {self.statistic!r}")
        if self.threshold != self.value_of(self.statistic):
            raise SchemaError("threshold does not match the selected statistic")

    def value_of(self, statistic):
        return {"mean-min": self.mean_min, "mean": self.mean_dist, "mean-max": self.mean_max}[statistic]

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(**data)
        except TypeError as exc:
            raise SchemaError(f"malformed threshold report: {exc}") from None

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def loads(cls, text):
        return cls.from_dict(json.loads(text))


def replica_stats(r: ReturnPanel, seed: int):
    """(mean, min, max) MST edge distance of one shuffled replica."""
    tree = build_mst(to_distance(spearman_matrix(shuffle_returns(r, seed))))
    return tuple(tree_distance_stats(tree))


def _mean_std(values):
    mean = math.fsum(values) / len(values)
    if len(values) < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (len(values) - 1)
    return mean, math.sqrt(var)


def aggregate(stats, replicas_seed, statistic=DEFAULT_STATISTIC) -> ThresholdReport:
    """Reduce per-replica ``(mean, min, max)`` triples, listed in replica order."""
    if statistic not in STATISTICS:
        raise DomainError(f"statistic must be one of {STATISTICS}, got {statistic!r}")
    cols = np.asarray(stats, dtype=float).reshape(-1, 3)
    (md, mds), (mn, mns), (mx, mxs) = (_mean_std(cols[:, k].tolist()) for k in range(3))
    values = {"mean-min": mn, "mean": md, "mean-max": mx}
    return ThresholdReport(
        replicas=len(cols), mean_dist=md, mean_dist_std=mds, mean_min=mn, mean_min_std=mns,
        mean_max=mx, mean_max_std=mxs, threshold=values[statistic], statistic=statistic,
        seed=replicas_seed,
    )


def threshold_estimate(r: ReturnPanel, replicas: int = DEFAULT_REPLICAS, seed: int = 0,
                       statistic: str = DEFAULT_STATISTIC, threads=None) -> ThresholdReport:
    """Bootstrap the noise threshold of ``r`` over ``replicas`` shuffles.

    Replica ``k`` shuffles with seed ``seed + k``; results are reduced in
    replica order, so the report does not depend on ``threads``.
    """
    seed = check_seed(seed)
    if replicas < 1:
        raise DomainError(f"replicas must be >= 1, got {replicas}")
    if statistic not in STATISTICS:
        raise DomainError(f"statistic must be one of {STATISTICS}, got {statistic!r}")
    spearman_matrix(r)  # surface degenerate columns before spawning replicas
    stats = parallel_map(lambda k: replica_stats(r, replica_seed(seed, k)), range(replicas), threads)
    return aggregate(stats, seed, statistic)
