import math

import numpy as np
import pytest

from mstprune.exceptions import DegenerateSeriesError, DomainError, SchemaError
from mstprune.mstree import build_mst, tree_distance_stats
from mstprune.nullmodel import (
    ThresholdReport, aggregate, default_threads, replica_stats, threshold_estimate,
)
from mstprune.panel import ReturnPanel, shuffle_returns, synth_gaussian
from mstprune.rankcorr import spearman_matrix, to_distance


@pytest.fixture(scope="module")
def panel():
    return synth_gaussian(12, 40, 0.0, 2.0, seed=77)


def test_single_replica_has_zero_spread(panel):
    rep = threshold_estimate(panel, replicas=1, seed=5)
    tree = build_mst(to_distance(spearman_matrix(shuffle_returns(panel, 5))))
    mean, lo, hi = tree_distance_stats(tree)
    assert (rep.mean_dist, rep.mean_min, rep.mean_max) == (mean, lo, hi)
    assert rep.mean_dist_std == rep.mean_min_std == rep.mean_max_std == 0.0
    assert rep.threshold == lo and rep.statistic == "mean-min"


def test_report_is_deterministic(panel):
    a = threshold_estimate(panel, replicas=10, seed=42)
    b = threshold_estimate(panel, replicas=10, seed=42)
    assert a == b
    assert a != threshold_estimate(panel, replicas=10, seed=43)


def test_threads_do_not_change_the_report(panel):
    serial = threshold_estimate(panel, replicas=16, seed=9, threads=1)
    parallel = threshold_estimate(panel, replicas=16, seed=9, threads=4)
    assert serial == parallel


def test_aggregation_is_order_independent(panel):
    stats = [replica_stats(panel, 100 + k) for k in range(25)]
    rng = np.random.default_rng(0)
    for _ in range(5):
        shuffled = [stats[k] for k in rng.permutation(len(stats))]
        assert aggregate(shuffled, 100) == aggregate(stats, 100)


def test_sample_standard_deviation(panel):
    stats = [replica_stats(panel, k) for k in range(6)]
    rep = aggregate(stats, 0, "mean")
    mins = [s[1] for s in stats]
    assert rep.mean_min_std == pytest.approx(np.std(mins, ddof=1), rel=1e-12)
    assert rep.threshold == rep.mean_dist


@pytest.mark.parametrize("statistic, field", [("mean-min", "mean_min"), ("mean", "mean_dist"),
                                              ("mean-max", "mean_max")])
def test_threshold_follows_statistic(panel, statistic, field):
    rep = threshold_estimate(panel, replicas=3, seed=1, statistic=statistic)
    assert rep.threshold == getattr(rep, field)


def test_strict_ordering_on_iid_input(panel):
    rep = threshold_estimate(panel, replicas=20, seed=3)
    assert rep.mean_min < rep.mean_dist < rep.mean_max
    assert rep.mean_dist < 1.0


def test_standard_error_shrinks_with_replicas():
    r = synth_gaussian(10, 30, seed=5)
    small = threshold_estimate(r, replicas=20, seed=1)
    large = threshold_estimate(r, replicas=200, seed=1)
    se_small = small.mean_min_std / math.sqrt(small.replicas)
    se_large = large.mean_min_std / math.sqrt(large.replicas)
    assert 2.0 <= se_small / se_large <= 5.0


def test_gaussian_distance_level():
    rep = threshold_estimate(synth_gaussian(40, 125, 0.0, 2.0, seed=11), replicas=20, seed=2)
    assert 0.75 <= rep.mean_dist <= 0.85


def test_degenerate_column_propagates():
    r = ReturnPanel.from_array(np.column_stack([np.arange(10.0), np.ones(10)]), tickers=["A", "Z"])
    with pytest.raises(DegenerateSeriesError, match="Z"):
        threshold_estimate(r, replicas=2, seed=0)


def test_rejects_bad_arguments(panel):
    with pytest.raises(DomainError):
        threshold_estimate(panel, replicas=0)
    with pytest.raises(DomainError):
        threshold_estimate(panel, replicas=1, statistic="median")


def test_report_json_roundtrip(panel):
    rep = threshold_estimate(panel, replicas=4, seed=8, statistic="mean-max")
    assert ThresholdReport.loads(rep.dumps()) == rep


def test_report_rejects_inconsistent_threshold(panel):
    data = threshold_estimate(panel, replicas=2, seed=0).to_dict()
    data["threshold"] = data["mean_max"]
    with pytest.raises(SchemaError):
        ThresholdReport.from_dict(data)


def test_threads_env(monkeypatch):
    monkeypatch.setenv("MSTPRUNE_THREADS", "3")
    assert default_threads() == 3
    monkeypatch.delenv("MSTPRUNE_THREADS")
    assert default_threads() == 1
