"""scikit-learn style front end.

The functional modules do the work; these classes bundle their parameters
so the pipeline can be configured with ``get_params``/``set_params``,
cloned, and driven with ``fit``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._rng import derive_seed
from ._validation import check_distances, check_returns
from .centrality import centrality_report
from .embed import embed_3d
from .mstree import build_mst
from .nullmodel import DEFAULT_REPLICAS, DEFAULT_STATISTIC, threshold_estimate
from .pruner import DEFAULT_MIN_SURVIVAL, prune, prune_report
from .rankcorr import spearman_matrix, to_distance
from .survival import WindowSpec, survivability, survival_curve, window_adjacency


class SpearmanDistance(TransformerMixin, BaseEstimator):
    """Spearman correlation and ``1 - c`` distance between the columns of ``X``.

    Attributes
    ----------
    correlation_ : CorrelationMatrix
    distance_ : DistanceMatrix
    """

    def fit(self, X, y=None):
        panel = check_returns(X)
        self.correlation_ = spearman_matrix(panel)
        self.distance_ = to_distance(self.correlation_)
        self.n_features_in_ = panel.shape[1]
        return self

    def transform(self, X):
        """Distance matrix, shape ``(n_series, n_series)``, of ``X``'s columns."""
        return np.array(to_distance(spearman_matrix(check_returns(X))).d)


class NoiseThreshold(BaseEstimator):
    """Noise threshold from MSTs of independently shuffled copies of ``X``.

    Parameters
    ----------
    replicas : int, default=1000
    seed : int, default=0
        Replica ``k`` shuffles with ``seed + k``.
    statistic : {"mean-min", "mean", "mean-max"}, default="mean-min"
    threads : int or None
        Worker cap; ``None`` reads ``MSTPRUNE_THREADS``.
    """

    def __init__(self, replicas=DEFAULT_REPLICAS, seed=0, statistic=DEFAULT_STATISTIC, threads=None):
        self.replicas = replicas
        self.seed = seed
        self.statistic = statistic
        self.threads = threads

    def fit(self, X, y=None):
        panel = check_returns(X)
        self.report_ = threshold_estimate(
            panel, replicas=self.replicas, seed=self.seed, statistic=self.statistic,
            threads=self.threads,
        )
        self.threshold_ = self.report_.threshold
        return self


class PrunedMST(BaseEstimator):
    """Full pipeline: MST of ``X``, noise threshold, window survivability, pruning.

    The noise threshold is estimated with the sub-seed
    ``derive_seed(seed, "threshold")``.

    Attributes
    ----------
    tree_ : SpanningTree
    threshold_report_ : ThresholdReport
    sequence_ : AdjacencySequence
    curves_ : dict mapping order to SurvivalCurve
    survivability_ : SurvivabilityMap
    pruned_ : PrunedGraph
    summary_ : PruneSummary
    """

    def __init__(self, window_length=60, window_step=1, replicas=DEFAULT_REPLICAS, seed=0,
                 statistic=DEFAULT_STATISTIC, horizon=5, order="second",
                 min_survival=DEFAULT_MIN_SURVIVAL, threads=None):
        self.window_length = window_length
        self.window_step = window_step
        self.replicas = replicas
        self.seed = seed
        self.statistic = statistic
        self.horizon = horizon
        self.order = order
        self.min_survival = min_survival
        self.threads = threads

    def fit(self, X, y=None, regions=None):
        panel = check_returns(X)
        regions = panel.regions if regions is None else regions
        self.correlation_ = spearman_matrix(panel)
        self.distance_ = to_distance(self.correlation_)
        self.tree_ = build_mst(self.distance_, regions)
        self.threshold_report_ = threshold_estimate(
            panel, replicas=self.replicas, seed=derive_seed(self.seed, "threshold"),
            statistic=self.statistic, threads=self.threads,
        )
        self.sequence_ = window_adjacency(
            panel, WindowSpec(self.window_length, self.window_step), threads=self.threads
        )
        self.curves_ = {o: survival_curve(self.sequence_, o) for o in ("first", "second")}
        self.survivability_ = survivability(self.sequence_, self.horizon, self.order)
        self.pruned_ = prune(self.tree_, self.threshold_report_.threshold, self.survivability_,
                             self.min_survival)
        self.summary_ = prune_report(self.pruned_)
        self.n_features_in_ = panel.shape[1]
        return self

    def centrality(self, strength_double=False):
        """Centrality of the fitted MST."""
        check_is_fitted(self, "tree_")
        return centrality_report(self.tree_, strength_double=strength_double)

    def adjacency_matrix(self):
        """Boolean adjacency of the kept edges."""
        check_is_fitted(self, "pruned_")
        n = self.pruned_.n
        a = np.zeros((n, n), dtype=bool)
        for e in self.pruned_.edges:
            a[e.i, e.j] = a[e.j, e.i] = True
        return a


class DistanceEmbedding3D(BaseEstimator):
    """3-D layout of a precomputed distance matrix (classical MDS + SMACOF).

    Parameters
    ----------
    n_iter : int, default=300
        Maximum number of stress-majorization steps.
    seed : int, default=0
    """

    def __init__(self, n_iter=300, seed=0):
        self.n_iter = n_iter
        self.seed = seed

    def fit(self, X, y=None):
        self.embedding_ = embed_3d(check_distances(X), iters=self.n_iter, seed=self.seed)
        self.stress_ = self.embedding_.stress
        return self

    def fit_transform(self, X, y=None):
        return np.array(self.fit(X).embedding_.coords)
