"""Noise-pruned minimum spanning trees of financial market indices."""

__version__ = "0.1.0"

from .centrality import (
    CentralityReport, HistogramBins, betweenness, centrality_report, eigenvector_centrality,
    histogram, node_degree, node_strength,
)
from .embed import Embedding3D, embed_3d
from .estimators import DistanceEmbedding3D, NoiseThreshold, PrunedMST, SpearmanDistance
from .exceptions import MstPruneError
from .mstree import AdjacencyMatrix, SpanningTree, adjacency, build_mst, tree_distance_stats
from .nullmodel import ThresholdReport, threshold_estimate
from .panel import (
    PricePanel, ReturnPanel, load_panel, log_returns, shuffle_returns, slice_window, synth_gaussian,
)
from .pruner import PrunedGraph, prune, prune_report
from .rankcorr import CorrelationMatrix, DistanceMatrix, spearman_matrix, to_distance
from .survival import (
    AdjacencySequence, SurvivabilityMap, SurvivalCurve, WindowSpec, first_order_survival,
    second_order_survival, survivability, survival_curve, window_adjacency,
)
