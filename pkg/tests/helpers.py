import numpy as np

from mstprune.mstree import SpanningTree
from mstprune.rankcorr import DistanceMatrix

from oracles import random_prufer_tree


def labels(n, prefix="N"):
    return tuple(f"{prefix}{k}" for k in range(n))


def make_tree(n, rng, tickers=None):
    edges = random_prufer_tree(n, rng)
    dists = rng.uniform(0.0, 2.0, len(edges))
    return SpanningTree(tickers or labels(n), [(i, j, d) for (i, j), d in zip(edges, dists)])


def tree_from_edges(n, edges, distance=0.5):
    return SpanningTree(labels(n), [(i, j, distance) for i, j in edges])


def distance_matrix(D, tickers=None):
    return DistanceMatrix(tickers or labels(len(D)), D)


def random_distances(n, rng, dyadic=False):
    D = rng.uniform(0.0, 2.0, (n, n))
    if dyadic:
        D = np.round(D * 2 ** 20) / 2 ** 20
    D = np.triu(D, 1)
    return D + D.T
