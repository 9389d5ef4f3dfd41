import io

import numpy as np
import pytest

from mstprune.exceptions import BoundsError, DomainError, InsufficientDataError, SchemaError
from mstprune.mstree import adjacency
from mstprune.panel import shuffle_returns, synth_gaussian
from mstprune.survival import (
    AdjacencySequence, SurvivabilityMap, SurvivalCurve, WindowSpec, first_order_survival,
    load_curve, load_survivability, second_order, second_order_survival, survivability, survival,
    survival_curve, window_adjacency, write_curve, write_survivability,
)

from helpers import labels, make_tree, tree_from_edges
from oracles import bfs_distances, random_prufer_tree


def adj(n, edges):
    return adjacency(tree_from_edges(n, edges)).a


def seq_of(*mats):
    n = mats[0].shape[0]
    return AdjacencySequence(labels(n), np.stack(mats))


def random_sequence(rng, n=None, windows=None):
    n = n or int(rng.integers(2, 21))
    windows = windows or int(rng.integers(1, 41))
    mats = [adj(n, random_prufer_tree(n, rng)) for _ in range(windows)]
    return seq_of(*mats)


PATH4 = [(0, 1), (1, 2), (2, 3)]
DISJOINT4 = [(0, 2), (0, 3), (1, 3)]


@pytest.mark.parametrize("rows, length, step, expected", [
    (60, 60, 1, 1), (250, 60, 1, 191), (70, 60, 5, 3), (20, 6, 7, 3),
])
def test_window_count(rows, length, step, expected):
    r = synth_gaussian(4, rows, seed=rows)
    assert len(window_adjacency(r, WindowSpec(length, step))) == expected


def test_window_count_formula_random(rng):
    for _ in range(10):
        rows, length, step = int(rng.integers(8, 40)), int(rng.integers(4, 8)), int(rng.integers(1, 5))
        seq = window_adjacency(synth_gaussian(3, rows, seed=rows), WindowSpec(length, step))
        assert len(seq) == (rows - length) // step + 1


def test_too_few_rows():
    with pytest.raises(InsufficientDataError):
        window_adjacency(synth_gaussian(4, 59, seed=0), WindowSpec(60, 1))


def test_window_spec_validation():
    with pytest.raises(DomainError):
        WindowSpec(3, 1)
    with pytest.raises(DomainError):
        WindowSpec(10, 0)


def test_windows_are_trees():
    seq = window_adjacency(synth_gaussian(6, 30, seed=1), WindowSpec(10, 2), threads=3)
    assert all(w.sum() == 2 * 5 for w in seq.windows)
    assert np.array_equal(seq.windows, window_adjacency(synth_gaussian(6, 30, seed=1),
                                                        WindowSpec(10, 2), threads=1).windows)


def test_first_order_span_one_is_identity():
    seq = seq_of(adj(4, PATH4), adj(4, DISJOINT4))
    assert np.array_equal(first_order_survival(seq, 1, 1).a, seq.windows[1])


def test_first_order_absence_kills():
    seq = seq_of(adj(4, PATH4), adj(4, [(0, 1), (1, 3), (2, 3)]), adj(4, PATH4))
    r = first_order_survival(seq, 0, 3).a
    assert not r[1, 2]
    assert r[0, 1] and r[2, 3]


def test_first_order_idempotent():
    a = adj(4, PATH4)
    assert np.array_equal(first_order_survival(seq_of(a, a), 0, 2).a, a)


def test_bounds():
    seq = seq_of(adj(4, PATH4), adj(4, PATH4))
    with pytest.raises(BoundsError):
        first_order_survival(seq, 1, 2)
    with pytest.raises(BoundsError):
        second_order_survival(seq, 0, 0)


def test_second_order_two_step_path():
    b = second_order_survival(seq_of(adj(3, [(0, 1), (1, 2)])), 0, 1).a
    assert b[0, 2] and b[2, 0] and not b[0, 0]


def test_second_order_counts_on_large_tree_match_path_counting(rng):
    # stands in for the 92-node example: count pairs at tree distance <= 2 by BFS
    for _ in range(5):
        n = 92
        edges = random_prufer_tree(n, rng)
        expected = sum(
            1 for i in range(n) for j, dist in enumerate(bfs_distances(n, edges, i))
            if i < j and dist <= 2
        )
        b = second_order(adj(n, edges))
        assert int(np.triu(b, 1).sum()) == expected


def test_curve_constant_for_identical_windows():
    a = adj(5, [(0, 1), (1, 2), (1, 3), (3, 4)])
    assert survival_curve(seq_of(a, a, a, a), "first").counts == (4, 4, 4, 4)


def test_curve_alternating_disjoint_trees():
    a, b = adj(4, PATH4), adj(4, DISJOINT4)
    assert not np.any(a & b)
    counts = survival_curve(seq_of(a, b, a, b), "first").counts
    assert counts[0] == 3 and counts[1] == 0


def test_survivability_examples():
    n = 3
    on = adj(n, [(0, 1), (1, 2)])
    off = adj(n, [(0, 2), (1, 2)])
    seq = seq_of(on, on, on, off, off, off)
    m = survivability(seq, horizon=3, order="first")
    assert m.s[1, 2] == 1.0               # present everywhere
    assert m.s[0, 1] == pytest.approx(1 / 4)   # windows {0,1,2}: only start 0 of 4
    assert m.s[0, 2] == pytest.approx(1 / 4)   # windows {3,4,5}: only start 3
    seq2 = seq_of(on, on)
    assert survivability(seq2, 1, "first").s[0, 2] == 0.0


def test_survivability_matches_direct_definition(rng):
    for _ in range(20):
        seq = random_sequence(rng, n=int(rng.integers(2, 9)), windows=int(rng.integers(1, 15)))
        for order in ("first", "second"):
            h = int(rng.integers(1, len(seq) + 1))
            starts = len(seq) - h + 1
            direct = sum(survival(seq, t, h, order).a.astype(int) for t in range(starts)) / starts
            np.testing.assert_allclose(survivability(seq, h, order).s, direct, atol=0)


def test_survivability_horizon_too_large():
    with pytest.raises(InsufficientDataError):
        survivability(seq_of(adj(3, [(0, 1), (1, 2)])), horizon=2)


def test_algebraic_properties(rng):
    for _ in range(60):
        seq = random_sequence(rng)
        w = len(seq)
        for order in ("first", "second"):
            c = survival_curve(seq, order).counts
            assert all(b <= a for a, b in zip(c, c[1:]))
        for start in range(w):
            prev_r = prev_s = None
            for span in range(1, w - start + 1):
                r = first_order_survival(seq, start, span).a
                s = second_order_survival(seq, start, span).a
                assert np.all(s >= r)
                if prev_r is not None:
                    assert np.all(r <= prev_r) and np.all(s <= prev_s)
                prev_r, prev_s = r, s
        k = int(rng.integers(0, w))
        assert np.array_equal(first_order_survival(seq, k, 1).a, seq.windows[k])
        assert np.array_equal(second_order_survival(seq, k, 1).a, second_order(seq.windows[k]))


def test_second_order_equals_bfs_distance_at_most_two(rng):
    for _ in range(50):
        n = int(rng.integers(2, 51))
        edges = random_prufer_tree(n, rng)
        b = second_order(adj(n, edges))
        for i in range(n):
            dist = bfs_distances(n, edges, i)
            assert b[i].tolist() == [0 < d <= 2 for d in dist]


# mean surviving connections of shuffled data, read from the randomized column of
# the 2008 survival table (n = 92, 60-day windows moving one day)
PAPER_RANDOM_CURVE = {5: 40.5, 20: 10.9, 40: 2.0}


def test_shuffled_decay_tracks_published_random_curve():
    runs = [
        survival_curve(window_adjacency(shuffle_returns(synth_gaussian(92, 250, seed=500 + s), 900 + s),
                                        WindowSpec(60, 1)), "first").counts
        for s in range(8)
    ]
    means = {m: np.mean([c[m] for c in runs]) for m in PAPER_RANDOM_CURVE}
    assert means[5] == pytest.approx(PAPER_RANDOM_CURVE[5], abs=4.0)
    assert means[20] == pytest.approx(PAPER_RANDOM_CURVE[20], abs=3.0)
    assert means[40] == pytest.approx(PAPER_RANDOM_CURVE[40], abs=1.5)


def test_curve_and_map_csv_roundtrip(rng):
    seq = random_sequence(rng, n=6, windows=12)
    curve = survival_curve(seq, "second")
    buf = io.StringIO()
    write_curve(curve, buf)
    assert buf.getvalue().startswith("elapsed_windows,count\n")
    assert load_curve(buf.getvalue(), "second") == curve

    m = survivability(seq, 3, "second")
    buf = io.StringIO()
    write_survivability(m, buf)
    back = load_survivability(buf.getvalue())
    assert back.tickers == m.tickers and back.horizon == 3 and back.order == "second"
    assert np.array_equal(back.s, m.s)


def test_invalid_types():
    with pytest.raises(SchemaError):
        SurvivalCurve("first", (3, 4))
    with pytest.raises(SchemaError):
        SurvivabilityMap(labels(2), [[0, 1.5], [1.5, 0]], 1, "first")
    with pytest.raises(SchemaError):
        AdjacencySequence(labels(2), np.zeros((0, 2, 2), dtype=bool))
