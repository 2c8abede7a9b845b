import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import brute_nn, prim_length

from euclid_match.geometry import Metric, PointSet
from euclid_match.instances import gen_collinear
from euclid_match.proximity import (
    component_labels,
    edge_rank,
    emst,
    k_nearest,
    knn_graph,
    kruskal,
    nn_graph,
)


def lattice_points(seed: int, n: int, dim: int, side: int = 4) -> np.ndarray:
    # coarse lattice: many exact distance ties and duplicates
    return np.random.default_rng(seed).integers(0, side, size=(n, dim)).astype(float)


@given(st.integers(0, 10_000), st.integers(2, 40), st.sampled_from([1, 2, 3]), st.sampled_from(["l2", "l1", "linf"]))
def test_nn_graph_matches_direct_comparison(seed, n, dim, metric):
    rng = np.random.default_rng(seed)
    coords = lattice_points(seed, n, dim) if seed % 2 else rng.random((n, dim))
    ps = PointSet(coords, Metric.parse(metric), rng.permutation(n))
    assert nn_graph(ps).edge_set() == brute_nn(ps.coords, ps.rank, ps.metric)


@given(st.integers(0, 10_000), st.integers(2, 60))
def test_nn_graph_is_forest(seed, n):
    ps = PointSet(lattice_points(seed, n, 2), tie_order=np.random.default_rng(seed).permutation(n))
    g = nn_graph(ps)
    count, _ = g.components()
    assert len(g) == n - count
    # no isolated vertices
    deg = np.bincount(np.concatenate([g.u, g.v]), minlength=n)
    assert deg.min() >= 1


def test_unit_square_nn_forest_has_three_edges_for_every_tie_order():
    # derived by hand: each corner has two tied neighbours; three distinct edges always
    square = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    for order in itertools.permutations(range(4)):
        ps = PointSet(square, tie_order=list(order))
        g = nn_graph(ps)
        assert g.edge_set() == brute_nn(ps.coords, ps.rank, ps.metric)
        assert len(g) == 3
        assert g.components()[0] == 1


def test_knn_k2_on_a_line():
    ps = gen_collinear([1, 2, 4])  # x = 0, 1, 3, 7
    g = knn_graph(ps, 2)
    assert g.edge_set() == {(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)}
    assert g.kind == "knn" and g.k == 2


@given(st.integers(0, 10_000), st.integers(5, 40), st.integers(1, 4))
def test_k_nearest_matches_sorting(seed, n, k):
    rng = np.random.default_rng(seed)
    ps = PointSet(lattice_points(seed, n, 2, side=5), tie_order=rng.permutation(n))
    idx, dist = k_nearest(ps, k)
    w = ps.pairwise()
    for i in range(n):
        others = [j for j in range(n) if j != i]
        expect = sorted(others, key=lambda j: (w[i, j], ps.rank[j]))[:k]
        assert idx[i].tolist() == expect
        assert np.array_equal(dist[i], w[i, expect])


def test_knn_requires_enough_points():
    ps = PointSet(np.arange(3.0)[:, None])
    with pytest.raises(ValueError):
        knn_graph(ps, 3)
    with pytest.raises(ValueError):
        nn_graph(PointSet([[0.0]]))


@given(st.integers(0, 10_000), st.integers(2, 70), st.sampled_from(["uniform", "lattice", "line", "dups"]))
def test_emst_2d_is_minimum(seed, n, kind):
    rng = np.random.default_rng(seed)
    if kind == "uniform":
        coords = rng.random((n, 2))
    elif kind == "lattice":
        coords = lattice_points(seed, n, 2, side=6)
    elif kind == "line":
        t = rng.random(n)
        coords = np.stack([t, 2 * t + 1], axis=1)
    else:
        coords = rng.random((max(1, n // 3), 2))[rng.integers(0, max(1, n // 3), n)]
    ps = PointSet(coords)
    t = emst(ps)
    assert not t.approximate
    assert len(t) == n - 1
    assert t.components()[0] == 1
    assert math.isclose(t.total_length(), prim_length(ps.pairwise()), rel_tol=1e-12, abs_tol=1e-12)


def test_emst_of_collinear_points_is_the_path():
    ps = gen_collinear([1, 2, 4, 8])
    assert emst(ps).edge_set() == {(0, 1), (1, 2), (2, 3), (3, 4)}


@pytest.mark.parametrize("dim,metric", [(3, "l2"), (2, "l1"), (2, "linf")])
def test_emst_fallback_spans(dim, metric):
    rng = np.random.default_rng(dim)
    ps = PointSet(rng.random((80, dim)), Metric.parse(metric))
    t = emst(ps)
    assert t.approximate
    assert len(t) == 79 and t.components()[0] == 1
    # k-NN candidates suffice for these sizes: equal to the true minimum
    assert math.isclose(t.total_length(), prim_length(ps.pairwise()), rel_tol=1e-12)


def test_emst_trivial_sizes():
    assert len(emst(PointSet(np.zeros((1, 2))))) == 0
    assert len(emst(PointSet(np.zeros((0, 2))))) == 0


def test_edge_rank_is_permutation_ordered_by_length():
    ps = PointSet(np.random.default_rng(3).random((30, 2)))
    g = knn_graph(ps, 3)
    rank = edge_rank(g)
    assert sorted(rank.tolist()) == list(range(1, len(g) + 1))
    order = np.argsort(rank)
    assert np.all(np.diff(g.length[order]) >= 0)


def test_kruskal_keeps_zero_length_edges():
    u = np.array([0, 1, 0])
    v = np.array([1, 2, 2])
    length = np.array([0.0, 0.0, 1.0])
    assert kruskal(3, u, v, length).tolist() == [True, True, False]


def test_component_labels():
    count, labels = component_labels(5, np.array([0, 3]), np.array([1, 4]))
    assert count == 3
    assert labels[0] == labels[1] and labels[3] == labels[4] and labels[2] not in (labels[0], labels[3])


def test_graph_text_output():
    ps = gen_collinear([1.0])
    assert nn_graph(ps).to_text() == "0 1 1.0\n"
