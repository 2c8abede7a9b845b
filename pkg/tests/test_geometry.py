import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from euclid_match.geometry import (
    L2,
    Metric,
    PointFileError,
    PointSet,
    format_points,
    parse_points,
    read_points,
    write_points,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
metrics = st.sampled_from([Metric(1.0), Metric(2.0), Metric(3.0), Metric(math.inf)])


def test_distance_345():
    ps = PointSet([[0.0, 0.0], [3.0, 4.0]])
    assert ps.distance(0, 1) == 5.0
    assert ps.distance(1, 1) == 0.0


def test_distance_linf_and_l1():
    coords = [[0.0, 0.0], [3.0, 4.0]]
    assert PointSet(coords, Metric(math.inf)).distance(0, 1) == 4.0
    assert PointSet(coords, Metric(1.0)).distance(0, 1) == 7.0


def test_distance_index_out_of_range():
    ps = PointSet([[0.0], [1.0]])
    with pytest.raises(IndexError):
        ps.distance(0, 2)
    with pytest.raises(IndexError):
        ps.distance(-1, 0)


def test_compare_identity_order():
    ps = PointSet(np.zeros((6, 2)))
    assert ps.compare_for_ties(2, 5) == -1
    assert ps.compare_for_ties(5, 2) == 1


def test_compare_reversed_order():
    ps = PointSet(np.zeros((4, 1)), tie_order=[3, 2, 1, 0])
    assert ps.compare_for_ties(0, 3) == 1


def test_compare_same_point_rejected():
    with pytest.raises(ValueError):
        PointSet(np.zeros((2, 1))).compare_for_ties(1, 1)


@given(arrays(np.float64, (3, 3), elements=finite), metrics)
def test_triangle_inequality(coords, metric):
    ps = PointSet(coords, metric)
    dij, djk, dik = ps.distance(0, 1), ps.distance(1, 2), ps.distance(0, 2)
    assert dik <= (dij + djk) * (1 + 1e-12) + 1e-300
    assert ps.distance(0, 1) == ps.distance(1, 0)


@given(st.permutations(range(7)), st.lists(st.integers(0, 6), min_size=3, max_size=3, unique=True))
def test_tie_order_is_strict_total_order(order, triple):
    ps = PointSet(np.zeros((7, 1)), tie_order=order)
    i, j, k = triple
    assert ps.compare_for_ties(i, j) == -ps.compare_for_ties(j, i)
    if ps.compare_for_ties(i, j) < 0 and ps.compare_for_ties(j, k) < 0:
        assert ps.compare_for_ties(i, k) < 0


def test_tie_order_must_be_permutation():
    with pytest.raises(ValueError):
        PointSet(np.zeros((3, 1)), tie_order=[0, 0, 1])
    with pytest.raises(ValueError):
        PointSet(np.zeros((3, 1)), tie_order=[0, 1])


def test_rejects_non_finite():
    with pytest.raises(ValueError):
        PointSet([[0.0, np.nan]])
    with pytest.raises(ValueError):
        PointSet([[np.inf, 0.0]])


def test_point_set_is_immutable():
    ps = PointSet([[0.0, 1.0], [2.0, 3.0]])
    with pytest.raises(ValueError):
        ps.coords[0, 0] = 5.0
    with pytest.raises(AttributeError):
        ps.metric = Metric(1.0)


def test_seeded_tie_order_is_reproducible():
    a = PointSet.seeded(np.zeros((50, 2)), seed=7)
    b = PointSet.seeded(np.zeros((50, 2)), seed=7)
    assert np.array_equal(a.tie_order, b.tie_order)
    assert not np.array_equal(a.tie_order, np.arange(50))


def test_subset_keeps_relative_tie_order():
    ps = PointSet(np.arange(5.0)[:, None], tie_order=[4, 2, 0, 3, 1])
    sub = ps.subset([0, 2, 4])
    # global preference 4 > 2 > 0 becomes local 2 > 1 > 0
    assert sub.tie_order.tolist() == [2, 1, 0]
    assert sub.coords[:, 0].tolist() == [0.0, 2.0, 4.0]


def test_pairwise_matches_distance():
    ps = PointSet(np.random.default_rng(0).random((9, 3)), Metric(3.0))
    w = ps.pairwise()
    assert np.array_equal(w, w.T)
    for i in range(9):
        for j in range(9):
            assert w[i, j] == ps.distance(i, j)


@pytest.mark.parametrize(
    "text,p",
    [("l2", 2.0), ("L1", 1.0), ("linf", math.inf), ("lp:3", 3.0), ("l4", 4.0)],
)
def test_metric_parse(text, p):
    assert Metric.parse(text).p == p


def test_metric_rejects_fractional_p():
    with pytest.raises(ValueError):
        Metric(1.5)
    with pytest.raises(ValueError):
        Metric.parse("cosine")


def test_parse_points_skips_comments_and_blanks():
    coords = parse_points(["# header", "", "1 2", "  3.5   -4 ", "#x", "0 0"])
    assert coords.tolist() == [[1.0, 2.0], [3.5, -4.0], [0.0, 0.0]]


def test_parse_points_dimension_mismatch():
    with pytest.raises(PointFileError, match="line 2"):
        parse_points(["1 2", "1 2 3"])


def test_parse_points_bad_token():
    with pytest.raises(PointFileError):
        parse_points(["1 two"])
    with pytest.raises(PointFileError):
        parse_points(["1 nan"])


def test_read_missing_file(tmp_path):
    with pytest.raises(PointFileError):
        read_points(tmp_path / "absent.txt")


@given(arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 4)), elements=finite))
def test_file_round_trip(tmp_path_factory, coords):
    path = tmp_path_factory.mktemp("pts") / "p.txt"
    write_points(path, coords, header="round trip")
    again = read_points(path)
    assert np.array_equal(again.coords, coords)
    assert np.array_equal(parse_points(format_points(coords).splitlines()), coords)


def test_default_metric_is_euclidean():
    assert PointSet([[0.0], [1.0]]).metric == L2
