import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from euclid_match.baseline import even_edge_mask, even_forest_baseline
from euclid_match.geometry import OddCardinalityError, PointSet
from euclid_match.instances import gen_collinear, gen_lower_bound, gen_uniform
from euclid_match.proximity import component_labels, emst


def test_two_points():
    m, length = even_forest_baseline(gen_collinear([4.0]))
    assert m.as_list() == [(0, 1)] and length == 4.0


def test_path_of_four_drops_middle_edge():
    ps = gen_collinear([1, 1, 1])
    t = emst(ps)
    mask = even_edge_mask(t)
    assert {(int(a), int(b)) for a, b, e in zip(t.u, t.v, mask) if e} == {(1, 2)}
    m, length = even_forest_baseline(ps)
    assert m.as_list() == [(0, 1), (2, 3)] and length == 2.0


def test_far_pairs():
    ps = PointSet([[0.0, 0.0], [1.0, 0.0], [100.0, 0.0], [101.0, 0.0], [0.0, 100.0], [0.0, 101.0]])
    t = emst(ps)
    mask = even_edge_mask(t)
    assert all(mask[t.length > 1])
    m, length = even_forest_baseline(ps)
    assert m.as_list() == [(0, 1), (2, 3), (4, 5)] and length == 3.0


@given(st.integers(0, 100_000), st.integers(1, 300))
def test_pruned_forest_is_even_and_matching_perfect(seed, half):
    ps = gen_uniform(2, 2 * half, seed)
    t = emst(ps)
    keep = ~even_edge_mask(t)
    _, labels = component_labels(ps.n, t.u[keep], t.v[keep])
    assert np.all(np.bincount(labels) % 2 == 0)
    m, length = even_forest_baseline(ps)
    assert m.is_perfect_on(np.arange(ps.n))
    assert length <= t.total_length() + 1e-12


def test_lower_bound_baseline_is_optimal():
    # measured: the pruned tree keeps exactly the unit pairs of the family
    for i in (1, 2, 3):
        _, length = even_forest_baseline(gen_lower_bound(i))
        assert length == 7.0**i


def test_odd_input():
    with pytest.raises(OddCardinalityError):
        even_forest_baseline(gen_collinear([1, 1]))
