import numpy as np
import pytest

from euclid_match.exact import blossom_mwpm
from euclid_match.instances import (
    GeneratorSpec,
    adversarial_tie_order,
    gen_clustered,
    gen_collinear,
    gen_lower_bound,
    gen_uniform,
    lower_bound_coords,
)
from euclid_match.proximity import nn_graph


def test_level_zero():
    ps = gen_lower_bound(0)
    assert ps.coords.tolist() == [[0.0, 0.0], [1.0, 0.0]]


@pytest.mark.parametrize("i", range(6))
def test_size_and_width_exact(i):
    xs = lower_bound_coords(i)
    assert xs.dtype == np.int64
    assert xs.size == 2 * 7**i
    assert int(xs[-1] - xs[0]) == 13**i
    assert np.all(np.diff(xs) > 0)


def test_level_two_shape():
    ps = gen_lower_bound(2)
    assert ps.n == 98 and ps.coords[-1, 0] == 169.0
    assert np.all(ps.coords[:, 1] == 0)


def test_level_one_is_thirteen_unit_gaps():
    assert np.array_equal(gen_lower_bound(1).coords, gen_collinear([1] * 13).coords)


def test_level_eight_is_exact():
    xs = lower_bound_coords(8)
    assert xs.size == 2 * 7**8 and int(xs[-1]) == 13**8
    assert np.array_equal(xs.astype(np.float64).astype(np.int64), xs)


@pytest.mark.parametrize("i", [0, 1, 2])
def test_optimum_is_seven_to_the_i(i):
    _, length = blossom_mwpm(gen_lower_bound(i).pairwise())
    assert length == pytest.approx(7.0**i, abs=1e-6)


def test_level_out_of_range():
    with pytest.raises(ValueError):
        gen_lower_bound(-1)
    with pytest.raises(ValueError):
        gen_lower_bound(9)


@pytest.mark.parametrize("i", [1, 2, 3])
def test_adversarial_order_splits_blocks_into_sevens(i):
    ps = gen_lower_bound(i, adversarial=True)
    g = nn_graph(ps)
    count, labels = g.components()
    sizes = np.bincount(labels)
    assert count == ps.n // 7 and np.all(sizes == 7)
    # every component is a run of seven consecutive points
    assert np.all(labels.reshape(-1, 7) == labels[::7][:, None])


def test_adversarial_order_prefers_block_ends():
    order = adversarial_tie_order(lower_bound_coords(1).astype(float))
    assert set(order[:2].tolist()) == {0, 13}
    assert sorted(order.tolist()) == list(range(14))


def test_adversarial_order_rejects_other_sizes():
    with pytest.raises(ValueError):
        adversarial_tie_order(np.arange(10.0))
    with pytest.raises(ValueError):
        adversarial_tie_order(np.array([0.0, 0.0]))


def test_uniform_is_deterministic_and_in_range():
    a, b = gen_uniform(3, 100, 9), gen_uniform(3, 100, 9)
    assert np.array_equal(a.coords, b.coords) and np.array_equal(a.tie_order, b.tie_order)
    assert a.coords.shape == (100, 3)
    assert a.coords.min() >= 0 and a.coords.max() <= 1
    assert gen_uniform(2, 2, 0).n == 2


def test_uniform_validation():
    with pytest.raises(ValueError):
        gen_uniform(2, 1, 0)
    with pytest.raises(ValueError):
        gen_uniform(9, 10, 0)


def test_clustered():
    ps = gen_clustered(2, 300, 5, 0.001, 4)
    assert ps.n == 300
    assert np.array_equal(ps.coords, gen_clustered(2, 300, 5, 0.001, 4).coords)
    # tight blobs: at most five distinct rounded locations
    assert len({tuple(np.round(c, 1)) for c in ps.coords}) <= 5 * 4


def test_collinear():
    assert gen_collinear([1, 2, 4]).coords[:, 0].tolist() == [0.0, 1.0, 3.0, 7.0]
    assert gen_collinear([1]).distance(0, 1) == 1.0
    with pytest.raises(ValueError):
        gen_collinear([1, 0])
    with pytest.raises(ValueError):
        gen_collinear([])


def test_generator_spec():
    assert GeneratorSpec("lower_bound", level=2).generate().n == 98
    assert GeneratorSpec("collinear", gaps=(1.0, 2.0)).generate().n == 3
    spec = GeneratorSpec("uniform", n=10, dim=3, seed=2)
    assert np.array_equal(spec.generate().coords, gen_uniform(3, 10, 2).coords)
    assert spec.label == "uniform-d3-n10-s2"
    with pytest.raises(ValueError):
        GeneratorSpec("spiral").generate()
