import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from euclid_match.exact import (
    CapacityError,
    CertificateError,
    blossom_mwpm,
    brute_force_mwpm,
    exact_matching,
)
from euclid_match.exact.blossom import _solve_edges, verify_certificate
from euclid_match.geometry import PointSet
from euclid_match.instances import gen_lower_bound, gen_uniform

SQUARE = PointSet([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def test_brute_force_two_points():
    w = np.array([[0.0, 2.5], [2.5, 0.0]])
    assert brute_force_mwpm(w) == ([(0, 1)], 2.5)


def test_brute_force_unit_square():
    # the three matchings have lengths 2, 2 and 2*sqrt(2)
    pairs, length = brute_force_mwpm(SQUARE.pairwise())
    assert length == 2.0
    assert pairs == [(0, 1), (2, 3)]  # lexicographically first optimum


def test_brute_force_lower_bound_level_one():
    _, length = brute_force_mwpm(gen_lower_bound(1).pairwise())
    assert length == 7.0


def test_brute_force_limits():
    with pytest.raises(ValueError):
        brute_force_mwpm(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        brute_force_mwpm(np.zeros((16, 16)))


def test_brute_force_counts_all_matchings():
    # distinct powers of two make every perfect matching's weight unique;
    # the minimum must pair the lightest possible edges
    n = 8
    w = np.zeros((n, n))
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            w[i, j] = w[j, i] = 2.0**k
            k += 1
    _, length = brute_force_mwpm(w)
    best = min(
        w[0, a] + w[b, c] + w[d, e] + w[f, g]
        for a in range(1, n)
        for (b, c, d, e, f, g) in _rest_matchings([x for x in range(1, n) if x != a])
    )
    assert length == best


def _rest_matchings(items):
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for i, partner in enumerate(rest):
        for tail in _rest_matchings(rest[:i] + rest[i + 1 :]):
            yield (first, partner) + tail


@given(st.integers(0, 100_000), st.integers(1, 7), st.sampled_from([2, 3]), st.booleans())
def test_blossom_equals_brute_force(seed, half, dim, lattice):
    rng = np.random.default_rng(seed)
    n = 2 * half
    coords = rng.integers(0, 3, size=(n, dim)).astype(float) if lattice else rng.random((n, dim))
    w = PointSet(coords).pairwise()
    _, brute = brute_force_mwpm(w)
    pairs, length = blossom_mwpm(w)
    assert abs(length - brute) <= 1e-9
    assert sorted(x for p in pairs for x in p) == list(range(n))


def test_blossom_two_points():
    assert blossom_mwpm(np.array([[0.0, 1.0], [1.0, 0.0]])) == ([(0, 1)], 1.0)


def test_blossom_lower_bound_level_two():
    _, length = blossom_mwpm(gen_lower_bound(2).pairwise())
    assert length == pytest.approx(49.0, abs=1e-6)


def test_blossom_500_uniform_is_reproducible_and_certified():
    w = gen_uniform(2, 500, 42).pairwise()
    pairs_a, a = blossom_mwpm(w)
    pairs_b, b = blossom_mwpm(w)
    assert a == b and pairs_a == pairs_b
    # the full candidate graph must agree with the sparse-plus-pricing path
    _, dense = blossom_mwpm(w, candidate_k=w.shape[0])
    assert math.isclose(a, dense, rel_tol=1e-12)


def test_certificate_detects_corruption():
    w = gen_uniform(2, 40, 1).pairwise()
    n = w.shape[0]
    u, v = np.nonzero(np.triu(np.ones((n, n), dtype=bool), 1))
    mate, duals = _solve_edges(n, u, v, w[u, v])
    verify_certificate(w, mate, duals, 1e-9)
    duals.y[0] -= 1.0
    with pytest.raises(CertificateError):
        verify_certificate(w, mate, duals, 1e-9)
    bad = mate.copy()
    bad[[0, mate[0]]] = -1
    with pytest.raises(CertificateError):
        verify_certificate(w, bad, duals, 1e-9)


def test_blossom_input_validation():
    with pytest.raises(ValueError):
        blossom_mwpm(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        blossom_mwpm(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(ValueError):
        blossom_mwpm(np.array([[1.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(ValueError):
        blossom_mwpm(np.zeros((2, 3)))


def test_exact_matching_on_subset_uses_global_indices():
    ps = PointSet(np.array([[0.0], [100.0], [1.0], [101.0], [50.0], [51.0]]))
    m, length = exact_matching(ps, np.array([0, 1, 2, 3]))
    assert m.as_list() == [(0, 2), (1, 3)]
    assert length == 2.0
    m, _ = exact_matching(ps, np.array([0, 1, 2, 3]), engine="blossom")
    assert m.as_list() == [(0, 2), (1, 3)]


def test_exact_matching_errors():
    ps = gen_uniform(2, 12, 0)
    with pytest.raises(CapacityError):
        exact_matching(ps, max_n=10)
    with pytest.raises(ValueError):
        exact_matching(ps, np.arange(3))
    with pytest.raises(ValueError):
        exact_matching(ps, engine="simplex")
    assert len(exact_matching(ps, np.zeros(0, dtype=int))[0]) == 0
