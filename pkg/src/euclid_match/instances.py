"""Instance generators, including the recursive lower-bound family."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import L2, Metric, PointSet

LOWER_BOUND_MAX_I = 8
_COPIES = 7
_GAP_BASE = 13


def lower_bound_coords(i: int) -> np.ndarray:
    """x-coordinates (exact integers) of the lower-bound set of level ``i``.

    Level 0 is ``{0, 1}``; level ``i`` places seven copies of level ``i-1``
    side by side with gaps of ``13**(i-1)``.  Size ``2*7**i``, width ``13**i``.
    """
    if not 0 <= i <= LOWER_BOUND_MAX_I:
        raise ValueError(f"lower-bound level must lie in 0..{LOWER_BOUND_MAX_I}")
    xs = np.array([0, 1], dtype=np.int64)
    for level in range(1, i + 1):
        gap = _GAP_BASE ** (level - 1)
        width = int(xs[-1])
        step = width + gap
        xs = (xs[None, :] + step * np.arange(_COPIES, dtype=np.int64)[:, None]).ravel()
    return xs


def gen_lower_bound(i: int, adversarial: bool = False) -> PointSet:
    """Lower-bound point set on the line ``y = 0`` in the plane.

    With ``adversarial=True`` the tie order is the one produced by
    :func:`adversarial_tie_order`; otherwise it is left to right.
    """
    xs = lower_bound_coords(i)
    coords = np.stack([xs.astype(np.float64), np.zeros(xs.size)], axis=1)
    ps = PointSet(coords, L2)
    return ps.with_tie_order(adversarial_tie_order(xs.astype(np.float64))) if adversarial else ps


def adversarial_tie_order(x: np.ndarray) -> np.ndarray:
    """Tie order that drives node reduction into its worst case on the lower-bound family.

    ``x`` are the sorted x-coordinates of a level-``i`` set.  The set is cut
    into blocks of fourteen; the two outermost points of each block survive
    to the next level, where the same cut is applied again.  Points that
    survive longer come first, and among points dropped at the same level
    those farther from their block centre come first.  Under this order each
    block's nearest-neighbour forest splits into two paths of seven, and the
    preferred leaf of each path is the block's outer endpoint.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n < 2 or np.any(np.diff(x) <= 0):
        raise ValueError("expects strictly increasing coordinates")
    levels = np.round(np.log(n / 2) / np.log(_COPIES))
    if 2 * _COPIES ** int(levels) != n:
        raise ValueError(f"n={n} is not of the form 2*7**i")
    dropped_at = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
    outward = np.zeros(n)
    active = np.arange(n)
    level = 1
    while active.size >= 2 * _COPIES:
        blocks = active.reshape(-1, 2 * _COPIES)
        inner = blocks[:, 1:-1]
        centre = 0.5 * (x[blocks[:, 0]] + x[blocks[:, -1]])
        dropped_at[inner] = level
        outward[inner] = np.abs(x[inner] - centre[:, None])
        active = blocks[:, [0, -1]].ravel()
        level += 1
    return np.lexsort((x, -outward, -dropped_at))


def gen_uniform(dim: int, n: int, seed: int, metric: Metric = L2) -> PointSet:
    """``n`` i.i.d. uniform points in ``[0, 1]^dim``; the tie order uses the same seed."""
    if n < 2:
        raise ValueError("need at least two points")
    if not 1 <= dim <= 8:
        raise ValueError("dimension must lie in 1..8")
    rng = np.random.default_rng(seed)
    coords = rng.random((n, dim))
    return PointSet(coords, metric, rng.permutation(n))


def gen_clustered(dim: int, n: int, clusters: int, spread: float, seed: int, metric: Metric = L2) -> PointSet:
    """Gaussian blobs (std ``spread``) around ``clusters`` uniform centres."""
    if n < 2 or clusters < 1 or spread < 0:
        raise ValueError("invalid clustered-instance parameters")
    rng = np.random.default_rng(seed)
    centres = rng.random((clusters, dim))
    which = rng.integers(0, clusters, size=n)
    coords = centres[which] + spread * rng.standard_normal((n, dim))
    return PointSet(coords, metric, rng.permutation(n))


def gen_collinear(gaps: Sequence[float]) -> PointSet:
    """Points on ``y = 0`` at the prefix sums of ``gaps`` (first point at 0)."""
    g = np.asarray(gaps, dtype=np.float64)
    if g.size == 0:
        raise ValueError("gaps must be nonempty")
    if np.any(g <= 0):
        raise ValueError("gaps must be positive")
    xs = np.concatenate([[0.0], np.cumsum(g)])
    return PointSet(np.stack([xs, np.zeros(xs.size)], axis=1), L2)


@dataclass(frozen=True)
class GeneratorSpec:
    """Declarative instance description, as used by the benchmark harness."""

    kind: str  # uniform | clustered | lower_bound | collinear
    n: int = 0
    dim: int = 2
    clusters: int = 8
    spread: float = 0.01
    level: int = 0
    gaps: tuple[float, ...] = field(default_factory=tuple)
    seed: int = 0
    adversarial: bool = False

    def generate(self) -> PointSet:
        if self.kind == "uniform":
            return gen_uniform(self.dim, self.n, self.seed)
        if self.kind == "clustered":
            return gen_clustered(self.dim, self.n, self.clusters, self.spread, self.seed)
        if self.kind == "lower_bound":
            return gen_lower_bound(self.level, adversarial=self.adversarial)
        if self.kind == "collinear":
            return gen_collinear(self.gaps)
        raise ValueError(f"unknown instance kind {self.kind!r}")

    @property
    def label(self) -> str:
        if self.kind == "lower_bound":
            return f"lower_bound-{self.level}" + ("-adv" if self.adversarial else "")
        if self.kind == "collinear":
            return f"collinear-{len(self.gaps) + 1}"
        return f"{self.kind}-d{self.dim}-n{self.n}-s{self.seed}"
