"""Exact minimum-weight perfect matching solvers."""

from __future__ import annotations

import numpy as np

from ..even_component import Matching
from ..geometry import PointSet
from .blossom import DENSE_MAX_N, CapacityError, CertificateError, blossom_mwpm
from .bruteforce import MAX_N as BRUTE_FORCE_MAX_N
from .bruteforce import brute_force_mwpm

__all__ = [
    "BRUTE_FORCE_MAX_N",
    "CapacityError",
    "CertificateError",
    "DENSE_MAX_N",
    "blossom_mwpm",
    "brute_force_mwpm",
    "exact_matching",
]


def exact_matching(
    ps: PointSet,
    indices: np.ndarray | None = None,
    engine: str = "auto",
    max_n: int = DENSE_MAX_N,
) -> tuple[Matching, float]:
    """Optimal perfect matching of ``ps`` (or of the points ``indices``).

    ``engine`` is ``"blossom"``, ``"bruteforce"`` or ``"auto"`` (brute force up
    to 10 points, blossom beyond).
    """
    idx = np.arange(ps.n) if indices is None else np.asarray(indices, dtype=np.int64)
    m = idx.size
    if m % 2:
        raise ValueError("exact matching needs an even number of points")
    if m == 0:
        return Matching.empty(), 0.0
    if engine == "auto":
        engine = "bruteforce" if m <= 10 else "blossom"
    if engine not in ("blossom", "bruteforce"):
        raise ValueError(f"unknown exact engine {engine!r}")
    if m > max_n:
        raise CapacityError(f"{m} points exceed the exact-solver capacity {max_n}")
    w = ps.subset(idx).pairwise()
    solver = brute_force_mwpm if engine == "bruteforce" else blossom_mwpm
    pairs, length = solver(w)
    local = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return Matching(idx[local]), length
