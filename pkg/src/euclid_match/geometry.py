"""Point sets, metrics and the deterministic tie order.

Every length comparison in the package goes through :meth:`Metric.rows`, so
the same pair of points always produces bit-identical distances no matter
how many rows are evaluated at once.  Ties are never resolved with an
epsilon; they fall to the point set's ``tie_order``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class PointFileError(ValueError):
    """Raised for malformed point files."""


class OddCardinalityError(ValueError):
    """A perfect matching was requested on an odd (or zero) number of points."""


@dataclass(frozen=True)
class Metric:
    """An L_p metric on R^d with integer ``p >= 1`` or ``p = inf``."""

    p: float = 2.0

    def __post_init__(self) -> None:
        if not (math.isinf(self.p) or (self.p >= 1 and float(self.p).is_integer())):
            raise ValueError(f"unsupported metric exponent p={self.p!r}")

    @classmethod
    def parse(cls, text: str) -> "Metric":
        """Parse ``l2``, ``l1``, ``linf`` or ``lp:<p>`` (case-insensitive)."""
        t = text.strip().lower()
        if t in ("l2", "euclidean"):
            return cls(2.0)
        if t in ("linf", "inf", "chebyshev"):
            return cls(math.inf)
        m = re.fullmatch(r"l(?:p:?)?(\d+)", t)
        if m:
            return cls(float(m.group(1)))
        raise ValueError(f"unknown metric {text!r}")

    @property
    def name(self) -> str:
        if math.isinf(self.p):
            return "linf"
        return f"l{int(self.p)}"

    @property
    def is_euclidean(self) -> bool:
        return self.p == 2.0

    def rows(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Row-wise distances between two (m, d) arrays.

        Accumulates column by column so that a row's result never depends
        on the batch it was computed in.
        """
        diff = np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64))
        if diff.ndim == 1:
            diff = diff[None, :]
        d = diff.shape[1]
        if math.isinf(self.p):
            out = diff[:, 0].copy()
            for k in range(1, d):
                out = np.maximum(out, diff[:, k])
            return out
        if self.p == 1.0:
            out = diff[:, 0].copy()
            for k in range(1, d):
                out = out + diff[:, k]
            return out
        if self.p == 2.0:
            out = diff[:, 0] * diff[:, 0]
            for k in range(1, d):
                out = out + diff[:, k] * diff[:, k]
            return np.sqrt(out)
        out = diff[:, 0] ** self.p
        for k in range(1, d):
            out = out + diff[:, k] ** self.p
        return out ** (1.0 / self.p)


L2 = Metric(2.0)


@dataclass(frozen=True, eq=False)
class PointSet:
    """An immutable, ordered set of points in R^d.

    ``tie_order`` lists point indices from most to least preferred; ``rank``
    is its inverse and is what comparisons actually use.
    """

    coords: np.ndarray
    metric: Metric = L2
    tie_order: np.ndarray | None = None
    rank: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        coords = np.array(self.coords, dtype=np.float64, copy=True)
        if coords.ndim == 1:
            coords = coords[:, None]
        if coords.ndim != 2 or coords.shape[1] < 1:
            raise ValueError("coords must be an (n, d) array with d >= 1")
        if not np.all(np.isfinite(coords)):
            raise ValueError("all coordinates must be finite")
        coords.setflags(write=False)
        n = coords.shape[0]
        if self.tie_order is None:
            order = np.arange(n, dtype=np.int64)
        else:
            order = np.asarray(self.tie_order, dtype=np.int64).copy()
            if order.shape != (n,) or not np.array_equal(np.sort(order), np.arange(n)):
                raise ValueError("tie_order must be a permutation of 0..n-1")
        order.setflags(write=False)
        rank = np.empty(n, dtype=np.int64)
        rank[order] = np.arange(n, dtype=np.int64)
        rank.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "tie_order", order)
        object.__setattr__(self, "rank", rank)

    @classmethod
    def seeded(cls, coords, metric: Metric = L2, seed: int = 0) -> "PointSet":
        """Point set whose tie order is a uniform permutation drawn from ``seed``."""
        n = len(coords)
        return cls(coords, metric, np.random.default_rng(seed).permutation(n))

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def __len__(self) -> int:
        return self.n

    def _check(self, *idx: int) -> None:
        for i in idx:
            if not 0 <= i < self.n:
                raise IndexError(f"point index {i} out of range for n={self.n}")

    def distance(self, i: int, j: int) -> float:
        self._check(i, j)
        return float(self.metric.rows(self.coords[i], self.coords[j])[0])

    def distances(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`distance` over index arrays."""
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        if i.size == 0:
            return np.zeros(0)
        return self.metric.rows(self.coords[i], self.coords[j])

    def compare_for_ties(self, i: int, j: int) -> int:
        """-1 if ``i`` precedes ``j`` in the tie order, +1 otherwise."""
        self._check(i, j)
        if i == j:
            raise ValueError("compare_for_ties needs two distinct points")
        return -1 if self.rank[i] < self.rank[j] else 1

    def subset(self, indices: Sequence[int] | np.ndarray) -> "PointSet":
        """Sub point set (re-indexed 0..m-1) keeping relative tie order."""
        idx = np.asarray(indices, dtype=np.int64)
        sub_rank = self.rank[idx]
        return PointSet(self.coords[idx], self.metric, np.argsort(sub_rank, kind="stable"))

    def with_tie_order(self, tie_order) -> "PointSet":
        return PointSet(self.coords, self.metric, tie_order)

    def with_metric(self, metric: Metric) -> "PointSet":
        return PointSet(self.coords, metric, self.tie_order)

    def pairwise(self) -> np.ndarray:
        """Dense distance matrix (uses :meth:`Metric.rows`, so bit-identical)."""
        n = self.n
        iu, ju = np.triu_indices(n, 1)
        w = np.zeros((n, n))
        d = self.distances(iu, ju)
        w[iu, ju] = d
        w[ju, iu] = d
        return w


def parse_points(lines: Iterable[str]) -> np.ndarray:
    """Parse the whitespace-separated text point format.

    Lines starting with ``#`` and blank lines are skipped.  The dimension is
    fixed by the first data line.
    """
    rows: list[list[float]] = []
    dim = None
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            vals = [float(tok) for tok in line.split()]
        except ValueError as exc:
            raise PointFileError(f"line {lineno}: {exc}") from None
        if not all(math.isfinite(v) for v in vals):
            raise PointFileError(f"line {lineno}: non-finite coordinate")
        if dim is None:
            dim = len(vals)
        elif len(vals) != dim:
            raise PointFileError(f"line {lineno}: expected {dim} coordinates, got {len(vals)}")
        rows.append(vals)
    if dim is None:
        return np.zeros((0, 1))
    return np.array(rows, dtype=np.float64)


def read_points(path: str | Path, metric: Metric = L2, seed: int | None = None) -> PointSet:
    try:
        with open(path, encoding="utf-8") as fh:
            coords = parse_points(fh)
    except OSError as exc:
        raise PointFileError(str(exc)) from exc
    if seed is None:
        return PointSet(coords, metric)
    return PointSet.seeded(coords, metric, seed)


def format_points(coords: np.ndarray) -> str:
    # repr() of a float round-trips exactly
    return "".join(" ".join(repr(float(c)) for c in row) + "\n" for row in np.atleast_2d(coords))


def write_points(path: str | Path, coords: np.ndarray, header: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        fh.write(format_points(coords))
