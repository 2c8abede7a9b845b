"""Iterated node reduction with an exact tail: the top-level solver."""

from __future__ import annotations

import math
import os
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .even_component import Matching
from .exact import DENSE_MAX_N, exact_matching
from .geometry import OddCardinalityError, PointSet
from .node_reduction import node_reduction
from .schedule import solve_schedule

SEED_ENV = "EUCLID_MATCH_SEED"
KNN_MAX_R = 6
SCHEMA_VERSION = "1"


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    return int(raw) if raw not in (None, "") else 0


@dataclass(frozen=True)
class SolveConfig:
    """Solver settings.  ``r=None`` picks 1000 for ``tree2d`` and 3 for ``knn_highdim``."""

    r: int | None = None
    epsilon: float = 0.01
    threshold_exponent: float = 1.0 / 3.0
    mode: str = "auto"
    seed: int = field(default_factory=default_seed)
    exact_engine: str = "auto"
    ties: str = "seeded"  # "seeded": permutation from seed; "given": keep the point set's order
    max_exact: int = DENSE_MAX_N

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.threshold_exponent < 1:
            raise ValueError("threshold_exponent must lie in (0, 1)")
        if self.threshold_exponent - self.epsilon <= 0:
            raise ValueError("threshold_exponent - epsilon must be positive")
        if self.mode not in ("auto", "tree2d", "knn_highdim"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.exact_engine not in ("auto", "blossom", "bruteforce"):
            raise ValueError(f"unknown exact engine {self.exact_engine!r}")
        if self.ties not in ("seeded", "given"):
            raise ValueError(f"unknown tie policy {self.ties!r}")
        if self.r is not None and self.r < 0:
            raise ValueError("r must be nonnegative")

    @classmethod
    def quality(cls, **kw) -> "SolveConfig":
        """Loop threshold exponent 2/3: less reduction, larger exact tail."""
        return cls(threshold_exponent=2.0 / 3.0, **kw)

    def resolve(self, ps: PointSet) -> "SolveConfig":
        """Fill in ``mode`` and ``r`` for this point set."""
        mode = self.mode
        if mode == "auto":
            mode = "tree2d" if ps.dim == 2 and ps.metric.is_euclidean else "knn_highdim"
        r = self.r
        if r is None:
            r = 1000 if mode == "tree2d" else 3
        if mode == "knn_highdim" and r > KNN_MAX_R:
            raise ValueError(f"knn_highdim supports r <= {KNN_MAX_R}")
        return replace(self, mode=mode, r=r)


@dataclass
class IterationRecord:
    size_in: int
    size_out: int
    q: int
    odd_counts: list[int]
    even_counts: list[int]
    matching_length: float
    knn_exhausted: int = 0
    seconds: float = 0.0


@dataclass
class RunReport:
    n: int
    dim: int
    metric: str
    iterations: list[IterationRecord]
    exact_tail: dict
    total_length: float
    wall_times: dict
    config: dict

    @property
    def qs(self) -> list[int]:
        return [it.q for it in self.iterations]

    def matchings_bound(self) -> float:
        """Bound on the reduction matchings' total length, in units of the optimum.

        ``2 * z_t * prod_{i<t} y_i`` with ``y_i = 2q_i + 3`` and ``z_i = 2q_i + 2``;
        zero when no iteration ran.
        """
        if not self.iterations:
            return 0.0
        qs = self.qs
        return 2.0 * (2 * qs[-1] + 2) * math.prod(2 * q + 3 for q in qs[:-1])

    def ratio_bound(self) -> float:
        """Bound on the approximation ratio of the whole run.

        Adds the exact tail, whose optimum is at most ``prod_{i<=t} y_i`` times
        the global optimum, to :meth:`matchings_bound`.
        """
        return self.matchings_bound() + float(math.prod(2 * q + 3 for q in self.qs))

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "n": self.n,
            "dim": self.dim,
            "metric": self.metric,
            "iterations": [asdict(it) for it in self.iterations],
            "exact_tail": dict(self.exact_tail),
            "total_length": self.total_length,
            "wall_times": dict(self.wall_times),
            "config": dict(self.config),
            "bounds": {"matchings": self.matchings_bound(), "ratio": self.ratio_bound()},
        }


def _check_parity(n: int) -> None:
    if n == 0:
        raise OddCardinalityError("empty point set")
    if n % 2:
        raise OddCardinalityError(f"odd-cardinality input ({n} points)")


def solve(ps: PointSet, cfg: SolveConfig | None = None) -> tuple[Matching, RunReport]:
    """Perfect matching of ``ps`` by iterated node reduction and an exact tail."""
    cfg = (cfg or SolveConfig()).resolve(ps)
    n = ps.n
    _check_parity(n)
    if cfg.ties == "seeded":
        ps = ps.with_tie_order(np.random.default_rng(cfg.seed).permutation(n))
    sched = solve_schedule(cfg.r)
    limit = n ** (cfg.threshold_exponent - cfg.epsilon)

    t_start = time.perf_counter()
    active = np.arange(n, dtype=np.int64)
    parts: list[Matching] = []
    records: list[IterationRecord] = []
    while active.size > limit:
        t0 = time.perf_counter()
        res = node_reduction(ps, active, sched, cfg.mode)
        if res.residual.size >= active.size or res.residual.size % 2:
            raise AssertionError("node reduction must return a smaller even residual")
        parts.append(res.matched)
        records.append(
            IterationRecord(
                size_in=int(active.size),
                size_out=int(res.residual.size),
                q=res.rounds_q,
                odd_counts=res.odd_counts,
                even_counts=res.even_counts,
                matching_length=res.matched.length(ps),
                knn_exhausted=res.knn_exhausted,
                seconds=time.perf_counter() - t0,
            )
        )
        active = res.residual
    t_reduce = time.perf_counter()

    tail, tail_length = exact_matching(ps, active, engine=cfg.exact_engine, max_n=cfg.max_exact)
    parts.append(tail)
    t_end = time.perf_counter()

    matching = Matching.union(parts)
    if not matching.is_perfect_on(np.arange(n)):
        raise AssertionError("result is not a perfect matching")
    engine = cfg.exact_engine
    if engine == "auto":
        engine = "bruteforce" if active.size <= 10 else "blossom"
    report = RunReport(
        n=n,
        dim=ps.dim,
        metric=ps.metric.name,
        iterations=records,
        exact_tail={"size": int(active.size), "length": tail_length, "engine": engine},
        total_length=sum(r.matching_length for r in records) + tail_length,
        wall_times={
            "reduction": t_reduce - t_start,
            "exact_tail": t_end - t_reduce,
            "total": t_end - t_start,
        },
        config=asdict(cfg),
    )
    return matching, report


def approximation_ratio(ps: PointSet, cfg: SolveConfig | None = None, max_exact: int = 2000) -> float:
    """Length of :func:`solve`'s matching divided by the optimum."""
    _check_parity(ps.n)
    _, report = solve(ps, cfg)
    _, opt = exact_matching(ps, engine="auto", max_n=max_exact)
    if opt == 0:
        return 1.0
    return report.total_length / opt
