"""Checks of the guarantees one node-reduction pass is supposed to meet.

Shared by the ``verify`` subcommand and the test suite.  Every check returns
a :class:`Check` rather than raising, so callers can report all of them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .even_component import Matching
from .exact import exact_matching
from .geometry import PointSet
from .node_reduction import ReductionResult, node_reduction
from .proximity import component_labels, nn_graph
from .schedule import Schedule

REL_TOL = 1e-9


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}: {self.detail}"


def _le(a: float, b: float) -> bool:
    return a <= b * (1 + REL_TOL) + 1e-12


def component_lengths(ps: PointSet, vertices: np.ndarray, u: np.ndarray, v: np.ndarray, matching: Matching) -> tuple[np.ndarray, np.ndarray]:
    """Per component of the graph ``(vertices, u-v)``: matched length and edge length."""
    verts = np.asarray(vertices, dtype=np.int64)
    pos = np.full(ps.n, -1, dtype=np.int64)
    pos[verts] = np.arange(verts.size)
    count, labels = component_labels(verts.size, pos[u], pos[v])
    edge_len = np.bincount(labels[pos[u]], weights=ps.distances(u, v), minlength=count)
    p = matching.pairs
    match_len = np.bincount(labels[pos[p[:, 0]]], weights=ps.distances(p[:, 0], p[:, 1]), minlength=count)
    return match_len, edge_len


def reduction_checks(
    ps: PointSet,
    active: np.ndarray,
    sched: Schedule,
    mode: str,
    optimum: Callable[[np.ndarray], float] | None = None,
    result: ReductionResult | None = None,
) -> list[Check]:
    """Run one pass on ``active`` and check it.

    Structural checks always run.  The length bounds need ``optimum``, a
    function returning the optimal perfect-matching length of an index set.
    """
    active = np.asarray(active, dtype=np.int64)
    res = result if result is not None else node_reduction(ps, active, sched, mode)
    m = active.size
    checks: list[Check] = []

    covered = np.concatenate([res.residual, res.matched.covered])
    ok = np.array_equal(np.sort(covered), np.sort(active))
    checks.append(Check("partition", ok, f"|W|={res.residual.size}, |M|={len(res.matched)}"))
    checks.append(Check("residual_count", res.residual.size == res.odd_counts[-1],
                        f"|W|={res.residual.size}, odd={res.odd_counts[-1]}"))
    monotone = all(b <= a for a, b in zip(res.odd_counts, res.odd_counts[1:]))
    checks.append(Check("odd_count_monotone", monotone, f"odd_counts={res.odd_counts}"))

    q = res.rounds_q
    bound = m / sched.threshold(q)
    checks.append(Check("residual_bound", res.residual.size <= bound * (1 + REL_TOL),
                        f"|W|={res.residual.size} <= {bound:.6g} (q={q})"))

    keep = np.ones(ps.n, dtype=bool)
    keep[res.residual] = False
    inner = keep[res.graph_u] & keep[res.graph_v]
    rest = res.matched.covered
    if rest.size:
        match_len, edge_len = component_lengths(ps, rest, res.graph_u[inner], res.graph_v[inner], res.matched)
        bad = int(np.sum(match_len > edge_len * (1 + REL_TOL) + 1e-12))
        checks.append(Check("component_matching_length", bad == 0, f"{bad} of {match_len.size} components exceed their edge length"))

    if optimum is not None:
        opt = optimum(active)
        sub = ps.subset(active)
        nn_len = nn_graph(sub).total_length()
        checks.append(Check("nn_forest_length", _le(nn_len, 2 * opt), f"{nn_len:.9g} <= 2 * {opt:.9g}"))
        m_len = res.matched.length(ps)
        checks.append(Check("matching_length", _le(m_len, (2 * q + 2) * opt), f"{m_len:.9g} <= {2 * q + 2} * {opt:.9g}"))
        if res.residual.size >= 2:
            w_opt = optimum(res.residual)
            checks.append(Check("residual_optimum", _le(w_opt, (2 * q + 3) * opt), f"{w_opt:.9g} <= {2 * q + 3} * {opt:.9g}"))
    return checks


def exact_optimum(ps: PointSet, max_n: int = 2000) -> Callable[[np.ndarray], float]:
    """``optimum`` callback for :func:`reduction_checks` backed by the exact solvers."""

    def opt(indices: np.ndarray) -> float:
        return exact_matching(ps, indices, engine="auto", max_n=max_n)[1]

    return opt
