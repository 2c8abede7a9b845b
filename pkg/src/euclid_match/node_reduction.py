"""One node-reduction pass.

Starting from the nearest-neighbour forest, components are merged in rounds
(each odd component gains its cheapest leaving support edge) until few
enough odd components remain.  One leaf of every remaining odd component is
set aside as the residual; the even components left over are matched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .even_component import Matching, even_component_matching
from .geometry import PointSet
from .proximity import ProximityGraph, component_labels, edge_rank, emst, knn_graph, kruskal, nn_graph
from .schedule import Schedule

MODES = ("tree2d", "knn_highdim")


@dataclass(frozen=True, eq=False)
class ReductionResult:
    """Outcome of one pass, in the global indices of the input point set."""

    residual: np.ndarray
    matched: Matching
    rounds_q: int
    odd_counts: list[int]
    even_counts: list[int]
    knn_exhausted: int = 0
    graph_u: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    graph_v: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))


def _odd_mask(labels: np.ndarray, count: int) -> tuple[np.ndarray, np.ndarray]:
    sizes = np.bincount(labels, minlength=count)
    return sizes, (sizes % 2).astype(bool)


def _cheapest_leaving(labels: np.ndarray, served: np.ndarray, g: ProximityGraph, rank: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """For each served component, the minimum-rank edge of ``g`` leaving it.

    Returns the chosen edge indices (deduplicated, sorted) and the served
    components that had no leaving edge.
    """
    lu, lv = labels[g.u], labels[g.v]
    cross = np.flatnonzero(lu != lv)
    comp = np.concatenate([lu[cross], lv[cross]])
    eidx = np.concatenate([cross, cross])
    keep = served[comp]
    comp, eidx = comp[keep], eidx[keep]
    order = np.lexsort((rank[eidx], comp))
    comp, eidx = comp[order], eidx[order]
    first = np.ones(comp.size, dtype=bool)
    first[1:] = comp[1:] != comp[:-1]
    chosen = np.unique(eidx[first])
    missing = np.setdiff1d(np.flatnonzero(served), comp[first])
    return chosen, missing


def edges_from_tree(labels: np.ndarray, tree: ProximityGraph, rank: np.ndarray) -> np.ndarray:
    """Indices of ``tree`` edges: the minimum-rank leaving edge of every odd component.

    An edge chosen by two components appears once.
    """
    count = int(labels.max()) + 1 if labels.size else 0
    _, odd = _odd_mask(labels, count)
    chosen, missing = _cheapest_leaving(labels, odd, tree, rank)
    if missing.size:
        raise RuntimeError(f"odd component {int(missing[0])} has no leaving tree edge; tree does not span")
    return chosen


def edges_from_knn(labels: np.ndarray, knn: ProximityGraph, r: int, rank: np.ndarray) -> tuple[np.ndarray, int]:
    """Like :func:`edges_from_tree`, serving only odd components of size at most ``3**r``.

    Candidate edges come from the k-NN graph.  Returns the chosen edge
    indices and the number of served components with no leaving edge.
    """
    count = int(labels.max()) + 1 if labels.size else 0
    sizes, odd = _odd_mask(labels, count)
    served = odd & (sizes <= 3**r)
    chosen, missing = _cheapest_leaving(labels, served, knn, rank)
    return chosen, int(missing.size)


def leaf_of_component(vertices, edges, rank=None) -> int:
    """A leaf (degree at most one) of a tree component.

    The leaf chosen is the one first in ``rank`` (a map from vertex to tie
    rank); without ``rank`` that is the smallest index.
    """
    verts = [int(x) for x in vertices]
    if not verts:
        raise ValueError("empty component")
    deg = dict.fromkeys(verts, 0)
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    leaves = [x for x in verts if deg[x] <= 1]
    if not leaves:
        raise ValueError("component has no leaf; not a tree")
    key = (lambda x: rank[x]) if rank is not None else (lambda x: x)
    return min(leaves, key=key)


def _residual_leaves(m: int, u: np.ndarray, v: np.ndarray, added_round: np.ndarray, labels: np.ndarray, odd: np.ndarray, tie_rank: np.ndarray) -> np.ndarray:
    """One spanning-forest leaf per odd component, first in tie order.

    The spanning forest prefers edges added earlier, so it contains the whole
    nearest-neighbour forest.
    """
    in_forest = kruskal(m, u, v, added_round.astype(np.float64))
    deg = np.bincount(u[in_forest], minlength=m) + np.bincount(v[in_forest], minlength=m)
    cand = np.flatnonzero((deg <= 1) & odd[labels])
    cand = cand[np.lexsort((tie_rank[cand], labels[cand]))]
    _, first = np.unique(labels[cand], return_index=True)
    leaves = cand[first]
    if leaves.size != int(odd.sum()):
        raise AssertionError("every odd component must contribute one leaf")
    return leaves


def node_reduction(ps: PointSet, active: np.ndarray, sched: Schedule, mode: str = "tree2d") -> ReductionResult:
    """Split ``active`` into a residual set W and a perfect matching on the rest."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    active = np.asarray(active, dtype=np.int64)
    m = active.size
    if m == 0:
        raise ValueError("active set is empty")
    if m % 2:
        raise ValueError(f"active set has odd size {m}")
    sub = ps.subset(active)

    g0 = nn_graph(sub)
    u, v = g0.u, g0.v
    added_round = np.zeros(u.size, dtype=np.int64)
    count, labels = component_labels(m, u, v)
    sizes, odd = _odd_mask(labels, count)
    odd_counts = [int(odd.sum())]
    even_counts = [int(count - odd_counts[0])]

    support: ProximityGraph | None = None
    rank = None
    exhausted = 0
    q = 0
    while q < sched.r and odd_counts[-1] > m / sched.threshold(q):
        if support is None:
            if mode == "tree2d":
                support = emst(sub)
            else:
                support = knn_graph(sub, min(3**sched.r, m - 1))
            rank = edge_rank(support)
        if mode == "tree2d":
            chosen = edges_from_tree(labels, support, rank)
        else:
            chosen, missing = edges_from_knn(labels, support, sched.r, rank)
            exhausted += missing
        q += 1
        u = np.concatenate([u, support.u[chosen]])
        v = np.concatenate([v, support.v[chosen]])
        added_round = np.concatenate([added_round, np.full(chosen.size, q, dtype=np.int64)])
        count, labels = component_labels(m, u, v)
        sizes, odd = _odd_mask(labels, count)
        odd_counts.append(int(odd.sum()))
        even_counts.append(int(count - odd_counts[-1]))

    leaves = _residual_leaves(m, u, v, added_round, labels, odd, sub.rank)
    keep = np.ones(m, dtype=bool)
    keep[leaves] = False
    inner = keep[u] & keep[v]
    rest = np.flatnonzero(keep)
    matched_local = even_component_matching(rest, u[inner], v[inner], sub)
    if leaves.size % 2:
        raise AssertionError("residual set must have even size")

    return ReductionResult(
        residual=np.sort(active[leaves]),
        matched=Matching(active[matched_local.pairs]),
        rounds_q=q,
        odd_counts=odd_counts,
        even_counts=even_counts,
        knn_exhausted=exhausted,
        graph_u=active[u],
        graph_v=active[v],
    )
