"""Nearest-neighbour forest, k-nearest-neighbour graph and Euclidean MST.

A kd-tree proposes candidates; final neighbour choices are made on exact
distances from :meth:`Metric.rows` with distance ties resolved by the point
set's tie order.  Rows whose candidate list might be missing a tied point
are re-queried with a larger window until the window provably covers them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, minimum_spanning_tree
from scipy.spatial import Delaunay, QhullError, cKDTree

from .geometry import PointSet

log = logging.getLogger(__name__)

# relative slack between kd-tree distances and exact distances
_REL = 1e-9


class Edge(NamedTuple):
    u: int
    v: int
    length: float


@dataclass(frozen=True, eq=False)
class ProximityGraph:
    """Undirected simple graph on ``0..n-1`` stored as parallel arrays, ``u < v``."""

    n: int
    u: np.ndarray
    v: np.ndarray
    length: np.ndarray
    kind: str  # "nn", "knn", "emst"
    k: int | None = None
    approximate: bool = False

    def __len__(self) -> int:
        return int(self.u.size)

    def edges(self) -> Iterator[Edge]:
        for a, b, w in zip(self.u.tolist(), self.v.tolist(), self.length.tolist()):
            yield Edge(a, b, w)

    def edge_set(self) -> set[tuple[int, int]]:
        return set(zip(self.u.tolist(), self.v.tolist()))

    def total_length(self) -> float:
        return float(self.length.sum())

    def components(self) -> tuple[int, np.ndarray]:
        return component_labels(self.n, self.u, self.v)

    def to_text(self) -> str:
        return "".join(f"{a} {b} {w!r}\n" for a, b, w in self.edges())


def component_labels(n: int, u: np.ndarray, v: np.ndarray) -> tuple[int, np.ndarray]:
    """Connected components of the graph with edges ``(u[i], v[i])``."""
    if n == 0:
        return 0, np.zeros(0, dtype=np.int64)
    adj = coo_matrix((np.ones(len(u), dtype=np.int8), (u, v)), shape=(n, n))
    count, labels = connected_components(adj, directed=False)
    return int(count), labels.astype(np.int64)


def _canonical(n: int, a: np.ndarray, b: np.ndarray, ps: PointSet, kind: str, **kw) -> ProximityGraph:
    lo = np.minimum(a, b).astype(np.int64)
    hi = np.maximum(a, b).astype(np.int64)
    keep = lo != hi
    key = np.unique(lo[keep] * n + hi[keep])
    u, v = key // n, key % n
    return ProximityGraph(n, u, v, ps.distances(u, v), kind, **kw)


def k_nearest(ps: PointSet, k: int) -> tuple[np.ndarray, np.ndarray]:
    """The ``k`` nearest other points of every point.

    Returns ``(idx, dist)``, both ``(n, k)``, each row sorted by
    ``(distance, tie rank)``.
    """
    n = ps.n
    if not 1 <= k <= n - 1:
        raise ValueError(f"need 1 <= k <= n-1 (k={k}, n={n})")
    X = ps.coords
    tree = cKDTree(X)
    p = ps.metric.p
    out_idx = np.empty((n, k), dtype=np.int64)
    out_dist = np.empty((n, k))
    todo = np.arange(n)
    window = min(n, k + 1 + 4)
    while todo.size:
        kd_d, cand = tree.query(X[todo], k=window, p=p)
        cand = np.asarray(cand, dtype=np.int64).reshape(todo.size, window)
        kd_d = np.asarray(kd_d).reshape(todo.size, window)
        rows = np.repeat(todo, window)
        exact = ps.metric.rows(X[rows], X[cand.ravel()]).reshape(todo.size, window)
        exact[cand == todo[:, None]] = np.inf
        order = np.lexsort((ps.rank[cand], exact), axis=-1)
        cand = np.take_along_axis(cand, order, axis=1)[:, :k]
        exact = np.take_along_axis(exact, order, axis=1)[:, :k]
        kth = exact[:, -1]
        # safe when every point outside the window is strictly farther than the k-th pick
        safe = np.full(todo.size, window >= n) | (kd_d[:, -1] > kth * (1 + _REL))
        out_idx[todo[safe]] = cand[safe]
        out_dist[todo[safe]] = exact[safe]
        todo = todo[~safe]
        window = min(n, 2 * window)
    return out_idx, out_dist


def nn_graph(ps: PointSet) -> ProximityGraph:
    """Nearest-neighbour forest: every point joined to its tie-broken nearest neighbour."""
    if ps.n < 2:
        raise ValueError("nearest-neighbour graph needs at least 2 points")
    idx, _ = k_nearest(ps, 1)
    return _canonical(ps.n, np.arange(ps.n), idx[:, 0], ps, "nn", k=1)


def knn_graph(ps: PointSet, k: int) -> ProximityGraph:
    """Union over all points of the edges to their ``k`` nearest neighbours."""
    if k < 1:
        raise ValueError("k must be positive")
    if ps.n <= k:
        raise ValueError(f"k-NN graph needs n > k (n={ps.n}, k={k})")
    idx, _ = k_nearest(ps, k)
    src = np.repeat(np.arange(ps.n), k)
    return _canonical(ps.n, src, idx.ravel(), ps, "knn", k=k)


def edge_rank(g: ProximityGraph) -> np.ndarray:
    """Rank 1..|E| of every edge of ``g`` by ``(length, u, v)``."""
    order = np.lexsort((g.v, g.u, g.length))
    rank = np.empty(len(g), dtype=np.int64)
    rank[order] = np.arange(1, len(g) + 1)
    return rank


def kruskal(n: int, u: np.ndarray, v: np.ndarray, length: np.ndarray) -> np.ndarray:
    """Minimum spanning forest under the strict order ``(length, u, v)``.

    Returns a boolean mask over the input edges.  Ranks are fed to the
    sparse MST routine as weights: they are distinct and positive, so the
    forest is unique and zero-length edges are not dropped.
    """
    m = len(u)
    if m == 0:
        return np.zeros(0, dtype=bool)
    order = np.lexsort((v, u, length))
    rank = np.empty(m, dtype=np.float64)
    rank[order] = np.arange(1, m + 1)
    mat = coo_matrix((rank, (u, v)), shape=(n, n)).tocsr()
    tree = minimum_spanning_tree(mat).tocoo()
    chosen = np.zeros(m, dtype=bool)
    chosen[order[tree.data.astype(np.int64) - 1]] = True
    return chosen


def _delaunay_candidates(X: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
    """Delaunay edges of distinct 2-D points, or the sorted path if collinear."""
    m = X.shape[0]
    if m <= 3:
        a, b = np.triu_indices(m, 1)
        return a, b
    try:
        tri = Delaunay(X)
    except QhullError:
        centred = X - X.mean(axis=0)
        s = np.linalg.svd(centred, compute_uv=False)
        if s[1] > 1e-12 * max(s[0], 1e-300):
            return None
        direction = np.linalg.svd(centred)[2][0]
        order = np.argsort(centred @ direction, kind="stable")
        return order[:-1], order[1:]
    simp = tri.simplices
    a = np.concatenate([simp[:, 0], simp[:, 1], simp[:, 2]])
    b = np.concatenate([simp[:, 1], simp[:, 2], simp[:, 0]])
    return a, b


def emst(ps: PointSet) -> ProximityGraph:
    """Minimum spanning tree of the complete geometric graph.

    In 2-D under L2 the candidate edges are the Delaunay edges of the
    distinct points plus zero-length edges from duplicates to their
    representative.  Otherwise the tree is built from k-NN candidates and
    flagged ``approximate`` (diagnostics only).
    """
    n = ps.n
    if n <= 1:
        z = np.zeros(0, dtype=np.int64)
        return ProximityGraph(n, z, z, np.zeros(0), "emst")
    if ps.dim == 2 and ps.metric.is_euclidean:
        uniq, first, inverse = np.unique(ps.coords, axis=0, return_index=True, return_inverse=True)
        inverse = inverse.ravel()
        # representative of each distinct location: its smallest index
        rep = np.full(len(uniq), n, dtype=np.int64)
        np.minimum.at(rep, inverse, np.arange(n))
        cand = _delaunay_candidates(uniq)
        if cand is not None:
            a, b = rep[cand[0]], rep[cand[1]]
            dup = np.flatnonzero(rep[inverse] != np.arange(n))
            a = np.concatenate([a, dup])
            b = np.concatenate([b, rep[inverse[dup]]])
            g = _canonical(n, a, b, ps, "emst")
            return _tree_from(g, ps, approximate=False)
        log.warning("Delaunay triangulation failed; falling back to k-NN candidates")
    return _approximate_emst(ps)


def _tree_from(g: ProximityGraph, ps: PointSet, approximate: bool) -> ProximityGraph:
    keep = kruskal(g.n, g.u, g.v, g.length)
    return ProximityGraph(g.n, g.u[keep], g.v[keep], g.length[keep], "emst", approximate=approximate)


def _approximate_emst(ps: PointSet) -> ProximityGraph:
    n = ps.n
    k = min(n - 1, 16)
    while True:
        g = knn_graph(ps, k)
        tree = _tree_from(g, ps, approximate=True)
        if len(tree) == n - 1:
            return tree
        if k == n - 1:  # pragma: no cover - complete graph is always connected
            raise RuntimeError("complete graph yielded no spanning tree")
        k = min(n - 1, 2 * k)
