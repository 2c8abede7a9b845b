"""Even-forest heuristic: prune the spanning tree to even components and match them."""

from __future__ import annotations

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order

from .even_component import Matching, even_component_matching
from .geometry import OddCardinalityError, PointSet
from .proximity import ProximityGraph, emst


def even_edge_mask(tree: ProximityGraph) -> np.ndarray:
    """``True`` for tree edges whose removal leaves two even-sized parts."""
    n = tree.n
    if len(tree) != n - 1:
        raise ValueError("expects a spanning tree")
    if n <= 1:
        return np.zeros(0, dtype=bool)
    adj = coo_matrix((np.ones(len(tree)), (tree.u, tree.v)), shape=(n, n)).tocsr()
    order, parent = breadth_first_order(adj, 0, directed=False, return_predecessors=True)
    size = np.ones(n, dtype=np.int64)
    for x in order[:0:-1]:
        size[parent[x]] += size[x]
    # the child end of each edge is the endpoint whose parent is the other
    child = np.where(parent[tree.v] == tree.u, tree.v, tree.u)
    return size[child] % 2 == 0


def even_forest_baseline(ps: PointSet) -> tuple[Matching, float]:
    """Perfect matching from the spanning tree with its even edges removed."""
    n = ps.n
    if n == 0 or n % 2:
        raise OddCardinalityError(f"odd-cardinality input ({n} points)")
    tree = emst(ps)
    odd_edges = ~even_edge_mask(tree)
    m = even_component_matching(np.arange(n), tree.u[odd_edges], tree.v[odd_edges], ps)
    return m, m.length(ps)
