"""Matchings from even connected components.

Each even component is doubled, walked as an Euler circuit, shortcut to a
Hamiltonian cycle, and the lighter of the cycle's two alternating edge
classes is kept.  Doubling a connected graph makes every degree even, so the
routine accepts components with cycles as well as trees.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .geometry import PointSet
from .proximity import component_labels


class OddComponentError(ValueError):
    """A component handed to the even-component routine has odd size."""


@dataclass(frozen=True, eq=False)
class Matching:
    """Vertex-disjoint pairs of point indices, stored as an ``(m, 2)`` array."""

    pairs: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        if np.any(p[:, 0] == p[:, 1]):
            raise ValueError("a pair cannot match a point with itself")
        flat = p.ravel()
        if np.unique(flat).size != flat.size:
            raise ValueError("pairs are not vertex-disjoint")
        p = np.sort(p, axis=1)
        p = p[np.lexsort((p[:, 1], p[:, 0]))]
        p.setflags(write=False)
        object.__setattr__(self, "pairs", p)

    @classmethod
    def empty(cls) -> "Matching":
        return cls(np.zeros((0, 2), dtype=np.int64))

    @classmethod
    def union(cls, parts: Iterable["Matching"]) -> "Matching":
        arrs = [m.pairs for m in parts]
        if not arrs:
            return cls.empty()
        return cls(np.concatenate(arrs, axis=0))

    def __len__(self) -> int:
        return int(self.pairs.shape[0])

    @property
    def covered(self) -> np.ndarray:
        return np.sort(self.pairs.ravel())

    def length(self, ps: PointSet) -> float:
        return float(ps.distances(self.pairs[:, 0], self.pairs[:, 1]).sum())

    def is_perfect_on(self, vertices: Sequence[int] | np.ndarray) -> bool:
        return np.array_equal(self.covered, np.sort(np.asarray(vertices, dtype=np.int64)))

    def as_list(self) -> list[tuple[int, int]]:
        return [(int(a), int(b)) for a, b in self.pairs]


def euler_circuit(edges: Sequence[tuple[int, int]], start: int | None = None) -> list[int]:
    """Closed walk using every edge of a connected multigraph once (Hierholzer).

    ``edges`` may contain parallel copies.  The walk starts and ends at
    ``start`` (default: the smallest vertex).  Neighbours are tried in
    increasing order, which makes the result deterministic.
    """
    if not edges:
        if start is None:
            raise ValueError("empty multigraph needs an explicit start vertex")
        return [start]
    adj: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for eid, (a, b) in enumerate(edges):
        adj[a].append((b, eid))
        adj[b].append((a, eid))
    for vertex, nbrs in adj.items():
        if len(nbrs) % 2:
            raise ValueError(f"vertex {vertex} has odd degree {len(nbrs)}")
        # popped from the end, so store in decreasing order
        nbrs.sort(reverse=True)
    if start is None:
        start = min(adj)
    elif start not in adj:
        raise ValueError(f"start vertex {start} has no edges")
    used = [False] * len(edges)
    stack = [start]
    circuit: list[int] = []
    while stack:
        v = stack[-1]
        nbrs = adj[v]
        while nbrs and used[nbrs[-1][1]]:
            nbrs.pop()
        if nbrs:
            w, eid = nbrs.pop()
            used[eid] = True
            stack.append(w)
        else:
            circuit.append(stack.pop())
    if len(circuit) != len(edges) + 1:
        raise ValueError("multigraph is not connected")
    circuit.reverse()
    return circuit


def shortcut(circuit: Sequence[int]) -> list[int]:
    """Drop every repeated visit from a closed walk, keeping first occurrences.

    The closing return to the start vertex is dropped too, so the result
    lists each vertex once and is read cyclically.
    """
    seen: set[int] = set()
    cycle: list[int] = []
    for v in circuit:
        if v not in seen:
            seen.add(v)
            cycle.append(v)
    return cycle


def lighter_half(cycle: Sequence[int], ps: PointSet) -> Matching:
    """The lighter of the two perfect matchings alternating around ``cycle``.

    On a tie the class containing the cycle's first edge wins.
    """
    k = len(cycle)
    if k < 2 or k % 2:
        raise ValueError(f"cycle must have even length >= 2, got {k}")
    c = np.asarray(cycle, dtype=np.int64)
    if k == 2:
        return Matching(c.reshape(1, 2))
    nxt = np.roll(c, -1)
    lengths = ps.distances(c, nxt)
    first, second = lengths[0::2].sum(), lengths[1::2].sum()
    if first <= second:
        return Matching(np.stack([c[0::2], nxt[0::2]], axis=1))
    return Matching(np.stack([c[1::2], nxt[1::2]], axis=1))


def component_matching(vertices: Sequence[int], edges: Sequence[tuple[int, int]], ps: PointSet) -> Matching:
    """Double the edges of one even connected component and match it."""
    if len(vertices) % 2:
        raise OddComponentError(f"component of odd size {len(vertices)}")
    if len(vertices) == 2:
        return Matching(np.asarray([vertices], dtype=np.int64))
    doubled = [e for e in edges for _ in (0, 1)]
    circuit = euler_circuit(doubled, start=min(vertices))
    return lighter_half(shortcut(circuit), ps)


def even_component_matching(
    vertices: Sequence[int] | np.ndarray,
    u: np.ndarray,
    v: np.ndarray,
    ps: PointSet,
) -> Matching:
    """Perfect matching on ``vertices`` built component by component.

    ``(u, v)`` are edges between global point indices, all with both ends in
    ``vertices``.  Every connected component must have even size; within a
    component the matched length never exceeds the component's edge length.
    """
    verts = np.asarray(vertices, dtype=np.int64)
    if verts.size == 0:
        return Matching.empty()
    local = {int(g): i for i, g in enumerate(verts.tolist())}
    lu = np.fromiter((local[int(a)] for a in u), dtype=np.int64, count=len(u))
    lv = np.fromiter((local[int(b)] for b in v), dtype=np.int64, count=len(v))
    count, labels = component_labels(verts.size, lu, lv)
    sizes = np.bincount(labels, minlength=count)
    if np.any(sizes % 2):
        bad = int(np.flatnonzero(sizes % 2)[0])
        raise OddComponentError(f"component {bad} has odd size {int(sizes[bad])}")

    parts: list[np.ndarray] = []
    # pairs need no Euler tour
    pair_comp = sizes[labels[lu]] == 2
    if np.any(pair_comp):
        parts.append(np.stack([verts[lu[pair_comp]], verts[lv[pair_comp]]], axis=1))
    big = np.flatnonzero(sizes > 2)
    if big.size:
        edge_comp = labels[lu]
        by_comp_edges: dict[int, list[tuple[int, int]]] = defaultdict(list)
        sel = np.flatnonzero(sizes[edge_comp] > 2)
        for c, a, b in zip(edge_comp[sel].tolist(), verts[lu[sel]].tolist(), verts[lv[sel]].tolist()):
            by_comp_edges[c].append((a, b))
        by_comp_verts: dict[int, list[int]] = defaultdict(list)
        vsel = np.flatnonzero(sizes[labels] > 2)
        for c, g in zip(labels[vsel].tolist(), verts[vsel].tolist()):
            by_comp_verts[c].append(g)
        for c in big.tolist():
            parts.append(component_matching(by_comp_verts[c], by_comp_edges[c], ps).pairs)
    return Matching(np.concatenate(parts, axis=0) if parts else np.zeros((0, 2), dtype=np.int64))
