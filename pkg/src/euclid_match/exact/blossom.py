"""Primal-dual blossom algorithm for minimum-weight perfect matching.

The core solves maximum-weight maximum-cardinality matching on a sparse
edge list in O(n^3) (Edmonds' algorithm with Gabow/Lawler style best-edge
bookkeeping).  Minimum-weight perfect matching uses weights ``C - w``.

Beyond a few dozen vertices :func:`blossom_mwpm` runs the core on a
k-nearest-neighbour candidate graph, warm-started from a greedy dual
solution, and then prices every pair of the complete graph against the
final duals.  Violated pairs are added
and the solve repeated, so the returned matching always carries a
certificate valid for the complete graph.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

DENSE_MAX_N = 5000
_CANDIDATE_K = 10
_COMPLETE_BELOW = 64


class CertificateError(RuntimeError):
    """The dual certificate failed to verify."""


class CapacityError(ValueError):
    """Instance exceeds the dense-matrix guard rail."""


@dataclass
class DualSolution:
    """Duals in the max-weight form: ``y_i + y_j + sum z_B >= C - w_ij``."""

    y: np.ndarray
    blossoms: list[tuple[np.ndarray, float]]  # (member vertices, z_B)
    offset: float  # the constant C


class _MaxWeightMatching:
    """Maximum-weight maximum-cardinality matching on an edge list.

    Vertex duals are stored doubled (``dualvar[v] = 2 y_v``) so that edge
    slack is ``dualvar[i] + dualvar[j] - 2 w``; blossom duals are stored as is.
    """

    def __init__(self, n: int, edges: list[tuple[int, int, float]]):
        self.n = n
        self.edges = edges
        m = len(edges)
        self.ei = [e[0] for e in edges]
        self.ej = [e[1] for e in edges]
        self.w2 = [2 * e[2] for e in edges]
        self.endpoint = [edges[p >> 1][p & 1] for p in range(2 * m)]
        self.neighbend: list[list[int]] = [[] for _ in range(n)]
        for k, (i, j, _w) in enumerate(edges):
            self.neighbend[i].append(2 * k + 1)
            self.neighbend[j].append(2 * k)
        maxweight = max((w for _i, _j, w in edges), default=0.0)
        maxweight = max(0.0, maxweight)
        self.mate = [-1] * n
        self.label = [0] * (2 * n)
        self.labelend = [-1] * (2 * n)
        self.inblossom = list(range(n))
        self.blossomparent = [-1] * (2 * n)
        self.blossomchilds: list[list[int] | None] = [None] * (2 * n)
        self.blossombase = list(range(n)) + [-1] * n
        self.blossomendps: list[list[int] | None] = [None] * (2 * n)
        self.bestedge = [-1] * (2 * n)
        self.blossombestedges: list[list[int] | None] = [None] * (2 * n)
        self.unusedblossoms = list(range(n, 2 * n))
        self.dualvar = [maxweight] * n + [0.0] * n
        self.allowedge = [False] * m
        self.queue: list[int] = []

    def slack(self, k: int) -> float:
        return self.dualvar[self.ei[k]] + self.dualvar[self.ej[k]] - self.w2[k]

    def jump_start(self, dual2: list[float], pairs: list[int]) -> None:
        """Start from feasible doubled vertex duals and a matching of tight edges (edge ids)."""
        self.dualvar[: self.n] = dual2
        for k in pairs:
            i, j = self.ei[k], self.ej[k]
            self.mate[i] = 2 * k + 1
            self.mate[j] = 2 * k

    def leaves(self, b: int):
        if b < self.n:
            yield b
            return
        stack = [b]
        while stack:
            t = stack.pop()
            if t < self.n:
                yield t
            else:
                stack.extend(reversed(self.blossomchilds[t]))

    def assign_label(self, w: int, t: int, p: int) -> None:
        while True:
            b = self.inblossom[w]
            self.label[w] = self.label[b] = t
            self.labelend[w] = self.labelend[b] = p
            self.bestedge[w] = self.bestedge[b] = -1
            if t == 1:
                self.queue.extend(self.leaves(b))
                return
            # t == 2: the mate of the base becomes an S-vertex
            base = self.blossombase[b]
            mp = self.mate[base]
            w, t, p = self.endpoint[mp], 1, mp ^ 1

    def scan_blossom(self, v: int, w: int) -> int:
        """Trace back from v and w; return the base of a new blossom or -1 (augmenting path)."""
        label, labelend, endpoint, inblossom = self.label, self.labelend, self.endpoint, self.inblossom
        path = []
        base = -1
        while v != -1 or w != -1:
            b = inblossom[v]
            if label[b] & 4:
                base = self.blossombase[b]
                break
            path.append(b)
            label[b] = 5
            if labelend[b] == -1:
                v = -1
            else:
                v = endpoint[labelend[b]]
                b = inblossom[v]
                v = endpoint[labelend[b]]
            if w != -1:
                v, w = w, v
        for b in path:
            label[b] = 1
        return base

    def add_blossom(self, base: int, k: int) -> None:
        v, w, _wt = self.edges[k]
        inblossom, labelend, endpoint = self.inblossom, self.labelend, self.endpoint
        bb = inblossom[base]
        bv = inblossom[v]
        bw = inblossom[w]
        b = self.unusedblossoms.pop()
        self.blossombase[b] = base
        self.blossomparent[b] = -1
        self.blossomparent[bb] = b
        path: list[int] = []
        endps: list[int] = []
        while bv != bb:
            self.blossomparent[bv] = b
            path.append(bv)
            endps.append(labelend[bv])
            v = endpoint[labelend[bv]]
            bv = inblossom[v]
        path.append(bb)
        path.reverse()
        endps.reverse()
        endps.append(2 * k)
        while bw != bb:
            self.blossomparent[bw] = b
            path.append(bw)
            endps.append(labelend[bw] ^ 1)
            w = endpoint[labelend[bw]]
            bw = inblossom[w]
        self.blossomchilds[b] = path
        self.blossomendps[b] = endps
        self.label[b] = 1
        labelend[b] = labelend[bb]
        self.dualvar[b] = 0.0
        for leaf in self.leaves(b):
            if self.label[inblossom[leaf]] == 2:
                self.queue.append(leaf)
            inblossom[leaf] = b
        # least-slack edges from the new blossom to each neighbouring S-blossom
        bestedgeto = {}
        slack = self.slack
        for sub in path:
            if self.blossombestedges[sub] is None:
                nblists = [[p >> 1 for p in self.neighbend[leaf]] for leaf in self.leaves(sub)]
            else:
                nblists = [self.blossombestedges[sub]]
            for nblist in nblists:
                for kk in nblist:
                    i, j, _w = self.edges[kk]
                    if inblossom[j] == b:
                        i, j = j, i
                    bj = inblossom[j]
                    if bj != b and self.label[bj] == 1:
                        cur = bestedgeto.get(bj, -1)
                        if cur == -1 or slack(kk) < slack(cur):
                            bestedgeto[bj] = kk
            self.blossombestedges[sub] = None
            self.bestedge[sub] = -1
        best_list = list(bestedgeto.values())
        self.blossombestedges[b] = best_list
        best = -1
        for kk in best_list:
            if best == -1 or slack(kk) < slack(best):
                best = kk
        self.bestedge[b] = best

    def expand_blossom(self, b: int, endstage: bool) -> None:
        n = self.n
        for s in self.blossomchilds[b]:
            self.blossomparent[s] = -1
            if s < n:
                self.inblossom[s] = s
            elif endstage and self.dualvar[s] == 0:
                self.expand_blossom(s, endstage)
            else:
                for leaf in self.leaves(s):
                    self.inblossom[leaf] = s
        if not endstage and self.label[b] == 2:
            # relabel the sub-blossoms on the even path through the expanded T-blossom
            childs = self.blossomchilds[b]
            endps = self.blossomendps[b]
            endpoint = self.endpoint
            entrychild = self.inblossom[endpoint[self.labelend[b] ^ 1]]
            j = childs.index(entrychild)
            if j & 1:
                j -= len(childs)
                jstep, endptrick = 1, 0
            else:
                jstep, endptrick = -1, 1
            p = self.labelend[b]
            while j != 0:
                self.label[endpoint[p ^ 1]] = 0
                self.label[endpoint[endps[j - endptrick] ^ endptrick ^ 1]] = 0
                self.assign_label(endpoint[p ^ 1], 2, p)
                self.allowedge[endps[j - endptrick] >> 1] = True
                j += jstep
                p = endps[j - endptrick] ^ endptrick
                self.allowedge[p >> 1] = True
                j += jstep
            bv = childs[j]
            self.label[endpoint[p ^ 1]] = self.label[bv] = 2
            self.labelend[endpoint[p ^ 1]] = self.labelend[bv] = p
            self.bestedge[bv] = -1
            j += jstep
            while childs[j] != entrychild:
                bv = childs[j]
                if self.label[bv] == 1:
                    j += jstep
                    continue
                reached = -1
                for leaf in self.leaves(bv):
                    if self.label[leaf] != 0:
                        reached = leaf
                        break
                if reached != -1:
                    self.label[reached] = 0
                    self.label[endpoint[self.mate[self.blossombase[bv]]]] = 0
                    self.assign_label(reached, 2, self.labelend[reached])
                j += jstep
        self.label[b] = self.labelend[b] = -1
        self.blossomchilds[b] = self.blossomendps[b] = None
        self.blossombase[b] = -1
        self.blossombestedges[b] = None
        self.bestedge[b] = -1
        self.unusedblossoms.append(b)

    def augment_blossom(self, b: int, v: int) -> None:
        n = self.n
        t = v
        while self.blossomparent[t] != b:
            t = self.blossomparent[t]
        if t >= n:
            self.augment_blossom(t, v)
        childs = self.blossomchilds[b]
        endps = self.blossomendps[b]
        endpoint = self.endpoint
        i = j = childs.index(t)
        if i & 1:
            j -= len(childs)
            jstep, endptrick = 1, 0
        else:
            jstep, endptrick = -1, 1
        while j != 0:
            j += jstep
            t = childs[j]
            p = endps[j - endptrick] ^ endptrick
            if t >= n:
                self.augment_blossom(t, endpoint[p])
            j += jstep
            t = childs[j]
            if t >= n:
                self.augment_blossom(t, endpoint[p ^ 1])
            self.mate[endpoint[p]] = p ^ 1
            self.mate[endpoint[p ^ 1]] = p
        self.blossomchilds[b] = childs[i:] + childs[:i]
        self.blossomendps[b] = endps[i:] + endps[:i]
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]]

    def augment_matching(self, k: int) -> None:
        v, w, _wt = self.edges[k]
        inblossom, labelend, endpoint = self.inblossom, self.labelend, self.endpoint
        n = self.n
        for s, p in ((v, 2 * k + 1), (w, 2 * k)):
            while True:
                bs = inblossom[s]
                if bs >= n:
                    self.augment_blossom(bs, s)
                self.mate[s] = p
                if labelend[bs] == -1:
                    break
                t = endpoint[labelend[bs]]
                bt = inblossom[t]
                s = endpoint[labelend[bt]]
                j = endpoint[labelend[bt] ^ 1]
                if bt >= n:
                    self.augment_blossom(bt, j)
                self.mate[j] = labelend[bt]
                p = labelend[bt] ^ 1

    def run(self) -> None:
        n = self.n
        label, inblossom, dualvar = self.label, self.inblossom, self.dualvar
        for _stage in range(n):
            for b in range(2 * n):
                label[b] = 0
                self.bestedge[b] = -1
            for b in range(n, 2 * n):
                self.blossombestedges[b] = None
            self.allowedge = [False] * len(self.edges)
            self.queue = []
            for v in range(n):
                if self.mate[v] == -1 and label[inblossom[v]] == 0:
                    self.assign_label(v, 1, -1)
            augmented = False
            while True:
                augmented = self._grow()
                if augmented:
                    break
                if not self._dual_step():
                    break
            if not augmented:
                break
            # end of stage: expand S-blossoms whose dual dropped to zero
            for b in range(n, 2 * n):
                if self.blossomparent[b] == -1 and self.blossombase[b] >= 0 and label[b] == 1 and dualvar[b] == 0:
                    self.expand_blossom(b, True)

    def _grow(self) -> bool:
        label, inblossom, endpoint, allowedge = self.label, self.inblossom, self.endpoint, self.allowedge
        bestedge, slack = self.bestedge, self.slack
        dualvar, ei, ej, w2 = self.dualvar, self.ei, self.ej, self.w2
        queue = self.queue
        while queue:
            v = queue.pop()
            bv = inblossom[v]
            for p in self.neighbend[v]:
                k = p >> 1
                w = endpoint[p]
                bw = inblossom[w]
                if bv == bw:
                    continue
                kslack = 0.0
                if not allowedge[k]:
                    kslack = dualvar[ei[k]] + dualvar[ej[k]] - w2[k]
                    if kslack <= 0:
                        allowedge[k] = True
                if allowedge[k]:
                    if label[bw] == 0:
                        self.assign_label(w, 2, p ^ 1)
                    elif label[bw] == 1:
                        base = self.scan_blossom(v, w)
                        if base >= 0:
                            self.add_blossom(base, k)
                            bv = inblossom[v]
                        else:
                            self.augment_matching(k)
                            return True
                    elif label[w] == 0:
                        label[w] = 2
                        self.labelend[w] = p ^ 1
                elif label[bw] == 1:
                    if bestedge[bv] == -1 or kslack < slack(bestedge[bv]):
                        bestedge[bv] = k
                elif label[w] == 0:
                    if bestedge[w] == -1 or kslack < slack(bestedge[w]):
                        bestedge[w] = k
        return False

    def _dual_step(self) -> bool:
        """Change the duals by the largest feasible delta; False when optimal."""
        n = self.n
        label, inblossom, dualvar = self.label, self.inblossom, self.dualvar
        bestedge, slack = self.bestedge, self.slack
        blossomparent, blossombase = self.blossomparent, self.blossombase
        deltatype = -1
        delta = 0.0
        deltaedge = deltablossom = -1
        for v in range(n):
            if label[inblossom[v]] == 0 and bestedge[v] != -1:
                d = slack(bestedge[v])
                if deltatype == -1 or d < delta:
                    delta, deltatype, deltaedge = d, 2, bestedge[v]
        for b in range(2 * n):
            if blossomparent[b] == -1 and label[b] == 1 and bestedge[b] != -1:
                d = slack(bestedge[b]) / 2
                if deltatype == -1 or d < delta:
                    delta, deltatype, deltaedge = d, 3, bestedge[b]
        for b in range(n, 2 * n):
            if blossombase[b] >= 0 and blossomparent[b] == -1 and label[b] == 2:
                if deltatype == -1 or dualvar[b] < delta:
                    delta, deltatype, deltablossom = dualvar[b], 4, b
        if deltatype == -1:
            # no further growth possible: maximum cardinality reached
            deltatype = 1
            delta = max(0.0, min(dualvar[:n]))
        for v in range(n):
            lb = label[inblossom[v]]
            if lb == 1:
                dualvar[v] -= delta
            elif lb == 2:
                dualvar[v] += delta
        for b in range(n, 2 * n):
            if blossombase[b] >= 0 and blossomparent[b] == -1:
                if label[b] == 1:
                    dualvar[b] += delta
                elif label[b] == 2:
                    dualvar[b] -= delta
        if deltatype == 1:
            return False
        if deltatype == 2:
            self.allowedge[deltaedge] = True
            i, j, _w = self.edges[deltaedge]
            if label[inblossom[i]] == 0:
                i, j = j, i
            self.queue.append(i)
        elif deltatype == 3:
            self.allowedge[deltaedge] = True
            i, _j, _w = self.edges[deltaedge]
            self.queue.append(i)
        else:
            self.expand_blossom(deltablossom, False)
        return True

    def mates(self) -> list[int]:
        return [self.endpoint[p] if p >= 0 else -1 for p in self.mate]

    def duals(self, offset: float) -> DualSolution:
        n = self.n
        y = np.asarray(self.dualvar[:n], dtype=np.float64) / 2
        blossoms = []
        for b in range(n, 2 * n):
            if self.blossombase[b] >= 0:
                blossoms.append((np.fromiter(self.leaves(b), dtype=np.int64), float(self.dualvar[b])))
        return DualSolution(y, blossoms, offset)


def _greedy_start(n: int, u: np.ndarray, v: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Feasible min-form duals ``y_u + y_v <= w_uv`` and a matching on tight edges."""
    y = np.full(n, np.inf)
    np.minimum.at(y, u, w)
    np.minimum.at(y, v, w)
    y = np.where(np.isfinite(y), y / 2, 0.0)
    adj: list[list[int]] = [[] for _ in range(n)]
    for k, (a, b) in enumerate(zip(u.tolist(), v.tolist())):
        adj[a].append(k)
        adj[b].append(k)
    ul, vl, wl = u.tolist(), v.tolist(), w.tolist()
    yl = y.tolist()
    mate = [-1] * n
    pairs: list[int] = []
    for a in range(n):
        if mate[a] != -1 or not adj[a]:
            continue
        best = min(wl[k] - yl[ul[k]] - yl[vl[k]] for k in adj[a])
        yl[a] += best
        for k in adj[a]:
            b = vl[k] if ul[k] == a else ul[k]
            if mate[b] == -1 and wl[k] - yl[a] - yl[b] <= 0:
                mate[a], mate[b] = b, a
                pairs.append(k)
                break
    return np.asarray(yl), pairs


def _solve_edges(n: int, u: np.ndarray, v: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, DualSolution]:
    offset = float(w.max()) if w.size else 0.0
    edges = list(zip(u.tolist(), v.tolist(), (offset - w).tolist()))
    core = _MaxWeightMatching(n, edges)
    y, pairs = _greedy_start(n, u, v, w)
    # max-form duals: Y = offset/2 - y, stored doubled
    core.jump_start((offset - 2 * y).tolist(), pairs)
    core.run()
    return np.asarray(core.mates(), dtype=np.int64), core.duals(offset)


def reduced_costs(w: np.ndarray, duals: DualSolution) -> np.ndarray:
    """Slack of every pair under the dual solution (diagonal set to +inf)."""
    y = duals.y
    s = y[:, None] + y[None, :] - (duals.offset - w)
    for members, z in duals.blossoms:
        if z != 0:
            s[np.ix_(members, members)] += z
    np.fill_diagonal(s, np.inf)
    return s


def verify_certificate(w: np.ndarray, mate: np.ndarray, duals: DualSolution, tol: float) -> None:
    """Check primal/dual feasibility and complementary slackness on the complete graph."""
    n = w.shape[0]
    if np.any(mate < 0) or not np.array_equal(mate[mate], np.arange(n)):
        raise CertificateError("matching is not perfect")
    s = reduced_costs(w, duals)
    if s.min() < -tol:
        raise CertificateError(f"dual infeasible: min slack {s.min():.3e}")
    matched = s[np.arange(n), mate]
    if np.abs(matched).max() > tol:
        raise CertificateError(f"matched edge not tight: {np.abs(matched).max():.3e}")
    for members, z in duals.blossoms:
        if z < -tol:
            raise CertificateError(f"negative blossom dual {z:.3e}")
        inside = np.isin(mate[members], members).sum()
        if z > tol and inside != members.size - 1:
            raise CertificateError("positive blossom dual on a non-full blossom")


def _pairs_from_mate(mate: np.ndarray) -> list[tuple[int, int]]:
    return [(i, int(j)) for i, j in enumerate(mate.tolist()) if i < j]


def blossom_mwpm(w: np.ndarray, candidate_k: int | None = None) -> tuple[list[tuple[int, int]], float]:
    """Exact minimum-weight perfect matching of a complete graph given by ``w``.

    The certificate is checked with tolerance ``1e-7 * max(w)`` before
    returning; :class:`CertificateError` signals a failed check.
    """
    w = np.asarray(w, dtype=np.float64)
    n = w.shape[0]
    if w.shape != (n, n):
        raise ValueError("weight matrix must be square")
    if n % 2:
        raise ValueError("perfect matching needs an even number of vertices")
    if n == 0:
        return [], 0.0
    if n > DENSE_MAX_N:
        raise CapacityError(f"n={n} exceeds the dense limit {DENSE_MAX_N}")
    if not np.allclose(w, w.T, rtol=0, atol=0) or np.any(np.diag(w) != 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite, symmetric, zero on the diagonal")
    scale = max(float(w.max()), 1e-300)
    price_tol = 1e-9 * scale
    k = _CANDIDATE_K if candidate_k is None else candidate_k
    if n <= _COMPLETE_BELOW or k >= n - 1:
        cand = np.triu(np.ones((n, n), dtype=bool), 1)
    else:
        nearest = np.argsort(w + np.diag(np.full(n, np.inf)), axis=1, kind="stable")[:, :k]
        cand = np.zeros((n, n), dtype=bool)
        cand[np.repeat(np.arange(n), k), nearest.ravel()] = True
        cand = np.triu(cand | cand.T, 1)
    while True:
        u, v = np.nonzero(cand)
        mate, duals = _solve_edges(n, u, v, w[u, v])
        if np.any(mate < 0):
            # candidate graph has no perfect matching: widen it
            k = min(n - 1, 2 * k)
            log.debug("candidate graph not perfect, widening to k=%d", k)
            nearest = np.argsort(w + np.diag(np.full(n, np.inf)), axis=1, kind="stable")[:, :k]
            more = np.zeros((n, n), dtype=bool)
            more[np.repeat(np.arange(n), k), nearest.ravel()] = True
            cand |= np.triu(more | more.T, 1)
            continue
        s = reduced_costs(w, duals)
        viol = np.triu(s < -price_tol, 1) & ~cand
        if not viol.any():
            break
        log.debug("pricing added %d edges", int(viol.sum()))
        cand |= viol
    verify_certificate(w, mate, duals, 1e-7 * scale)
    pairs = _pairs_from_mate(mate)
    return pairs, float(sum(w[a, b] for a, b in pairs))
