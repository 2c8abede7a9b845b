"""Exhaustive minimum-weight perfect matching for tiny instances (the test oracle)."""

from __future__ import annotations

import functools

import numpy as np

MAX_N = 14


def brute_force_mwpm(w: np.ndarray) -> tuple[list[tuple[int, int]], float]:
    """Exact MWPM by search over all (n-1)!! perfect matchings.

    Subsets are memoised (the lowest unmatched vertex is always paired
    first), which visits the same matchings as plain enumeration without
    re-solving shared suffixes.  Among optimal matchings the
    lexicographically smallest pair list is returned.
    """
    w = np.asarray(w, dtype=np.float64)
    n = w.shape[0]
    if n % 2:
        raise ValueError("brute force needs an even number of points")
    if n > MAX_N:
        raise ValueError(f"brute force is limited to n <= {MAX_N}")
    if n == 0:
        return [], 0.0
    rows = w.tolist()

    @functools.lru_cache(maxsize=None)
    def best(mask: int) -> tuple[float, tuple[tuple[int, int], ...]]:
        if mask == 0:
            return 0.0, ()
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        best_cost, best_pairs = None, ()
        j_mask = rest
        while j_mask:
            j = (j_mask & -j_mask).bit_length() - 1
            j_mask &= j_mask - 1
            sub_cost, sub_pairs = best(rest & ~(1 << j))
            cost = rows[i][j] + sub_cost
            # strict comparison keeps the smallest partner on ties
            if best_cost is None or cost < best_cost:
                best_cost, best_pairs = cost, ((i, j),) + sub_pairs
        return best_cost, best_pairs

    cost, pairs = best((1 << n) - 1)
    return list(pairs), float(sum(rows[a][b] for a, b in pairs))
