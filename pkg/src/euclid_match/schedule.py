"""Round thresholds for the node-reduction loop.

For ``r`` rounds the thresholds are ``x_{q+1} = (2q+3)**(1/c)`` for a common
exponent ``c = log 3 / log x_1``, and ``x_1`` is chosen so that the terminal
value ``3 / (1 - 2 * sum(1/x_i))`` also lies on that curve, i.e. equals
``(2r+3)**(1/c)``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

MAX_R = 5000
_LOG3 = math.log(3.0)


class ScheduleError(RuntimeError):
    """No root of the threshold equation inside the search bracket."""


@dataclass(frozen=True)
class Schedule:
    r: int
    xs: tuple[float, ...]
    x_terminal: float

    def __post_init__(self) -> None:
        if len(self.xs) != self.r:
            raise ValueError("len(xs) must equal r")
        if self.xs and self.xs[0] <= 2:
            raise ValueError("x_1 must exceed 2")
        if any(b <= a for a, b in zip(self.xs, self.xs[1:])):
            raise ValueError("thresholds must be strictly increasing")
        if 2 * sum(1.0 / x for x in self.xs) >= 1:
            raise ValueError("2 * sum(1/x_i) must be below 1")

    def threshold(self, q: int) -> float:
        """``x_{q+1}``: the round-``q`` threshold, or the terminal value when ``q == r``."""
        return self.xs[q] if q < self.r else self.x_terminal

    @property
    def exponent_ratio(self) -> float:
        """``log 3 / log x_1`` (1 when r == 0)."""
        return _LOG3 / math.log(self.threshold(0))

    def as_dict(self) -> dict:
        return {"r": self.r, "xs": list(self.xs), "x_terminal": self.x_terminal}


def _thresholds(x1: float, r: int) -> np.ndarray:
    # x_i = (2i+1)**(log x1 / log 3), i = 1..r+1
    a = math.log(x1) / _LOG3
    return np.exp(a * np.log(np.arange(3, 2 * r + 4, 2, dtype=np.float64)))


def terminal_from_sum(xs) -> float:
    s = 1.0 - 2.0 * float(np.sum(1.0 / np.asarray(xs, dtype=np.float64)))
    if s <= 0:
        return math.inf
    return 3.0 / s


def schedule_residual(x1: float, r: int) -> float:
    """Terminal value from the sum minus terminal value from the curve.

    Returns ``+inf`` when ``2 * sum(1/x_i) >= 1`` (infeasible ``x1``), which
    keeps the bisection bracket well defined.
    """
    if x1 <= 2:
        raise ValueError("x1 must exceed 2")
    if r < 0:
        raise ValueError("r must be nonnegative")
    xs = _thresholds(x1, r)
    return terminal_from_sum(xs[:r]) - float(xs[r])


@functools.lru_cache(maxsize=None)
def solve_schedule(r: int) -> Schedule:
    """Solve for ``x_1 .. x_r`` by bisection on ``x_1`` over ``[2 + 1e-9, 2r + 3]``."""
    if not 0 <= r <= MAX_R:
        raise ValueError(f"r must lie in 0..{MAX_R}")
    if r == 0:
        return Schedule(0, (), 3.0)
    lo, hi = 2.0 + 1e-9, float(2 * r + 3)
    f_lo, f_hi = schedule_residual(lo, r), schedule_residual(hi, r)
    if not (f_lo > 0 > f_hi):
        raise ScheduleError(f"residual does not change sign on [{lo}, {hi}] for r={r}")
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if schedule_residual(mid, r) > 0:
            lo = mid
        else:
            hi = mid
    x1 = 0.5 * (lo + hi)
    xs = _thresholds(x1, r)
    return Schedule(r, tuple(float(x) for x in xs[:r]), terminal_from_sum(xs[:r]))
