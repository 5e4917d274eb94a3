"""Exact reference values: optimal/minimal matchings and exact expectations."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import Instance, Matching

MAX_RSD_EXACT_N = 12
MAX_BRUTE_FORCE_N = 10


@dataclass(frozen=True)
class OracleReport:
    opt_weight: float
    min_weight: float
    opt_matching: Matching
    min_matching: Matching

    def to_dict(self) -> dict:
        return {
            "opt_weight": self.opt_weight,
            "min_weight": self.min_weight,
            "opt_matching": {"pairs": [list(p) for p in self.opt_matching.pairs], "weight": self.opt_weight},
            "min_matching": {"pairs": [list(p) for p in self.min_matching.pairs], "weight": self.min_weight},
        }


def _assignment(inst: Instance, maximize: bool) -> tuple[Matching, float]:
    rows, cols = linear_sum_assignment(inst.weights, maximize=maximize)
    m = Matching(tuple(zip(rows.tolist(), cols.tolist())), inst.n)
    return m, math.fsum(inst.weights[rows, cols].tolist())


def opt_matching(inst: Instance) -> tuple[Matching, float]:
    """Maximum-weight perfect matching."""
    return _assignment(inst, maximize=True)


def min_matching(inst: Instance) -> tuple[Matching, float]:
    return _assignment(inst, maximize=False)


def oracle_report(inst: Instance) -> OracleReport:
    om, ow = opt_matching(inst)
    mm, mw = min_matching(inst)
    return OracleReport(ow, mw, om, mm)


def brute_force_opt(inst: Instance) -> float:
    """Max over all n! perfect matchings; cross-check for :func:`opt_matching`."""
    n = inst.n
    if n > MAX_BRUTE_FORCE_N:
        raise ValueError(f"brute force limited to n <= {MAX_BRUTE_FORCE_N}, got {n}")
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int8)
    totals = inst.weights[np.arange(n), perms].sum(axis=1)
    return float(totals.max())


def exact_random_expectation(inst: Instance) -> float:
    """E[w] of a uniformly random perfect matching: total weight / n."""
    return math.fsum(inst.weights.ravel().tolist()) / inst.n


def _favourite(w: np.ndarray, x: int, ys_mask: int) -> int:
    # heaviest remaining y, ties to the lower index
    best, best_w = -1, -math.inf
    y, m = 0, ys_mask
    while m:
        if m & 1 and w[x, y] > best_w:
            best, best_w = y, w[x, y]
        m >>= 1
        y += 1
    return best


def _residual_mean_matching(w: np.ndarray, xs_mask: int, ys_mask: int) -> float:
    xs = [i for i in range(w.shape[0]) if xs_mask >> i & 1]
    if not xs:
        return 0.0
    ys = [j for j in range(w.shape[0]) if ys_mask >> j & 1]
    return float(w[np.ix_(xs, ys)].sum()) / len(xs)


def exact_rsd_expectation(inst: Instance, rounds: int | None = None) -> float:
    """Exact expected weight of RSD run for ``rounds`` dictator rounds (all
    by default), followed by a uniformly random completion.

    Memoised on the (remaining X, remaining Y) bitmask pair."""
    n = inst.n
    if n > MAX_RSD_EXACT_N:
        raise ValueError(f"exact RSD expectation limited to n <= {MAX_RSD_EXACT_N}, got {n}")
    rounds = n if rounds is None else rounds
    if not 0 <= rounds <= n:
        raise ValueError(f"rounds must lie in [0, {n}], got {rounds}")
    w = inst.weights
    full = (1 << n) - 1

    @lru_cache(maxsize=None)
    def value(xs_mask: int, ys_mask: int, left: int) -> float:
        if xs_mask == 0:
            return 0.0
        if left == 0:
            return _residual_mean_matching(w, xs_mask, ys_mask)
        total, count = 0.0, 0
        for x in range(n):
            if xs_mask >> x & 1:
                y = _favourite(w, x, ys_mask)
                total += w[x, y] + value(xs_mask & ~(1 << x), ys_mask & ~(1 << y), left - 1)
                count += 1
        return total / count

    return value(full, full, rounds)


def rsd_order_enumeration(inst: Instance, rounds: int | None = None) -> tuple[float, list[float], float]:
    """Brute force over all n! dictator orders.

    Returns (expected total weight, expected weight picked in each of the
    first ``rounds`` rounds, expected average edge weight of the residual
    graph left after those rounds; nan when nothing is left)."""
    n = inst.n
    if n > 8:
        raise ValueError("order enumeration limited to n <= 8")
    rounds = n if rounds is None else rounds
    w = inst.weights
    per_round = np.zeros(rounds)
    total = 0.0
    avg_residual = 0.0
    count = 0
    for order in itertools.permutations(range(n)):
        free_y = list(range(n))
        picked = 0.0
        for r, x in enumerate(order[:rounds]):
            y = max(free_y, key=lambda j: (w[x, j], -j))
            free_y.remove(y)
            per_round[r] += w[x, y]
            picked += w[x, y]
        rest_x = sorted(order[rounds:])
        if rest_x:
            block = w[np.ix_(rest_x, free_y)]
            picked += block.sum() / len(rest_x)
            avg_residual += block.mean()
        total += picked
        count += 1
    mean_resid = float(avg_residual / count) if rounds < n else math.nan
    return float(total / count), (per_round / count).tolist(), mean_resid
