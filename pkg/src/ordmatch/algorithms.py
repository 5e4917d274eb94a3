"""Ordinal matching algorithms.

Every algorithm takes a view (never an :class:`~ordmatch.core.Instance`)
and an :class:`~ordmatch.rng.Rng`, and all of them run through the batch
kernels in :mod:`ordmatch._kernels`; a single call is a batch of one.
:func:`run_batch` is the entry point the harness uses for many trials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels as K
from .core import (
    BudgetViolation,
    Matching,
    OneSidedView,
    TotalOrderView,
    TwoSidedView,
)
from .rng import Rng

ALGORITHMS = ("random", "rsd", "rsd-partial", "two-sided", "total-order")
MODEL_OF = {
    "random": "one-sided",
    "rsd": "one-sided",
    "rsd-partial": "one-sided",
    "two-sided": "two-sided",
    "two-sided-low": "two-sided",
    "two-sided-mixed": "two-sided",
    "total-order": "total-order",
}
DEFAULT_ALG = {"one-sided": "rsd-partial", "two-sided": "two-sided", "total-order": "total-order"}

HALF = Fraction(1, 2)
THREE_QUARTERS = Fraction(3, 4)


@dataclass(frozen=True)
class MixParams:
    """Budget actually used by a greedy/random mixture and its first-branch probability."""

    alpha: Fraction
    p_m1: float


def two_sided_mix(alpha) -> MixParams:
    a = min(Fraction(alpha), THREE_QUARTERS)
    af = float(a)
    return MixParams(a, (3 - 2 * af) / (3 - af))


def total_order_mix(alpha) -> MixParams:
    a = min(Fraction(alpha), THREE_QUARTERS)
    return MixParams(a, 2 / (2 + math.sqrt(1 - float(a))))


def _ceil_sqrt(q: Fraction) -> int:
    s = math.isqrt(math.floor(q))
    return s if s * s >= q else s + 1


def total_order_k(alpha, n: int) -> int:
    """floor((1 - sqrt(1 - alpha)) n), computed exactly.

    Equivalently the largest k with 2nk - k^2 <= alpha n^2, i.e. the number
    of greedy picks an alpha n^2 prefix always supports."""
    return n - _ceil_sqrt((1 - Fraction(alpha)) * n * n)


def total_order_sample_size(alpha, n: int) -> int:
    """floor((1 - 2 alpha_1) n) with alpha_1 = 1 - sqrt(1 - alpha), exactly."""
    return math.isqrt(math.floor(4 * (1 - Fraction(alpha)) * n * n)) - n


# ---------------------------------------------------------------- batches


def _raise_for(code: int, alg: str) -> None:
    if code == K.OK:
        return
    if code == K.BUDGET:
        raise BudgetViolation(f"{alg}: preference query beyond the revealed depth")
    if code == K.PREFIX:
        raise BudgetViolation(f"{alg}: revealed edge prefix exhausted")
    raise RuntimeError(f"{alg}: internal size bookkeeping failed (code {code})")


def _require(view, cls, alg):
    if not isinstance(view, cls):
        raise TypeError(f"{alg} needs a {cls.kind} view, got {type(view).__name__}")


def run_batch(alg: str, view, states: np.ndarray, *, n: int | None = None, k: int | None = None) -> np.ndarray:
    """Run ``alg`` once per row of ``states`` ([key, counter] uint64 pairs,
    advanced in place). Returns assign[t, x] = y, -1 where x is unmatched.

    ``k`` selects the standalone greedy k-matchings ("greedy-undominated",
    "greedy-total-order"); ``n`` is only needed for "random" without a view.
    """
    if n is None:
        n = view.n
    out = np.empty((states.shape[0], n), dtype=np.int32)

    if alg == "random":
        empty = np.empty((n, 0), dtype=np.int32)
        code = K.rsd_partial_batch(empty, 0, states, out, np.full(n, -1, np.int64))
        _raise_for(code, alg)
        return out

    if alg in ("rsd", "rsd-partial"):
        _require(view, OneSidedView, alg)
        if alg == "rsd" and view.depth != view.n:
            raise ValueError(f"rsd needs full one-sided preferences (alpha = 1), got alpha = {view.alpha}")
        scratch = view.audit_x.scratch()
        try:
            code = K.rsd_partial_batch(view.prefs_x, view.depth, states, out, scratch)
        finally:
            view.audit_x.merge(scratch)
        _raise_for(code, alg)
        return out

    if alg in ("greedy-undominated", "two-sided-low", "two-sided-mixed", "two-sided"):
        _require(view, TwoSidedView, alg)
        if alg == "two-sided":
            alg = "two-sided-low" if view.alpha < HALF else "two-sided-mixed"
        keep, p_m1 = 0, 1.0
        if alg == "greedy-undominated":
            mode = 0
            if k is None or k < 0:
                raise ValueError("greedy-undominated needs k >= 0")
            if k > view.depth:
                raise BudgetViolation(f"k = {k} exceeds the preference budget {view.depth}")
        elif alg == "two-sided-low":
            if view.alpha > HALF:
                raise ValueError(f"low-alpha two-sided algorithm needs alpha <= 1/2, got {view.alpha}")
            mode, k = 1, view.depth
        else:
            if view.alpha < HALF:
                raise ValueError(f"mixed two-sided algorithm needs alpha >= 1/2, got {view.alpha}")
            mix = two_sided_mix(view.alpha)
            mode, p_m1 = 2, mix.p_m1
            k = math.floor(mix.alpha * view.n)
            keep = max(0, math.floor((2 * mix.alpha - 1) * view.n))
        sx, sy = view.audit_x.scratch(), view.audit_y.scratch()
        try:
            code = K.two_sided_batch(view.prefs_x, view.prefs_y, k, mode, keep, p_m1, states, out, sx, sy)
        finally:
            view.audit_x.merge(sx)
            view.audit_y.merge(sy)
        _raise_for(code, alg)
        return out

    if alg in ("greedy-total-order", "total-order"):
        _require(view, TotalOrderView, alg)
        c, p_m1 = 0, 1.0
        if alg == "greedy-total-order":
            mode = 0
            if k is None or k < 0:
                raise ValueError("greedy-total-order needs k >= 0")
            if k > total_order_k(view.alpha, view.n):
                raise BudgetViolation(
                    f"k = {k} exceeds what a prefix of {view.length} edges supports "
                    f"({total_order_k(view.alpha, view.n)})"
                )
        else:
            mix = total_order_mix(view.alpha)
            mode, p_m1 = 2, mix.p_m1
            k = total_order_k(mix.alpha, view.n)
            c = total_order_sample_size(mix.alpha, view.n)
        scratch = view.audit_pos.scratch()
        try:
            code = K.total_order_batch(view.prefix, k, mode, c, p_m1, states, out, scratch)
        finally:
            view.audit_pos.merge(scratch)
        _raise_for(code, alg)
        return out

    raise ValueError(f"unknown algorithm {alg!r}")


def _single(alg, view, rng: Rng, **kw) -> Matching:
    states = rng.state().reshape(1, 2)
    out = run_batch(alg, view, states, **kw)
    rng.counter = int(states[0, 1])
    return Matching.from_assignment(out[0])


# ---------------------------------------------------------------- public API


def random_matching(n: int, rng: Rng) -> Matching:
    """Uniformly random perfect matching (random permutation of Y onto X)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _single("random", None, rng, n=n)


def rsd(view: OneSidedView, rng: Rng) -> Matching:
    """Random serial dictatorship over full one-sided preferences."""
    return _single("rsd", view, rng)


def rsd_partial(view: OneSidedView, rng: Rng) -> Matching:
    """floor(alpha n) dictator rounds, then a random matching of the rest."""
    return _single("rsd-partial", view, rng)


def greedy_undominated_k(view: TwoSidedView, k: int, rng: Rng) -> Matching:
    """k edges, each undominated in the residual graph when taken."""
    return _single("greedy-undominated", view, rng, k=k)


def two_sided_low_alpha(view: TwoSidedView, rng: Rng) -> Matching:
    return _single("two-sided-low", view, rng)


def two_sided_mixed(view: TwoSidedView, rng: Rng) -> Matching:
    """Greedy k-matching mixed with a cross random matching (alpha >= 1/2;
    budgets above 3/4 are run as 3/4)."""
    return _single("two-sided-mixed", view, rng)


def two_sided(view: TwoSidedView, rng: Rng) -> Matching:
    """Dispatch on alpha: low-alpha walk below 1/2, mixture from 1/2 on."""
    return _single("two-sided", view, rng)


def greedy_total_order_k(view: TotalOrderView, k: int) -> Matching:
    """Scan the revealed edge order and keep every edge with both ends free."""
    states = np.zeros((1, 2), dtype=np.uint64)
    out = run_batch("greedy-total-order", view, states, k=k)
    return Matching.from_assignment(out[0])


def total_order_mixed(view: TotalOrderView, rng: Rng) -> Matching:
    return _single("total-order", view, rng)


def chain_walk(view: TwoSidedView, start_x: int, removed_x=(), removed_y=()) -> tuple[int, int]:
    """Follow top-remaining pointers from ``start_x`` until an edge whose
    endpoints rank each other first (or a preference cycle closes)."""
    _require(view, TwoSidedView, "chain_walk")
    n = view.n
    taken_x = np.zeros(n, dtype=np.bool_)
    taken_y = np.zeros(n, dtype=np.bool_)
    taken_x[list(removed_x)] = True
    taken_y[list(removed_y)] = True
    if taken_x[start_x]:
        raise ValueError(f"start x{start_x} is not in the residual graph")
    if taken_y.all():
        raise ValueError("residual graph has no y left")
    sx, sy = view.audit_x.scratch(), view.audit_y.scratch()
    res = np.empty(2, dtype=np.int64)
    try:
        code = K.chain_walk_once(start_x, view.prefs_x, view.prefs_y, taken_x, taken_y, sx, sy, res)
    finally:
        view.audit_x.merge(sx)
        view.audit_y.merge(sy)
    _raise_for(code, "chain_walk")
    return int(res[0]), int(res[1])
