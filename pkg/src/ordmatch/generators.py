"""Instance families: random metric instances and the named adversarial ones."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Instance, derive_prefs

KINDS = ("euclidean", "metric-closure", "figure2", "lb-two-sided", "lb-one-sided", "beta-bounded")


@dataclass(frozen=True)
class GenSpec:
    kind: str
    n: int = 2
    seed: int = 0
    params: dict = field(default_factory=dict)

    def build(self) -> Instance:
        p = self.params
        if self.kind == "euclidean":
            return gen_euclidean(self.n, p.get("dim", 2), self.seed)
        if self.kind == "metric-closure":
            return gen_metric_closure(self.n, self.seed)
        if self.kind == "figure2":
            return gen_figure2(self.n)
        if self.kind == "lb-two-sided":
            return gen_lb_two_sided(p.get("epsilon", 1e-3), p.get("which", "W1"))
        if self.kind == "lb-one-sided":
            return gen_lb_one_sided(self.n, p.get("nu", (math.sqrt(5) - 1) / 2))
        if self.kind == "beta-bounded":
            return gen_beta_bounded(self.n, p.get("beta", 2.0), self.seed)
        raise ValueError(f"unknown instance kind {self.kind!r}; expected one of {', '.join(KINDS)}")


def _check_n(n: int, lo: int = 1) -> None:
    if not isinstance(n, (int, np.integer)) or n < lo:
        raise ValueError(f"n must be an integer >= {lo}, got {n!r}")


def euclidean_from_points(px: np.ndarray, py: np.ndarray, name: str | None = None) -> Instance:
    """w(x_i, y_j) = |px_i - py_j| for point arrays of shape (n, dim)."""
    diff = px[:, None, :] - py[None, :, :]
    return Instance(np.sqrt((diff**2).sum(axis=2)), name=name)


def gen_euclidean(n: int, dim: int = 2, seed: int = 0) -> Instance:
    _check_n(n)
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    rng = np.random.default_rng([seed, 1])
    pts = rng.random((2 * n, dim))
    return euclidean_from_points(pts[:n], pts[n:], name=f"euclidean-n{n}-d{dim}-s{seed}")


def metric_closure(w: np.ndarray, max_passes: int | None = None) -> np.ndarray:
    """Lower entries to the 3-hop bound w(i1,j2) + w(i2,j1) + w(i2,j2)
    until a full pass changes nothing."""
    w = np.array(w, dtype=np.float64, copy=True)
    n = w.shape[0]
    max_passes = n * n + 1 if max_passes is None else max_passes
    for _ in range(max_passes):
        changed = False
        for i1 in range(n):
            hop = w[i1][None, None, :] + w.T[:, :, None] + w[None, :, :]
            bound = hop.min(axis=(1, 2))
            lower = bound < w[i1]
            if lower.any():
                w[i1, lower] = bound[lower]
                changed = True
        if not changed:
            return w
    raise RuntimeError(f"metric repair did not converge in {max_passes} passes")


def gen_metric_closure(n: int, seed: int = 0) -> Instance:
    _check_n(n)
    rng = np.random.default_rng([seed, 2])
    raw = rng.uniform(0.01, 1.0, size=(n, n))
    return Instance(metric_closure(raw), name=f"metric-closure-n{n}-s{seed}")


def gen_figure2(n: int) -> Instance:
    """One weight-3 edge (x0, y0), every other edge weight 1."""
    _check_n(n, 2)
    w = np.ones((n, n))
    w[0, 0] = 3.0
    return Instance(w, name=f"figure2-n{n}")


def gen_lb_two_sided(epsilon: float = 1e-3, which: str = "W1") -> Instance:
    """The 2x2 pair with identical two-sided preferences but opposite optima.
    Agents a, b are x0, x1; c, d are y0, y1."""
    if not 0 < epsilon < 0.1:
        raise ValueError(f"epsilon must lie in (0, 0.1), got {epsilon}")
    e = epsilon
    w1 = np.array([[1 + e, 1.0], [3.0, 1 + e]])
    w2 = np.array([[1 - e, e], [1.0, 1 - e]])
    a, b = Instance(w1, name=f"lb2-W1-eps{e}"), Instance(w2, name=f"lb2-W2-eps{e}")
    va, vb = derive_prefs(a, 1, "two"), derive_prefs(b, 1, "two")
    assert np.array_equal(va.prefs_x, vb.prefs_x) and np.array_equal(va.prefs_y, vb.prefs_y)
    if which == "W1":
        return a
    if which == "W2":
        return b
    raise ValueError(f"which must be 'W1' or 'W2', got {which!r}")


def gen_lb_one_sided(n: int, nu: float) -> Instance:
    """Rows i < floor(nu n) weigh 3 on columns j <= i, everything else 1;
    every x ends up with the preference order y0 > y1 > ..."""
    _check_n(n)
    if not 0 <= nu <= 1:
        raise ValueError(f"nu must lie in [0, 1], got {nu}")
    m = math.floor(nu * n)
    w = np.ones((n, n))
    i, j = np.tril_indices(m)
    w[i, j] = 3.0
    return Instance(w, name=f"lb1-n{n}-nu{nu:g}")


def gen_beta_bounded(n: int, beta: float, seed: int = 0) -> Instance:
    """i.i.d. uniform weights in [1, beta]; no metric guarantee."""
    _check_n(n)
    if not beta >= 1:
        raise ValueError(f"beta must be >= 1, got {beta}")
    rng = np.random.default_rng([seed, 3])
    inst = Instance(1.0 + (beta - 1.0) * rng.random((n, n)), name=f"beta{beta:g}-n{n}-s{seed}")
    assert inst.is_beta_bounded(beta)
    return inst
