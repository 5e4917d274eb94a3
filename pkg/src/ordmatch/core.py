"""Instances, matchings, and budget-audited ordinal views.

Algorithms never see an :class:`Instance`. They receive one of the view
classes below, which expose preference ranks only up to the information
budget and record the deepest rank each agent was asked about.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

# slack for float rounding in the 3-hop check (Euclidean distances of
# nearly collinear points can violate it by an ulp)
METRIC_RTOL = 1e-12


class InstanceError(ValueError):
    """Malformed or invalid instance document."""


class MatchingError(ValueError):
    """Pairs that do not form a matching of the instance."""


class BudgetViolation(RuntimeError):
    """An ordinal query beyond what the view is allowed to reveal."""


def as_fraction(alpha) -> Fraction:
    """Exact rational for an information budget; floats go through repr."""
    if isinstance(alpha, Fraction):
        a = alpha
    elif isinstance(alpha, int):
        a = Fraction(alpha)
    elif isinstance(alpha, float):
        if not math.isfinite(alpha):
            raise ValueError(f"alpha must be finite, got {alpha}")
        a = Fraction(repr(alpha))
    else:
        a = Fraction(str(alpha))
    if not 0 <= a <= 1:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return a


# ---------------------------------------------------------------- instance


@dataclass(frozen=True, eq=False)
class Instance:
    """Complete bipartite graph on X = Y = range(n); weights[x, y] = w(x, y)."""

    weights: np.ndarray
    name: str | None = None

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64, copy=True)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise InstanceError(f"weights must be a square matrix, got shape {w.shape}")
        if w.shape[0] < 1:
            raise InstanceError("instance needs at least one agent per side")
        if not np.all(np.isfinite(w)):
            raise InstanceError("weights must be finite (NaN/inf found)")
        if np.any(w < 0):
            raise InstanceError("negative weight")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @cached_property
    def metric(self) -> bool:
        return check_metric(self)

    @cached_property
    def beta(self) -> float | None:
        """max/min weight ratio, or None when some weight is zero."""
        lo = float(self.weights.min())
        if lo <= 0:
            return None
        return float(self.weights.max()) / lo

    def is_beta_bounded(self, beta: float) -> bool:
        b = self.beta
        return b is not None and b <= beta * (1 + METRIC_RTOL)

    def to_dict(self) -> dict:
        doc = {"n": self.n, "weights": self.weights.tolist()}
        if self.name is not None:
            doc["name"] = self.name
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def load_instance(data: bytes | str) -> Instance:
    """Parse and validate the canonical instance document."""
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InstanceError(f"cannot parse instance document: {exc}") from exc
    return instance_from_dict(doc)


def instance_from_dict(doc) -> Instance:
    if not isinstance(doc, dict) or "weights" not in doc:
        raise InstanceError("instance document must be an object with 'weights'")
    rows = doc["weights"]
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise InstanceError("'weights' must be a non-empty list of rows")
    if len({len(r) for r in rows}) != 1 or len(rows[0]) != len(rows):
        raise InstanceError("weights matrix is not square")
    for r in rows:
        for v in r:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InstanceError(f"non-numeric weight {v!r}")
    n = doc.get("n", len(rows))
    if not isinstance(n, int) or n != len(rows):
        raise InstanceError(f"'n' ({n!r}) does not match the weights matrix ({len(rows)})")
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise InstanceError("'name' must be a string")
    return Instance(np.array(rows, dtype=np.float64), name=name)


def check_metric(inst: Instance) -> bool:
    """Exhaustive bipartite 3-hop check:
    w(x1,y1) <= w(x1,y2) + w(x2,y1) + w(x2,y2) for every quadruple."""
    w = inst.weights
    for i1 in range(inst.n):
        # hop[j1, i2, j2] = w(i1, j2) + w(i2, j1) + w(i2, j2)
        hop = w[i1][None, None, :] + w.T[:, :, None] + w[None, :, :]
        bound = hop.min(axis=(1, 2))
        if np.any(w[i1] > bound + METRIC_RTOL * np.maximum(1.0, bound)):
            return False
    return True


# ---------------------------------------------------------------- matchings


@dataclass(frozen=True)
class Matching:
    """Disjoint (x, y) pairs of an n-by-n instance; 0-based indices."""

    pairs: tuple[tuple[int, int], ...]
    n: int

    def __post_init__(self):
        pairs = tuple((int(x), int(y)) for x, y in self.pairs)
        xs, ys = set(), set()
        for x, y in pairs:
            if not (0 <= x < self.n and 0 <= y < self.n):
                raise MatchingError(f"pair ({x}, {y}) out of range for n={self.n}")
            if x in xs or y in ys:
                raise MatchingError(f"pair ({x}, {y}) reuses a matched endpoint")
            xs.add(x)
            ys.add(y)
        object.__setattr__(self, "pairs", pairs)

    @property
    def perfect(self) -> bool:
        return len(self.pairs) == self.n

    def __len__(self) -> int:
        return len(self.pairs)

    @classmethod
    def from_assignment(cls, assign: Sequence[int]) -> "Matching":
        """Build from assign[x] = y (negative entries mean x is unmatched)."""
        return cls(tuple((x, int(y)) for x, y in enumerate(assign) if y >= 0), len(assign))

    def to_dict(self, inst: Instance | None = None) -> dict:
        doc = {"pairs": [list(p) for p in sorted(self.pairs)]}
        if inst is not None:
            doc["weight"] = matching_weight(inst, self)
        return doc


def matching_weight(inst: Instance, m: Matching | Iterable[tuple[int, int]]) -> float:
    if not isinstance(m, Matching):
        m = Matching(tuple(m), inst.n)
    if m.n != inst.n:
        raise MatchingError(f"matching is for n={m.n}, instance has n={inst.n}")
    return math.fsum(float(inst.weights[x, y]) for x, y in m.pairs)


# ---------------------------------------------------------------- views


def _strict_order(rows: np.ndarray) -> np.ndarray:
    # descending weight, ties to the lower index (stable sort)
    return np.argsort(-rows, axis=1, kind="stable").astype(np.int32)


class _Audit:
    """Monotone max counters; merges are serialised by a lock."""

    def __init__(self, size: int):
        self._lock = threading.Lock()
        self.values = np.full(size, -1, dtype=np.int64)

    def merge(self, other: np.ndarray) -> None:
        with self._lock:
            np.maximum(self.values, other, out=self.values)

    def scratch(self) -> np.ndarray:
        with self._lock:
            return self.values.copy()

    def max(self) -> int:
        with self._lock:
            return int(self.values.max()) if self.values.size else -1


@dataclass(frozen=True)
class AuditRecord:
    view: str
    budget: int
    max_seen: int

    @property
    def ok(self) -> bool:
        return self.max_seen < self.budget

    def to_dict(self) -> dict:
        return {"view": self.view, "budget": self.budget, "max_seen": self.max_seen, "ok": self.ok}


class OneSidedView:
    """Top-``depth`` preference lists of every x over Y."""

    kind = "one-sided"

    def __init__(self, n: int, alpha: Fraction, prefs_x: np.ndarray):
        self.n = n
        self.alpha = alpha
        self.depth = math.floor(alpha * n)
        self.prefs_x = np.ascontiguousarray(prefs_x[:, : self.depth], dtype=np.int32)
        self.prefs_x.setflags(write=False)
        self.audit_x = _Audit(n)

    def pref_x(self, x: int, rank: int) -> int:
        """y at position ``rank`` of x's list (audited)."""
        if not 0 <= rank < self.depth:
            raise BudgetViolation(f"rank {rank} of x{x} requested, budget is {self.depth}")
        scratch = np.full(self.n, -1, dtype=np.int64)
        scratch[x] = rank
        self.audit_x.merge(scratch)
        return int(self.prefs_x[x, rank])

    def audit(self) -> AuditRecord:
        return AuditRecord(self.kind, self.depth, self.audit_x.max())


class TwoSidedView(OneSidedView):
    """Top-``depth`` lists for X over Y and for Y over X."""

    kind = "two-sided"

    def __init__(self, n: int, alpha: Fraction, prefs_x: np.ndarray, prefs_y: np.ndarray):
        super().__init__(n, alpha, prefs_x)
        self.prefs_y = np.ascontiguousarray(prefs_y[:, : self.depth], dtype=np.int32)
        self.prefs_y.setflags(write=False)
        self.audit_y = _Audit(n)

    def pref_y(self, y: int, rank: int) -> int:
        if not 0 <= rank < self.depth:
            raise BudgetViolation(f"rank {rank} of y{y} requested, budget is {self.depth}")
        scratch = np.full(self.n, -1, dtype=np.int64)
        scratch[y] = rank
        self.audit_y.merge(scratch)
        return int(self.prefs_y[y, rank])

    def audit(self) -> AuditRecord:
        return AuditRecord(self.kind, self.depth, max(self.audit_x.max(), self.audit_y.max()))


class TotalOrderView:
    """The heaviest floor(alpha * n^2) edges, in order; weights withheld."""

    kind = "total-order"

    def __init__(self, n: int, alpha: Fraction, prefix: np.ndarray):
        self.n = n
        self.alpha = alpha
        self.length = math.floor(alpha * n * n)
        self.prefix = np.ascontiguousarray(prefix[: self.length], dtype=np.int32).reshape(-1, 2)
        self.prefix.setflags(write=False)
        self.audit_pos = _Audit(1)

    def edge(self, pos: int) -> tuple[int, int]:
        if not 0 <= pos < self.length:
            raise BudgetViolation(f"prefix position {pos} requested, budget is {self.length}")
        self.audit_pos.merge(np.array([pos], dtype=np.int64))
        x, y = self.prefix[pos]
        return int(x), int(y)

    def audit(self) -> AuditRecord:
        return AuditRecord(self.kind, self.length, self.audit_pos.max())


def derive_prefs(inst: Instance, alpha, sides: str = "one") -> OneSidedView | TwoSidedView:
    a = as_fraction(alpha)
    px = _strict_order(inst.weights)
    if sides == "one":
        return OneSidedView(inst.n, a, px)
    if sides == "two":
        return TwoSidedView(inst.n, a, px, _strict_order(inst.weights.T))
    raise ValueError(f"sides must be 'one' or 'two', got {sides!r}")


def derive_total_order(inst: Instance, alpha) -> TotalOrderView:
    a = as_fraction(alpha)
    n = inst.n
    # flat index x*n + y already encodes the lexicographic tie-break
    order = np.argsort(-inst.weights.ravel(), kind="stable")
    prefix = np.stack([order // n, order % n], axis=1)
    return TotalOrderView(n, a, prefix)
