"""Monte-Carlo trials, guaranteed ratios, tradeoff curves and lemma checks."""

from __future__ import annotations

import csv
import io
import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import algorithms as alg
from .core import Instance, as_fraction, derive_prefs, derive_total_order
from .generators import GenSpec, gen_euclidean, gen_lb_two_sided, gen_metric_closure
from .oracles import opt_matching, rsd_order_enumeration
from .rng import MASK64, Rng, derive_seed, trial_keys

log = logging.getLogger(__name__)

MODELS = ("one-sided", "two-sided", "total-order")
SIGMA_PASS = 3.0
CHUNK = 4096



class AuditLedger:
    """Process-wide record of every view audit taken by the harness."""

    def __init__(self):
        self._lock = threading.Lock()
        self._entries: list[dict] = []

    def record(self, source: str, audit) -> None:
        entry = {"source": source, **audit.to_dict()}
        with self._lock:
            self._entries.append(entry)

    def entries(self) -> list[dict]:
        with self._lock:
            return list(self._entries)

    def violations(self) -> list[dict]:
        return [e for e in self.entries() if not e["ok"]]

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()

    def to_dict(self) -> dict:
        entries = self.entries()
        return {"records": len(entries), "violations": [e for e in entries if not e["ok"]]}


AUDIT_LEDGER = AuditLedger()

CURVE_HEADER = ["model", "alpha", "empirical_ratio", "theoretical_bound", "std_err", "trials", "instances"]


def theoretical_bound(model: str, alpha, beta: float | None = None) -> float:
    """Guaranteed fraction of OPT (the reciprocal of the approximation factor)."""
    a = float(as_fraction(alpha))
    if beta is not None:
        if model != "one-sided" or a != 1:
            raise ValueError("the beta-restricted guarantee covers full one-sided RSD (alpha = 1) only")
        if beta < 1:
            raise ValueError(f"beta must be >= 1, got {beta}")
        return 1.0 / (math.sqrt(beta - 0.75) + 0.5)
    if model == "one-sided":
        return 1.0 / (3.0 - (2.0 - math.sqrt(2.0)) * a)
    if model == "two-sided":
        if a < 0.5:
            return 1.0 / (3.0 - a)
        a = min(a, 0.75)
        return (2 * a * a - 3 * a + 3) / ((3 - 2 * a) * (3 - a))
    if model == "total-order":
        r = math.sqrt(1.0 - min(a, 0.75))
        return (2.0 - r) / (2.0 + r)
    raise ValueError(f"unknown model {model!r}; expected one of {', '.join(MODELS)}")


def make_view(inst: Instance, model: str, alpha):
    if model == "one-sided":
        return derive_prefs(inst, alpha, "one")
    if model == "two-sided":
        return derive_prefs(inst, alpha, "two")
    if model == "total-order":
        return derive_total_order(inst, alpha)
    raise ValueError(f"unknown model {model!r}; expected one of {', '.join(MODELS)}")


@dataclass
class TrialReport:
    algorithm: str
    model: str
    alpha: float
    instance: str
    n: int
    trials: int
    seed: int
    mean_weight: float
    std_err: float
    opt_weight: float
    empirical_ratio: float
    theoretical_ratio: float
    approximation_factor: float
    beta: float | None
    passed: bool
    audit: dict

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def _sample_weights(inst: Instance, name: str, view, trials: int, seed: int, threads: int) -> np.ndarray:
    w = inst.weights
    n = inst.n
    out = np.empty(trials)
    bounds = [(s, min(s + CHUNK, trials)) for s in range(0, trials, CHUNK)]

    def work(span):
        lo, hi = span
        keys = trial_keys(seed, lo, hi)
        states = np.stack([keys, np.zeros_like(keys)], axis=1)
        assign = alg.run_batch(name, view, states, n=n)
        out[lo:hi] = w[np.arange(n), assign].sum(axis=1)

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, bounds))
    else:
        for span in bounds:
            work(span)
    return out


def run_trials(
    inst: Instance,
    model: str,
    alpha,
    trials: int,
    seed: int,
    *,
    algorithm: str | None = None,
    beta: float | None = None,
    threads: int = 1,
    opt_weight: float | None = None,
) -> TrialReport:
    """Estimate E[w(M)] for one algorithm on one instance and compare with
    the guaranteed ratio; trial t draws from stream ``seed XOR t``."""
    if trials < 2:
        raise ValueError("trials must be >= 2")
    a = as_fraction(alpha)
    name = algorithm or alg.DEFAULT_ALG.get(model)
    if name not in alg.MODEL_OF:
        raise ValueError(f"unknown algorithm {name!r}")
    if alg.MODEL_OF[name] != model:
        raise ValueError(f"algorithm {name!r} belongs to the {alg.MODEL_OF[name]} model, not {model!r}")
    if name == "random":
        a = Fraction(0)
    if name == "rsd" and a != 1:
        raise ValueError("rsd runs on full preferences; use alpha = 1 or rsd-partial")
    if beta is not None:
        if not inst.is_beta_bounded(beta):
            raise ValueError(f"instance weight ratio {inst.beta} exceeds beta = {beta}")
    elif not inst.metric:
        raise ValueError("instance is not metric; no guarantee applies without a beta bound")

    view = None if name == "random" else make_view(inst, model, a)
    weights = _sample_weights(inst, name, view, trials, seed & MASK64, threads)
    mean = math.fsum(weights.tolist()) / trials
    var = math.fsum(((weights - mean) ** 2).tolist()) / (trials - 1)
    se = math.sqrt(var / trials)
    if opt_weight is None:
        opt_weight = opt_matching(inst)[1]
    ratio = theoretical_bound(model, a, beta)
    emp = mean / opt_weight if opt_weight > 0 else 1.0
    if view is not None:
        rec = view.audit()
        AUDIT_LEDGER.record(f"{name}:{inst.name}:alpha={a}", rec)
        audit = rec.to_dict()
    else:
        audit = {"view": "none", "budget": 0, "max_seen": -1, "ok": True}
    rep = TrialReport(
        algorithm=name,
        model=model,
        alpha=float(a),
        instance=inst.name or "instance",
        n=inst.n,
        trials=trials,
        seed=seed,
        mean_weight=mean,
        std_err=se,
        opt_weight=opt_weight,
        empirical_ratio=emp,
        theoretical_ratio=ratio,
        approximation_factor=1.0 / ratio,
        beta=beta,
        passed=mean >= opt_weight * ratio - SIGMA_PASS * se,
        audit=audit,
    )
    log.debug("%s %s alpha=%s: ratio %.4f (bound %.4f)", rep.instance, name, rep.alpha, emp, ratio)
    return rep


# ---------------------------------------------------------------- curves


@dataclass
class CurvePoint:
    model: str
    alpha: float
    empirical_ratio: float
    theoretical_bound: float
    std_err: float
    trials: int
    instances: int
    passed: bool
    reports_passed: int

    def row(self) -> list[str]:
        return [
            self.model,
            f"{self.alpha:.6g}",
            f"{self.empirical_ratio:.12g}",
            f"{self.theoretical_bound:.12g}",
            f"{self.std_err:.12g}",
            str(self.trials),
            str(self.instances),
        ]


def tradeoff_curve(
    family: list[GenSpec],
    model: str,
    alpha_grid,
    trials: int,
    seed: int,
    *,
    algorithm: str | None = None,
    threads: int = 1,
) -> tuple[list[CurvePoint], list[TrialReport]]:
    """Mean empirical ratio over an instance family at each grid alpha.

    A point passes when the mean ratio clears the bound by the 3-sigma
    margin; ``reports_passed`` counts the per-instance reports that do."""
    insts = [spec.build() for spec in family]
    opts = [opt_matching(i)[1] for i in insts]
    points, reports = [], []
    for ai, alpha in enumerate(alpha_grid):
        reps = [
            run_trials(inst, model, alpha, trials, derive_seed(seed, j, ai),
                       algorithm=algorithm, threads=threads, opt_weight=opt)
            for j, (inst, opt) in enumerate(zip(insts, opts))
        ]
        m = len(reps)
        ratios = [r.empirical_ratio for r in reps]
        mean_ratio = math.fsum(ratios) / m
        se = math.sqrt(math.fsum((r.std_err / r.opt_weight) ** 2 for r in reps if r.opt_weight > 0)) / m
        bound = theoretical_bound(model, alpha)
        points.append(
            CurvePoint(
                model=model,
                alpha=float(as_fraction(alpha)),
                empirical_ratio=mean_ratio,
                theoretical_bound=bound,
                std_err=se,
                trials=trials,
                instances=m,
                passed=mean_ratio >= bound - SIGMA_PASS * se,
                reports_passed=sum(r.passed for r in reps),
            )
        )
        reports.extend(reps)
    return points, reports


def curve_csv(points: list[CurvePoint]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CURVE_HEADER)
    for p in points:
        wr.writerow(p.row())
    return buf.getvalue()


# ---------------------------------------------------------------- lower bounds


def lb_two_sided_mix_ratios(epsilon: float, p: float) -> tuple[float, float]:
    """E[w]/OPT on W1 and on W2 for "return M1 w.p. p, M2 otherwise".

    M1 = {(x0, y1), (x1, y0)} and M2 = {(x0, y0), (x1, y1)}."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    out = []
    for which in ("W1", "W2"):
        w = gen_lb_two_sided(epsilon, which).weights
        m1 = float(w[0, 1] + w[1, 0])
        m2 = float(w[0, 0] + w[1, 1])
        out.append((p * m1 + (1 - p) * m2) / max(m1, m2))
    return out[0], out[1]


def lb_two_sided_optimal_mix(epsilon: float) -> tuple[float, float]:
    """p maximising the worse of the two ratios, and that worst ratio.

    The approximation factor is the reciprocal of the ratio."""
    r1_0, r2_0 = lb_two_sided_mix_ratios(epsilon, 0.0)
    r1_1, r2_1 = lb_two_sided_mix_ratios(epsilon, 1.0)
    # both ratios are linear in p, so the max-min sits where they cross
    slope = (r1_1 - r1_0) - (r2_1 - r2_0)
    cands = [0.0, 1.0]
    if slope != 0:
        p = (r2_0 - r1_0) / slope
        if 0.0 <= p <= 1.0:
            cands.append(p)
    best = max(cands, key=lambda q: min(lb_two_sided_mix_ratios(epsilon, q)))
    return best, min(lb_two_sided_mix_ratios(epsilon, best))


def lb_one_sided_ratio(n: int, nu: float) -> float:
    """Approximation factor of random matching on the one-sided family."""
    opt = (2 * nu + 1) * n
    rand = (nu * (1 / n + nu) + 1) * n
    return opt / rand


# ---------------------------------------------------------------- lemma suite


def _metric_instance(rng: np.random.Generator, n: int, tag: int) -> Instance:
    seed = int(rng.integers(0, 2**62))
    if tag % 2 == 0:
        return gen_euclidean(n, int(rng.integers(1, 4)), seed)
    return gen_metric_closure(n, seed)


def _failure(check: dict, inst: Instance, detail: str) -> None:
    check["failures"].append({"instance": inst.to_dict(), "detail": detail})


def _small_block(rng: np.random.Generator, inst: Instance, cap: int = 6) -> Instance:
    # any square sub-block of a metric instance is metric
    if inst.n <= cap:
        return inst
    k = int(rng.integers(2, cap + 1))
    rows = np.sort(rng.choice(inst.n, k, replace=False))
    cols = np.sort(rng.choice(inst.n, k, replace=False))
    return Instance(inst.weights[np.ix_(rows, cols)], name=f"{inst.name}-block")


def lemma_property_suite(
    seed: int, instances: int = 100, family: list[Instance] | None = None, tol: float = 1e-9
) -> dict:
    """Randomised checks of the structural lemmas on metric instances.

    undominated: every residual undominated edge is >= 1/3 of the heaviest
        residual edge, and the chain walk ends on an undominated edge
    greedy_undominated: greedy k-matching >= gamma/(3 - 2 gamma) OPT, gamma = k/n <= 3/4
    upper_bound: n_T w(M) <= (2 + N/n_T) w(T) + w(X_T, Y-Y_T) + w(X-X_T, Y_T)
    greedy_total_order: greedy k-matching on the edge order >= gamma OPT, gamma <= 1/2
    rsd_rounds: every early RSD round beats the expected residual average edge,
        and round expectations do not increase (exact, on blocks of size <= 6)

    ``family`` replaces the generated mix of Euclidean and metric-closure
    instances (sizes 2..8).
    """
    rng = np.random.default_rng([seed, 99])
    names = ["undominated", "greedy_undominated", "upper_bound", "greedy_total_order", "rsd_rounds"]
    out = {k: {"checked": 0, "failures": []} for k in names}
    audits = []
    if family is None:
        family = [_metric_instance(rng, int(rng.integers(2, 9)), t) for t in range(instances)]

    for t, inst in enumerate(family):
        n = inst.n
        w = inst.weights
        opt = opt_matching(inst)[1]

        # residual undominated edges vs. heaviest residual edge
        chk = out["undominated"]
        r = int(rng.integers(0, n))
        rx = rng.choice(n, r, replace=False).tolist()
        ry = rng.choice(n, r, replace=False).tolist()
        fx = [x for x in range(n) if x not in rx]
        fy = [y for y in range(n) if y not in ry]
        sub = w[np.ix_(fx, fy)]
        dom = (sub >= sub.max(axis=1, keepdims=True)) & (sub >= sub.max(axis=0, keepdims=True))
        if np.any(sub[dom] * 3 < sub.max() * (1 - tol)):
            _failure(chk, inst, f"undominated edge below a third of the max (removed x={rx}, y={ry})")
        view = derive_prefs(inst, 1, "two")
        for x in fx:
            a, b = alg.chain_walk(view, x, rx, ry)
            if not dom[fx.index(a), fy.index(b)]:
                _failure(chk, inst, f"chain walk from x{x} ended on dominated edge ({a}, {b})")
        audits.append(view.audit())
        chk["checked"] += 1

        # greedy undominated k-matching
        chk = out["greedy_undominated"]
        k = int(rng.integers(1, max(1, (3 * n) // 4) + 1))
        gamma = k / n
        view = derive_prefs(inst, 1, "two")
        m = alg.greedy_undominated_k(view, k, Rng(seed, t))
        got = math.fsum(w[x, y] for x, y in m.pairs)
        if got < gamma / (3 - 2 * gamma) * opt * (1 - tol):
            _failure(chk, inst, f"k={k}: greedy {got} < {gamma / (3 - 2 * gamma)} * OPT {opt}")
        audits.append(view.audit())
        chk["checked"] += 1

        # upper bound on any perfect matching via a sub-block
        chk = out["upper_bound"]
        nt = int(rng.integers(1, n + 1))
        xt = rng.choice(n, nt, replace=False)
        yt = rng.choice(n, nt, replace=False)
        xb = np.setdiff1d(np.arange(n), xt)
        yb = np.setdiff1d(np.arange(n), yt)
        rhs = (2 + n / nt) * w[np.ix_(xt, yt)].sum() + w[np.ix_(xt, yb)].sum() + w[np.ix_(xb, yt)].sum()
        perm = rng.permutation(n)
        for label, mw in (("OPT", opt), ("random", float(w[np.arange(n), perm].sum()))):
            if nt * mw > rhs * (1 + tol):
                _failure(chk, inst, f"{label}: {nt} * {mw} > {rhs} for X_T={xt.tolist()}, Y_T={yt.tolist()}")
        chk["checked"] += 1

        # greedy along the total order
        chk = out["greedy_total_order"]
        if n >= 2:
            k = int(rng.integers(1, n // 2 + 1))
            tview = derive_total_order(inst, 1)
            m = alg.greedy_total_order_k(tview, k)
            got = math.fsum(w[x, y] for x, y in m.pairs)
            if got < (k / n) * opt * (1 - tol):
                _failure(chk, inst, f"k={k}: greedy {got} < {k / n} * OPT {opt}")
            audits.append(tview.audit())
        chk["checked"] += 1

        # early RSD rounds vs. expected residual average edge
        chk = out["rsd_rounds"]
        small = _small_block(rng, inst)
        if small.n >= 2:
            ell = int(rng.integers(1, small.n))
            _, rounds, avg = rsd_order_enumeration(small, ell)
            if any(r_i < avg * (1 - tol) for r_i in rounds):
                _failure(chk, small, f"rounds {rounds} vs residual average {avg} (ell={ell})")
            if any(rounds[i] < rounds[i + 1] * (1 - tol) for i in range(len(rounds) - 1)):
                _failure(chk, small, f"round expectations increase: {rounds}")
        chk["checked"] += 1

    for rec in audits:
        AUDIT_LEDGER.record("lemma-suite", rec)
    for name in names:
        out[name]["passed"] = not out[name]["failures"]
    out["audit"] = {"records": len(audits), "violations": [a.to_dict() for a in audits if not a.ok]}
    out["passed"] = all(out[k]["passed"] for k in names) and not out["audit"]["violations"]
    return out
