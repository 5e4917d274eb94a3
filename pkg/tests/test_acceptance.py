"""Full-scale acceptance criteria; one PASS/FAIL line each (see the
"acceptance criteria" section of the pytest summary)."""

import math
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from ordmatch import harness as H
from ordmatch.core import Instance
from ordmatch.generators import (
    GenSpec,
    gen_beta_bounded,
    gen_euclidean,
    gen_figure2,
    gen_metric_closure,
)
from ordmatch.oracles import (
    brute_force_opt,
    exact_random_expectation,
    exact_rsd_expectation,
    opt_matching,
    rsd_order_enumeration,
)

pytestmark = pytest.mark.acceptance

TRIALS = 10_000
RSD_RATIO = 1 / (math.sqrt(2) + 1)


def metric_family(count, n, seed):
    half = count // 2
    return [GenSpec("euclidean", n, seed + j, {"dim": 2}) for j in range(half)] + [
        GenSpec("metric-closure", n, seed + j) for j in range(count - half)
    ]


def small_metric(rng, count):
    out = []
    for j in range(count):
        n = int(rng.integers(2, 9))
        s = int(rng.integers(0, 2**40))
        out.append(gen_euclidean(n, int(rng.integers(1, 4)), s) if j % 2 else gen_metric_closure(n, s))
    return out


def failures(reports):
    return [f"{r.instance} a={r.alpha}: {r.empirical_ratio:.4f} < {r.theoretical_ratio:.4f}"
            for r in reports if not r.passed]


def curve_check(criterion, label, model, grid, expected_bound, algorithm=None, seed=0):
    pts, reps = H.tradeoff_curve(metric_family(100, 20, 1000 + seed), model, grid, TRIALS, seed,
                                 algorithm=algorithm)
    bound_err = max(abs(p.theoretical_bound - expected_bound(float(Fraction(a)))) for p, a in zip(pts, grid))
    bad = failures(reps) + [f"point a={p.alpha}" for p in pts if not p.passed]
    detail = ", ".join(f"a={p.alpha:g}: {p.empirical_ratio:.4f} vs {p.theoretical_bound:.4f}" for p in pts)
    ok = criterion(label, not bad and bound_err <= 1e-9, detail + (f"; failures {bad[:3]}" if bad else ""))
    assert ok, bad
    return pts


def test_c01_rsd_bound(criterion):
    fam = [GenSpec("euclidean", 20, j, {"dim": 2}) for j in range(200)]
    fam += [GenSpec("metric-closure", 20, j) for j in range(200)]
    reps = [H.run_trials(s.build(), "one-sided", 1, TRIALS, 100 + j, algorithm="rsd") for j, s in enumerate(fam)]
    bad = failures(reps)
    ratio_ok = all(abs(r.theoretical_ratio - 0.414214) < 1e-6 for r in reps)
    rng = np.random.default_rng(1)
    exact_bad = []
    for inst in small_metric(rng, 100):
        val = exact_rsd_expectation(inst) / opt_matching(inst)[1]
        if not val >= RSD_RATIO:
            exact_bad.append((inst.name, val))
    worst = min(r.empirical_ratio for r in reps)
    ok = criterion("1 RSD bound", not bad and not exact_bad and ratio_ok,
                   f"400 reports, worst ratio {worst:.4f}; 100 exact, {len(exact_bad)} below")
    assert ok, (bad[:5], exact_bad[:5])


def test_c02_random_matching(criterion):
    far = []
    for j in range(50):
        inst = gen_euclidean(12, 2, 500 + j) if j % 2 else gen_metric_closure(12, 500 + j)
        rep = H.run_trials(inst, "one-sided", 0, TRIALS, j, algorithm="random")
        if abs(rep.mean_weight - exact_random_expectation(inst)) > 4 * rep.std_err:
            far.append(inst.name)
    rng = np.random.default_rng(2)
    low = [i.name for i in small_metric(rng, 100) if not exact_random_expectation(i) >= opt_matching(i)[1] / 3]
    ok = criterion("2 random matching", not far and not low, f"{len(far)} means off, {len(low)} exact below 1/3")
    assert ok


def test_c03_partial_one_sided(criterion):
    curve_check(criterion, "3 partial one-sided", "one-sided", [0, 0.25, 0.5, 0.75, 1],
                lambda a: 1 / (3 - (2 - math.sqrt(2)) * a), seed=3)


def test_c04_two_sided_mixture(criterion):
    pts = curve_check(criterion, "4 two-sided mixture (alpha >= 1/2)", "two-sided", ["0.5", "0.625", "0.75"],
                      lambda a: (2 * a * a - 3 * a + 3) / ((3 - 2 * a) * (3 - a)), algorithm="two-sided-mixed",
                      seed=4)
    assert abs(pts[-1].theoretical_bound - 1 / 1.8) <= 1e-9


def test_c05_two_sided_low(criterion):
    curve_check(criterion, "5 two-sided chain walk (alpha <= 1/2)", "two-sided", [0, 0.25, 0.5],
                lambda a: 1 / (3 - a), algorithm="two-sided-low", seed=5)


def test_c06_total_order(criterion):
    pts = curve_check(criterion, "6 total order", "total-order", [0, 0.25, 0.5, 0.75],
                      lambda a: (2 - math.sqrt(1 - a)) / (2 + math.sqrt(1 - a)), seed=6)
    assert pts[-1].theoretical_bound == pytest.approx(0.6, abs=1e-12)


def test_c07_beta_bounded(criterion):
    bad, exact_one = [], True
    for beta in (1.0, 2.0, 4.0):
        for j in range(30):
            inst = gen_beta_bounded(16, beta, 700 + j)
            rep = H.run_trials(inst, "one-sided", 1, TRIALS, j, algorithm="rsd", beta=beta)
            if not rep.passed:
                bad.append((beta, inst.name))
            if beta == 1.0:
                exact_one &= rep.empirical_ratio == 1.0 and rep.theoretical_ratio == 1.0
    ok = criterion("7 beta-bounded RSD", not bad and exact_one, f"90 reports, {len(bad)} failing")
    assert ok, bad


def test_c08_figure2(criterion):
    opts_ok = all(opt_matching(gen_figure2(n))[1] == n + 2 for n in range(2, 65))
    f3 = gen_figure2(3)
    enum = rsd_order_enumeration(f3)[0]
    dp = exact_rsd_expectation(f3)
    ok = criterion("8 single heavy edge family (figure2)", opts_ok and abs(enum - 11 / 3) <= 1e-12 and abs(dp - 11 / 3) <= 1e-12,
                   f"E[RSD] N=3 = {enum!r}")
    assert ok


def test_c09_lower_bounds(criterion):
    p, worst = H.lb_two_sided_optimal_mix(1e-6)
    lb1 = H.lb_one_sided_ratio(1000, (math.sqrt(5) - 1) / 2)
    ok = criterion("9 lower bounds", abs(p - 0.5) <= 1e-3 and abs(1 / worst - 4 / 3) <= 1e-3 and abs(lb1 - 1.618) <= 0.01,
                   f"p*={p:.6f}, factor {1 / worst:.6f}, one-sided {lb1:.4f}")
    assert ok


def test_c10_lemma_suite(criterion):
    res = H.lemma_property_suite(42, instances=100)
    names = ["undominated", "greedy_undominated", "upper_bound", "greedy_total_order", "rsd_rounds"]
    counts = {k: res[k]["checked"] for k in names}
    ok = criterion("10 lemma property suite", res["passed"] and all(c >= 100 for c in counts.values()),
                   ", ".join(f"{k}: {len(res[k]['failures'])} fail" for k in names))
    assert ok


def test_c11_oracle_cross_check(criterion):
    rng = np.random.default_rng(11)
    bad = []
    for j in range(200):
        n = int(rng.integers(1, 9))
        w = rng.random((n, n)) if j % 3 else rng.integers(0, 4, (n, n)).astype(float)
        inst = Instance(w)
        if abs(opt_matching(inst)[1] - brute_force_opt(inst)) > 1e-9:
            bad.append(inst.to_dict())
    ok = criterion("11 oracle cross-validation", not bad, f"200 instances, {len(bad)} mismatches")
    assert ok


def test_c12_audit_ledger(criterion):
    if H.AUDIT_LEDGER.to_dict()["records"] == 0:
        # run on its own: populate with one run per model
        for model in H.MODELS:
            H.run_trials(gen_euclidean(10, 2, 0), model, 0.75, 100, 0)
    doc = H.AUDIT_LEDGER.to_dict()
    ok = criterion("12 information audit", doc["records"] > 0 and not doc["violations"],
                   f"{doc['records']} audit records, {len(doc['violations'])} violations")
    assert ok, doc["violations"][:5]


def test_c13_determinism(criterion, tmp_path):
    def run(threads):
        cmd = [sys.executable, "-m", "ordmatch", "curve", "--kind", "euclidean", "--n", "16", "--instances", "6",
               "--trials", "20000", "--alg", "two-sided", "--alpha-grid", "0,0.25,0.5,0.75,1", "--seed", "13",
               "--threads", str(threads)]
        proc = subprocess.run(cmd, capture_output=True)
        assert proc.returncode == 0, proc.stderr
        return proc.stdout

    a, b, c = run(1), run(1), run(8)
    ok = criterion("13 determinism", a == b == c and len(a) > 0, f"{len(a)} bytes of CSV, threads 1/1/8")
    assert ok
