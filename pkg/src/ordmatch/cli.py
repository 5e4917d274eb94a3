"""ordmatch command line: gen, verify, oracle, run, curve, lemmas, lowerbound."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from fractions import Fraction

from . import harness
from .algorithms import ALGORITHMS, MODEL_OF
from .core import InstanceError, as_fraction, load_instance
from .generators import KINDS, GenSpec
from .oracles import oracle_report
from .rng import derive_seed

log = logging.getLogger("ordmatch")

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2


class UsageError(Exception):
    """Bad flag value; message names the flag."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _setup_logging() -> None:
    level = os.environ.get("ORDMATCH_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("ordmatch")
    root.handlers[:] = [handler]
    root.setLevel(levels.get(level, logging.ERROR))
    root.propagate = False


def _alpha(text: str) -> Fraction:
    try:
        a = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0 <= a <= 1:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return as_fraction(a)


def _grid(text: str) -> list[Fraction]:
    return [_alpha(t.strip()) for t in text.split(",") if t.strip()]


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _seed(text: str) -> int:
    v = int(text, 0)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ordmatch", description="Matching with ordinal preferences under an information budget.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def gen_flags(sp, kind_required):
        sp.add_argument("--kind", choices=KINDS, required=kind_required)
        sp.add_argument("--n", type=_positive, default=20)
        sp.add_argument("--dim", type=_positive, default=2)
        sp.add_argument("--nu", type=float, default=(math.sqrt(5) - 1) / 2)
        sp.add_argument("--epsilon", type=float, default=1e-3)
        sp.add_argument("--beta", type=float)
        sp.add_argument("--which", choices=("W1", "W2"), default="W1")

    s = sub.add_parser("gen", help="generate an instance as JSON")
    gen_flags(s, True)
    s.add_argument("--seed", type=_seed)
    s.add_argument("--out")

    for name, text in (("verify", "report metric property and weight ratio"), ("oracle", "optimal and minimal matchings")):
        s = sub.add_parser(name, help=text)
        s.add_argument("--instance", required=True)
        s.add_argument("--out")

    s = sub.add_parser("run", help="Monte-Carlo trials of one algorithm on one instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--alg", choices=ALGORITHMS, required=True)
    s.add_argument("--alpha", type=_alpha, required=True)
    s.add_argument("--trials", type=_positive, default=10_000)
    s.add_argument("--seed", type=_seed, required=True)
    s.add_argument("--threads", type=_positive, default=1)
    s.add_argument("--beta", type=float)
    s.add_argument("--out")

    s = sub.add_parser("curve", help="alpha vs. empirical ratio over a generated family, as CSV")
    gen_flags(s, False)
    s.add_argument("--alg", choices=ALGORITHMS, default="rsd-partial")
    s.add_argument("--alpha-grid", type=_grid, default=_grid("0,0.25,0.5,0.75,1"))
    s.add_argument("--instances", type=_positive, default=10)
    s.add_argument("--trials", type=_positive, default=10_000)
    s.add_argument("--seed", type=_seed, required=True)
    s.add_argument("--threads", type=_positive, default=1)
    s.add_argument("--out")

    s = sub.add_parser("lemmas", help="randomised structural property checks")
    s.add_argument("--seed", type=_seed, required=True)
    s.add_argument("--instances", type=_positive, default=100)
    s.add_argument("--out")

    s = sub.add_parser("lowerbound", help="closed-form lower-bound families")
    s.add_argument("--epsilon", type=float, default=1e-6)
    s.add_argument("--n", type=_positive, default=1000)
    s.add_argument("--nu", type=float, default=(math.sqrt(5) - 1) / 2)
    s.add_argument("--out")
    return p


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _load(path: str):
    try:
        with open(path, "rb") as fh:
            return load_instance(fh.read())
    except OSError as e:
        raise UsageError(f"--instance: cannot read {path}: {e.strerror}")
    except (InstanceError, ValueError) as e:
        raise UsageError(f"--instance: {e}")


def _spec_from(args, seed: int) -> GenSpec:
    params = {"dim": args.dim, "nu": args.nu, "epsilon": args.epsilon, "which": args.which}
    if args.beta is not None:
        params["beta"] = args.beta
    return GenSpec(args.kind, args.n, seed, params)


def _cmd_gen(args) -> int:
    if args.kind in ("euclidean", "metric-closure", "beta-bounded") and args.seed is None:
        raise UsageError(f"--seed: required for --kind {args.kind}")
    if args.kind == "beta-bounded" and args.beta is None:
        raise UsageError("--beta: required for --kind beta-bounded")
    try:
        inst = _spec_from(args, args.seed or 0).build()
    except ValueError as e:
        raise UsageError(f"--{_flag_for(str(e))}: {e}")
    _emit(inst.to_json() + "\n", args.out)
    print(f"generated {inst.name} (n={inst.n})", file=sys.stderr)
    return EXIT_OK


def _flag_for(message: str) -> str:
    for flag in ("epsilon", "beta", "nu", "dim", "which"):
        if message.startswith(flag):
            return flag
    return "n"


def _cmd_verify(args) -> int:
    inst = _load(args.instance)
    doc = {"instance": inst.name, "n": inst.n, "metric": inst.metric, "beta": inst.beta}
    _emit(_json(doc), args.out)
    print(f"metric={inst.metric} beta={inst.beta}", file=sys.stderr)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    inst = _load(args.instance)
    rep = oracle_report(inst)
    _emit(_json(rep.to_dict()), args.out)
    print(f"opt={rep.opt_weight:g} min={rep.min_weight:g}", file=sys.stderr)
    return EXIT_OK


def _cmd_run(args) -> int:
    inst = _load(args.instance)
    model = MODEL_OF[args.alg]
    if args.trials < 2:
        raise UsageError("--trials: must be >= 2")
    if args.alg == "rsd" and args.alpha != 1:
        raise UsageError("--alpha: rsd needs alpha = 1 (use --alg rsd-partial)")
    try:
        rep = harness.run_trials(
            inst, model, args.alpha, args.trials, args.seed,
            algorithm=args.alg, beta=args.beta, threads=args.threads,
        )
    except ValueError as e:
        flag = "beta" if "beta" in str(e) else "instance"
        raise UsageError(f"--{flag}: {e}")
    _emit(_json(rep.to_dict()), args.out)
    print(
        f"{rep.algorithm} alpha={rep.alpha:g}: ratio {rep.empirical_ratio:.6f} "
        f"(bound {rep.theoretical_ratio:.6f}) pass={rep.passed}",
        file=sys.stderr,
    )
    return EXIT_OK if rep.passed else EXIT_FAILED


def _cmd_curve(args) -> int:
    model = MODEL_OF[args.alg]
    kind = args.kind or "euclidean"
    if kind not in ("euclidean", "metric-closure", "figure2"):
        raise UsageError(f"--kind: curves need a metric family, got {kind}")
    if args.trials < 2:
        raise UsageError("--trials: must be >= 2")
    grid = args.alpha_grid
    if not grid:
        raise UsageError("--alpha-grid: empty")
    if args.alg == "random":
        grid = [Fraction(0)]
    if args.alg == "rsd" and any(a != 1 for a in grid):
        raise UsageError("--alpha-grid: rsd needs alpha = 1 (use --alg rsd-partial)")
    args.kind = kind
    family = [_spec_from(args, derive_seed(args.seed, 10_000 + j)) for j in range(args.instances)]
    points, reports = harness.tradeoff_curve(
        family, model, grid, args.trials, args.seed, algorithm=args.alg, threads=args.threads
    )
    _emit(harness.curve_csv(points), args.out)
    for p in points:
        print(
            f"{model} alpha={p.alpha:g}: mean ratio {p.empirical_ratio:.6f} "
            f"(bound {p.theoretical_bound:.6f}) {p.reports_passed}/{p.instances} instances pass",
            file=sys.stderr,
        )
    return EXIT_OK if all(r.passed for r in reports) and all(p.passed for p in points) else EXIT_FAILED


def _cmd_lemmas(args) -> int:
    res = harness.lemma_property_suite(args.seed, args.instances)
    _emit(_json(res), args.out)
    for name, chk in res.items():
        if isinstance(chk, dict) and "checked" in chk:
            print(f"{name}: {'pass' if chk['passed'] else 'FAIL'} ({chk['checked']} instances)", file=sys.stderr)
    return EXIT_OK if res["passed"] else EXIT_FAILED


def _cmd_lowerbound(args) -> int:
    if not 0 < args.epsilon < 0.1:
        raise UsageError(f"--epsilon: must lie in (0, 0.1), got {args.epsilon}")
    if not 0 <= args.nu <= 1:
        raise UsageError(f"--nu: must lie in [0, 1], got {args.nu}")
    p_star, worst = harness.lb_two_sided_optimal_mix(args.epsilon)
    doc = {
        "two_sided": {"epsilon": args.epsilon, "p_star": p_star, "worst_ratio": worst, "factor": 1 / worst},
        "one_sided_random": {"n": args.n, "nu": args.nu, "factor": harness.lb_one_sided_ratio(args.n, args.nu)},
    }
    _emit(_json(doc), args.out)
    print(f"two-sided factor {1 / worst:.6f} at p={p_star:.6f}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "gen": _cmd_gen,
    "verify": _cmd_verify,
    "oracle": _cmd_oracle,
    "run": _cmd_run,
    "curve": _cmd_curve,
    "lemmas": _cmd_lemmas,
    "lowerbound": _cmd_lowerbound,
}


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.cmd](args)
    except UsageError as e:
        print(f"ordmatch: error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as e:  # --help
        return int(e.code or 0)


if __name__ == "__main__":
    sys.exit(main())
