"""Command-line front end.

Exit codes: 0 success, 1 a verification check failed, 2 configuration
error, 3 runtime abort.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

from . import estimator, experiment, verify
from .config import SEED_ENV, load
from .dual_averaging import ConfigurationError, RunAbort
from .estimator import EvaluationError
from .problems import ExpCenterProblem, NonConvergenceError, solve_reference
from .rng import RngState, l1_ball_batch, l1_sphere_batch, l2_sphere_batch

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3

SAMPLERS = {"l1sphere": l1_sphere_batch, "l1ball": l1_ball_batch, "l2sphere": l2_sphere_batch}


def _load(path):
    try:
        return load(path).with_env_seed().validate()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None


def cmd_run(args) -> int:
    cfg = _load(args.config)
    csv_path, svg_path, _ = experiment.run_experiment(cfg, args.csv, args.svg)
    print(f"seed={cfg.seed}")
    print(f"csv={csv_path}")
    print(f"svg={svg_path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.inject_scale_bug:
        with estimator.inject_scale_bug(1.5):
            return verify.run_verification(args.grid, args.out)
    return verify.run_verification(args.grid, args.out)


def cmd_sample(args) -> int:
    if args.d < 1 or args.n < 0:
        raise ConfigurationError("--d must be >= 1 and --n >= 0")
    seed = args.seed if args.seed is not None else int(os.environ.get(SEED_ENV) or "0", 0)
    pts = SAMPLERS[args.dist](args.n, args.d, RngState(seed)) if args.n else []
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow([f"x{i + 1}" for i in range(args.d)])
    w.writerows([repr(float(v)) for v in row] for row in pts)
    return EXIT_OK


def cmd_reference_min(args) -> int:
    cfg = _load(args.config)
    if cfg.objective != "exp_center":
        raise ConfigurationError("reference-min needs an exp_center objective")
    sol = solve_reference(ExpCenterProblem(cfg.dimension), tol=args.tol)
    print(f"f_star={sol.value!r}")
    print(f"certificate_gap={sol.gap:.3e}")
    print("minimizer=" + ",".join(f"{v:.12g}" for v in sol.point))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zoda", description="Zero-order dual averaging experiments and checks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config; writes CSV, metadata and SVG")
    r.add_argument("config")
    r.add_argument("--csv", help="override the CSV output path")
    r.add_argument("--svg", help="override the SVG output path")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="run the Monte Carlo verification grid")
    v.add_argument("--grid", help="grid file or inline 'key=value;...' string; '' runs nothing")
    v.add_argument("--out", default="out/verify.csv", help="report CSV path")
    v.add_argument("--inject-scale-bug", action="store_true", help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sample", help="print uniform samples as CSV")
    s.add_argument("--dist", choices=sorted(SAMPLERS), required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_sample)

    m = sub.add_parser("reference-min", help="compute the reference minimum of an exp_center config")
    m.add_argument("config")
    m.add_argument("--tol", type=float, default=1e-8)
    m.set_defaults(func=cmd_reference_min)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RunAbort, EvaluationError, NonConvergenceError, FloatingPointError) as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
