"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Kernel timings call each backend module directly. End-to-end timings
(one dual averaging run, one reference solve) run in a subprocess per
backend, since the backend is fixed at import time.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from zoda._backend import available_backends

D = 10

END_TO_END = r"""
import json, time
import numpy as np
import zoda
from zoda.problems import ExpCenterProblem, solve_reference
from zoda.dual_averaging import Schedule, run
from zoda.estimator import NoiseModel
from zoda.mirror import EntropySimplex
from zoda.geometry import ProblemDims

prob = ExpCenterProblem(10)
m = EntropySimplex(10)
sched = Schedule("adaptive_canceling", m.R, ProblemDims(10, 1.0, 1.0), T=10000)
t = time.perf_counter()
run(m, prob.objective, NoiseModel("canceling", 0.0), sched, rng=zoda.RngState(0), T=10000)
t_run = time.perf_counter() - t
t = time.perf_counter()
solve_reference(prob, iterations={iters}, tol=1.0)
t_ref = time.perf_counter() - t
print(json.dumps({{"backend": zoda.BACKEND, "run_T1e4_s": t_run, "reference_{iters}_s": t_ref}}))
"""


def kernel_cases(mod):
    rng = np.random.default_rng(0)
    u = rng.random(65536)
    z = rng.standard_normal(D)
    out = np.empty(D)
    signs = np.where(rng.standard_normal(D) >= 0, 1, -1).astype(np.int8)
    zeta = rng.standard_normal(D)
    sout = np.empty(D, dtype=np.int8)
    return {
        "laplace_inverse_array[65536]": lambda: mod.laplace_inverse_array(u),
        "softmax_into[d=10]": lambda: mod.softmax_into(z, 0.7, out),
        "ball_clip_into[d=10]": lambda: mod.ball_clip_into(z, 0.7, out),
        "sign_axpy[d=10]": lambda: mod.sign_axpy(z, 1e-9, signs),
        "signs_of[d=10]": lambda: mod.signs_of(zeta, sout),
    }


def bench_kernels(repeat):
    rows = {}
    for mod in available_backends():
        for name, fn in kernel_cases(mod).items():
            timer = timeit.Timer(fn)
            n, _ = timer.autorange()
            best = min(timer.repeat(repeat, n)) / n
            rows.setdefault(name, {})[mod.NAME] = best
    return rows


def bench_end_to_end(iters):
    out = []
    for pure in ("1", "0"):
        env = dict(os.environ, ZODA_PURE_PYTHON=pure)
        res = subprocess.run(
            [sys.executable, "-c", END_TO_END.format(iters=iters)],
            env=env, capture_output=True, text=True, check=True,
        )
        out.append(json.loads(res.stdout.strip().splitlines()[-1]))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--reference-iterations", type=int, default=10**5)
    ap.add_argument("--json", help="also write results to this file")
    args = ap.parse_args(argv)

    kern = bench_kernels(args.repeat)
    backends = [m.NAME for m in available_backends()]
    print(f"{'kernel':32s}" + "".join(f"{b:>14s}" for b in backends) + "   speedup")
    for name, t in kern.items():
        cells = "".join(f"{t[b] * 1e6:12.2f}us" for b in backends)
        speed = t["numpy"] / t["cython"] if "cython" in t else float("nan")
        print(f"{name:32s}{cells}   {speed:6.1f}x")

    e2e = bench_end_to_end(args.reference_iterations)
    print()
    for row in e2e:
        print(", ".join(f"{k}={v:.3f}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()))
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump({"kernels": kern, "end_to_end": e2e}, fh, indent=2)


if __name__ == "__main__":
    main()
