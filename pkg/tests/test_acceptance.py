"""End-to-end acceptance criteria, each at its stated size and tolerance."""

import math
import re
import subprocess
import sys
import time

import numpy as np
import pytest
from conftest import record_criterion

from zoda import experiment, verify
from zoda.config import ExperimentConfig, load
from zoda.dual_averaging import regret_bound
from zoda.estimator import (
    NoiseModel,
    linear_objective,
    norm_objective,
    squared_norm_objective,
)
from zoda.geometry import INF, ProblemDims
from zoda.mirror import make_mirror
from zoda.problems import ReferenceSolution
from zoda.rng import RngState

pytestmark = pytest.mark.slow

T = 10**4
SEEDS = 30


def _regrets(cfg, reference=None):
    t0 = time.perf_counter()
    out = np.array([experiment.run_trial(cfg, "l1", k, reference).metric for k in range(cfg.trials)])
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def ball_cfg():
    return dict(
        name="ball", dimension=10, geometry="squared_l2_ball", horizon=T, trials=SEEDS, seed=6,
        estimators=("l1",), metric="regret", objective="distance",
        objective_params={"q": 2.0, "center_scale": 0.5, "center_index": 0},
    )


@pytest.fixture(scope="module")
def fixed_ball_regret(ball_cfg):
    return _regrets(ExperimentConfig(schedule="fixed_canceling", L=1.0, **ball_cfg).validate())


def test_c01_moment_identity():
    rows, ok = [], True
    for d in (3, 9, 19):
        t0 = time.perf_counter()
        r = verify.check_second_moment(d, 10**6, RngState(101).child(d))
        dt = time.perf_counter() - t0
        good = r.passed and r.relation == "eq" and r.k_se == 3.0 and r.bound_or_target == pytest.approx(2 / (d + 1)) and dt < 10
        ok &= good
        rows.append(f"d={d} {r.estimate:.6f} vs {r.bound_or_target:.6f} (SE {r.std_error:.1e}, {dt:.1f}s)")
    record_criterion(1, "E||zeta||_2^2 = 2/(d+1)", ok, "; ".join(rows))
    assert ok


def test_c02_ball_moment_bound():
    t0 = time.perf_counter()
    reps = []
    for d in (3, 10, 50):
        for r in verify.check_ball_moment(d, (1.0, 2.0, INF), 10**6, RngState(102).child(d)):
            # finite q: q d^(1/q)/(d+1); q = inf: the logarithmic branch
            if not r.name.startswith("ball_moment_bq") or "q=inf" in r.name:
                reps.append(r)
    dt = time.perf_counter() - t0
    ok = len(reps) == 9 and all(r.passed for r in reps) and dt < 30
    worst = max(r.estimate / r.bound_or_target for r in reps)
    record_criterion(2, "E||U||_q <= q d^(1/q)/(d+1)", ok, f"{len(reps)} cases, worst estimate/bound {worst:.3f}, {dt:.1f}s")
    assert ok


def test_c03_unbiasedness():
    t0 = time.perf_counter()
    reps = []
    for d in (3, 10):
        a = np.zeros(d)
        a[0] = 1.0
        x0 = np.linspace(0.3, -0.2, d)
        reps += verify.check_unbiasedness(linear_objective(a), x0, 0.1, 10**6, RngState(103).child(d, 0))
        reps += verify.check_unbiasedness(squared_norm_objective(), x0, 0.1, 10**6, RngState(103).child(d, 1))
    dt = time.perf_counter() - t0
    ok = len(reps) == 26 and all(r.passed and r.k_se == 4.0 for r in reps) and dt < 30
    worst = max(abs(r.estimate - r.bound_or_target) / r.std_error for r in reps)
    record_criterion(3, "linear and quadratic targets within 4 SE", ok, f"{len(reps)} components, worst {worst:.2f} SE, {dt:.1f}s")
    assert ok


def test_c04_variance_bound():
    t0 = time.perf_counter()
    master = RngState(104)
    var, inv = [], []
    k = 0
    for d in (3, 10, 50):
        x0 = 3.0 * np.arange(1, d + 1)
        for p in (1.0, 2.0):
            for q in (1.0, 2.0, INF):
                dims, f = ProblemDims(d, q, p), norm_objective(q)
                for kind in ("canceling", "adversarial_iid"):
                    noise = NoiseModel(kind, 0.1, rng=master.child(k, 0))
                    var.append(verify.check_variance_bound(f, dims, 0.5, noise, 10**5, master.child(k, 1), x0))
                    k += 1
                inv += verify.check_h_invariance(f, dims, (1.0, 0.1, 0.01), 0.1, 10**5, master.child(k, 2), x0)
                k += 1
    dt = time.perf_counter() - t0
    ok = len(var) == 36 and len(inv) == 36 and all(r.passed for r in var + inv) and dt < 120
    worst = max(r.estimate / r.bound_or_target for r in var)
    record_criterion(4, "E||g||_{p*}^2 <= bound; h-invariance", ok,
                     f"{len(var)} bounds (worst ratio {worst:.3f}), {len(inv)} h-comparisons, {dt:.1f}s")
    assert ok


def test_c05_poincare():
    t0 = time.perf_counter()
    reps = []
    for d in (3, 10):
        v = np.ones(d) / math.sqrt(d)
        reps += verify.check_poincare(lambda z: z @ v, 1.0, d, 10**6, RngState(105).child(d, 0), "linear")
        reps += verify.check_poincare(lambda z: np.sqrt((z * z).sum(axis=1)), 1.0, d, 10**6, RngState(105).child(d, 1), "l2norm")
    dt = time.perf_counter() - t0
    ok = len(reps) == 8 and all(r.passed for r in reps) and dt < 20
    worst = max(r.estimate / r.bound_or_target for r in reps)
    record_criterion(5, "Var G(zeta) under both bounds", ok, f"{len(reps)} cases, worst ratio {worst:.3f}, {dt:.1f}s")
    assert ok


def test_c06_fixed_regret(fixed_ball_regret):
    reg, dt = fixed_ball_regret
    mean_T = reg[:, -1].mean()
    bound = min(3762.8, 11.9 * math.sqrt(10 * T))
    rate_T, rate_100 = mean_T / T, reg[:, 99].mean() / 100
    ok = mean_T <= bound and rate_T <= 0.5 * rate_100 and dt < 120
    record_criterion(6, "non-adaptive regret on the l2-ball", ok,
                     f"mean regret {mean_T:.1f} <= {bound:.1f}; regret/T {rate_T:.4f} vs {rate_100:.4f} at T=100; {dt:.1f}s")
    assert ok


def test_c07_adaptive_regret(ball_cfg, fixed_ball_regret):
    reg, dt = _regrets(ExperimentConfig(schedule="adaptive_canceling", **ball_cfg).validate())
    mean_T = reg[:, -1].mean()
    fixed = fixed_ball_regret[0][:, -1].mean()
    bound = 110.6 * math.sqrt(10 * T)
    ratio = max(mean_T / fixed, fixed / mean_T)
    ok = mean_T <= bound and ratio <= 10 and dt < 120
    record_criterion(7, "adaptive regret on the l2-ball", ok,
                     f"mean regret {mean_T:.1f} <= {bound:.1f}; {ratio:.2f}x the non-adaptive {fixed:.1f}; {dt:.1f}s")
    assert ok


@pytest.fixture(scope="module")
def simplex_reference():
    cfg = ExperimentConfig(dimension=10).validate()
    prob = experiment.prepare(cfg)
    return ReferenceSolution(prob.f_star, prob.comparator, np.array([prob.f_star]), 0.0)


@pytest.mark.parametrize("kind", ["fixed_adversarial", "adaptive_adversarial"])
def test_c08_adversarial_regret(kind, simplex_reference):
    cfg = ExperimentConfig(
        name="adv", dimension=10, geometry="entropy_simplex", horizon=T, trials=SEEDS, seed=8,
        estimators=("l1",), metric="regret", objective="exp_center", noise="adversarial_iid",
        sigma=0.1, schedule=kind, L=2.0,
    ).validate()
    reg, dt = _regrets(cfg, simplex_reference)
    mirror = make_mirror("entropy_simplex", 10)
    bound = regret_bound(kind, ProblemDims(10, 1.0, 1.0), mirror.R, 2.0, T, 0.1)
    mean_T = reg[:, -1].mean()
    ok = mean_T <= bound and dt < 180
    record_criterion(8, f"adversarial noise, {kind}", ok, f"mean regret {mean_T:.1f} <= {bound:.1f}; {dt:.1f}s")
    assert ok


def test_c09_simplex_ordering(tmp_path):
    cfg = load("docs/exp_center.cfg")
    assert (cfg.dimension, cfg.horizon, cfg.trials, cfg.schedule, cfg.sigma) == (10, T, 30, "adaptive_canceling", 0.0)
    t0 = time.perf_counter()
    csv_path, svg_path, results = experiment.run_experiment(cfg, tmp_path / "ec.csv", tmp_path / "ec.svg")
    dt = time.perf_counter() - t0
    final = {e: np.mean([r.metric[-1] for r in results if r.estimator == e]) for e in ("l1", "l2")}
    text = svg_path.read_text()
    counts = {}
    for e in ("l1", "l2"):
        g = re.search(rf'<g data-estimator="{e}">(.*?)</g>', text, re.S).group(1)
        counts[e] = (g.count('class="trial"'), g.count('class="mean"'))
    ok = final["l1"] < final["l2"] and all(c == (30, 1) for c in counts.values()) and dt < 300
    record_criterion(9, "l1 beats l2 randomization on the simplex", ok,
                     f"final mean opt error l1 {final['l1']:.5f} < l2 {final['l2']:.5f}; curves {counts}; {dt:.1f}s")
    assert ok


def test_c10_determinism(tmp_path):
    base = dict(name="det", dimension=10, horizon=500, trials=3, seed=10, noise="adversarial_iid", sigma=0.1,
                schedule="adaptive_adversarial")
    paths = []
    for tag in ("a", "b"):
        cfg = ExperimentConfig(csv=str(tmp_path / f"{tag}.csv"), svg=str(tmp_path / f"{tag}.svg"), **base)
        paths.append(experiment.run_experiment(cfg)[0])
    ok = paths[0].read_bytes() == paths[1].read_bytes()
    record_criterion(10, "same seed and config give byte-identical CSV", ok, f"{paths[0].stat().st_size} bytes")
    assert ok


def test_c11_mutation_canary(tmp_path):
    t0 = time.perf_counter()
    res = subprocess.run(
        [sys.executable, "-m", "zoda.cli", "verify", "--inject-scale-bug", "--out", str(tmp_path / "v.csv")],
        capture_output=True, text=True,
    )
    dt = time.perf_counter() - t0
    failed = [l for l in res.stdout.splitlines() if l.startswith("[FAIL]")]
    ok = res.returncode != 0 and any("unbiasedness" in l for l in failed) and dt < 30
    record_criterion(11, "verify exits nonzero with the scale bug", ok,
                     f"exit {res.returncode}, {len(failed)} failed checks, {dt:.1f}s")
    assert ok
