"""Configured multi-trial experiments with CSV traces and SVG figures."""

from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import svg
from ._backend import BACKEND
from .config import ExperimentConfig, serialize
from .dual_averaging import Schedule, run
from .estimator import NoiseModel
from .geometry import ProblemDims
from .mirror import make_mirror
from .problems import BuiltProblem, ReferenceSolution, build_problem
from .rng import GENERATOR_NAME, STREAM_DIRECTIONS, STREAM_NOISE, RngState

log = logging.getLogger(__name__)

CSV_SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "run_id",
    "estimator",
    "trial",
    "step",
    "eta",
    "h",
    "loss",
    "opt_error_or_regret",
    "grad_norm_sq_dual",
    "seed",
)


@dataclass
class TrialResult:
    estimator: str
    trial: int
    eta: np.ndarray
    h: np.ndarray
    loss: np.ndarray
    metric: np.ndarray
    grad_norm_sq_dual: np.ndarray
    regret: float


def make_schedule(cfg: ExperimentConfig, mirror, objective) -> Schedule:
    dims = ProblemDims(cfg.dimension, objective.lipschitz_q, mirror.p)
    return Schedule(
        kind=cfg.schedule,
        R=cfg.R if cfg.R is not None else mirror.R,
        dims=dims,
        L=cfg.L,
        sigma=cfg.sigma,
        T=cfg.horizon,
    )


def prepare(cfg: ExperimentConfig, reference=None) -> BuiltProblem:
    mirror = make_mirror(cfg.geometry, cfg.dimension)
    return build_problem(cfg.objective, cfg.objective_params, mirror, reference=reference)


def run_trial(cfg: ExperimentConfig, estimator: str, trial: int, reference=None) -> TrialResult:
    """One seeded run; the trial's streams do not depend on the estimator."""
    mirror = make_mirror(cfg.geometry, cfg.dimension)
    prob = build_problem(cfg.objective, cfg.objective_params, mirror, reference=reference)
    schedule = make_schedule(cfg, mirror, prob.objective)
    base = RngState(cfg.seed).child(trial)
    noise = NoiseModel(cfg.noise, cfg.sigma, cfg.mean_offset, base.child(STREAM_NOISE))
    rec = run(
        mirror,
        prob.objective,
        noise,
        schedule,
        estimator=estimator,
        rng=base.child(STREAM_DIRECTIONS),
        comparator=prob.comparator,
        T=cfg.horizon,
    )
    if cfg.metric == "opt_error":
        metric = np.asarray(prob.objective(rec.running_average), dtype=np.float64) - prob.f_star
    else:
        metric = rec.cumulative_regret
    return TrialResult(estimator, trial, rec.eta, rec.h, rec.loss, metric, rec.grad_norm_sq_dual, rec.regret)


def _task(args):
    return run_trial(*args)


def run_trials(cfg: ExperimentConfig, reference=None):
    """All (estimator, trial) runs, ordered by estimator then trial."""
    tasks = [(cfg, e, k, reference) for e in cfg.estimators for k in range(cfg.trials)]
    workers = cfg.workers if cfg.workers > 0 else (os.cpu_count() or 1)
    workers = min(workers, len(tasks))
    if workers <= 1:
        return [_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_task, tasks))


def write_csv(path, cfg: ExperimentConfig, results) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in results:
            run_id = f"{cfg.name}/{r.estimator}/{r.trial}"
            steps = range(1, r.loss.shape[0] + 1)
            w.writerows(
                (run_id, r.estimator, r.trial, s, e, h, lo, m, g, cfg.seed)
                for s, e, h, lo, m, g in zip(
                    steps, r.eta.tolist(), r.h.tolist(), r.loss.tolist(), r.metric.tolist(),
                    r.grad_norm_sq_dual.tolist(),
                )
            )


def read_csv(path):
    """Parse an experiment CSV into ``({estimator: {trial: (steps, values)}}, seeds)``."""
    data = {}
    seeds = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {header}")
        ie, it, istep, im, iseed = (
            CSV_COLUMNS.index(c) for c in ("estimator", "trial", "step", "opt_error_or_regret", "seed")
        )
        for row in reader:
            seeds.add(row[iseed])
            per = data.setdefault(row[ie], {}).setdefault(int(row[it]), ([], []))
            per[0].append(int(row[istep]))
            per[1].append(float(row[im]))
    return data, seeds


def svg_from_csv(path, title: str = "", ylabel: str = "optimization error") -> str:
    data, seeds = read_csv(path)
    series = {}
    for est, trials in data.items():
        rows = [np.asarray(trials[k][1]) for k in sorted(trials)]
        T = min(len(r) for r in rows)
        keep = svg.sample_steps(T)
        series[est] = (keep, np.array([r[keep - 1] for r in rows]))
    meta = f"seed={','.join(sorted(seeds))}; generator={GENERATOR_NAME}"
    return svg.render(series, title, ylabel, meta)


def write_meta(path, cfg: ExperimentConfig, prob: BuiltProblem) -> Path:
    meta_path = Path(str(path) + ".meta.json")
    meta = {
        "schema_version": CSV_SCHEMA_VERSION,
        "columns": list(CSV_COLUMNS),
        "generator": GENERATOR_NAME,
        "seed": cfg.seed,
        "kernel_backend": BACKEND,
        "f_star": prob.f_star,
        "comparator": prob.comparator.tolist(),
        "config": serialize(cfg),
    }
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return meta_path


def run_experiment(cfg: ExperimentConfig, csv_path=None, svg_path=None):
    """Run every trial of ``cfg`` and write the CSV trace, its metadata and the SVG.

    Returns ``(csv_path, svg_path, results)``.
    """
    cfg = cfg.with_env_seed().validate()
    csv_path = Path(csv_path or cfg.csv)
    svg_path = Path(svg_path or cfg.svg)
    prob = prepare(cfg)
    reference = ReferenceSolution(prob.f_star, prob.comparator, np.array([prob.f_star]), 0.0)
    log.info("f_star=%.12g; running %d trials x %s", prob.f_star, cfg.trials, ",".join(cfg.estimators))
    results = run_trials(cfg, reference)
    write_csv(csv_path, cfg, results)
    write_meta(csv_path, cfg, prob)
    ylabel = "optimization error" if cfg.metric == "opt_error" else "cumulative regret"
    title = f"{cfg.name}: d={cfg.dimension}, {cfg.trials} trials, {cfg.schedule}"
    svg_path.parent.mkdir(parents=True, exist_ok=True)
    svg_path.write_text(svg_from_csv(csv_path, title, ylabel), encoding="utf-8")
    return csv_path, svg_path, results
