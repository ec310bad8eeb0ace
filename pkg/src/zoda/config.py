"""Experiment configuration: a sectioned ``key = value`` text file.

Example::

    [experiment]
    name = exp_center
    dimension = 10
    geometry = entropy_simplex
    horizon = 10000
    trials = 30
    seed = 20240601
    estimators = l1, l2

    [objective]
    name = exp_center

    [noise]
    kind = canceling
    sigma = 0.0

    [schedule]
    kind = adaptive_canceling

    [output]
    csv = out/exp_center.csv
    svg = out/exp_center.svg

``R`` defaults to the geometry's range bound. ``L`` is required by the
``fixed_*`` schedules; ``fixed_adversarial`` takes its noise level from
``[noise] sigma``. The environment variable ``ZODA_SEED`` overrides the
master seed.
"""

from __future__ import annotations

import configparser
import io
import os
from dataclasses import dataclass, field, fields
from typing import Optional

from .dual_averaging import ESTIMATOR_KINDS, SCHEDULE_KINDS, ConfigurationError
from .estimator import NOISE_KINDS
from .mirror import GEOMETRIES
from .problems import OBJECTIVES

SEED_ENV = "ZODA_SEED"
METRICS = ("opt_error", "regret")


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    dimension: int = 10
    geometry: str = "entropy_simplex"
    horizon: int = 10000
    trials: int = 30
    seed: int = 0
    estimators: tuple = ("l1", "l2")
    metric: str = "opt_error"
    workers: int = 0
    objective: str = "exp_center"
    objective_params: dict = field(default_factory=dict)
    noise: str = "canceling"
    sigma: float = 0.0
    mean_offset: float = 0.3
    schedule: str = "adaptive_canceling"
    R: Optional[float] = None
    L: Optional[float] = None
    csv: str = "out/experiment.csv"
    svg: str = "out/experiment.svg"

    def validate(self) -> ExperimentConfig:
        """Check every field the chosen parts need; raises ``ConfigurationError``."""
        problems = []
        if self.geometry not in GEOMETRIES:
            problems.append(f"geometry must be one of {sorted(GEOMETRIES)}")
        if self.objective not in OBJECTIVES:
            problems.append(f"objective must be one of {sorted(OBJECTIVES)}")
        else:
            unknown = set(self.objective_params) - set(OBJECTIVES[self.objective])
            if unknown:
                problems.append(f"unknown parameters for {self.objective}: {sorted(unknown)}")
        if self.noise not in NOISE_KINDS:
            problems.append(f"noise kind must be one of {NOISE_KINDS}")
        if self.schedule not in SCHEDULE_KINDS:
            problems.append(f"schedule must be one of {SCHEDULE_KINDS}")
        if not self.estimators or any(e not in ESTIMATOR_KINDS for e in self.estimators):
            problems.append(f"estimators must be a non-empty subset of {ESTIMATOR_KINDS}")
        if len(set(self.estimators)) != len(self.estimators):
            problems.append("estimators must not repeat")
        if self.metric not in METRICS:
            problems.append(f"metric must be one of {METRICS}")
        if self.dimension < 3:
            problems.append("dimension must be >= 3")
        if self.horizon < 1 or self.trials < 1:
            problems.append("horizon and trials must be positive")
        if not 0 <= self.seed < 2**64:
            problems.append("seed must be a 64-bit unsigned integer")
        if self.sigma < 0 or not -1 <= self.mean_offset <= 1:
            problems.append("sigma must be >= 0 and mean_offset in [-1, 1]")
        if self.R is not None and not self.R > 0:
            problems.append("R must be positive")
        if self.schedule.startswith("fixed") and (self.L is None or not self.L > 0):
            problems.append(f"schedule {self.schedule} requires [schedule] L > 0")
        if self.schedule == "fixed_adversarial" and not self.sigma > 0:
            problems.append("schedule fixed_adversarial requires [noise] sigma > 0")
        if problems:
            raise ConfigurationError("invalid configuration: " + "; ".join(problems))
        return self

    def with_env_seed(self) -> ExperimentConfig:
        raw = os.environ.get(SEED_ENV)
        if raw is None or raw == "":
            return self
        try:
            seed = int(raw, 0)
        except ValueError:
            raise ConfigurationError(f"{SEED_ENV}={raw!r} is not an integer") from None
        return _replace(self, seed=seed)


def _replace(cfg, **kw):
    vals = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    vals.update(kw)
    return ExperimentConfig(**vals)


_LAYOUT = {
    "experiment": ("name", "dimension", "geometry", "horizon", "trials", "seed", "estimators", "metric", "workers"),
    "noise": ("sigma", "mean_offset"),
    "schedule": ("R", "L"),
    "output": ("csv", "svg"),
}
_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _fmt(v) -> str:
    if isinstance(v, tuple):
        return ", ".join(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize(cfg: ExperimentConfig) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    for section, keys in _LAYOUT.items():
        cp[section] = {}
        if section == "noise":
            cp[section]["kind"] = cfg.noise
        if section == "schedule":
            cp[section]["kind"] = cfg.schedule
        for k in keys:
            v = getattr(cfg, k)
            if v is not None:
                cp[section][k] = _fmt(v)
    cp["objective"] = {"name": cfg.objective}
    for k, v in sorted(cfg.objective_params.items()):
        cp["objective"][k] = _fmt(v)
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def _convert(key, raw):
    t = _TYPES[key]
    try:
        if t == "int":
            return int(raw, 0)
        if t == "float" or t == "Optional[float]":
            return float(raw)
        if t == "tuple":
            return tuple(s.strip() for s in raw.split(",") if s.strip())
    except ValueError:
        raise ConfigurationError(f"bad value for {key}: {raw!r}") from None
    return raw


def parse(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"cannot parse config: {exc}") from None
    vals = {}
    known = set(_LAYOUT) | {"objective"}
    for section in cp.sections():
        if section not in known:
            raise ConfigurationError(f"unknown section [{section}]")
    for section, keys in _LAYOUT.items():
        if section not in cp:
            continue
        sec = dict(cp[section])
        if section in ("noise", "schedule") and "kind" in sec:
            vals[section] = sec.pop("kind")
        for k, raw in sec.items():
            if k not in keys:
                raise ConfigurationError(f"unknown key {k!r} in [{section}]")
            if k in ("R", "L") and raw.strip().lower() in ("", "auto"):
                continue
            vals[k] = _convert(k, raw)
    if "objective" in cp:
        sec = dict(cp["objective"])
        name = sec.pop("name", ExperimentConfig.objective)
        vals["objective"] = name
        param_types = OBJECTIVES.get(name, {})
        params = {}
        for k, raw in sec.items():
            if k not in param_types:
                raise ConfigurationError(f"unknown parameter {k!r} for objective {name!r}")
            typ = param_types[k][0]
            try:
                params[k] = typ(raw)
            except ValueError:
                raise ConfigurationError(f"bad value for objective parameter {k}: {raw!r}") from None
        vals["objective_params"] = params
    return ExperimentConfig(**vals)


def load(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
