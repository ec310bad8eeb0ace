"""Zero-order online dual averaging with two-point feedback.

Each round maps the dual state to ``x_t = argmax {eta_t <z_t, x> - V(x)}``,
queries the round's function at ``x_t +- h_t zeta_t``, forms a gradient
estimate ``g_t`` and sets ``z_{t+1} = z_t - g_t``.

Four parameter schedules are provided. The two ``fixed_*`` ones need the
horizon ``T`` and the Lipschitz constant ``L`` (plus the noise level for
the adversarial case); the two ``adaptive_*`` ones set
``eta_t = R / sqrt(2.75 * sum_{k<t} ||g_k||_{p*}^2)`` from observed
estimates only, with ``eta_t = 1`` while that sum is zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np

from . import estimator as est
from ._backend import kernels
from .estimator import NoiseModel, Objective
from .geometry import INF, ProblemDims, b_q, dual_exponent, lp_norm
from .mirror import MirrorMap
from .rng import DirectionStream, RngState

SCHEDULE_KINDS = (
    "fixed_canceling",
    "fixed_adversarial",
    "adaptive_canceling",
    "adaptive_adversarial",
)
ESTIMATOR_KINDS = ("l1", "l2")

# constants of the non-adaptive step size and the variance bound
_FIXED_ETA_CONST = 1.0 / (math.sqrt(6.0) + math.sqrt(12.0))
VARIANCE_CONST = 12.0 * (1.0 + math.sqrt(2.0)) ** 2


class ConfigurationError(ValueError):
    """Schedule or run inputs are missing or inconsistent."""


class RunAbort(RuntimeError):
    """The online loop hit a non-finite value."""

    def __init__(self, step: int, reason: str):
        super().__init__(f"run aborted at step {step}: {reason}")
        self.step = step
        self.reason = reason


@dataclass(frozen=True)
class Schedule:
    kind: str
    R: float
    dims: ProblemDims
    L: Optional[float] = None
    sigma: Optional[float] = None
    T: Optional[int] = None

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ConfigurationError(f"unknown schedule {self.kind!r}; choose from {SCHEDULE_KINDS}")
        if not self.R > 0:
            raise ConfigurationError(f"R must be positive, got {self.R!r}")
        if self.kind.startswith("fixed"):
            if self.L is None or not self.L > 0:
                raise ConfigurationError(f"{self.kind} needs a positive L")
            if self.T is None or int(self.T) != self.T or self.T < 1:
                raise ConfigurationError(f"{self.kind} needs a positive integer horizon T")
        if self.kind == "fixed_adversarial" and (self.sigma is None or not self.sigma > 0):
            raise ConfigurationError("fixed_adversarial needs sigma > 0")

    @property
    def adaptive(self) -> bool:
        return self.kind.startswith("adaptive")

    def params(self, t: int, grad_sq_sum: float = 0.0):
        """``(eta_t, h_t)`` for step ``t >= 1`` given ``sum_{k<t} ||g_k||_{p*}^2``."""
        if t < 1:
            raise ValueError(f"steps start at 1, got {t}")
        d, p = self.dims.d, self.dims.p
        R, b = self.R, b_q(self.dims)
        ve = self.dims.variance_exponent
        if self.kind == "fixed_canceling":
            eta = _FIXED_ETA_CONST * R / self.L * math.sqrt(d ** (-ve) / self.T)
            h = 7.0 * R / (100.0 * b * math.sqrt(self.T)) * d ** (ve / 2.0)
            return eta, h
        if self.kind == "fixed_adversarial":
            h = self._fixed_adversarial_h()
            inner = d ** (4.0 - 2.0 / p) * self.sigma**2 / (2.0 * h * h)
            inner += 0.5 * VARIANCE_CONST * self.L**2 * d**ve
            return R / math.sqrt(self.T) / math.sqrt(inner), h
        eta = 1.0 if grad_sq_sum <= 0.0 else R / math.sqrt(2.75 * grad_sq_sum)
        if self.kind == "adaptive_canceling":
            h = 7.0 * R / (200.0 * b * math.sqrt(t)) * d ** (ve / 2.0)
        else:
            h = math.sqrt(6.65 * math.sqrt(6.0) * R / b) * t**-0.25 * d ** (1.0 - 0.5 / p)
        return eta, h

    def _fixed_adversarial_h(self) -> float:
        d, p = self.dims.d, self.dims.p
        base = math.sqrt(2.0) * self.R * self.sigma / (self.L * b_q(self.dims))
        return math.sqrt(base) * self.T**-0.25 * d ** (1.0 - 0.5 / p)


def schedule_params(s: Schedule, t: int, grad_norm_history: float = 0.0):
    return s.params(t, grad_norm_history)


def _noise_branch(dims: ProblemDims) -> float:
    d, q, p = dims.d, dims.q, dims.p
    if q < math.log(d):
        return math.sqrt(q * d ** (1.0 + 1.0 / q - 1.0 / p))
    return math.sqrt(math.e * math.log(d) * d ** (1.0 - 1.0 / p))


def regret_bound(
    kind: str,
    dims: ProblemDims,
    R: float,
    L: float,
    T: int,
    sigma: float = 0.0,
) -> float:
    """Expected-regret upper bound guaranteed for schedule ``kind`` after ``T`` rounds."""
    ve = dims.variance_exponent
    if kind == "fixed_canceling":
        return 11.9 * R * L * math.sqrt(T * dims.d**ve)
    if kind == "fixed_adversarial":
        return 11.9 * R * L * math.sqrt(T * dims.d**ve) + 2.4 * math.sqrt(
            R * L * sigma
        ) * T**0.75 * _noise_branch(dims)
    if kind == "adaptive_canceling":
        return 110.6 * R * L * math.sqrt(T * dims.d**ve)
    if kind == "adaptive_adversarial":
        return 110.6 * R * L * math.sqrt(T * dims.d**ve) + 5.9 * math.sqrt(R) * (
            sigma + L
        ) * T**0.75 * _noise_branch(dims)
    raise ConfigurationError(f"unknown schedule {kind!r}")


@dataclass
class RunRecord:
    """Per-step trace of one run (arrays indexed by step - 1)."""

    x: np.ndarray
    loss: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    eta: np.ndarray
    h: np.ndarray
    grad_norm_sq_dual: np.ndarray
    comparator_loss: np.ndarray
    comparator: np.ndarray

    @property
    def T(self) -> int:
        return self.loss.shape[0]

    @property
    def cumulative_regret(self) -> np.ndarray:
        return np.cumsum(self.loss) - np.cumsum(self.comparator_loss)

    @property
    def regret(self) -> float:
        return float(self.loss.sum() - self.comparator_loss.sum())

    @property
    def running_average(self) -> np.ndarray:
        steps = np.arange(1, self.T + 1, dtype=np.float64)[:, None]
        return np.cumsum(self.x, axis=0) / steps


def _objective_iter(objectives, T):
    if isinstance(objectives, Objective):
        if T is None:
            raise ConfigurationError("a stationary objective needs a horizon T")
        return (objectives for _ in range(T)), T, objectives
    if T is None and hasattr(objectives, "__len__"):
        T = len(objectives)
    if T is None:
        raise ConfigurationError("an objective generator needs a horizon T")
    return iter(objectives), T, None


def run(
    mirror: MirrorMap,
    objectives: Union[Objective, Iterable[Objective]],
    noise: NoiseModel,
    schedule: Schedule,
    estimator: str = "l1",
    rng: Optional[RngState] = None,
    comparator=None,
    T: Optional[int] = None,
) -> RunRecord:
    """Run the online loop and record every step.

    ``rng`` drives the perturbation directions; the noise model carries
    its own stream. A stationary problem passes one ``Objective`` reused
    each round; otherwise pass a sequence (or a generator plus ``T``).
    """
    if estimator not in ESTIMATOR_KINDS:
        raise ConfigurationError(f"unknown estimator {estimator!r}; choose from {ESTIMATOR_KINDS}")
    d = mirror.d
    if schedule.dims.d != d:
        raise ConfigurationError(f"schedule dimension {schedule.dims.d} != mirror dimension {d}")
    if schedule.dims.p != mirror.p:
        raise ConfigurationError(
            f"schedule uses p={schedule.dims.p} but the mirror map is strongly convex w.r.t. l{mirror.p:g}"
        )
    if rng is None:
        raise ConfigurationError("run needs an RngState for the directions")
    comparator = np.asarray(comparator if comparator is not None else mirror.initial_point(), dtype=np.float64)
    if comparator.shape != (d,) or not mirror.contains(comparator, 1e-9):
        raise ConfigurationError("comparator must be a feasible point of the mirror's set")

    fs, T, stationary = _objective_iter(objectives, T if T is not None else schedule.T)
    p_star = dual_exponent(mirror.p)
    sign_norm_sq = 1.0 if p_star == INF else d ** (2.0 / p_star)
    mutation = est.scale_mutation()

    X = np.empty((T, d))
    loss = np.empty(T)
    y1s = np.empty(T)
    y2s = np.empty(T)
    etas = np.empty(T)
    hs = np.empty(T)
    g2s = np.empty(T)
    comp = np.empty(T)

    z = np.zeros(d)
    x = np.empty(d)
    dirs = DirectionStream(estimator, d, rng)
    noise_pairs = noise.stream()
    grad_sq_sum = 0.0
    comp_stationary = stationary.value(comparator) if stationary is not None else None

    n_done = 0
    for i, f in enumerate(fs):
        t = i + 1
        eta, h = schedule.params(t, grad_sq_sum)
        mirror.argmax(z, eta, out=x)
        zeta, signs = dirs.next()
        xi1, xi2 = next(noise_pairs)
        fn = f.fn
        y1 = float(fn(x + h * zeta)) + xi1
        y2 = float(fn(x - h * zeta)) + xi2
        if not (math.isfinite(y1) and math.isfinite(y2)):
            raise RunAbort(t, f"non-finite query values ({y1}, {y2})")
        scale = d * (y1 - y2) / (2.0 * h)
        if estimator == "l1":
            scale *= mutation
            g2 = scale * scale * sign_norm_sq
            kernels.sign_axpy(z, scale, signs)
        else:
            g = scale * zeta
            g2 = float(lp_norm(g, p_star)) ** 2
            z -= g
        if not math.isfinite(g2) or not np.isfinite(z).all():
            raise RunAbort(t, "non-finite dual state")
        grad_sq_sum += g2

        X[i] = x
        loss[i] = f.value(x)
        comp[i] = comp_stationary if comp_stationary is not None else f.value(comparator)
        y1s[i], y2s[i], etas[i], hs[i], g2s[i] = y1, y2, eta, h, g2
        n_done = t
        if n_done == T:
            break

    sl = slice(0, n_done)
    return RunRecord(
        x=X[sl],
        loss=loss[sl],
        y1=y1s[sl],
        y2=y2s[sl],
        eta=etas[sl],
        h=hs[sl],
        grad_norm_sq_dual=g2s[sl],
        comparator_loss=comp[sl],
        comparator=comparator,
    )
