"""Two-point zero-order oracle, noise models and randomized gradient estimates.

The l1 estimate ``(d / 2h) (y' - y'') sign(zeta)`` is kept compact as one
float plus ``d`` signs; its norms are O(1) to evaluate. The l2 baseline
``(d / 2h) (y' - y'') zeta`` with zeta uniform on the l2-sphere is dense.
"""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._backend import kernels
from .geometry import INF, check_norm_index, dual_exponent, lp_norm
from .rng import RngState, SphereSample


class EvaluationError(RuntimeError):
    """An objective returned a non-finite value."""


@dataclass(frozen=True)
class Objective:
    """Convex function on R^d with a declared Lipschitz constant w.r.t. ``||.||_q``.

    ``fn`` must accept a point of shape (d,) or a batch of shape (n, d)
    and reduce over the last axis. ``smoothed_grad``, when known, returns
    the gradient of the l1-ball smoothing ``E f(x + hU)`` at ``(x, h)``.
    """

    fn: Callable
    lipschitz_L: float
    lipschitz_q: float = 2.0
    name: str = "objective"
    smoothed_grad: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.lipschitz_L > 0:
            raise ValueError(f"Lipschitz constant must be positive, got {self.lipschitz_L!r}")
        object.__setattr__(self, "lipschitz_q", check_norm_index(self.lipschitz_q))

    def __call__(self, x):
        return self.fn(x)

    def value(self, x) -> float:
        v = float(self.fn(x))
        if not math.isfinite(v):
            raise EvaluationError(f"{self.name} returned {v} at {x!r}")
        return v


def linear_objective(a, q: float = 2.0) -> Objective:
    """``<a, x>``; Lipschitz w.r.t. l_q with constant ``||a||_{q*}``."""
    a = np.asarray(a, dtype=np.float64)
    L = lp_norm(a, dual_exponent(q))
    return Objective(
        fn=lambda x: np.asarray(x) @ a,
        lipschitz_L=L if L > 0 else 1.0,
        lipschitz_q=q,
        name="linear",
        smoothed_grad=lambda x, h: a.copy(),
    )


def squared_norm_objective() -> Objective:
    """``||x||_2^2``; smoothing over the symmetric l1-ball leaves the gradient ``2x``."""
    return Objective(
        fn=lambda x: (np.asarray(x) ** 2).sum(axis=-1),
        lipschitz_L=INF,
        lipschitz_q=2.0,
        name="squared_norm",
        smoothed_grad=lambda x, h: 2.0 * np.asarray(x, dtype=np.float64),
    )


def constant_objective(value: float = 0.0) -> Objective:
    return Objective(
        fn=lambda x: np.full(np.shape(x)[:-1], float(value)) if np.ndim(x) > 1 else float(value),
        lipschitz_L=1.0,
        lipschitz_q=2.0,
        name="constant",
        smoothed_grad=lambda x, h: np.zeros(np.shape(x)[-1]),
    )


def norm_objective(q: float, center=None) -> Objective:
    """``||x - center||_q``, 1-Lipschitz w.r.t. l_q."""
    q = check_norm_index(q)
    c = None if center is None else np.asarray(center, dtype=np.float64)

    def fn(x):
        x = np.asarray(x, dtype=np.float64)
        return lp_norm(x if c is None else x - c, q)

    return Objective(fn=fn, lipschitz_L=1.0, lipschitz_q=q, name=f"norm_l{q:g}")


NOISE_KINDS = ("canceling", "adversarial_iid", "adversarial_sign_flip")


@dataclass
class NoiseModel:
    """Additive noise on the two queries of a round.

    ``canceling``: one draw uniform on [-sigma, sigma] shared by both queries.
    ``adversarial_iid``: independent draws uniform on
    ``[sigma (m - 1), sigma (m + 1)] & [-sigma, sigma]`` with offset ``m``,
    so each has second moment at most sigma^2 and mean possibly nonzero.
    ``adversarial_sign_flip``: ``(+sigma, -sigma)`` every round.
    """

    kind: str = "canceling"
    sigma: float = 0.0
    mean_offset: float = 0.3
    rng: Optional[RngState] = None

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; choose from {NOISE_KINDS}")
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma!r}")
        if not -1.0 <= self.mean_offset <= 1.0:
            raise ValueError(f"mean_offset must lie in [-1, 1], got {self.mean_offset!r}")
        needs_rng = self.sigma > 0 and self.kind != "adversarial_sign_flip"
        if needs_rng and self.rng is None:
            raise ValueError(f"{self.kind} noise with sigma > 0 needs an rng")

    @property
    def interval(self):
        lo = max(self.sigma * (self.mean_offset - 1.0), -self.sigma)
        hi = min(self.sigma * (self.mean_offset + 1.0), self.sigma)
        return lo, hi

    def draw_batch(self, n: int):
        """Noise pairs for ``n`` rounds as two arrays."""
        if self.sigma == 0.0:
            z = np.zeros(n)
            return z, z.copy()
        if self.kind == "adversarial_sign_flip":
            return np.full(n, self.sigma), np.full(n, -self.sigma)
        if self.kind == "canceling":
            xi = self.sigma * (2.0 * self.rng.uniform(n) - 1.0)
            return xi, xi.copy()
        lo, hi = self.interval
        u = self.rng.uniform((n, 2))
        xi = lo + (hi - lo) * u
        return xi[:, 0].copy(), xi[:, 1].copy()

    def draw(self):
        a, b = self.draw_batch(1)
        return float(a[0]), float(b[0])

    def stream(self, block: int = 512):
        """Generator of per-round noise pairs, drawn ``block`` rounds at a time."""
        while True:
            a, b = self.draw_batch(block)
            yield from zip(a.tolist(), b.tolist())


def _direction(zeta):
    return zeta.zeta if isinstance(zeta, SphereSample) else np.asarray(zeta, dtype=np.float64)


def two_point_query(f: Objective, x, h: float, zeta, noise: NoiseModel):
    """Observe ``f(x + h zeta) + xi'`` and ``f(x - h zeta) + xi''``."""
    if not h > 0:
        raise ValueError(f"h must be positive, got {h!r}")
    u = _direction(zeta)
    xi1, xi2 = noise.draw()
    return f.value(x + h * u) + xi1, f.value(x - h * u) + xi2


# multiplier on every l1 estimate; only changed by ``inject_scale_bug``
_scale_mutation = 1.0


@contextlib.contextmanager
def inject_scale_bug(factor: float = 1.5):
    """Deliberately bias the l1 estimator (mutation testing of the checks)."""
    global _scale_mutation
    prev = _scale_mutation
    _scale_mutation = factor
    try:
        yield
    finally:
        _scale_mutation = prev


def scale_mutation() -> float:
    return _scale_mutation


@dataclass(frozen=True)
class GradEstimate:
    """Compact l1 gradient estimate ``scale * signs``."""

    scale: float
    signs: np.ndarray  # int8, +-1

    @property
    def d(self) -> int:
        return self.signs.shape[0]

    def dense(self) -> np.ndarray:
        return self.scale * self.signs.astype(np.float64)

    def norm(self, r: float) -> float:
        r = check_norm_index(r)
        return abs(self.scale) * (1.0 if r == INF else self.d ** (1.0 / r))

    def subtract_from(self, z: np.ndarray) -> np.ndarray:
        """In-place ``z <- z - g`` without materializing ``g``."""
        return kernels.sign_axpy(z, self.scale, self.signs)

    def to_bits(self) -> bytes:
        return np.packbits(self.signs < 0).tobytes()

    @classmethod
    def from_bits(cls, scale: float, bits: bytes, d: int) -> GradEstimate:
        neg = np.unpackbits(np.frombuffer(bits, dtype=np.uint8), count=d).astype(bool)
        return cls(float(scale), np.where(neg, -1, 1).astype(np.int8))


def _check_h(h):
    if not h > 0:
        raise ValueError(f"h must be positive, got {h!r}")


def l1_gradient(y1: float, y2: float, h: float, zeta: SphereSample) -> GradEstimate:
    _check_h(h)
    scale = _scale_mutation * zeta.d * (y1 - y2) / (2.0 * h)
    return GradEstimate(scale, zeta.signs)


def l2_gradient(y1: float, y2: float, h: float, zeta_circ) -> np.ndarray:
    _check_h(h)
    u = np.asarray(zeta_circ, dtype=np.float64)
    if abs(np.sqrt(u @ u) - 1.0) > 1e-12:
        raise ValueError("zeta_circ must lie on the unit l2-sphere")
    return (u.shape[0] * (y1 - y2) / (2.0 * h)) * u


def grad_norm_sq_dual(g: GradEstimate, p: float) -> float:
    """``||g||_{p*}^2 = scale^2 d^{2/p*}`` in O(1)."""
    ps = dual_exponent(p)
    return g.scale * g.scale * (1.0 if ps == INF else g.d ** (2.0 / ps))


def dense_norm_sq_dual(g, p: float) -> float:
    return float(lp_norm(g, dual_exponent(p))) ** 2
