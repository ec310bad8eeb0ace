"""Norm indices, dual exponents, l_p norms and the smoothing bias factor.

Norm indices are plain floats in ``[1, inf]`` with ``math.inf`` standing for
the sup-norm, so comparisons such as ``q >= log(d)`` stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INF = math.inf


def check_norm_index(r) -> float:
    r = float(r)
    if not r >= 1.0:  # also rejects nan
        raise ValueError(f"norm index must lie in [1, inf], got {r!r}")
    return r


@dataclass(frozen=True)
class ProblemDims:
    """Dimension ``d``, Lipschitz norm index ``q`` and strong-convexity index ``p``."""

    d: int
    q: float
    p: float

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 3:
            raise ValueError(f"d must be an integer >= 3, got {self.d!r}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "q", check_norm_index(self.q))
        object.__setattr__(self, "p", check_norm_index(self.p))

    @property
    def variance_exponent(self) -> float:
        """``1 + 2/(q ^ 2) - 2/p``, the dimension power shared by the rates."""
        return 1.0 + 2.0 / min(self.q, 2.0) - 2.0 / self.p


def dual_exponent(r: float) -> float:
    """Hölder conjugate ``r* = r/(r-1)``, with ``1 <-> inf``.

    Computed as ``1/(1 - 1/r)`` so that conjugation is an exact involution
    on the usual indices (1, 4/3, 2, 4, inf).
    """
    r = check_norm_index(r)
    if r == 1.0:
        return INF
    if r == INF:
        return 1.0
    return 1.0 / (1.0 - 1.0 / r)


def lp_norm(x, r: float):
    """l_r norm along the last axis, rescaled by the max entry against overflow."""
    r = check_norm_index(r)
    a = np.abs(np.asarray(x, dtype=np.float64))
    if r == INF:
        return _scalar(a.max(axis=-1))
    if r == 1.0:
        return _scalar(a.sum(axis=-1))
    m = a.max(axis=-1)
    safe = np.where(m > 0.0, m, 1.0)
    scaled = a / np.expand_dims(safe, -1)
    if r == 2.0:
        s = np.sqrt((scaled * scaled).sum(axis=-1))
    else:
        s = (scaled**r).sum(axis=-1) ** (1.0 / r)
    return _scalar(np.where(m > 0.0, m * s, 0.0))


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


def b_q(dims: ProblemDims) -> float:
    """Smoothing bias factor: ``|f_h - f| <= b_q(d) L h`` for l1-ball smoothing."""
    d, q = dims.d, dims.q
    logd = math.log(d)
    if q < logd:
        return q * d ** (1.0 / q) / (d + 1)
    return math.e * logd / (d + 1)


def ball_moment_bound(d: int, q: float) -> float:
    """Upper bound ``q d^(1/q) / (d+1)`` on ``E||U||_q`` for U uniform in the l1-ball (finite q)."""
    q = check_norm_index(q)
    if q == INF:
        raise ValueError("ball_moment_bound needs finite q; use b_q for q = inf")
    return q * d ** (1.0 / q) / (d + 1)
