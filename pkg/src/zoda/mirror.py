"""Dual-averaging geometries with closed-form primal maps.

``EntropySimplex`` pairs the probability simplex with negative entropy
(strongly convex w.r.t. l1); ``SquaredL2Ball`` pairs the closed unit l2-ball
with ``0.5 ||x||_2^2`` (strongly convex w.r.t. l2).
"""

from __future__ import annotations

import math

import numpy as np

from ._backend import kernels


class MirrorMap:
    kind = ""
    p = 2.0

    def __init__(self, d: int):
        if int(d) != d or d < 1:
            raise ValueError(f"dimension must be a positive integer, got {d!r}")
        self.d = int(d)

    @property
    def R_squared(self) -> float:
        raise NotImplementedError

    @property
    def R(self) -> float:
        return math.sqrt(self.R_squared)

    def argmax(self, z, eta, out=None):
        """Maximizer of ``eta <z, x> - V(x)`` over the feasible set."""
        raise NotImplementedError

    def V(self, x):
        raise NotImplementedError

    def contains(self, x, tol=1e-9) -> bool:
        raise NotImplementedError

    def initial_point(self):
        return self.argmax(np.zeros(self.d), 1.0)

    def _prepare(self, z, eta, out):
        z = np.ascontiguousarray(z, dtype=np.float64)
        if z.shape != (self.d,):
            raise ValueError(f"expected z of shape ({self.d},), got {z.shape}")
        if not np.all(np.isfinite(z)):
            raise ValueError("dual state z has non-finite entries")
        if not eta > 0:
            raise ValueError(f"eta must be positive, got {eta!r}")
        if out is None:
            out = np.empty(self.d)
        return z, float(eta), out

    def __eq__(self, other):
        return type(self) is type(other) and self.d == other.d

    def __hash__(self):
        return hash((self.kind, self.d))

    def __repr__(self):
        return f"{type(self).__name__}(d={self.d})"


class EntropySimplex(MirrorMap):
    kind = "entropy_simplex"
    p = 1.0

    @property
    def R_squared(self) -> float:
        return math.log(self.d)

    def argmax(self, z, eta, out=None):
        # max-shifted softmax; underflowed entries stay at 0
        z, eta, out = self._prepare(z, eta, out)
        return kernels.softmax_into(z, eta, out)

    def V(self, x):
        x = np.asarray(x, dtype=np.float64)
        safe = np.where(x > 0, x, 1.0)
        return float(np.sum(np.where(x > 0, x * np.log(safe), 0.0)))

    def contains(self, x, tol=1e-9) -> bool:
        x = np.asarray(x)
        return bool(np.all(x >= 0.0) and abs(x.sum() - 1.0) <= tol)


class SquaredL2Ball(MirrorMap):
    kind = "squared_l2_ball"
    p = 2.0

    @property
    def R_squared(self) -> float:
        return 0.5

    def argmax(self, z, eta, out=None):
        # radial clipping of eta*z onto the unit ball
        z, eta, out = self._prepare(z, eta, out)
        return kernels.ball_clip_into(z, eta, out)

    def V(self, x):
        x = np.asarray(x, dtype=np.float64)
        return 0.5 * float(x @ x)

    def contains(self, x, tol=1e-12) -> bool:
        x = np.asarray(x, dtype=np.float64)
        return bool(np.sqrt(x @ x) <= 1.0 + tol)


GEOMETRIES = {cls.kind: cls for cls in (EntropySimplex, SquaredL2Ball)}


def make_mirror(kind: str, d: int) -> MirrorMap:
    try:
        return GEOMETRIES[kind](d)
    except KeyError:
        raise ValueError(f"unknown geometry {kind!r}; choose from {sorted(GEOMETRIES)}") from None


def argmax_step(mirror: MirrorMap, z, eta):
    return mirror.argmax(z, eta)


def range_bound(mirror: MirrorMap) -> float:
    return mirror.R_squared
