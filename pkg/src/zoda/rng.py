"""Seedable random streams and the samplers used by the estimators.

Uniform directions on the l1-sphere are normalized i.i.d. Laplace vectors;
uniform points in the l1-ball divide the first ``d`` of ``d + 1`` Laplace
draws by the l1-norm of all of them. Laplace variates come from the inverse
CDF applied to uniforms that exclude both endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels

GENERATOR_NAME = "numpy.PCG64+SeedSequence"

# child stream ids below a trial key
STREAM_DIRECTIONS = 0
STREAM_NOISE = 1

_MAX_SEED = 2**64


class RngState:
    """Deterministic, splittable generator of uniforms in (0, 1).

    A state is identified by ``(seed, key)``; ``child(*k)`` derives an
    independent stream with key ``key + k``. Two states with equal
    identity produce bit-identical streams.
    """

    def __init__(self, seed: int, key: tuple[int, ...] = ()):
        seed = int(seed)
        if not 0 <= seed < _MAX_SEED:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.key = tuple(int(k) for k in key)
        ss = np.random.SeedSequence(seed, spawn_key=self.key)
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def child(self, *key: int) -> RngState:
        return RngState(self.seed, self.key + tuple(key))

    def uniform(self, size=None):
        """Uniforms strictly inside (0, 1); zeros are redrawn."""
        u = self._gen.random(size)
        if size is None:
            while u == 0.0:
                u = self._gen.random()
            return u
        bad = u == 0.0
        while bad.any():
            u[bad] = self._gen.random(int(bad.sum()))
            bad = u == 0.0
        return u

    def standard_normal(self, size=None):
        return self._gen.standard_normal(size)

    def __repr__(self):
        return f"RngState(seed={self.seed}, key={self.key})"


@dataclass(frozen=True)
class SphereSample:
    """A point on the unit l1-sphere with its sign vector (sign(0) = +1)."""

    zeta: np.ndarray
    signs: np.ndarray  # int8, +-1

    @property
    def d(self) -> int:
        return self.zeta.shape[0]


def laplace_inverse(u: float) -> float:
    """Quantile function of the centered, unit-scale Laplace distribution."""
    if not 0.0 < u < 1.0:
        raise ValueError(f"laplace_inverse requires 0 < u < 1, got {u!r}")
    if u < 0.5:
        return math.log(2.0 * u)
    return -math.log(2.0 * (1.0 - u))


def laplace(rng: RngState, size) -> np.ndarray:
    return kernels.laplace_inverse_array(rng.uniform(size))


def _check_dim(d):
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    return int(d)


def _redraw_zero_rows(w, norms, draw):
    # a zero l1-norm needs every uniform to be exactly 1/2
    bad = norms == 0.0
    while bad.any():
        w[bad] = draw(int(bad.sum()))
        norms = _norm_for(w)
        bad = norms == 0.0
    return w


def _norm_for(w):
    return np.abs(w).sum(axis=-1)


def l1_sphere_batch(n: int, d: int, rng: RngState) -> np.ndarray:
    """``n`` i.i.d. uniform points on the l1-sphere, shape (n, d)."""
    d = _check_dim(d)
    w = laplace(rng, (n, d))
    w = _redraw_zero_rows(w, _norm_for(w), lambda m: laplace(rng, (m, d)))
    return w / _norm_for(w)[:, None]


def sample_l1_sphere(d: int, rng: RngState) -> SphereSample:
    zeta = l1_sphere_batch(1, d, rng)[0]
    return SphereSample(zeta, np.where(zeta >= 0.0, 1, -1).astype(np.int8))


def l1_ball_batch(n: int, d: int, rng: RngState) -> np.ndarray:
    """``n`` i.i.d. uniform points in the open l1-ball, shape (n, d)."""
    d = _check_dim(d)
    w = laplace(rng, (n, d + 1))
    w = _redraw_zero_rows(w, _norm_for(w), lambda m: laplace(rng, (m, d + 1)))
    return w[:, :d] / _norm_for(w)[:, None]


def sample_l1_ball(d: int, rng: RngState) -> np.ndarray:
    return l1_ball_batch(1, d, rng)[0]


def l2_sphere_batch(n: int, d: int, rng: RngState) -> np.ndarray:
    """``n`` i.i.d. uniform points on the l2-sphere (normalized Gaussians)."""
    d = _check_dim(d)
    g = rng.standard_normal((n, d))
    norms = np.sqrt((g * g).sum(axis=1))
    bad = norms == 0.0
    while bad.any():
        g[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.sqrt((g * g).sum(axis=1))
        bad = norms == 0.0
    return g / norms[:, None]


def sample_l2_sphere(d: int, rng: RngState) -> np.ndarray:
    return l2_sphere_batch(1, d, rng)[0]


class DirectionStream:
    """Buffered per-step directions for the online loop.

    Draws ``block`` directions at a time so the loop pays the sampling
    overhead once per block. The sequence depends only on the stream
    identity and ``block``, never on how many steps are consumed.
    """

    def __init__(self, kind: str, d: int, rng: RngState, block: int = 512):
        if kind not in ("l1", "l2"):
            raise ValueError(f"unknown direction kind {kind!r}")
        self.kind = kind
        self.d = _check_dim(d)
        self.rng = rng
        self.block = block
        self._buf = np.empty((0, d))
        self._signs = np.empty((0, d), dtype=np.int8)
        self._i = 0

    def _refill(self):
        if self.kind == "l1":
            self._buf = l1_sphere_batch(self.block, self.d, self.rng)
            self._signs = np.where(self._buf >= 0.0, 1, -1).astype(np.int8)
        else:
            self._buf = l2_sphere_batch(self.block, self.d, self.rng)
        self._i = 0

    def next(self):
        """Return ``(zeta, signs)``; ``signs`` is None for l2 directions."""
        if self._i >= self._buf.shape[0]:
            self._refill()
        i = self._i
        self._i += 1
        if self.kind == "l1":
            return self._buf[i], self._signs[i]
        return self._buf[i], None
