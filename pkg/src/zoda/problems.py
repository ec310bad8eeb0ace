"""Built-in stationary test problems and their reference minima."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .estimator import Objective, norm_objective
from .mirror import MirrorMap


class NonConvergenceError(RuntimeError):
    """Independent starts of the reference solver disagree."""


def exp_center_weights(d: int) -> np.ndarray:
    """``c_j = exp(j) / sum_i exp(i)`` for ``j = 1..d``, computed without overflow."""
    j = np.arange(1, d + 1, dtype=np.float64)
    w = np.exp(j - d)
    return w / w.sum()


@dataclass
class ExpCenterProblem:
    """``f(x) = ||x - c||_2 + ||x - 0.1 c||_1`` on the probability simplex."""

    d: int
    c: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d!r}")
        self.c = exp_center_weights(self.d)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        r = x - self.c
        return np.sqrt((r * r).sum(axis=-1)) + np.abs(x - 0.1 * self.c).sum(axis=-1)

    @property
    def objective(self) -> Objective:
        # both terms are 1-Lipschitz w.r.t. l1
        return Objective(fn=self, lipschitz_L=2.0, lipschitz_q=1.0, name="exp_center")


@dataclass
class ReferenceSolution:
    value: float
    point: np.ndarray
    start_values: np.ndarray
    gap: float


def _starts(d: int, n: int) -> np.ndarray:
    rows = [np.full(d, 1.0 / d), np.eye(d)[0], np.eye(d)[-1]]
    rng = np.random.default_rng(12345)
    while len(rows) < n:
        rows.append(rng.dirichlet(np.ones(d)))
    return np.array(rows[:n])


def solve_reference(
    problem: ExpCenterProblem,
    tol: float = 1e-8,
    iterations: int = 10**6,
    n_starts: int = 5,
    step: float = 0.2,
    stages: int = 10,
    shrink: float = 0.1,
) -> ReferenceSolution:
    """Minimize the problem over the simplex by projected subgradient descent.

    Each of ``n_starts`` distinct starts gets ``iterations`` steps split into
    ``stages`` equal runs. A run uses step ``c / sqrt(k)`` with best-iterate
    tracking and restarts from the best point so far with ``c`` multiplied
    by ``shrink``; restarting is what makes the sharp minimum reachable to
    high accuracy. Raises ``NonConvergenceError`` when the best values of the
    starts spread by more than ``10 * tol``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if stages < 1 or iterations < stages:
        raise ValueError("need 1 <= stages <= iterations")
    c = problem.c
    pts = _starts(problem.d, n_starts)
    vals = np.full(n_starts, np.inf)
    best = pts.copy()
    a = step
    for _ in range(stages):
        v, pts = kernels.simplex_subgradient_descent(c, 0.1 * c, pts, a, iterations // stages)
        better = v < vals
        vals[better] = v[better]
        best[better] = pts[better]
        a *= shrink
    gap = float(vals.max() - vals.min())
    if gap > 10.0 * tol:
        raise NonConvergenceError(f"reference starts disagree by {gap:.3e} (> 10 * tol = {10 * tol:.1e})")
    i = int(np.argmin(vals))
    return ReferenceSolution(float(vals[i]), best[i].copy(), vals, gap)


def reference_minimum(problem: ExpCenterProblem, tol: float = 1e-8, **kw) -> float:
    return solve_reference(problem, tol, **kw).value


def distance_objective(center, q: float = 2.0) -> Objective:
    """``||x - center||_q``; minimized at ``center`` with value 0."""
    return norm_objective(q, center)


@dataclass
class BuiltProblem:
    objective: Objective
    comparator: np.ndarray
    f_star: float


OBJECTIVES = {
    # name -> {param: (type, default)}
    "exp_center": {},
    "distance": {"q": (float, 2.0), "center_scale": (float, 0.5), "center_index": (int, 0)},
    "zero": {},
}


def build_problem(name: str, params: dict, mirror: MirrorMap, reference=None, **solver_kw) -> BuiltProblem:
    """Objective, comparator and minimum value of a built-in problem.

    ``reference`` (a ``ReferenceSolution``) skips the numerical solve for
    problems without a closed-form minimum.
    """
    d = mirror.d
    if name == "exp_center":
        if mirror.kind != "entropy_simplex":
            raise ValueError("the exp_center problem is posed on the simplex")
        prob = ExpCenterProblem(d)
        sol = reference if reference is not None else solve_reference(prob, **solver_kw)
        return BuiltProblem(prob.objective, sol.point, sol.value)
    if name == "distance":
        center = np.zeros(d)
        center[params.get("center_index", 0)] = params.get("center_scale", 0.5)
        if not mirror.contains(center, 1e-9):
            raise ValueError("distance center must be feasible")
        return BuiltProblem(distance_objective(center, params.get("q", 2.0)), center, 0.0)
    if name == "zero":
        f = Objective(fn=_zero, lipschitz_L=1.0, lipschitz_q=2.0, name="zero")
        return BuiltProblem(f, mirror.initial_point(), 0.0)
    raise ValueError(f"unknown objective {name!r}; choose from {sorted(OBJECTIVES)}")


def _zero(x):
    x = np.asarray(x)
    return np.zeros(x.shape[:-1]) if x.ndim > 1 else 0.0
