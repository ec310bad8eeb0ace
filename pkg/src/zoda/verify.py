"""Monte Carlo checks of the estimator's moment, bias and variance properties.

Every check returns ``CheckReport`` objects whose pass flag is a pure
function of the recorded numbers: equality targets pass when
``|estimate - target| <= k * SE``, upper bounds when
``estimate <= bound + k * SE``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import estimator as est
from .dual_averaging import VARIANCE_CONST
from .estimator import NoiseModel, Objective
from .geometry import INF, ProblemDims, b_q, ball_moment_bound, dual_exponent, lp_norm
from .rng import STREAM_DIRECTIONS, STREAM_NOISE, RngState, l1_ball_batch, l1_sphere_batch

CHUNK = 1 << 16
REPORT_COLUMNS = ("name", "relation", "estimate", "bound_or_target", "std_error", "n_samples", "k_se", "pass")


class UnsupportedTargetError(ValueError):
    """The objective has no known gradient of its smoothed version."""


@dataclass(frozen=True)
class CheckReport:
    name: str
    estimate: float
    bound_or_target: float
    std_error: float
    n_samples: int
    relation: str  # "le" or "eq"
    k_se: float = 3.0

    @property
    def passed(self) -> bool:
        slack = self.k_se * self.std_error
        if self.relation == "le":
            return self.estimate <= self.bound_or_target + slack
        if self.relation == "eq":
            return abs(self.estimate - self.bound_or_target) <= slack
        raise ValueError(f"unknown relation {self.relation!r}")

    def row(self):
        d = asdict(self)
        d["pass"] = self.passed
        return [d[c] for c in REPORT_COLUMNS]

    def __str__(self):
        op = "<=" if self.relation == "le" else "=="
        flag = "PASS" if self.passed else "FAIL"
        return (
            f"[{flag}] {self.name}: {self.estimate:.6g} {op} {self.bound_or_target:.6g} "
            f"(+- {self.k_se:g} x SE {self.std_error:.3g}, n={self.n_samples})"
        )


def _mean_se(v: np.ndarray):
    n = v.shape[0]
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(n))


def _var_se(v: np.ndarray):
    """Sample variance and its standard error from the fourth central moment."""
    n = v.shape[0]
    c = v - v.mean()
    s2 = float((c * c).sum() / (n - 1))
    m4 = float((c**4).mean())
    se2 = (m4 - s2 * s2 * (n - 3) / (n - 1)) / n
    return s2, math.sqrt(max(se2, 0.0))


def _chunks(n: int):
    done = 0
    while done < n:
        m = min(CHUNK, n - done)
        yield m
        done += m


def _l1_scales(f: Objective, x, h, zeta, xi1, xi2):
    """Batch of l1 estimate scales ``d (y' - y'') / 2h``."""
    d = zeta.shape[1]
    y1 = np.asarray(f(x + h * zeta)) + xi1
    y2 = np.asarray(f(x - h * zeta)) + xi2
    return est.scale_mutation() * d * (y1 - y2) / (2.0 * h)


def check_second_moment(d: int, n: int, rng: RngState) -> CheckReport:
    vals = np.concatenate([(l1_sphere_batch(m, d, rng) ** 2).sum(axis=1) for m in _chunks(n)])
    m, se = _mean_se(vals)
    return CheckReport(f"second_moment[d={d}]", m, 2.0 / (d + 1), se, n, "eq")


def _as_tuple(v):
    return tuple(v) if isinstance(v, (tuple, list)) else (v,)


def check_ball_moment(d: int, q, n: int, rng: RngState) -> list[CheckReport]:
    """``E||U||_q`` against ``q d^(1/q)/(d+1)`` (finite q) and against ``b_q(d)``.

    ``q`` may be a sequence; all indices are then evaluated on one sample.
    """
    qs = _as_tuple(q)
    sums = np.zeros((len(qs), 2))
    for m in _chunks(n):
        u = l1_ball_batch(m, d, rng)
        for k, r in enumerate(qs):
            v = lp_norm(u, r)
            sums[k] += v.sum(), (v * v).sum()
    out = []
    for (s1, s2), r in zip(sums, qs):
        mean = s1 / n
        se = math.sqrt(max(s2 / n - mean * mean, 0.0) * n / (n - 1) / n)
        if r != INF:
            out.append(CheckReport(f"ball_moment[d={d},q={r:g}]", mean, ball_moment_bound(d, r), se, n, "le"))
        out.append(CheckReport(f"ball_moment_bq[d={d},q={r:g}]", mean, b_q(ProblemDims(d, r, 2.0)), se, n, "le"))
    return out


def check_smoothing_bias(f, x, h: float, n: int, rng: RngState) -> list[CheckReport]:
    """``|f_h(x) - f(x)| <= b_q(d) L h``; for convex f also ``f_h(x) >= f(x)``.

    ``f`` may be a sequence of objectives sharing one ball sample.
    """
    fs = _as_tuple(f)
    x = np.asarray(x, dtype=np.float64)
    d = x.shape[0]
    sums = np.zeros((len(fs), 2))
    for m in _chunks(n):
        pts = x + h * l1_ball_batch(m, d, rng)
        for k, g in enumerate(fs):
            v = np.asarray(g(pts), dtype=np.float64)
            sums[k] += v.sum(), (v * v).sum()
    out = []
    for (s1, s2), g in zip(sums, fs):
        fh = s1 / n
        se = math.sqrt(max(s2 / n - fh * fh, 0.0) * n / (n - 1) / n)
        fx = g.value(x)
        bound = b_q(ProblemDims(d, g.lipschitz_q, 2.0)) * g.lipschitz_L * h
        tag = f"{g.name},d={d},h={h:g}"
        out.append(CheckReport(f"smoothing_bias[{tag}]", abs(fh - fx), bound, se, n, "le"))
        out.append(CheckReport(f"smoothing_above[{tag}]", fx - fh, 0.0, se, n, "le"))
    return out


def check_unbiasedness(
    f: Objective, x, h: float, n: int, rng: RngState, k_se: float = 4.0
) -> list[CheckReport]:
    """Componentwise mean of the l1 estimate against the smoothed gradient."""
    if f.smoothed_grad is None:
        raise UnsupportedTargetError(f"no known smoothed gradient for {f.name}")
    x = np.asarray(x, dtype=np.float64)
    d = x.shape[0]
    target = np.asarray(f.smoothed_grad(x, h), dtype=np.float64)
    s1 = np.zeros(d)
    s2 = np.zeros(d)
    for m in _chunks(n):
        zeta = l1_sphere_batch(m, d, rng)
        sc = _l1_scales(f, x, h, zeta, 0.0, 0.0)
        s1 += sc @ np.where(zeta >= 0.0, 1.0, -1.0)
        # signs square to one, so every component has second moment sum(sc^2)
        s2 += sc @ sc
    mean = s1 / n
    var = np.maximum(s2 / n - mean * mean, 0.0) * n / (n - 1)
    se = np.sqrt(var / n)
    tag = f"{f.name},d={d},h={h:g}"
    return [
        CheckReport(f"unbiasedness[{tag}][{i}]", float(mean[i]), float(target[i]), float(se[i]), n, "eq", k_se)
        for i in range(d)
    ]


def _grad_sq_samples(f, dims: ProblemDims, x, h, noise: NoiseModel, n, rng):
    d = dims.d
    ps = dual_exponent(dims.p)
    sign_sq = 1.0 if ps == INF else d ** (2.0 / ps)
    out = []
    for m in _chunks(n):
        zeta = l1_sphere_batch(m, d, rng)
        xi1, xi2 = noise.draw_batch(m)
        s = _l1_scales(f, x, h, zeta, xi1, xi2)
        out.append(s * s * sign_sq)
    return np.concatenate(out)


def variance_bound(dims: ProblemDims, L: float, sigma: float = 0.0, h: float = 1.0, adversarial: bool = False):
    b = VARIANCE_CONST * L * L * dims.d**dims.variance_exponent
    if adversarial:
        b += dims.d ** (4.0 - 2.0 / dims.p) * sigma * sigma / (h * h)
    return b


def check_variance_bound(
    f: Objective, dims: ProblemDims, h: float, noise: NoiseModel, n: int, rng: RngState, x=None
) -> CheckReport:
    """Mean of ``||g||_{p*}^2`` at a fixed point against the variance bound."""
    x = np.zeros(dims.d) if x is None else np.asarray(x, dtype=np.float64)
    vals = _grad_sq_samples(f, dims, x, h, noise, n, rng)
    m, se = _mean_se(vals)
    adversarial = noise.kind != "canceling"
    bound = variance_bound(dims, f.lipschitz_L, noise.sigma, h, adversarial)
    name = f"variance[{f.name},d={dims.d},p={dims.p:g},q={dims.q:g},{noise.kind},h={h:g}]"
    return CheckReport(name, m, bound, se, n, "le")


def check_h_invariance(
    f: Objective, dims: ProblemDims, hs, sigma: float, n: int, rng: RngState, x=None
) -> list[CheckReport]:
    """Under canceling noise ``E||g||_{p*}^2`` does not depend on h.

    Every h replays the same direction and noise streams, so the
    comparison isolates the effect of h.
    """
    x = np.zeros(dims.d) if x is None else np.asarray(x, dtype=np.float64)
    ests = []
    for h in hs:
        noise = NoiseModel("canceling", sigma, rng=rng.child(STREAM_NOISE))
        vals = _grad_sq_samples(f, dims, x, h, noise, n, rng.child(STREAM_DIRECTIONS))
        ests.append(_mean_se(vals))
    ref = ests[0][0]
    tag = f"{f.name},d={dims.d},p={dims.p:g},q={dims.q:g}"
    return [
        CheckReport(f"h_invariance[{tag},h={h:g}]", m, ref, se, n, "eq")
        for h, (m, se) in zip(hs[1:], ests[1:])
    ]


def poincare_bound(d: int, L2: float) -> float:
    return 4.0 * L2 * L2 / (d * (d - 2.0)) * (1.0 + math.sqrt(2.0 * d / (d + 1.0))) ** 2


def poincare_simple_bound(d: int, L2: float) -> float:
    return VARIANCE_CONST * (L2 / d) ** 2


def check_poincare(G: Callable, L2: float, d: int, n: int, rng: RngState, name: str = "G") -> list[CheckReport]:
    """Variance of ``G(zeta)`` on the l1-sphere against both Lipschitz bounds."""
    if d < 3:
        raise ValueError("the l1-sphere Poincare bound needs d >= 3")
    vals = np.concatenate([np.asarray(G(l1_sphere_batch(m, d, rng)), dtype=np.float64) for m in _chunks(n)])
    v, se = _var_se(vals)
    return [
        CheckReport(f"poincare[{name},d={d}]", v, poincare_bound(d, L2), se, n, "le"),
        CheckReport(f"poincare_simple[{name},d={d}]", v, poincare_simple_bound(d, L2), se, n, "le"),
    ]


def _grid_point(d: int) -> np.ndarray:
    # distinct, well separated coordinates: the l1/l_inf norms are linear
    # within distance 1 of this point
    return 3.0 * np.arange(1, d + 1, dtype=np.float64)


@dataclass
class VerificationGrid:
    checks: tuple = ("second_moment", "ball_moment", "smoothing", "unbiasedness", "variance", "h_invariance", "poincare")
    dims: tuple = (3, 10, 50)
    qs: tuple = (1.0, 2.0, INF)
    ps: tuple = (1.0, 2.0)
    n_moment: int = 10**6
    n_variance: int = 10**5
    sigma: float = 0.1
    h: float = 0.5
    seed: int = 2024


ALL_CHECKS = VerificationGrid().checks


def _parse_num_list(raw, conv):
    out = []
    for s in raw.split(","):
        s = s.strip()
        if not s:
            continue
        out.append(INF if s.lower() in ("inf", "infinity") else conv(s))
    return tuple(out)


def parse_grid(text: Optional[str]) -> VerificationGrid:
    """Parse ``key=value;key=value`` (or the contents of a file holding it).

    Keys: checks, d, q, p, n_moment, n_variance, sigma, h, seed. An empty
    string selects no checks.
    """
    if text is None:
        return VerificationGrid()
    p = Path(text)
    if text and p.is_file():
        text = p.read_text(encoding="utf-8")
    text = text.strip()
    if not text:
        return VerificationGrid(checks=())
    g = VerificationGrid()
    for part in text.replace("\n", ";").split(";"):
        part = part.strip()
        if not part or part.startswith("#"):
            continue
        if "=" not in part:
            raise ValueError(f"bad grid entry {part!r}; expected key=value")
        k, v = (s.strip() for s in part.split("=", 1))
        if k == "checks":
            names = tuple(s.strip() for s in v.split(",") if s.strip())
            bad = set(names) - set(ALL_CHECKS)
            if bad:
                raise ValueError(f"unknown checks {sorted(bad)}; choose from {ALL_CHECKS}")
            g.checks = names
        elif k == "d":
            g.dims = _parse_num_list(v, int)
        elif k == "q":
            g.qs = _parse_num_list(v, float)
        elif k == "p":
            g.ps = _parse_num_list(v, float)
        elif k in ("n_moment", "n_variance", "seed"):
            setattr(g, k, int(float(v)))
        elif k in ("sigma", "h"):
            setattr(g, k, float(v))
        else:
            raise ValueError(f"unknown grid key {k!r}")
    return g


def run_suite(grid: VerificationGrid) -> list[CheckReport]:
    """Run every check selected by ``grid``; each check gets its own stream."""
    master = RngState(grid.seed)
    counter = iter(range(1 << 30))

    def stream():
        return master.child(next(counter))

    reports: list[CheckReport] = []
    checks = set(grid.checks)
    nm, nv = grid.n_moment, grid.n_variance
    for d in grid.dims:
        if "second_moment" in checks:
            reports.append(check_second_moment(d, nm, stream()))
        if "ball_moment" in checks:
            reports += check_ball_moment(d, grid.qs, nm, stream())
        if "smoothing" in checks and d >= 3:
            fs = [est.norm_objective(q) for q in grid.qs]
            reports += check_smoothing_bias(fs, np.zeros(d), 1.0, nm, stream())
        if "unbiasedness" in checks:
            a = np.zeros(d)
            a[0] = 1.0
            x0 = np.linspace(0.3, -0.2, d)
            reports += check_unbiasedness(est.linear_objective(a), x0, 0.1, nm, stream())
            reports += check_unbiasedness(est.squared_norm_objective(), x0, 0.1, nm, stream())
        if d >= 3 and ("variance" in checks or "h_invariance" in checks):
            x0 = _grid_point(d)
            for p in grid.ps:
                for q in grid.qs:
                    dims = ProblemDims(d, q, p)
                    f = est.norm_objective(q)
                    if "variance" in checks:
                        cancel = NoiseModel("canceling", grid.sigma, rng=stream())
                        reports.append(check_variance_bound(f, dims, grid.h, cancel, nv, stream(), x0))
                        adv = NoiseModel("adversarial_iid", grid.sigma, rng=stream())
                        reports.append(check_variance_bound(f, dims, grid.h, adv, nv, stream(), x0))
                    if "h_invariance" in checks:
                        reports += check_h_invariance(f, dims, (1.0, 0.1, 0.01), grid.sigma, nv, stream(), x0)
        if "poincare" in checks and d >= 3:
            v = np.ones(d) / math.sqrt(d)
            reports += check_poincare(lambda z: z @ v, 1.0, d, nm, stream(), "linear")
            reports += check_poincare(lambda z: np.sqrt((z * z).sum(axis=1)), 1.0, d, nm, stream(), "l2norm")
    return reports


def write_reports(path, reports) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_COLUMNS)
        for r in reports:
            w.writerow(r.row())


def run_verification(grid=None, csv_path="out/verify.csv", echo=print) -> int:
    """Run the grid, write its report CSV and return 0 iff every check passed."""
    if not isinstance(grid, VerificationGrid):
        grid = parse_grid(grid)
    reports = run_suite(grid)
    write_reports(csv_path, reports)
    if echo is not None:
        for r in reports:
            echo(str(r))
    failed = sum(not r.passed for r in reports)
    if echo is not None:
        echo(f"{len(reports) - failed}/{len(reports)} checks passed; report at {csv_path}")
    return 1 if failed else 0
