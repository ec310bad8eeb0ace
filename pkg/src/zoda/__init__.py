"""Zero-order online dual averaging with l1-sphere randomization.

The kernels in ``zoda._kernels`` are compiled with Cython; when the
extension is missing (or ``ZODA_PURE_PYTHON`` is set) a numpy fallback
with the same interface is used. ``zoda.BACKEND`` names the active one.
"""

from ._backend import BACKEND
from .dual_averaging import (
    ConfigurationError,
    RunAbort,
    RunRecord,
    Schedule,
    regret_bound,
    run,
    schedule_params,
)
from .estimator import (
    GradEstimate,
    NoiseModel,
    Objective,
    l1_gradient,
    l2_gradient,
    two_point_query,
)
from .geometry import INF, ProblemDims, b_q, dual_exponent, lp_norm
from .mirror import EntropySimplex, SquaredL2Ball, make_mirror
from .problems import ExpCenterProblem, reference_minimum, solve_reference
from .rng import RngState, sample_l1_ball, sample_l1_sphere, sample_l2_sphere

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigurationError",
    "EntropySimplex",
    "ExpCenterProblem",
    "GradEstimate",
    "INF",
    "NoiseModel",
    "Objective",
    "ProblemDims",
    "RngState",
    "RunAbort",
    "RunRecord",
    "Schedule",
    "SquaredL2Ball",
    "b_q",
    "dual_exponent",
    "l1_gradient",
    "l2_gradient",
    "lp_norm",
    "make_mirror",
    "reference_minimum",
    "regret_bound",
    "run",
    "sample_l1_ball",
    "sample_l1_sphere",
    "sample_l2_sphere",
    "schedule_params",
    "solve_reference",
    "two_point_query",
]
