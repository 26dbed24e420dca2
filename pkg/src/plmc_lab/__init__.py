"""Projected Langevin Monte Carlo for log-concave measures on convex bodies.

The sampler iterates ``x <- P_K(x + xi - (eta / 2) g(x))`` where ``P_K`` is
the Euclidean projection onto the support ``K``, ``xi ~ N(0, eta Id)`` and
``g`` is the minimum-norm subgradient of the potential.
"""

from .chains import (BrownianSource, ChainConfig, CouplingCurve, LocalTimeLedger, Trajectory,
                     plmc_step, run_ball_restricted, run_coupled, run_parallel_coupled_diffusions,
                     run_plmc, run_reflected_reference)
from .estimators import ProjectedLangevinSampler, restricted_sampler
from .exceptions import (ConvergenceError, DimensionError, HypothesisError, OutsideBodyError,
                         ScheduleInfeasible)
from .geometry import (Ball, Box, ConvexBody, HalfspaceIntersection, WholeSpace, boundary_distance,
                       contains, project)
from .metrics import SampleSet, moments, w2_1d, w2_exact, w2_sliced
from .potentials import (AffineMax, Linear, Potential, Quadratic, ScaledNorm, Zero, infimum_over,
                         lipschitz_constant, min_norm_subgradient, value)
from .theory import (BoundReport, ProblemConstants, aux_bounds, chi2_warmstart_log_bound,
                     choose_restriction_radius, discretization_bound, logsob_bound, poincare_bound,
                     schedule_logsob, sigma0_r0)

__version__ = "0.1.0"

__all__ = [
    "AffineMax", "Ball", "BoundReport", "Box", "BrownianSource", "ChainConfig", "ConvergenceError",
    "ConvexBody", "CouplingCurve", "DimensionError", "HalfspaceIntersection", "HypothesisError",
    "Linear", "LocalTimeLedger", "OutsideBodyError", "Potential", "ProblemConstants",
    "ProjectedLangevinSampler", "Quadratic", "SampleSet", "ScaledNorm", "ScheduleInfeasible",
    "Trajectory", "WholeSpace", "Zero", "aux_bounds", "boundary_distance",
    "chi2_warmstart_log_bound", "choose_restriction_radius", "contains", "discretization_bound",
    "infimum_over", "lipschitz_constant", "logsob_bound", "min_norm_subgradient", "moments",
    "plmc_step", "poincare_bound", "project", "restricted_sampler", "run_ball_restricted",
    "run_coupled", "run_parallel_coupled_diffusions", "run_plmc", "run_reflected_reference",
    "schedule_logsob", "sigma0_r0", "value", "w2_1d", "w2_exact", "w2_sliced",
]
