"""Closed-form constants, bounds and step schedules for projected Langevin.

Every function here is pure arithmetic on its inputs.  Logarithms are
natural.  A boundary distance of ``inf`` encodes the unconstrained case and
removes the boundary term from the discretisation constant.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from ._validation import as_point, check_int, check_positive, jsonable
from .exceptions import HypothesisError, OutsideBodyError, ScheduleInfeasible
from .geometry import ConvexBody
from .potentials import Potential, infimum_over

SQRT_E_FACTOR = 2.0 * math.exp(0.5) + 1.0
DEFAULT_RESTRICTION_C = 16.0


@dataclass(frozen=True)
class ProblemConstants:
    """Problem parameters entering the bounds.

    ``C_LS`` may be ``inf`` (no log-Sobolev inequality).  ``r0 = inf``
    denotes an unconstrained problem.
    """

    n: int
    L: float
    r0: float = math.inf
    sigma0: float = 0.0
    C_LS: float = math.inf
    C_P: float = math.inf
    beta: float = 0.0
    M: float = 0.0
    eps: float = 0.1

    def __post_init__(self):
        check_int(self.n, "n", 1)
        for name in ("L", "r0", "sigma0", "C_LS", "C_P", "beta", "M", "eps"):
            check_positive(getattr(self, name), name, allow_zero=True, allow_inf=True)
        if math.isfinite(self.C_LS) and math.isfinite(self.C_P) and self.C_P > self.C_LS:
            raise ValueError("Poincare constant cannot exceed the log-Sobolev constant")

    def to_dict(self):
        return {k: jsonable(v) for k, v in asdict(self).items()}


@dataclass
class BoundReport:
    """A closed-form bound paired, optionally, with an empirical estimate.

    ``satisfied`` follows the rule ``empirical + 2 SE <= value``.
    """

    name: str
    value: float
    inputs: dict = field(default_factory=dict)
    empirical: float | None = None
    se: float | None = None
    satisfied: bool | None = None
    notes: str = ""

    def __post_init__(self):
        if self.empirical is not None and self.satisfied is None:
            self.satisfied = verdict(self.empirical, self.se or 0.0, self.value)

    def to_dict(self):
        return {k: jsonable(v) for k, v in asdict(self).items()}


def verdict(empirical: float, se: float, bound: float, n_se: float = 2.0, atol: float = 0.0) -> bool:
    """``empirical + n_se * se <= bound + atol``."""
    return bool(empirical + n_se * se <= bound + atol)


class StartConstants(NamedTuple):
    sigma0: float
    r0: float
    exact: bool


def sigma0_r0(x0, potential: Potential, body: ConvexBody, budget: int = 10_000) -> StartConstants:
    """Normalised potential gap and boundary distance of a start point.

    ``exact`` is False when the infimum was estimated numerically, in which
    case ``sigma0`` is an underestimate.
    """
    x0 = as_point(x0, body.dim, "x0")
    if not body.contains(x0):
        raise OutsideBodyError("x0 lies outside the body")
    r0 = body.boundary_distance(x0)
    if r0 <= 0:
        raise OutsideBodyError("x0 lies on the boundary; r0 = 0 makes the bounds vacuous")
    inf = infimum_over(potential, body, budget)
    sigma0 = (potential.value(x0) - inf.value) / body.dim
    return StartConstants(max(sigma0, 0.0), r0, inf.exact)


def bound_constant(n: int, k: int, L: float, sigma0: float, r0: float) -> float:
    """The constant multiplying ``k eta^{3/2}`` in the discretisation bound."""
    log_k = math.log(max(k, 1))
    boundary = 0.0 if math.isinf(r0) else SQRT_E_FACTOR * (1 + sigma0) * math.sqrt(n + 2 * log_k) / r0
    return boundary + (7.0 / 6.0) * L / math.sqrt(n)


def discretization_bound(n: int, k: int, eta: float, L: float, sigma0: float, r0: float):
    """``(A, A k eta^{3/2})``, bounding ``(1/n) W_2^2(X_{k eta}, x_k)``.

    Raises
    ------
    HypothesisError
        If ``eta >= n / L^2``.
    """
    n = check_int(n, "n", 1)
    k = check_int(k, "k", 0)
    eta = check_positive(eta, "eta")
    if L > 0 and not eta * L**2 < n:
        raise HypothesisError(f"eta={eta} violates eta < n / L^2 = {n / L**2}")
    A = bound_constant(n, k, L, sigma0, r0)
    return A, A * k * eta**1.5


def logsob_constant(C_LS: float, n: int, r0: float, sigma0: float, L: float) -> float:
    return 4 * C_LS * (1 + math.log(max(C_LS, 1.0) * n / min(r0, 1.0)) + sigma0 + L / n)


def logsob_bound(k: int, eta: float, A: float, C_LS: float, constants: ProblemConstants):
    """``(B, 2B exp(-k eta / 2 C_LS) + 2 A k eta^{3/2})`` bounding ``(1/n) W_2^2(x_k, mu)``."""
    if not math.isfinite(C_LS):
        raise HypothesisError("the log-Sobolev bound needs a finite C_LS")
    c = constants
    B = logsob_constant(C_LS, c.n, c.r0, c.sigma0, c.L)
    t = k * eta
    return B, 2 * B * math.exp(-t / (2 * C_LS)) + 2 * A * k * eta**1.5


class Schedule(NamedTuple):
    eta: float
    k: int
    bound: float
    A: float
    B: float
    iterations: int
    asymptotic_eta: float
    asymptotic_k: float


def schedule_logsob(constants: ProblemConstants, max_steps: int | None = None,
                    max_iter: int = 20) -> Schedule:
    """Step size and step count making the log-Sobolev bound at most ``eps``.

    The horizon ``T = k eta`` is set so the exponential term equals
    ``eps / 2``; ``k`` is then the smallest integer with
    ``2 A(k) T^{3/2} / sqrt(k) <= eps / 2`` (a fixed point, since ``A``
    grows with ``log k``), and ``eta = T / k``.  The constraint
    ``eta < n / L^2`` can only raise ``k``.  The asymptotic formulas with
    hidden constants set to one are returned for comparison.

    Raises
    ------
    ScheduleInfeasible
        If ``k`` would exceed ``max_steps`` or the fixed point does not settle.
    """
    c = constants
    if not math.isfinite(c.C_LS):
        raise HypothesisError("the log-Sobolev schedule needs a finite C_LS")
    eps = check_positive(c.eps, "eps")
    B = logsob_constant(c.C_LS, c.n, c.r0, c.sigma0, c.L)
    T = 2 * c.C_LS * math.log(4 * B / eps)
    if T <= 0:
        # the exponential term is already below eps/2 for every horizon
        T = 1e-12

    def needed(k):
        A = bound_constant(c.n, k, c.L, c.sigma0, c.r0)
        k_acc = math.ceil((4 * A * T**1.5 / eps) ** 2)
        k_lip = math.floor(T * c.L**2 / c.n) + 1 if c.L > 0 else 1
        return max(k_acc, k_lip, 1)

    k, it = 1, 0
    for it in range(1, max_iter + 1):
        k_next = needed(k)
        if k_next <= k:
            break
        k = k_next
        if max_steps is not None and k > max_steps:
            raise ScheduleInfeasible(f"eps={eps} needs more than max_steps={max_steps} steps")
    else:
        raise ScheduleInfeasible("step-count fixed point did not settle")

    eta = T / k
    A = bound_constant(c.n, k, c.L, c.sigma0, c.r0)
    _, rhs = logsob_bound(k, eta, A, c.C_LS, c)
    while rhs > eps:
        # floating-point slack only; each increment shrinks the second term
        k += 1
        eta = T / k
        A = bound_constant(c.n, k, c.L, c.sigma0, c.r0)
        _, rhs = logsob_bound(k, eta, A, c.C_LS, c)
    if max_steps is not None and k > max_steps:
        raise ScheduleInfeasible(f"eps={eps} needs more than max_steps={max_steps} steps")

    boundary_rate = c.n / c.r0**2 if math.isfinite(c.r0) else 0.0
    lipschitz_rate = c.L**2 / c.n
    eta_star = c.eps**2 / c.C_LS**2 / max(boundary_rate, lipschitz_rate)
    k_star = c.C_LS**3 / c.eps**2 * max(boundary_rate, lipschitz_rate)
    return Schedule(eta, k, rhs, A, B, it, eta_star, k_star)


def poincare_bound(C_P: float, chi2_0: float, k: int, eta: float, A: float, n: int) -> float:
    """``(4/n) C_P chi2_0 exp(-k eta / C_P) + 2 A k eta^{3/2}`` for a random start.

    ``A`` should be built with the expectation of ``(1 + sigma0) / r0`` over
    the start law (see :func:`expected_start_ratio`).
    """
    check_positive(C_P, "C_P")
    check_positive(chi2_0, "chi2_0", allow_zero=True)
    return 4.0 / n * C_P * chi2_0 * math.exp(-k * eta / C_P) + 2 * A * k * eta**1.5


def poincare_constant_A(n: int, k: int, L: float, mean_ratio: float) -> float:
    """Discretisation constant with ``E[(1 + sigma0) / r0]`` in place of the point value."""
    return SQRT_E_FACTOR * math.sqrt(n + 2 * math.log(max(k, 1))) * mean_ratio + (7.0 / 6.0) * L / math.sqrt(n)


class WarmStart(NamedTuple):
    log_chi2_bound: float
    covariance_scale: float


def chi2_warmstart_log_bound(n: int, L: float, C_P: float, sigma0: float) -> WarmStart:
    """Bound on ``log chi^2(gamma | mu)`` for the Gaussian start ``N(x0, (n/L^2) Id)``."""
    n = check_int(n, "n", 1)
    L = check_positive(L, "L")
    C_P = check_positive(C_P, "C_P")
    log_bound = n * (1 + sigma0) + 0.5 * n * math.log(L**2 * C_P / n)
    return WarmStart(log_bound, n / L**2)


def local_time_bound(n: int, sigma0: float, r0: float, t: float) -> float:
    """``n (1 + sigma0) t / r0``, bounding ``E[ell_t^2]^{1/2}``; 0 when ``r0 = inf``."""
    if math.isinf(r0):
        return 0.0
    return n * (1 + sigma0) * t / check_positive(r0, "r0")


def gaussian_max_bound(n: int, k: int) -> float:
    """``e (n + 2 log k)``, bounding ``E max_{i<=k} |G_i|^2`` for standard Gaussians."""
    return math.e * (check_int(n, "n", 1) + 2 * math.log(check_int(k, "k", 1)))


def restriction_bound(M: float, R: float, C: float = DEFAULT_RESTRICTION_C) -> float:
    """``C M exp(-R / (C sqrt M))``, bounding ``W_2^2(mu, mu_R)`` for ``R >= C sqrt M``.

    ``C`` stands in for an unspecified universal constant.
    """
    M = check_positive(M, "M")
    if R < C * math.sqrt(M):
        raise HypothesisError(f"restriction bound needs R >= C sqrt(M) = {C * math.sqrt(M)}")
    return C * M * math.exp(-R / (C * math.sqrt(M)))


def aux_bounds(kind: str, **params) -> float:
    """Dispatch to ``local_time``, ``gaussian_max`` or ``restriction``."""
    table = {
        "local_time": local_time_bound,
        "gaussian_max": gaussian_max_bound,
        "restriction": restriction_bound,
    }
    if kind not in table:
        raise ValueError(f"unknown bound kind {kind!r}; expected one of {sorted(table)}")
    return table[kind](**params)


def choose_restriction_radius(n: int, M: float, eps: float, C: float = DEFAULT_RESTRICTION_C) -> float:
    """Smallest ``R >= C sqrt M`` with ``(1/n) C M exp(-R / (C sqrt M)) <= eps / 10``."""
    n = check_int(n, "n", 1)
    M = check_positive(M, "M")
    eps = check_positive(eps, "eps")
    return C * math.sqrt(M) * max(1.0, math.log(10 * C * M / (n * eps)))


def expected_start_ratio(starts, potential: Potential, body: ConvexBody, budget: int = 10_000):
    """Monte Carlo mean and SE of ``(1 + sigma0) / r0`` over random start points.

    Starts outside the body are rejected.  Returns ``(mean, se, accepted)``.
    """
    X = np.atleast_2d(np.asarray(starts, dtype=np.float64))
    inside = body.contains(X)
    X = X[inside]
    if X.shape[0] == 0:
        raise OutsideBodyError("no start point lies in the body")
    r0 = body.boundary_distance(X)
    if np.all(np.isinf(r0)):
        return 0.0, 0.0, X.shape[0]
    inf = infimum_over(potential, body, budget).value
    sigma0 = np.maximum((potential.value(X) - inf) / body.dim, 0.0)
    ratio = (1 + sigma0) / r0
    se = ratio.std(ddof=1) / math.sqrt(len(ratio)) if len(ratio) > 1 else 0.0
    return float(ratio.mean()), float(se), X.shape[0]
