"""Convex, Lipschitz potentials and their minimum-norm subgradients.

The drift of the chains is ``-1/2 g(x)`` where ``g(x)`` is the element of
the subdifferential of the potential with the smallest Euclidean norm.  For
a maximum of affine pieces this is the min-norm point of the convex hull of
the gradients of the (numerically) active pieces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._validation import as_point, as_points, check_int, check_positive, readonly
from .exceptions import ConvergenceError, DimensionError
from .geometry import Ball, ConvexBody, WholeSpace

TIE_TOL = 1e-9
MIN_NORM_TOL = 1e-10


def min_norm_point(points, tol: float = MIN_NORM_TOL, max_iter: int = 1000) -> np.ndarray:
    """Minimum-norm point of the convex hull of the rows of ``points``.

    Wolfe's algorithm: grow a corral of vertices, solve the affine min-norm
    problem on it, and step back into the simplex whenever an affine weight
    turns negative.

    Parameters
    ----------
    points : array of shape (p, n)
    tol : float
        Relative optimality tolerance on ``|x|^2 - min_j <x, P_j>``.

    Returns
    -------
    ndarray of shape (n,)
    """
    P = np.atleast_2d(np.asarray(points, dtype=np.float64))
    p = P.shape[0]
    if p == 1:
        return P[0].copy()
    scale = max(float(np.max(np.sum(P * P, axis=1))), 1e-300)
    j0 = int(np.argmin(np.sum(P * P, axis=1)))
    corral = [j0]
    weights = np.array([1.0])
    x = P[j0].copy()
    for _ in range(max_iter):
        scores = P @ x
        j = int(np.argmin(scores))
        if x @ x - scores[j] <= tol * scale or j in corral:
            return x
        corral.append(j)
        weights = np.append(weights, 0.0)
        while True:
            mu = _affine_min_norm_weights(P[corral])
            if np.all(mu > tol):
                weights = mu
                break
            neg = mu <= tol
            gap = weights[neg] - mu[neg]
            ratios = np.where(gap > 0, weights[neg] / np.where(gap > 0, gap, 1.0), 0.0)
            theta = float(np.min(ratios)) if ratios.size else 1.0
            weights = weights + theta * (mu - weights)
            keep = weights > tol
            corral = [c for c, k in zip(corral, keep) if k]
            weights = weights[keep]
            weights = weights / weights.sum()
        x = weights @ P[corral]
    raise ConvergenceError("min-norm point iteration did not converge")


def _affine_min_norm_weights(S: np.ndarray) -> np.ndarray:
    # minimise |mu @ S| subject to sum(mu) = 1 via its KKT system
    k = S.shape[0]
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = S @ S.T
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    return sol[:k]


class Infimum(NamedTuple):
    """Infimum of a potential over a body.

    ``exact`` is False when ``value`` comes from numerical descent and is
    therefore only an upper estimate of the true infimum.
    """

    value: float
    exact: bool


class Potential:
    """Base class.  Subclasses implement ``_value`` and ``_subgradient`` on batches."""

    dim: int
    known_infimum: float | None = None

    def value(self, x):
        X, single = as_points(x, self.dim)
        v = self._value(X)
        return float(v[0]) if single else v

    def min_norm_subgradient(self, x, tie_tol: float = TIE_TOL) -> np.ndarray:
        X, single = as_points(x, self.dim)
        g = self._subgradient(X, tie_tol)
        return g[0] if single else g

    def lipschitz_constant(self, body: ConvexBody) -> float:
        raise NotImplementedError

    def _exact_infimum(self, body: ConvexBody) -> float | None:
        return None

    def _value(self, X):
        raise NotImplementedError

    def _subgradient(self, X, tie_tol):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


def _check_body_dim(p: Potential, body: ConvexBody):
    if body.dim != p.dim:
        raise DimensionError(f"body has dimension {body.dim}, potential has {p.dim}")


@dataclass(frozen=True, eq=False)
class Zero(Potential):
    dim: int
    known_infimum: float | None = None

    def lipschitz_constant(self, body):
        _check_body_dim(self, body)
        return 0.0

    def _exact_infimum(self, body):
        return 0.0

    def _value(self, X):
        return np.zeros(X.shape[0])

    def _subgradient(self, X, tie_tol):
        return np.zeros_like(X)

    def to_dict(self):
        return {"type": "zero", "dim": self.dim}


@dataclass(frozen=True, eq=False)
class Linear(Potential):
    """``phi(x) = <c, x>``."""

    c: np.ndarray
    known_infimum: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "c", readonly(as_point(self.c, name="c")))

    @property
    def dim(self):
        return self.c.shape[0]

    def lipschitz_constant(self, body):
        _check_body_dim(self, body)
        return float(np.linalg.norm(self.c))

    def _exact_infimum(self, body):
        if isinstance(body, WholeSpace) and np.any(self.c):
            return None
        return body.linear_minimum(self.c)

    def _value(self, X):
        return X @ self.c

    def _subgradient(self, X, tie_tol):
        return np.broadcast_to(self.c, X.shape).copy()

    def to_dict(self):
        return {"type": "linear", "c": self.c.tolist()}


@dataclass(frozen=True, eq=False)
class AffineMax(Potential):
    """``phi(x) = max_i <a_i, x> + b_i``."""

    slopes: np.ndarray
    offsets: np.ndarray
    known_infimum: float | None = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.slopes, dtype=np.float64))
        b = np.atleast_1d(np.asarray(self.offsets, dtype=np.float64))
        if A.ndim != 2 or A.shape[0] < 1 or b.shape != (A.shape[0],):
            raise DimensionError("slopes must be (p, n) and offsets (p,) with p >= 1")
        object.__setattr__(self, "slopes", readonly(A))
        object.__setattr__(self, "offsets", readonly(b))

    @property
    def dim(self):
        return self.slopes.shape[1]

    def lipschitz_constant(self, body):
        _check_body_dim(self, body)
        return float(np.linalg.norm(self.slopes, axis=1).max())

    def _value(self, X):
        return (X @ self.slopes.T + self.offsets).max(axis=1)

    def _subgradient(self, X, tie_tol):
        vals = X @ self.slopes.T + self.offsets
        top = vals.max(axis=1, keepdims=True)
        active = vals >= top - tie_tol
        g = self.slopes[np.argmax(vals, axis=1)].copy()
        for row in np.flatnonzero(active.sum(axis=1) > 1):
            g[row] = min_norm_point(self.slopes[active[row]])
        return g

    def to_dict(self):
        return {"type": "affine_max", "slopes": self.slopes.tolist(),
                "offsets": self.offsets.tolist()}


@dataclass(frozen=True, eq=False)
class ScaledNorm(Potential):
    """``phi(x) = slope * |x - center|``."""

    center: np.ndarray
    slope: float
    known_infimum: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "center", readonly(as_point(self.center, name="center")))
        object.__setattr__(self, "slope", check_positive(self.slope, "slope"))

    @property
    def dim(self):
        return self.center.shape[0]

    def lipschitz_constant(self, body):
        _check_body_dim(self, body)
        return self.slope

    def _exact_infimum(self, body):
        nearest = body.project(self.center)
        return self.slope * float(np.linalg.norm(nearest - self.center))

    def _value(self, X):
        return self.slope * np.linalg.norm(X - self.center, axis=1)

    def _subgradient(self, X, tie_tol):
        diff = X - self.center
        norms = np.linalg.norm(diff, axis=1)
        g = np.zeros_like(X)
        nz = norms > 0
        g[nz] = self.slope * diff[nz] / norms[nz, None]
        return g

    def to_dict(self):
        return {"type": "scaled_norm", "center": self.center.tolist(), "slope": self.slope}


@dataclass(frozen=True, eq=False)
class Quadratic(Potential):
    """``phi(x) = alpha |x|^2 / 2``; Lipschitz only on bounded bodies."""

    alpha: float
    dim: int
    known_infimum: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_positive(self.alpha, "alpha"))
        object.__setattr__(self, "dim", check_int(self.dim, "dim", 1))

    def lipschitz_constant(self, body):
        _check_body_dim(self, body)
        if isinstance(body, Ball):
            return self.alpha * (float(np.linalg.norm(body.center)) + body.radius)
        if not body.bounded:
            raise ValueError("Quadratic potential is not Lipschitz on an unbounded body")
        # sup of |x| over a bounded polytope/box is attained at a vertex
        if hasattr(body, "lower"):
            corner = np.maximum(np.abs(body.lower), np.abs(body.upper))
            return self.alpha * float(np.linalg.norm(corner))
        raise NotImplementedError("Lipschitz constant of Quadratic on this body")

    def _exact_infimum(self, body):
        nearest = body.project(np.zeros(self.dim))
        return 0.5 * self.alpha * float(nearest @ nearest)

    def _value(self, X):
        return 0.5 * self.alpha * np.sum(X * X, axis=1)

    def _subgradient(self, X, tie_tol):
        return self.alpha * X

    def to_dict(self):
        return {"type": "quadratic", "alpha": self.alpha, "dim": self.dim}


def value(p: Potential, x):
    return p.value(x)


def min_norm_subgradient(p: Potential, x, tie_tol: float = TIE_TOL):
    return p.min_norm_subgradient(x, tie_tol)


def lipschitz_constant(p: Potential, body: ConvexBody) -> float:
    return p.lipschitz_constant(body)


def infimum_over(p: Potential, body: ConvexBody, budget: int = 10_000, step: float | None = None) -> Infimum:
    """Infimum of ``p`` over ``body``.

    Uses ``p.known_infimum`` when set, a closed form where one exists, and
    otherwise projected subgradient descent with steps ``step / sqrt(t)``
    from the body's interior point, returning the best value seen (an upper
    estimate, flagged by ``exact=False``).
    """
    _check_body_dim(p, body)
    if p.known_infimum is not None:
        return Infimum(float(p.known_infimum), True)
    closed = p._exact_infimum(body)
    if closed is not None:
        if not np.isfinite(closed):
            raise ValueError("potential is unbounded below on this body")
        return Infimum(float(closed), True)
    if not body.bounded:
        raise ValueError("infimum over an unbounded body needs known_infimum")
    _, best = _descent(p, body, check_int(budget, "budget", 1), step)
    return Infimum(float(best), False)


def infimum_lower_bound(p: Potential, body: ConvexBody, budget: int = 10_000) -> float:
    """A certified lower bound on ``inf_K p``.

    Takes the best descent point ``x*`` and applies the subgradient
    inequality ``p(y) >= p(x*) + <g(x*), y - x*>`` minimised over the body.
    Equals the infimum whenever ``0`` is the min-norm subgradient at ``x*``.
    """
    inf = infimum_over(p, body, budget)
    if inf.exact:
        return inf.value
    x_best, best = _descent(p, body, budget)
    g = p.min_norm_subgradient(x_best)
    return float(best + body.linear_minimum(g) - g @ x_best)


def _descent(p, body, budget, step=None):
    if step is None:
        step = _body_scale(body)
    x = body.interior_point()
    best_x, best = x, p.value(x)
    for t in range(1, budget + 1):
        g = p.min_norm_subgradient(x)
        gn = np.linalg.norm(g)
        if gn == 0.0:
            break
        x = body.project(x - (step / np.sqrt(t)) * g / gn)
        v = p.value(x)
        if v < best:
            best_x, best = x, v
    return best_x, best


def _body_scale(body):
    if isinstance(body, Ball):
        return body.radius
    if hasattr(body, "lower"):
        return float(np.max(body.upper - body.lower)) / 2
    return 1.0


def potential_from_dict(desc: dict) -> Potential:
    """Build a potential from a tagged config record."""
    kind = desc.get("type")
    known = desc.get("known_infimum")
    if kind == "zero":
        return Zero(int(desc["dim"]), known)
    if kind == "linear":
        return Linear(desc["c"], known)
    if kind == "affine_max":
        return AffineMax(desc["slopes"], desc["offsets"], known)
    if kind == "scaled_norm":
        return ScaledNorm(desc["center"], desc["slope"], known)
    if kind == "quadratic":
        return Quadratic(desc["alpha"], int(desc["dim"]), known)
    raise ValueError(f"unknown potential type {kind!r}")
