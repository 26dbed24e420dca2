"""Convex bodies with Euclidean projection, membership and boundary distance.

Every body works on a single point of shape ``(n,)`` or on a batch of shape
``(m, n)``; batched calls treat rows independently.  New bodies plug in by
subclassing :class:`ConvexBody` and providing ``_project``, ``_violation``
and ``_margin``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from ._validation import as_point, as_points, check_positive, readonly
from .exceptions import ConvergenceError, DimensionError, OutsideBodyError

DYKSTRA_TOL = 1e-10
DYKSTRA_MAX_SWEEPS = 10_000


class ConvexBody:
    """Base class for a closed convex set with nonempty interior."""

    dim: int
    bounded: bool = True

    def project(self, x, tol: float = DYKSTRA_TOL) -> np.ndarray:
        """Euclidean projection of ``x`` (one point or a batch) onto the body."""
        X, single = as_points(x, self.dim)
        out = self._project(X, tol)
        return out[0] if single else out

    def contains(self, x, tol: float = 0.0):
        """True where every defining constraint holds within ``tol``."""
        X, single = as_points(x, self.dim)
        ok = self._violation(X) <= tol
        return bool(ok[0]) if single else ok

    def boundary_distance(self, x):
        """Distance from ``x`` (inside the body) to the boundary."""
        X, single = as_points(x, self.dim)
        margin = self._margin(X)
        if np.any(margin < 0):
            raise OutsideBodyError("boundary_distance requires points inside the body")
        return float(margin[0]) if single else margin

    def interior_point(self) -> np.ndarray:
        raise NotImplementedError

    def linear_minimum(self, direction) -> float:
        """``min_{y in K} <direction, y>``; may be ``-inf`` for unbounded bodies."""
        raise NotImplementedError

    def _project(self, X: np.ndarray, tol: float) -> np.ndarray:
        raise NotImplementedError

    def _violation(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _margin(self, X: np.ndarray) -> np.ndarray:
        # signed distance to the boundary, negative outside
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class WholeSpace(ConvexBody):
    """The unconstrained case ``K = R^n``; boundary distance is ``+inf``."""

    dim: int
    bounded: bool = field(default=False, init=False)

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValueError("dim must be a positive integer")
        object.__setattr__(self, "dim", int(self.dim))

    def interior_point(self):
        return np.zeros(self.dim)

    def linear_minimum(self, direction):
        d = as_point(direction, self.dim, "direction")
        return 0.0 if not np.any(d) else -np.inf

    def _project(self, X, tol):
        return X.copy()

    def _violation(self, X):
        return np.zeros(X.shape[0])

    def _margin(self, X):
        return np.full(X.shape[0], np.inf)

    def to_dict(self):
        return {"type": "whole_space", "dim": self.dim}


@dataclass(frozen=True, eq=False)
class Ball(ConvexBody):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", readonly(as_point(self.center, name="center")))
        object.__setattr__(self, "radius", check_positive(self.radius, "radius"))

    @property
    def dim(self):
        return self.center.shape[0]

    def interior_point(self):
        return self.center.copy()

    def linear_minimum(self, direction):
        d = as_point(direction, self.dim, "direction")
        return float(d @ self.center - self.radius * np.linalg.norm(d))

    def _project(self, X, tol):
        diff = X - self.center
        norms = np.linalg.norm(diff, axis=1)
        out = X.copy()
        outside = norms > self.radius
        if np.any(outside):
            scale = self.radius / norms[outside]
            out[outside] = self.center + diff[outside] * scale[:, None]
        return out

    def _violation(self, X):
        return np.linalg.norm(X - self.center, axis=1) - self.radius

    def _margin(self, X):
        return self.radius - np.linalg.norm(X - self.center, axis=1)

    def to_dict(self):
        return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class Box(ConvexBody):
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_point(self.lower, name="lower")
        hi = as_point(self.upper, lo.shape[0], "upper")
        if not np.all(lo < hi):
            raise ValueError("Box requires lower < upper componentwise")
        object.__setattr__(self, "lower", readonly(lo))
        object.__setattr__(self, "upper", readonly(hi))

    @property
    def dim(self):
        return self.lower.shape[0]

    def interior_point(self):
        return 0.5 * (self.lower + self.upper)

    def linear_minimum(self, direction):
        d = as_point(direction, self.dim, "direction")
        return float(np.sum(np.minimum(d * self.lower, d * self.upper)))

    def _project(self, X, tol):
        return np.clip(X, self.lower, self.upper)

    def _violation(self, X):
        return np.maximum(X - self.upper, self.lower - X).max(axis=1)

    def _margin(self, X):
        return np.minimum(X - self.lower, self.upper - X).min(axis=1)

    def to_dict(self):
        return {"type": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}


@dataclass(frozen=True, eq=False)
class HalfspaceIntersection(ConvexBody):
    """Polyhedron ``{x : A x <= b}`` with a certified strictly interior point.

    A single constraint is projected in closed form; two or more use
    Dykstra's alternating projections.
    """

    normals: np.ndarray
    offsets: np.ndarray
    interior: np.ndarray
    max_sweeps: int = DYKSTRA_MAX_SWEEPS

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.normals, dtype=np.float64))
        b = np.atleast_1d(np.asarray(self.offsets, dtype=np.float64))
        if A.ndim != 2 or b.ndim != 1 or A.shape[0] != b.shape[0] or A.shape[0] == 0:
            raise DimensionError("normals must be (p, n) and offsets (p,) with p >= 1")
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms == 0):
            raise ValueError("every constraint normal must be nonzero")
        p = as_point(self.interior, A.shape[1], "interior")
        if not np.all(A @ p < b):
            raise ValueError("interior point does not satisfy all constraints strictly")
        object.__setattr__(self, "normals", readonly(A))
        object.__setattr__(self, "offsets", readonly(b))
        object.__setattr__(self, "interior", readonly(p))
        object.__setattr__(self, "_norms", norms)
        object.__setattr__(self, "bounded", self._is_bounded())

    @property
    def dim(self):
        return self.normals.shape[1]

    def _is_bounded(self) -> bool:
        # bounded iff the recession cone {d : A d <= 0} is {0}
        for sign in (1.0, -1.0):
            for j in range(self.dim):
                c = np.zeros(self.dim)
                c[j] = -sign
                res = linprog(c, A_ub=self.normals, b_ub=np.zeros(len(self.offsets)),
                              bounds=[(-1, 1)] * self.dim, method="highs")
                if res.status == 0 and -res.fun > 1e-12:
                    return False
        return True

    def interior_point(self):
        return self.interior.copy()

    def linear_minimum(self, direction):
        d = as_point(direction, self.dim, "direction")
        res = linprog(d, A_ub=self.normals, b_ub=self.offsets,
                      bounds=[(None, None)] * self.dim, method="highs")
        if res.status == 3:
            return -np.inf
        if res.status != 0:
            raise ConvergenceError(f"linear minimisation failed: {res.message}")
        return float(res.fun)

    def _project(self, X, tol):
        A, b = self.normals, self.offsets
        sq = self._norms ** 2
        if A.shape[0] == 1:
            excess = np.maximum(X @ A[0] - b[0], 0.0) / sq[0]
            return X - excess[:, None] * A[0]
        return self._dykstra(X, tol)

    def _dykstra(self, X, tol):
        A, b = self.normals, self.offsets
        sq = self._norms ** 2
        x = X.copy()
        corrections = np.zeros((A.shape[0],) + X.shape)
        for _ in range(self.max_sweeps):
            x_prev = x.copy()
            moved = 0.0
            for i in range(A.shape[0]):
                v = x + corrections[i]
                excess = np.maximum(v @ A[i] - b[i], 0.0) / sq[i]
                x = v - excess[:, None] * A[i]
                # x can stall for a whole sweep while corrections still move,
                # so convergence is judged on the full state
                moved = max(moved, np.abs(v - x - corrections[i]).max())
                corrections[i] = v - x
            moved = max(moved, np.abs(x - x_prev).max())
            if moved < tol and self._violation(x).max() <= tol:
                return x
        raise ConvergenceError(
            f"Dykstra projection did not converge in {self.max_sweeps} sweeps "
            "(constraints may be ill-conditioned)"
        )

    def _violation(self, X):
        return ((X @ self.normals.T - self.offsets) / self._norms).max(axis=1)

    def _margin(self, X):
        return ((self.offsets - X @ self.normals.T) / self._norms).min(axis=1)

    def to_dict(self):
        return {
            "type": "halfspaces",
            "normals": self.normals.tolist(),
            "offsets": self.offsets.tolist(),
            "interior_point": self.interior.tolist(),
        }


def project(body: ConvexBody, x, tol: float = DYKSTRA_TOL) -> np.ndarray:
    return body.project(x, tol)


def contains(body: ConvexBody, x, tol: float = 0.0):
    return body.contains(x, tol)


def boundary_distance(body: ConvexBody, x):
    return body.boundary_distance(x)


def body_from_dict(desc: dict) -> ConvexBody:
    """Build a body from a tagged record as used in experiment configs."""
    kind = desc.get("type")
    if kind == "whole_space":
        return WholeSpace(int(desc["dim"]))
    if kind == "ball":
        return Ball(desc["center"], desc["radius"])
    if kind == "box":
        return Box(desc["lower"], desc["upper"])
    if kind == "halfspaces":
        return HalfspaceIntersection(desc["normals"], desc["offsets"], desc["interior_point"])
    raise ValueError(f"unknown body type {kind!r}")
