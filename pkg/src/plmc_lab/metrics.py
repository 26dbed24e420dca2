"""Empirical Wasserstein-2 estimators and moment diagnostics.

All distances returned here are squared (``W_2^2``) between uniform
empirical measures of equal size.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from ._validation import check_int
from .exceptions import DimensionError
from .rng import ROLE_PROJECTIONS, stream

EXACT_MAX_SIZE = 512
SCHEMA_LINE = "# plmc-lab schema v1"


@dataclass(frozen=True, eq=False)
class SampleSet:
    """An equally weighted point cloud of shape ``(m, n)``."""

    points: np.ndarray
    provenance: str = "chain"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise DimensionError("a sample set needs shape (m, n) with m >= 1")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def to_csv(self, path) -> None:
        header = [f"x_{j + 1}" for j in range(self.dim)]
        with open(path, "w", newline="") as fh:
            fh.write(f"{SCHEMA_LINE}\n# provenance: {self.provenance}\n")
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in self.points:
                writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path, provenance: str | None = None) -> "SampleSet":
        """Read points from the coordinate columns ``x_1..x_n`` of a CSV file."""
        tag = provenance
        with open(path, newline="") as fh:
            lines = []
            for line in fh:
                if line.startswith("#"):
                    if line.startswith("# provenance:") and tag is None:
                        tag = line.split(":", 1)[1].strip()
                    continue
                lines.append(line)
        reader = csv.DictReader(lines)
        cols = [c for c in reader.fieldnames or [] if c.startswith("x_")]
        if not cols:
            raise ValueError(f"{path}: no x_<j> coordinate columns")
        cols.sort(key=lambda c: int(c[2:]))
        pts = [[float(row[c]) for c in cols] for row in reader]
        return cls(np.array(pts), tag or "chain")


def _pair(a: SampleSet, b: SampleSet):
    if a.size != b.size:
        raise ValueError(f"sample sets differ in size ({a.size} vs {b.size})")
    if a.dim != b.dim:
        raise DimensionError(f"sample sets differ in dimension ({a.dim} vs {b.dim})")


def w2_exact(a: SampleSet, b: SampleSet) -> float:
    """Squared W2 between two equal-size empirical measures by optimal assignment."""
    _pair(a, b)
    if a.size > EXACT_MAX_SIZE:
        raise ValueError(f"exact assignment is capped at m={EXACT_MAX_SIZE}; use w2_sliced")
    diff = a.points[:, None, :] - b.points[None, :, :]
    cost = np.einsum("ijk,ijk->ij", diff, diff)
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum() / a.size)


def w2_1d(a: SampleSet, b: SampleSet) -> float:
    """Squared W2 in one dimension: mean squared gap of sorted samples."""
    _pair(a, b)
    if a.dim != 1:
        raise DimensionError("w2_1d needs one-dimensional samples")
    return float(np.mean((np.sort(a.points[:, 0]) - np.sort(b.points[:, 0])) ** 2))


def w2_sliced(a: SampleSet, b: SampleSet, n_proj: int = 100, seed: int = 0) -> float:
    """Average of 1-D squared W2 over ``n_proj`` random unit directions.

    A lower bound on the exact squared W2, since projections are 1-Lipschitz.
    """
    _pair(a, b)
    n_proj = check_int(n_proj, "n_proj", 1)
    dirs = stream(seed, 0, ROLE_PROJECTIONS).standard_normal((n_proj, a.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pa = np.sort(a.points @ dirs.T, axis=0)
    pb = np.sort(b.points @ dirs.T, axis=0)
    return float(np.mean((pa - pb) ** 2))


class Moments(NamedTuple):
    mean: np.ndarray
    second_moment: float
    cov_trace: float
    mean_se: np.ndarray
    second_moment_se: float
    cov_trace_se: float


def moments(a: SampleSet) -> Moments:
    """Mean, ``E|x|^2`` and covariance trace with jackknife standard errors."""
    X = a.points
    m = X.shape[0]
    if m < 2:
        raise ValueError("moments need at least two points")
    sq = np.einsum("ij,ij->i", X, X)
    mean = X.mean(axis=0)
    second = float(sq.mean())
    trace = float(X.var(axis=0, ddof=1).sum())

    s1 = X.sum(axis=0)
    s2 = sq.sum()
    loo_mean = (s1 - X) / (m - 1)
    loo_second = (s2 - sq) / (m - 1)
    mean_se = _jackknife_se(loo_mean)
    second_se = float(_jackknife_se(loo_second))
    if m > 2:
        rest = s1 - X
        loo_trace = ((s2 - sq) - np.einsum("ij,ij->i", rest, rest) / (m - 1)) / (m - 2)
        trace_se = float(_jackknife_se(loo_trace))
    else:
        trace_se = float("nan")
    return Moments(mean, second, trace, mean_se, second_se, trace_se)


def _jackknife_se(loo: np.ndarray):
    m = loo.shape[0]
    centered = loo - loo.mean(axis=0)
    return np.sqrt((m - 1) / m * np.sum(centered**2, axis=0))
