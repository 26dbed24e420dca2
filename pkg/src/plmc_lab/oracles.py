"""Exact iid samplers for the test targets, used as ground truth."""

from __future__ import annotations

import math

import numpy as np

from ._validation import as_point, check_int, check_positive
from .exceptions import ConvergenceError
from .geometry import Ball, Box, ConvexBody
from .metrics import SampleSet
from .potentials import Potential, infimum_lower_bound
from .rng import ROLE_ORACLE, ROLE_WARMSTART, stream


def sample_uniform_ball(n: int, R: float, m: int, seed: int = 0, center=None) -> SampleSet:
    """Uniform points in a ball: Gaussian direction times ``R U^{1/n}``."""
    n = check_int(n, "n", 1)
    R = check_positive(R, "R")
    m = check_int(m, "m", 1)
    gen = stream(seed, 0, ROLE_ORACLE)
    return SampleSet(_uniform_ball(gen, n, R, m) + (0.0 if center is None else as_point(center, n)),
                     "oracle")


def _uniform_ball(gen, n, R, m):
    d = gen.standard_normal((m, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return d * (R * gen.random(m) ** (1.0 / n))[:, None]


def sample_truncated_exponential(L: float, R: float, m: int, seed: int = 0) -> SampleSet:
    """Density proportional to ``exp(-L x)`` on ``[0, R]`` by inverse CDF.

    ``R = inf`` gives the plain exponential law with rate ``L``.
    """
    L = check_positive(L, "L")
    R = check_positive(R, "R", allow_inf=True)
    m = check_int(m, "m", 1)
    u = stream(seed, 0, ROLE_ORACLE).random(m)
    mass = -math.expm1(-L * R)
    return SampleSet(-np.log1p(-u * mass) / L, "oracle")


def rejection_sample(p: Potential, body: ConvexBody, m: int, seed: int = 0,
                     max_tries: int = 1000, batch: int | None = None):
    """iid draws from ``exp(-p)`` restricted to a Box or Ball by rejection.

    Proposals are uniform on the body and accepted with probability
    ``exp(-(p(x) - c))``, where ``c`` is a certified lower bound on the
    infimum, so every accepted point is an exact draw.

    Returns
    -------
    samples : SampleSet
    acceptance_rate : float
        Fraction of proposals accepted.

    Raises
    ------
    ConvergenceError
        If the acceptance rate falls below ``1 / max_tries``.
    """
    if not isinstance(body, (Box, Ball)):
        raise TypeError("rejection sampling needs a Box or Ball body")
    m = check_int(m, "m", 1)
    c = infimum_lower_bound(p, body)
    gen = stream(seed, 0, ROLE_ORACLE)
    batch = batch or max(4 * m, 1024)
    kept, proposed, accepted = [], 0, 0
    while accepted < m:
        if isinstance(body, Box):
            X = body.lower + (body.upper - body.lower) * gen.random((batch, body.dim))
        else:
            X = body.center + _uniform_ball(gen, body.dim, body.radius, batch)
        accept = gen.random(batch) < np.exp(-(p.value(X) - c))
        proposed += batch
        accepted += int(accept.sum())
        kept.append(X[accept])
        if proposed >= max_tries * m and accepted < proposed / max_tries:
            raise ConvergenceError(
                f"acceptance rate {accepted / proposed:.2e} is below 1/max_tries"
            )
    return SampleSet(np.concatenate(kept)[:m], "oracle"), accepted / proposed


def sample_gaussian_warmstart(x0, n: int, L: float, m: int, seed: int = 0) -> SampleSet:
    """iid ``N(x0, (n / L^2) Id)`` points."""
    n = check_int(n, "n", 1)
    x0 = as_point(x0, n, "x0")
    L = check_positive(L, "L")
    m = check_int(m, "m", 1)
    z = stream(seed, 0, ROLE_WARMSTART).standard_normal((m, n))
    return SampleSet(x0 + math.sqrt(n) / L * z, "oracle")
