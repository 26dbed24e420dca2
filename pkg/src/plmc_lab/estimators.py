"""scikit-learn style front end for the projected Langevin sampler."""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_points
from .chains import ChainConfig, run_plmc
from .geometry import Ball, ConvexBody, WholeSpace
from .potentials import Potential
from .theory import discretization_bound, sigma0_r0


class ProjectedLangevinSampler(TransformerMixin, BaseEstimator):
    """Projected Langevin Monte Carlo as a transformer of starting points.

    ``fit`` validates the problem, resolves the theory constants and draws
    ``n_samples`` chain endpoints from ``x0``.  ``transform`` runs the chain
    from every row of ``X`` and returns the endpoints, so the sampler can sit
    in a pipeline that produces initial points.

    Parameters
    ----------
    body : ConvexBody
        Support of the target.
    potential : Potential
        Convex Lipschitz potential of the target.
    eta : float, default=1e-3
        Time step; must satisfy ``eta < n / L^2``.
    n_steps : int, default=1000
        Number of chain steps per draw.
    x0 : array-like of shape (n,), optional
        Start point for ``fit``/``sample``; defaults to the body's interior point.
    n_samples : int, default=100
        Number of independent replicas drawn by ``fit``.
    lipschitz : float, optional
        Override of the Lipschitz constant used for the step-size check.
    random_state : int, default=0
        Seed of the replica streams.

    Attributes
    ----------
    samples_ : ndarray of shape (n_samples, n)
    lipschitz_ : float
    sigma0_ : float
    r0_ : float
    bound_constant_ : float
        The constant ``A`` of the discretisation bound for ``n_steps``.
    discretization_bound_ : float
        ``A n_steps eta^{3/2}``, bounding ``(1/n) W_2^2`` to the diffusion.
    n_features_in_ : int

    Examples
    --------
    >>> import numpy as np
    >>> from plmc_lab import Ball, Zero, ProjectedLangevinSampler
    >>> est = ProjectedLangevinSampler(Ball(np.zeros(2), 1.0), Zero(2), eta=0.01,
    ...                                n_steps=50, n_samples=10).fit()
    >>> est.samples_.shape
    (10, 2)
    """

    def __init__(self, body: ConvexBody | None = None, potential: Potential | None = None,
                 eta: float = 1e-3, n_steps: int = 1000, x0=None, n_samples: int = 100,
                 lipschitz: float | None = None, random_state: int = 0):
        self.body = body
        self.potential = potential
        self.eta = eta
        self.n_steps = n_steps
        self.x0 = x0
        self.n_samples = n_samples
        self.lipschitz = lipschitz
        self.random_state = random_state

    def _config(self, x0=None, seed=None) -> ChainConfig:
        if self.body is None or self.potential is None:
            raise ValueError("body and potential must be set")
        start = self.body.interior_point() if self.x0 is None else self.x0
        return ChainConfig(self.body, self.potential, start if x0 is None else x0, self.eta,
                           self.n_steps, self.random_state if seed is None else seed,
                           lipschitz=self.lipschitz)

    def fit(self, X=None, y=None):
        """Validate parameters, evaluate the bound constants and draw samples.

        ``X`` and ``y`` are ignored.
        """
        cfg = self._config()
        self.n_features_in_ = cfg.dim
        self.lipschitz_ = cfg.lipschitz
        self.x0_ = cfg.x0
        if isinstance(self.body, WholeSpace):
            # the gap only enters through the boundary term, which vanishes here
            self.sigma0_, self.r0_ = math.nan, math.inf
        else:
            self.sigma0_, self.r0_, _ = sigma0_r0(cfg.x0, self.potential, self.body)
        self.bound_constant_, self.discretization_bound_ = discretization_bound(
            cfg.dim, cfg.steps, cfg.eta, cfg.lipschitz,
            0.0 if math.isinf(self.r0_) else self.sigma0_, self.r0_)
        self.samples_ = run_plmc(cfg, record_stride=max(cfg.steps, 1),
                                 replicas=self.n_samples).final
        return self

    def sample(self, n_samples: int | None = None, random_state: int | None = None) -> np.ndarray:
        """Draw fresh chain endpoints from ``x0``."""
        check_is_fitted(self)
        cfg = self._config(seed=random_state)
        n = self.n_samples if n_samples is None else n_samples
        return run_plmc(cfg, record_stride=max(cfg.steps, 1), replicas=n).final

    def transform(self, X):
        """Run ``n_steps`` chain steps from each row of ``X``; rows use replica ids 0..m-1."""
        check_is_fitted(self)
        X, _ = as_points(X, self.n_features_in_)
        cfg = self._config(x0=X[0])
        return run_plmc(cfg, record_stride=max(cfg.steps, 1), replicas=np.arange(X.shape[0]),
                        starts=X).final


def restricted_sampler(potential: Potential, radius: float, beta: float, **params) -> ProjectedLangevinSampler:
    """Sampler for ``potential`` restricted to ``Ball(0, radius)`` started at 0."""
    n = potential.dim
    body = Ball(np.zeros(n), radius)
    return ProjectedLangevinSampler(body, potential, x0=np.zeros(n),
                                    lipschitz=beta * (radius + 1.0), **params)
