"""Projected Langevin chains, the reflected reference diffusion and their coupling.

All runners are vectorised over replicas: state arrays have shape
``(R, n)`` and every replica draws its Gaussian increments from its own
stream ``(seed, replica_id, ROLE_BROWNIAN)``, so a replica's path does not
depend on which other replicas are simulated alongside it.

The reference diffusion is approximated by fine projected Euler steps of
size ``delta = eta / m``.  Fine increments are drawn once and the algorithm
chain consumes their sums over consecutive groups of ``m``, which realises
the coupling ``xi_k = B_{k eta} - B_{(k-1) eta}``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_point, as_points, check_int, check_positive
from .exceptions import HypothesisError, OutsideBodyError
from .geometry import DYKSTRA_TOL, Ball, ConvexBody, WholeSpace
from .potentials import TIE_TOL, Potential
from .rng import ROLE_BROWNIAN, ROLE_MONTE_CARLO, stream

MEMBERSHIP_TOL = 1e-9
_BLOCK_BYTES = 32 * 2**20


@dataclass(frozen=True, eq=False)
class ChainConfig:
    """Parameters of one chain.

    ``lipschitz`` overrides the potential's Lipschitz constant on the body
    (used by the ball-restricted variant, where it is ``beta (R + 1)``).
    Construction enforces ``eta < n / L^2`` whenever ``L > 0``.
    """

    body: ConvexBody
    potential: Potential
    x0: np.ndarray
    eta: float
    steps: int
    seed: int = 0
    replica_id: int = 0
    lipschitz: float | None = None
    tol: float = DYKSTRA_TOL

    def __post_init__(self):
        if self.body.dim != self.potential.dim:
            raise ValueError("body and potential dimensions differ")
        x0 = as_point(self.x0, self.body.dim, "x0")
        if not self.body.contains(x0, MEMBERSHIP_TOL):
            raise OutsideBodyError("x0 must lie in the body")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "eta", check_positive(self.eta, "eta"))
        object.__setattr__(self, "steps", check_int(self.steps, "steps", 0))
        check_int(self.seed, "seed", 0)
        check_int(self.replica_id, "replica_id", 0)
        L = self.lipschitz
        if L is None:
            L = self.potential.lipschitz_constant(self.body)
        L = check_positive(L, "lipschitz", allow_zero=True)
        object.__setattr__(self, "lipschitz", L)
        if L > 0 and not self.eta * L**2 < self.dim:
            raise HypothesisError(
                f"time step eta={self.eta} violates eta < n / L^2 = {self.dim / L**2} "
                "required by the discretisation bound"
            )

    @property
    def dim(self) -> int:
        return self.body.dim

    def replace(self, **changes) -> "ChainConfig":
        fields = dict(body=self.body, potential=self.potential, x0=self.x0, eta=self.eta,
                      steps=self.steps, seed=self.seed, replica_id=self.replica_id,
                      lipschitz=self.lipschitz, tol=self.tol)
        fields.update(changes)
        return ChainConfig(**fields)


class BrownianSource:
    """Fine Gaussian increments of covariance ``delta Id`` for a set of replicas.

    ``fine(c)`` returns the next ``c`` coarse steps worth of increments with
    shape ``(c, m, R, n)``; ``coarse`` sums them over the ``m`` axis.
    """

    def __init__(self, seed: int, replica_ids, dim: int, eta: float, m: int = 1,
                 role: int = ROLE_BROWNIAN):
        self.m = check_int(m, "m", 1)
        self.eta = check_positive(eta, "eta")
        self.delta = self.eta / self.m
        self.dim = dim
        self.replica_ids = [int(r) for r in replica_ids]
        self._gens = [stream(seed, r, role) for r in self.replica_ids]
        self._scale = np.sqrt(self.delta)

    def fine(self, n_coarse: int) -> np.ndarray:
        rows = n_coarse * self.m
        z = np.stack([g.standard_normal((rows, self.dim)) for g in self._gens], axis=1)
        return (self._scale * z).reshape(n_coarse, self.m, len(self._gens), self.dim)

    @staticmethod
    def coarse(fine: np.ndarray) -> np.ndarray:
        return fine.sum(axis=1)

    def blocks(self, steps: int):
        """Yield ``(first_step, fine_block)`` covering ``steps`` coarse steps."""
        per_step = self.m * len(self._gens) * self.dim * 8
        chunk = max(1, _BLOCK_BYTES // per_step)
        done = 0
        while done < steps:
            c = min(chunk, steps - done)
            yield done, self.fine(c)
            done += c


@dataclass
class LocalTimeLedger:
    """Reflection bookkeeping of the reference chain, per replica.

    ``ell`` accumulates the norms of the projection displacements and
    ``phi_total`` the displacements themselves; the per-coarse-step
    increments are kept in ``ell_increments`` (steps, R) and
    ``phi_increments`` (steps, R, n).
    """

    ell: np.ndarray
    phi_total: np.ndarray
    ell_increments: np.ndarray
    phi_increments: np.ndarray

    def ell_at(self, step: int) -> np.ndarray:
        """Local time accumulated over the first ``step`` coarse steps."""
        return self.ell_increments[:step].sum(axis=0)

    @classmethod
    def concatenate(cls, parts):
        return cls(
            np.concatenate([p.ell for p in parts]),
            np.concatenate([p.phi_total for p in parts]),
            np.concatenate([p.ell_increments for p in parts], axis=1),
            np.concatenate([p.phi_increments for p in parts], axis=1),
        )


@dataclass
class Trajectory:
    """Recorded iterates of a batch of replicas.

    ``points`` has shape ``(len(steps), R, n)``; ``final`` is ``(R, n)``.
    """

    steps: np.ndarray
    times: np.ndarray
    points: np.ndarray
    final: np.ndarray
    replica_ids: np.ndarray
    ledger: LocalTimeLedger | None = None
    sq_distances: np.ndarray | None = None

    @classmethod
    def concatenate(cls, parts):
        first = parts[0]
        return cls(
            first.steps,
            first.times,
            np.concatenate([p.points for p in parts], axis=1),
            np.concatenate([p.final for p in parts]),
            np.concatenate([p.replica_ids for p in parts]),
            None if first.ledger is None else LocalTimeLedger.concatenate([p.ledger for p in parts]),
            None if first.sq_distances is None
            else np.concatenate([p.sq_distances for p in parts], axis=1),
        )


@dataclass
class CouplingCurve:
    """Mean squared distance between coupled chains at each coarse step."""

    steps: np.ndarray
    times: np.ndarray
    mean: np.ndarray
    se: np.ndarray
    sq_distances: np.ndarray = field(repr=False)


def plmc_step(x, xi, cfg: ChainConfig) -> np.ndarray:
    """One projected Langevin step ``P(x + xi - eta/2 g(x))``."""
    X, single = as_points(x, cfg.dim)
    XI, _ = as_points(xi, cfg.dim, "xi")
    out = _step(X, XI, cfg.eta, cfg)
    return out[0] if single else out


def _step(X, XI, step_size, cfg):
    drift = cfg.potential._subgradient(X, TIE_TOL)
    return cfg.body._project(X + XI - 0.5 * step_size * drift, cfg.tol)


def _replica_ids(cfg: ChainConfig, replicas) -> np.ndarray:
    if replicas is None:
        return np.array([cfg.replica_id])
    if np.isscalar(replicas):
        return cfg.replica_id + np.arange(check_int(int(replicas), "replicas", 1))
    ids = np.asarray(replicas, dtype=np.int64)
    if ids.ndim != 1 or ids.size == 0:
        raise ValueError("replicas must be a count or a nonempty list of ids")
    return ids


def _split(ids: np.ndarray, threads: int):
    threads = max(1, min(int(threads), len(ids)))
    return [part for part in np.array_split(ids, threads) if part.size]


def _map(func, ids, threads):
    parts = _split(ids, threads)
    if len(parts) == 1:
        return [func(parts[0])]
    with ThreadPoolExecutor(max_workers=len(parts)) as pool:
        return list(pool.map(func, parts))


def _record_steps(steps: int, stride: int) -> np.ndarray:
    stride = check_int(stride, "record_stride", 1)
    rec = np.arange(0, steps + 1, stride)
    if rec[-1] != steps:
        rec = np.append(rec, steps)
    return rec


def _starts(cfg, ids, starts):
    if starts is None:
        return np.tile(cfg.x0, (len(ids), 1))
    X, _ = as_points(starts, cfg.dim, "starts")
    if X.shape[0] != len(ids):
        raise ValueError("need one start per replica")
    if not np.all(cfg.body.contains(X, MEMBERSHIP_TOL)):
        raise OutsideBodyError("every start must lie in the body")
    return X.copy()


def run_plmc(cfg: ChainConfig, record_stride: int = 1, replicas=None, starts=None,
             threads: int = 1) -> Trajectory:
    """Iterate the projected Langevin step ``cfg.steps`` times.

    Parameters
    ----------
    cfg : ChainConfig
    record_stride : int
        Record every ``record_stride``-th iterate (plus the last one).
    replicas : None, int or sequence of int
        ``None`` runs ``cfg.replica_id`` only; an integer ``R`` runs ids
        ``cfg.replica_id + 0..R-1``.
    starts : array of shape (R, n), optional
        Per-replica starting points; defaults to ``cfg.x0`` for all.
    threads : int
        Replica batches simulated concurrently.  Results do not depend on it.
    """
    ids = _replica_ids(cfg, replicas)
    rec = _record_steps(cfg.steps, record_stride)
    X0 = _starts(cfg, ids, starts)
    index = {int(r): i for i, r in enumerate(ids)}

    def work(part):
        x = X0[[index[int(r)] for r in part]].copy()
        points = np.empty((len(rec), len(part), cfg.dim))
        points[0] = x
        slot = 1
        source = BrownianSource(cfg.seed, part, cfg.dim, cfg.eta, 1)
        for first, fine in source.blocks(cfg.steps):
            xi = source.coarse(fine)
            for j in range(xi.shape[0]):
                x = _step(x, xi[j], cfg.eta, cfg)
                if slot < len(rec) and first + j + 1 == rec[slot]:
                    points[slot] = x
                    slot += 1
        return Trajectory(rec, rec * cfg.eta, points, x, np.asarray(part))

    return Trajectory.concatenate(_map(work, ids, threads))


def _reference_block(x, fine_step, delta, cfg):
    # one coarse step of fine projected Euler moves, with reflection bookkeeping
    ell = np.zeros(x.shape[0])
    phi = np.zeros_like(x)
    for zeta in fine_step:
        y = x + zeta - 0.5 * delta * cfg.potential._subgradient(x, TIE_TOL)
        x = cfg.body._project(y, cfg.tol)
        push = y - x
        ell += np.sqrt(np.einsum("ij,ij->i", push, push))
        phi += push
    return x, ell, phi


def run_reflected_reference(cfg: ChainConfig, m: int = 32, replicas=None, starts=None,
                            record_stride: int = 1, threads: int = 1) -> Trajectory:
    """Fine-step approximation of the reflected Langevin diffusion.

    Each fine step of size ``delta = eta / m`` is
    ``y = x + zeta - delta/2 g(x)``, ``x = P(y)``; the displacement
    ``y - x`` feeds the local-time ledger.  States are recorded at coarse
    multiples of ``eta``.
    """
    m = check_int(m, "m", 1)
    ids = _replica_ids(cfg, replicas)
    rec = _record_steps(cfg.steps, record_stride)
    X0 = _starts(cfg, ids, starts)
    index = {int(r): i for i, r in enumerate(ids)}
    delta = cfg.eta / m

    def work(part):
        x = X0[[index[int(r)] for r in part]].copy()
        R = len(part)
        points = np.empty((len(rec), R, cfg.dim))
        points[0] = x
        slot = 1
        d_ell = np.zeros((cfg.steps, R))
        d_phi = np.zeros((cfg.steps, R, cfg.dim))
        source = BrownianSource(cfg.seed, part, cfg.dim, cfg.eta, m)
        for first, fine in source.blocks(cfg.steps):
            for j in range(fine.shape[0]):
                x, ell, phi = _reference_block(x, fine[j], delta, cfg)
                d_ell[first + j] = ell
                d_phi[first + j] = phi
                if slot < len(rec) and first + j + 1 == rec[slot]:
                    points[slot] = x
                    slot += 1
        ledger = LocalTimeLedger(d_ell.sum(axis=0), d_phi.sum(axis=0), d_ell, d_phi)
        return Trajectory(rec, rec * cfg.eta, points, x, np.asarray(part), ledger=ledger)

    return Trajectory.concatenate(_map(work, ids, threads))


def _mean_se(values: np.ndarray):
    mean = values.mean(axis=-1)
    R = values.shape[-1]
    se = values.std(axis=-1, ddof=1) / np.sqrt(R) if R > 1 else np.zeros_like(mean)
    return mean, se


def run_coupled(cfg: ChainConfig, m: int = 32, replicas: int = 1, threads: int = 1) -> CouplingCurve:
    """Couple the algorithm with the fine reference chain through shared noise.

    Both start at ``cfg.x0``.  Returns, at every coarse step ``k``, the mean
    over replicas of ``|X_{k eta} - x_k|^2`` and its standard error.  Since
    any coupling upper-bounds the transport cost, the mean is an upper
    estimate of ``W_2^2(X_{k eta}, x_k)``.
    """
    m = check_int(m, "m", 1)
    ids = _replica_ids(cfg, replicas)
    delta = cfg.eta / m

    def work(part):
        R = len(part)
        x = np.tile(cfg.x0, (R, 1))
        X = x.copy()
        sq = np.zeros((cfg.steps + 1, R))
        source = BrownianSource(cfg.seed, part, cfg.dim, cfg.eta, m)
        for first, fine in source.blocks(cfg.steps):
            xi = source.coarse(fine)
            for j in range(fine.shape[0]):
                x = _step(x, xi[j], cfg.eta, cfg)
                X, _, _ = _reference_block(X, fine[j], delta, cfg)
                diff = X - x
                sq[first + j + 1] = np.einsum("ij,ij->i", diff, diff)
        return sq

    sq = np.concatenate(_map(work, ids, threads), axis=1)
    mean, se = _mean_se(sq)
    steps = np.arange(cfg.steps + 1)
    return CouplingCurve(steps, steps * cfg.eta, mean, se, sq)


def run_parallel_coupled_diffusions(cfg: ChainConfig, x0_alt, m: int = 32, replicas=None,
                                    threads: int = 1) -> np.ndarray:
    """Two reference chains from ``cfg.x0`` and ``x0_alt`` driven by the same noise.

    Returns ``|X_t - X~_t|`` at coarse times, shape ``(steps + 1, R)``.
    """
    m = check_int(m, "m", 1)
    alt = as_point(x0_alt, cfg.dim, "x0_alt")
    if not cfg.body.contains(alt, MEMBERSHIP_TOL):
        raise OutsideBodyError("x0_alt must lie in the body")
    ids = _replica_ids(cfg, replicas)
    delta = cfg.eta / m

    def work(part):
        R = len(part)
        X = np.tile(cfg.x0, (R, 1))
        Y = np.tile(alt, (R, 1))
        dist = np.empty((cfg.steps + 1, R))
        dist[0] = np.linalg.norm(X - Y, axis=1)
        source = BrownianSource(cfg.seed, part, cfg.dim, cfg.eta, m)
        for first, fine in source.blocks(cfg.steps):
            for j in range(fine.shape[0]):
                X, _, _ = _reference_block(X, fine[j], delta, cfg)
                Y, _, _ = _reference_block(Y, fine[j], delta, cfg)
                dist[first + j + 1] = np.linalg.norm(X - Y, axis=1)
        return dist

    return np.concatenate(_map(work, ids, threads), axis=1)


def check_linear_growth(potential: Potential, beta: float, radius: float, seed: int = 0,
                        n_points: int = 2000) -> None:
    """Check ``|g(x)| <= beta (|x| + 1)`` on random points with ``|x| <= 2 radius``.

    Raises
    ------
    HypothesisError
        If some sampled point violates the growth bound.
    """
    gen = stream(seed, 0, ROLE_MONTE_CARLO)
    n = potential.dim
    span = 2.0 * radius if np.isfinite(radius) else 100.0
    direction = gen.standard_normal((n_points, n))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    X = direction * (span * gen.random(n_points))[:, None]
    X = np.vstack([np.zeros((1, n)), X])
    g = potential.min_norm_subgradient(X)
    lhs = np.linalg.norm(g, axis=1)
    rhs = beta * (np.linalg.norm(X, axis=1) + 1.0)
    if np.any(lhs > rhs * (1 + 1e-12)):
        worst = int(np.argmax(lhs - rhs))
        raise HypothesisError(
            f"gradient growth |g(x)| <= beta(|x|+1) fails at |x|={np.linalg.norm(X[worst]):.4g}"
        )


def run_ball_restricted(potential: Potential, radius: float, beta: float, eta: float, steps: int,
                        seed: int = 0, replica_id: int = 0, replicas=None, record_stride: int = 1,
                        threads: int = 1) -> Trajectory:
    """Projected Langevin for the target restricted to ``Ball(0, radius)``, started at 0.

    The potential needs ``|g(x)| <= beta (|x| + 1)``; on the ball it is then
    Lipschitz with constant ``beta (radius + 1)``, which sets the step-size
    constraint.  ``radius = inf`` runs the unconstrained chain, which needs a
    globally Lipschitz potential.
    """
    n = potential.dim
    beta = check_positive(beta, "beta")
    check_linear_growth(potential, beta, radius, seed)
    if np.isinf(radius):
        body, L = WholeSpace(n), None
    else:
        body = Ball(np.zeros(n), check_positive(radius, "radius"))
        L = beta * (body.radius + 1.0)
    cfg = ChainConfig(body, potential, np.zeros(n), eta, steps, seed, replica_id, lipschitz=L)
    return run_plmc(cfg, record_stride, replicas, threads=threads)
