import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plmc_lab import (AffineMax, Ball, Box, BrownianSource, ChainConfig, Linear, Quadratic, WholeSpace,
                      Zero, plmc_step, run_ball_restricted, run_coupled, run_parallel_coupled_diffusions,
                      run_plmc, run_reflected_reference)
from plmc_lab.exceptions import HypothesisError, OutsideBodyError

ABS_X1_4 = AffineMax(np.array([[1.0, 0, 0, 0], [-1.0, 0, 0, 0]]), np.zeros(2))
BALL4 = Ball(np.zeros(4), 1.0)


def cfg(body=BALL4, potential=ABS_X1_4, x0=None, eta=0.01, steps=20, seed=3, **kw):
    x0 = np.zeros(body.dim) if x0 is None else x0
    return ChainConfig(body, potential, x0, eta, steps, seed, **kw)


class TestConfig:
    def test_step_size_hypothesis(self):
        with pytest.raises(HypothesisError, match="eta < n / L"):
            ChainConfig(WholeSpace(2), Linear(np.array([3.0, 0.0])), np.zeros(2), 0.25, 10)
        ChainConfig(WholeSpace(2), Linear(np.array([3.0, 0.0])), np.zeros(2), 0.2, 10)

    def test_zero_lipschitz_is_vacuous(self):
        assert cfg(WholeSpace(2), Zero(2), eta=1e6).lipschitz == 0.0

    def test_x0_outside(self):
        with pytest.raises(OutsideBodyError):
            cfg(x0=np.array([2.0, 0, 0, 0]))

    def test_replace(self):
        c = cfg()
        assert c.replace(eta=0.02).eta == 0.02 and c.eta == 0.01


class TestStep:
    def test_random_walk(self):
        c = cfg(WholeSpace(2), Zero(2), eta=0.1)
        np.testing.assert_array_equal(plmc_step([0.0, 0.0], [1.0, -1.0], c), [1.0, -1.0])

    def test_projected_to_boundary(self):
        c = cfg(Ball(np.zeros(2), 1.0), Zero(2), eta=0.1)
        np.testing.assert_allclose(plmc_step([0.9, 0.0], [0.3, 0.0], c), [1.0, 0.0])

    def test_drift(self):
        # eta = 0.5 sits exactly on n / L^2 = 0.5, which the strict hypothesis rejects
        with pytest.raises(HypothesisError):
            cfg(WholeSpace(2), Linear(np.array([2.0, 0.0])), eta=0.5)
        c = cfg(WholeSpace(2), Linear(np.array([2.0, 0.0])), eta=0.49)
        # x - eta/2 * c = 0 - 0.245 * (2, 0)
        np.testing.assert_allclose(plmc_step([0.0, 0.0], [0.0, 0.0], c), [-0.49, 0.0])

    def test_quadratic_gradient_formula(self):
        c = cfg(Ball(np.zeros(2), 5.0), Quadratic(1.5, 2), eta=0.01)
        x, xi = np.array([1.0, -2.0]), np.array([0.05, 0.02])
        np.testing.assert_allclose(plmc_step(x, xi, c), x + xi - 0.005 * 1.5 * x)


class TestBrownianSource:
    def test_coarse_is_exact_sum(self):
        src = BrownianSource(9, [0, 1, 2], 3, 0.04, m=8)
        fine = src.fine(5)
        assert fine.shape == (5, 8, 3, 3)
        coarse = src.coarse(fine)
        manual = np.zeros_like(coarse)
        for j in range(8):
            manual += fine[:, j]
        np.testing.assert_array_equal(coarse, manual)

    def test_chunking_does_not_change_stream(self):
        a = BrownianSource(4, [0, 5], 2, 0.1, m=4).fine(10)
        src = BrownianSource(4, [0, 5], 2, 0.1, m=4)
        b = np.concatenate([src.fine(3), src.fine(7)])
        np.testing.assert_array_equal(a, b)

    def test_replica_streams_are_independent_of_grouping(self):
        both = BrownianSource(4, [0, 5], 2, 0.1).fine(6)
        alone = BrownianSource(4, [5], 2, 0.1).fine(6)
        np.testing.assert_array_equal(both[:, :, 1], alone[:, :, 0])
        assert not np.array_equal(both[:, :, 0], both[:, :, 1])

    def test_variance(self):
        z = BrownianSource(1, range(50), 2, 0.2, m=4).fine(400)
        assert z.var() == pytest.approx(0.05, rel=0.03)


class TestRunPlmc:
    def test_zero_steps(self):
        traj = run_plmc(cfg(steps=0))
        assert traj.points.shape == (1, 1, 4)
        np.testing.assert_array_equal(traj.final[0], np.zeros(4))

    def test_telescoping(self):
        c = cfg(WholeSpace(3), Zero(3), x0=np.array([1.0, 2.0, 3.0]), eta=0.1, steps=50)
        traj = run_plmc(c, replicas=4)
        incr = BrownianSource(c.seed, [0, 1, 2, 3], 3, 0.1).fine(50)[:, 0].sum(axis=0)
        np.testing.assert_allclose(traj.final, c.x0 + incr, atol=1e-12)

    def test_deterministic(self):
        a = run_plmc(cfg(), replicas=3)
        b = run_plmc(cfg(), replicas=3)
        np.testing.assert_array_equal(a.points, b.points)

    def test_threads_do_not_change_results(self):
        a = run_plmc(cfg(), replicas=7)
        b = run_plmc(cfg(), replicas=7, threads=3)
        np.testing.assert_array_equal(a.points, b.points)

    def test_replica_subset_reproduces(self):
        a = run_plmc(cfg(), replicas=5)
        b = run_plmc(cfg(), replicas=[3])
        np.testing.assert_array_equal(a.points[:, 3], b.points[:, 0])

    def test_record_stride(self):
        traj = run_plmc(cfg(steps=10), record_stride=4)
        np.testing.assert_array_equal(traj.steps, [0, 4, 8, 10])
        np.testing.assert_allclose(traj.times, [0, 0.04, 0.08, 0.1])

    def test_iterates_in_body(self):
        traj = run_plmc(cfg(eta=0.05, steps=100), replicas=20)
        assert np.all(BALL4.contains(traj.points.reshape(-1, 4), 1e-9))

    def test_box_body(self):
        c = cfg(Box(np.zeros(1), 5 * np.ones(1)), Linear(np.ones(1)), x0=np.array([2.5]), eta=0.1,
                steps=200)
        pts = run_plmc(c, replicas=10).points
        assert pts.min() >= 0.0 and pts.max() <= 5.0

    @settings(max_examples=10, deadline=None)
    @given(seed=st.integers(0, 2**63), replica=st.integers(0, 1000))
    def test_determinism_property(self, seed, replica):
        c = cfg(steps=5, seed=seed, replica_id=replica)
        np.testing.assert_array_equal(run_plmc(c).points, run_plmc(c).points)


class TestReference:
    def test_interior_has_no_local_time(self):
        c = cfg(Ball(np.zeros(2), 100.0), Zero(2), eta=0.01, steps=20)
        traj = run_reflected_reference(c, m=4, replicas=3)
        assert np.all(traj.ledger.ell == 0.0)

    def test_m1_matches_plmc_without_contact(self):
        c = cfg(Ball(np.zeros(2), 100.0), Zero(2), eta=0.01, steps=30)
        a = run_reflected_reference(c, m=1, replicas=3)
        b = run_plmc(c, replicas=3)
        np.testing.assert_array_equal(a.points, b.points)

    def test_ledger_invariants(self):
        traj = run_reflected_reference(cfg(eta=0.05, steps=40), m=8, replicas=10)
        led = traj.ledger
        assert np.all(led.ell_increments >= 0)
        # |sum of pushes| <= sum of |pushes|
        assert np.all(np.linalg.norm(led.phi_increments, axis=2) <= led.ell_increments + 1e-12)
        np.testing.assert_allclose(led.ell, led.ell_increments.sum(axis=0))
        np.testing.assert_allclose(led.ell_at(40), led.ell)
        assert np.all(np.diff(np.cumsum(led.ell_increments, axis=0), axis=0) >= 0)
        assert np.all(BALL4.contains(traj.points.reshape(-1, 4), 1e-9))

    def test_refinement_stability(self):
        c = cfg(Ball(np.zeros(2), 1.0), Zero(2), eta=0.01, steps=100, seed=1)
        ell_m = run_reflected_reference(c, m=16, replicas=200).ledger.ell.mean()
        ell_2m = run_reflected_reference(c, m=32, replicas=200).ledger.ell.mean()
        assert ell_m > 0
        assert abs(ell_2m - ell_m) <= 0.5 * ell_m

    def test_second_moment_bound_in_expectation(self):
        # E|X_t|^2 <= n t for zero potential on the ball; reflection only pulls inward
        n, t = 2, 0.2
        c = cfg(Ball(np.zeros(n), 1.0), Zero(n), eta=0.01, steps=20, seed=2)
        X = run_reflected_reference(c, m=8, replicas=2000).final
        sq = np.sum(X**2, axis=1)
        assert sq.mean() <= n * t + 2 * sq.std(ddof=1) / np.sqrt(len(sq))


class TestCoupled:
    def test_zero_potential_whole_space(self):
        curve = run_coupled(cfg(WholeSpace(3), Zero(3), eta=0.1, steps=10), m=8, replicas=5)
        np.testing.assert_allclose(curve.mean, 0.0, atol=1e-24)

    def test_linear_m1(self):
        c = cfg(WholeSpace(2), Linear(np.array([1.0, -1.0])), eta=0.1, steps=10)
        curve = run_coupled(c, m=1, replicas=5)
        assert np.all(curve.mean == 0.0)

    def test_curve_shape_and_threads(self):
        c = cfg(eta=0.05, steps=10)
        a = run_coupled(c, m=4, replicas=6)
        b = run_coupled(c, m=4, replicas=6, threads=4)
        assert a.mean.shape == (11,) and a.sq_distances.shape == (11, 6)
        np.testing.assert_array_equal(a.sq_distances, b.sq_distances)
        assert a.mean[0] == 0.0


class TestParallelCoupling:
    def test_same_start(self):
        d = run_parallel_coupled_diffusions(cfg(steps=10), np.zeros(4), m=4, replicas=3)
        assert np.all(d == 0.0)

    def test_zero_potential_whole_space(self):
        c = cfg(WholeSpace(2), Zero(2), eta=0.1, steps=10)
        d = run_parallel_coupled_diffusions(c, np.array([0.3, 0.4]), m=4, replicas=3)
        np.testing.assert_allclose(d, 0.5, atol=1e-12)

    def test_outside_alt(self):
        with pytest.raises(OutsideBodyError):
            run_parallel_coupled_diffusions(cfg(), np.array([2.0, 0, 0, 0]))


class TestBallRestricted:
    def test_matches_plmc_on_ball(self):
        p = Quadratic(1.0, 2)
        traj = run_ball_restricted(p, 5.0, 1.0, 0.01, 30, seed=4, replicas=3)
        c = ChainConfig(Ball(np.zeros(2), 5.0), p, np.zeros(2), 0.01, 30, 4, lipschitz=6.0)
        np.testing.assert_array_equal(traj.points, run_plmc(c, replicas=3).points)

    def test_infinite_radius_is_unconstrained(self):
        p = Linear(np.array([0.5, 0.0]))
        traj = run_ball_restricted(p, np.inf, 1.0, 0.01, 30, seed=4)
        c = ChainConfig(WholeSpace(2), p, np.zeros(2), 0.01, 30, 4)
        np.testing.assert_array_equal(traj.points, run_plmc(c).points)

    def test_growth_violation(self):
        with pytest.raises(HypothesisError):
            run_ball_restricted(Quadratic(3.0, 2), 5.0, 1.0, 1e-3, 10)

    def test_gaussian_second_moment(self):
        # target exp(-|x|^2/2) restricted to Ball(0, 5) in 2D; oracle by rejection from N(0, I)
        gen = np.random.default_rng(0)
        z = gen.standard_normal((400000, 2))
        z = z[np.sum(z**2, axis=1) <= 25.0]
        truth = np.mean(np.sum(z**2, axis=1))
        assert truth == pytest.approx(2 * (1 - 12.5 * np.exp(-12.5) / (1 - np.exp(-12.5))), abs=0.02)
        traj = run_ball_restricted(Quadratic(1.0, 2), 5.0, 1.0, 1e-3, 20000, seed=8, replicas=400,
                                   record_stride=20000)
        sq = np.sum(traj.final**2, axis=1)
        se = sq.std(ddof=1) / np.sqrt(len(sq))
        assert abs(sq.mean() - truth) <= 3 * se

