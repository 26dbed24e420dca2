import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from plmc_lab import (AffineMax, Ball, ChainConfig, ProjectedLangevinSampler, Quadratic, WholeSpace,
                      Zero, discretization_bound, restricted_sampler, run_plmc)
from plmc_lab.exceptions import DimensionError, HypothesisError

ABS = AffineMax(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.zeros(2))
DISK = Ball(np.zeros(2), 1.0)


def make(**kw):
    params = dict(body=DISK, potential=ABS, eta=0.01, n_steps=30, n_samples=8, random_state=2)
    params.update(kw)
    return ProjectedLangevinSampler(**params)


def test_get_set_params_and_clone():
    est = make()
    params = est.get_params()
    assert params["eta"] == 0.01 and params["n_steps"] == 30
    est.set_params(eta=0.02)
    assert est.eta == 0.02
    assert clone(est).get_params()["eta"] == 0.02


def test_fit_matches_functional_api():
    est = make().fit()
    cfg = ChainConfig(DISK, ABS, np.zeros(2), 0.01, 30, 2)
    np.testing.assert_array_equal(est.samples_, run_plmc(cfg, 30, 8).final)
    assert est.n_features_in_ == 2 and est.lipschitz_ == 1.0
    assert (est.sigma0_, est.r0_) == pytest.approx((0.0, 1.0), abs=1e-9)
    A, rhs = discretization_bound(2, 30, 0.01, 1.0, est.sigma0_, 1.0)
    assert est.bound_constant_ == A and est.discretization_bound_ == rhs


def test_transform_runs_from_rows():
    est = make().fit()
    X = np.array([[0.1, 0.2], [-0.3, 0.0], [0.0, 0.5]])
    out = est.transform(X)
    assert out.shape == (3, 2)
    assert np.all(DISK.contains(out, 1e-9))
    cfg = ChainConfig(DISK, ABS, X[1], 0.01, 30, 2)
    np.testing.assert_array_equal(out[1], run_plmc(cfg, 30, [1], starts=X[1:2]).final[0])
    with pytest.raises(DimensionError):
        est.transform(np.zeros((2, 3)))


def test_pipeline():
    pipe = make_pipeline(FunctionTransformer(lambda X: 0.5 * X), make())
    out = pipe.fit_transform(np.array([[0.4, 0.4], [0.0, -1.0]]))
    assert out.shape == (2, 2)


def test_not_fitted_and_invalid():
    with pytest.raises(NotFittedError):
        make().sample()
    with pytest.raises(ValueError):
        ProjectedLangevinSampler().fit()
    with pytest.raises(HypothesisError):
        make(eta=5.0).fit()


def test_sample_reproducible():
    est = make().fit()
    np.testing.assert_array_equal(est.sample(), est.samples_)
    assert not np.array_equal(est.sample(random_state=3), est.samples_)


def test_whole_space():
    est = ProjectedLangevinSampler(WholeSpace(2), Zero(2), eta=0.1, n_steps=5, n_samples=3).fit()
    assert est.r0_ == np.inf and est.discretization_bound_ == 0.0


def test_restricted_sampler():
    est = restricted_sampler(Quadratic(1.0, 2), 5.0, 1.0, eta=1e-3, n_steps=10, n_samples=4).fit()
    assert est.lipschitz_ == 6.0
    assert np.all(np.linalg.norm(est.samples_, axis=1) <= 5.0)


def test_docstring_example():
    import doctest

    from plmc_lab import estimators
    assert doctest.testmod(estimators).failed == 0
