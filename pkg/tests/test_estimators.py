import numpy as np
import pytest
from numpy.testing import assert_allclose
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from skewbl import MarketPrior, SntParams, ViewSet, bl_optimize, bl_predictive, snt_sample
from skewbl.estimators import BlackLittermanAllocator, SkewBlackLittermanAllocator, SkewNormalMLE

SIGMA = 0.004 * np.array([[1.0, 0.3, 0.1], [0.3, 1.0, 0.2], [0.1, 0.2, 1.0]])


@pytest.fixture(scope="module")
def returns():
    return snt_sample(SntParams(0.0, [1.5, 0.0, -1.0], [0.01, 0.0, 0.005], SIGMA), 1500, seed=6)


VIEWS = dict(P=[[1.0, 0.0, 0.0], [0.0, 1.0, -1.0]], v=[0.02, 0.005], omega_v=[1e-4, 1e-4])


def test_mle_estimator(returns):
    est = SkewNormalMLE(n_starts=3, random_state=1)
    assert est.get_params() == {"fix_sigma": False, "n_starts": 3, "max_iter": 500, "random_state": 1}
    with pytest.raises(NotFittedError):
        est.score(returns)
    est.fit(returns)
    assert est.lambda1_.shape == (3,)
    assert est.score(returns) == pytest.approx(est.fit_result_.loglik_snt / len(returns), rel=1e-10)
    assert est.p_value_ < 0.01
    assert est.sample(10).shape == (10, 3)
    twin = clone(est).set_params(fix_sigma=True).fit(returns)
    assert_allclose(twin.sigma_, np.cov(returns, rowvar=False), rtol=1e-10)


def test_bl_allocator(returns):
    alloc = BlackLittermanAllocator(w_star=[0.5, 0.3, 0.2], **VIEWS).fit(returns)
    prior = MarketPrior([0.5, 0.3, 0.2], np.cov(returns, rowvar=False))
    mean, cov = bl_predictive(prior, ViewSet(**VIEWS))
    assert_allclose(alloc.predict([0.01])[0], bl_optimize(mean, cov, 0.01), atol=1e-12)
    report = alloc.frontier([0.005, 0.01])
    assert len(report.rows) == 2


def test_skew_allocator(returns):
    alloc = SkewBlackLittermanAllocator(w_star=[0.5, 0.3, 0.2], n_starts=2, **VIEWS).fit(returns)
    w = alloc.predict([[0.01, 0.0], [0.01, 0.01]])
    assert w.shape == (2, 3)
    assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)
    assert_allclose(w @ alloc.predictive_.location, 0.01, atol=1e-12)
    report = alloc.frontier([0.01], [0.0, 0.01])
    assert_allclose(report.rows[1].weights, w[1], atol=1e-12)


def test_skew_allocator_zero_skew_matches_bl(returns):
    kw = dict(w_star=[0.5, 0.3, 0.2], **VIEWS)
    bl = BlackLittermanAllocator(**kw).fit(returns)
    sk = SkewBlackLittermanAllocator(lambda1=[0.0, 0.0, 0.0], **kw).fit(returns)
    assert_allclose(sk.predict([[0.01, 0.0]])[0], bl.predict([0.01])[0], atol=1e-10)
