import numpy as np
import pytest

from chamberopt.kernels import (_matern52_cross_np, _mc_batch_feasibility_np,
                                _mc_batch_improvement_np, matern52_cross,
                                matern52_cross_grad, mc_batch_feasibility,
                                mc_batch_improvement)


def test_active_matern_matches_numpy_reference():
    rng = np.random.default_rng(0)
    A, B = rng.uniform(size=(30, 4)), rng.uniform(size=(7, 4))
    ls = rng.uniform(0.1, 2.0, 4)
    np.testing.assert_allclose(matern52_cross(A, B, ls, 1.7),
                               _matern52_cross_np(A, B, ls, 1.7),
                               rtol=1e-12, atol=1e-14)


def test_active_mc_reductions_match_numpy_reference():
    rng = np.random.default_rng(1)
    ks = rng.normal(1.0, 1.0, (500, 5))
    vs = rng.normal(25.0, 2.0, (500, 5))
    # summation order differs between the two paths
    assert mc_batch_improvement(ks.copy(), vs, 0.5, 25.0) == pytest.approx(
        _mc_batch_improvement_np(ks.copy(), vs, 0.5, 25.0), rel=1e-12)
    assert mc_batch_feasibility(vs, 25.0) == _mc_batch_feasibility_np(vs, 25.0)


def test_grad_matches_finite_differences():
    rng = np.random.default_rng(2)
    A = rng.uniform(size=(10, 3))
    ls = rng.uniform(0.2, 1.5, 3)
    s2 = 0.8
    K, dK = matern52_cross_grad(A, A, ls, s2)
    np.testing.assert_allclose(K, _matern52_cross_np(A, A, ls, s2), rtol=1e-12)
    h = 1e-6
    for i in range(3):
        ls_p, ls_m = ls.copy(), ls.copy()
        ls_p[i] *= np.exp(h)
        ls_m[i] *= np.exp(-h)
        fd = (_matern52_cross_np(A, A, ls_p, s2)
              - _matern52_cross_np(A, A, ls_m, s2)) / (2 * h)
        np.testing.assert_allclose(dK[i], fd, atol=1e-6)


def test_grad_smooth_at_zero_distance():
    A = np.array([[0.3, 0.3]])
    _, dK = matern52_cross_grad(A, A, np.array([0.5, 0.5]), 1.0)
    np.testing.assert_allclose(dK[:, 0, 0], 0.0)


def test_mc_improvement_zero_when_infeasible():
    ks = np.full((100, 3), 10.0)
    vs = np.full((100, 3), 30.0)
    assert mc_batch_improvement(ks, vs, 0.0, 25.0) == 0.0
