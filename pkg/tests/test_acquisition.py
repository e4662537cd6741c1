import numpy as np
import pytest

from chamberopt.acquisition import (AcquisitionConfig, constrained_ei,
                                    expected_improvement, incumbent,
                                    probability_feasible, q_feasibility_mc,
                                    qcei_mc, ucb)
from chamberopt.errors import InvalidStateError
from chamberopt.evaluators import Dataset, Observation
from chamberopt.gp import (GpHyperparameters, PosteriorGaussian, destandardize,
                           model_from_hyper, posterior_at)
from chamberopt.space import PRECHAMBER_SPACE

from oracles import normal_cdf


def _g(mean, std):
    return PosteriorGaussian(mean=mean, std=std)


# ------------------------------------------------------------ closed forms


def test_ei_deterministic_improvement():
    assert expected_improvement(_g(6.0, 0.0), 5.0) == 1.0


def test_ei_at_incumbent_mean():
    # (mu-best)*Phi(0) + 1*phi(0) = 1/sqrt(2 pi)
    assert expected_improvement(_g(0.0, 1.0), 0.0) == pytest.approx(
        0.3989422804014327, abs=1e-12)


def test_ei_hopeless_candidate():
    assert expected_improvement(_g(-10.0, 1.0), 0.0) < 1e-20


def test_ei_never_negative():
    rng = np.random.default_rng(0)
    for _ in range(200):
        g = _g(rng.normal(), rng.uniform(0, 2))
        assert expected_improvement(g, rng.normal()) >= 0.0


def test_pf_at_threshold_mean():
    assert probability_feasible(_g(25.0, 3.0), 25.0) == pytest.approx(0.5, abs=1e-12)


def test_pf_five_sigma_margin():
    assert probability_feasible(_g(25.0 - 5 * 2.0, 2.0), 25.0) == pytest.approx(
        normal_cdf(5.0), abs=1e-12)


def test_pf_deterministic_infeasible():
    assert probability_feasible(_g(25.01, 0.0), 25.0) == 0.0
    assert probability_feasible(_g(24.99, 0.0), 25.0) == 1.0


def test_cei_unconstrained_limit():
    ei = expected_improvement(_g(1.0, 2.0), 0.5)
    assert constrained_ei(_g(1.0, 2.0), _g(-100.0, 1.0), 0.5, 25.0) == pytest.approx(ei)


def test_cei_annihilation():
    assert constrained_ei(_g(10.0, 1.0), _g(26.0, 0.0), 0.0, 25.0) == 0.0


def test_cei_product_spot_value():
    val = constrained_ei(_g(0.0, 1.0), _g(25.0, 1.0), 0.0, 25.0)
    assert val == pytest.approx(0.5 * 0.3989422804014327, abs=1e-6)


def test_cei_is_exactly_the_product():
    rng = np.random.default_rng(1)
    for _ in range(50):
        gk = _g(rng.normal(), rng.uniform(0, 2))
        gv = _g(rng.normal(20, 5), rng.uniform(0, 3))
        best, thr = rng.normal(), 25.0
        assert constrained_ei(gk, gv, best, thr) == (
            probability_feasible(gv, thr) * expected_improvement(gk, best))


def test_ei_monotonic_in_mean_and_std():
    mus = np.linspace(-3, 3, 100)
    stds = np.linspace(1e-6, 3, 100)
    for s in stds:
        vals = [expected_improvement(_g(m, s), 0.0) for m in mus]
        assert np.all(np.diff(vals) >= -1e-12)
    for m in mus[mus <= 0]:
        vals = [expected_improvement(_g(m, s), 0.0) for s in stds]
        assert np.all(np.diff(vals) >= -1e-12)


def test_ucb():
    assert ucb(_g(1.0, 2.0), 0.0) == 1.0
    assert ucb(_g(1.0, 0.0), 7.0) == 1.0
    assert ucb(_g(1.0, 2.0), 1.5) == 4.0


# ------------------------------------------------------------ incumbent


def _campaign_history_dataset():
    ds = Dataset(space=PRECHAMBER_SPACE)
    rows = [
        ((10.20, 0.89, 18.75), 160.38, 17.93, "doe"),
        ((10.02, 0.88, 18.26), 246.46, 22.70, "bo_iter_1"),
        ((9.90, 0.88, 18.18), 244.56, 22.11, "bo_iter_2"),
        ((11.81, 0.88, 19.74), 263.16, 22.53, "bo_iter_3"),
    ]
    for x, k, v, tag in rows:
        ds.append(Observation(x, k, v, tag))
    return ds


def test_incumbent_picks_feasible_max():
    inc = incumbent(_campaign_history_dataset(), 25.0)
    assert inc.index == 3
    assert inc.k_best == pytest.approx(263.16)


def test_incumbent_all_infeasible_is_none():
    ds = _campaign_history_dataset()
    assert incumbent(ds, 10.0) is None


def test_incumbent_single_feasible():
    ds = _campaign_history_dataset()
    inc = incumbent(ds, 18.0)           # only the DOE row is feasible
    assert inc.index == 0
    assert inc.k_best == pytest.approx(160.38)


def test_incumbent_empty_dataset_raises():
    with pytest.raises(InvalidStateError):
        incumbent(Dataset(space=PRECHAMBER_SPACE), 25.0)


# ------------------------------------------------------------ MC batch CEI


def _models(rng, n=10, d=2):
    X = rng.uniform(size=(n, d))
    k = 100 + 50 * np.sin(3 * X[:, 0]) + 30 * X[:, 1]
    v = 20 + 6 * X[:, 0]
    hk = GpHyperparameters(lengthscales=np.full(d, 0.4), signal_variance=1.0)
    hv = GpHyperparameters(lengthscales=np.full(d, 0.6), signal_variance=0.8)
    mk = model_from_hyper(X, k, "objective", hk)
    mv = model_from_hyper(X, v, "constraint", hv)
    return mk, mv


def _closed_form_at(mk, mv, x, best, thr):
    gk = destandardize(mk, posterior_at(mk, x))
    gv = destandardize(mv, posterior_at(mv, x))
    return constrained_ei(gk, gv, best, thr)


def test_qcei_q1_converges_to_closed_form():
    rng = np.random.default_rng(2)
    mk, mv = _models(rng)
    x = np.array([0.45, 0.8])
    best, thr = 120.0, 25.0
    cf = _closed_form_at(mk, mv, x, best, thr)
    n = 10**6
    est = qcei_mc(mk, mv, x[None, :], best, thr, n, seed=3)
    gk = destandardize(mk, posterior_at(mk, x))
    se = 3 * gk.std / np.sqrt(n)        # conservative bound on the MC error
    assert abs(est - cf) < max(3 * se, 1e-3)


def test_qcei_duplicate_points_add_nothing():
    rng = np.random.default_rng(4)
    mk, mv = _models(rng)
    x = np.array([0.45, 0.8])
    best, thr = 120.0, 25.0
    single = qcei_mc(mk, mv, x[None, :], best, thr, 10**5, seed=5)
    triple = qcei_mc(mk, mv, np.tile(x, (3, 1)), best, thr, 10**5, seed=5)
    assert triple == pytest.approx(single, abs=3e-3)


def test_qcei_deeply_infeasible_is_zero():
    rng = np.random.default_rng(6)
    mk, mv = _models(rng)
    xs = rng.uniform(size=(3, 2))
    # threshold far below any plausible constraint draw
    est = qcei_mc(mk, mv, xs, 0.0, -100.0, 10**4, seed=7)
    assert est < 1e-6


def test_qcei_deterministic_given_seed():
    rng = np.random.default_rng(8)
    mk, mv = _models(rng)
    xs = rng.uniform(size=(4, 2))
    a = qcei_mc(mk, mv, xs, 120.0, 25.0, 1024, seed=9)
    b = qcei_mc(mk, mv, xs, 120.0, 25.0, 1024, seed=9)
    assert a == b


def test_qcei_monotone_in_batch_with_shared_base():
    rng = np.random.default_rng(10)
    mk, mv = _models(rng)
    n = 4096
    qmax = 5
    base_k = rng.standard_normal((n, qmax))
    base_v = rng.standard_normal((n, qmax))
    pts = rng.uniform(size=(qmax, 2))
    prev = -np.inf
    for q in range(1, qmax + 1):
        est = qcei_mc(mk, mv, pts[:q], 120.0, 25.0, n,
                      base_k=base_k[:, :q], base_v=base_v[:, :q])
        # nested Cholesky keeps shared points' draws identical, so the
        # per-sample max cannot shrink
        assert est >= prev - 1e-12
        prev = est


def test_mc_rate_of_convergence():
    rng = np.random.default_rng(11)
    mk, mv = _models(rng)
    x = np.array([0.45, 0.8])
    best, thr = 120.0, 25.0
    cf = _closed_form_at(mk, mv, x, best, thr)
    errs = []
    for n in (10**3, 10**4, 10**5, 10**6):
        reps = [abs(qcei_mc(mk, mv, x[None, :], best, thr, n, seed=s) - cf)
                for s in range(5)]
        errs.append(np.mean(reps))
    # mean error at 10^6 samples should be ~sqrt(1000)x below 10^3 samples
    assert errs[-1] < errs[0] / 10


def test_argmax_scale_equivariance():
    rng = np.random.default_rng(12)
    X = rng.uniform(size=(10, 2))
    k = 100 + 50 * np.sin(3 * X[:, 0]) + 30 * X[:, 1]
    v = 20 + 6 * X[:, 0]
    hk = GpHyperparameters(lengthscales=np.full(2, 0.4), signal_variance=1.0)
    hv = GpHyperparameters(lengthscales=np.full(2, 0.6), signal_variance=0.8)
    mv = model_from_hyper(X, v, "constraint", hv)
    grid = rng.uniform(size=(200, 2))
    thr = 25.0

    def argmax_for(c):
        mk = model_from_hyper(X, c * k, "objective", hk)
        best = c * 120.0
        vals = [_closed_form_at(mk, mv, g, best, thr) for g in grid]
        return int(np.argmax(vals))

    assert argmax_for(1.0) == argmax_for(7.5) == argmax_for(0.2)


def test_q_feasibility_mc_bounds():
    rng = np.random.default_rng(13)
    mk, mv = _models(rng)
    xs = rng.uniform(size=(3, 2))
    p = q_feasibility_mc(mv, xs, 25.0, 4096, seed=14)
    assert 0.0 <= p <= 1.0
    assert q_feasibility_mc(mv, xs, 1000.0, 1024, seed=15) == 1.0


def test_acquisition_config_validation():
    with pytest.raises(ValueError):
        AcquisitionConfig(kind="nope")
    with pytest.raises(ValueError):
        AcquisitionConfig(mc_samples=0)
    with pytest.raises(ValueError):
        AcquisitionConfig(constraint_threshold=np.inf)
