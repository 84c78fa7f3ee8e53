import time

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from distfreg import CurveSet, Grid, asym_normal_kernel, fit_fnpm, fit_fplm, nw_predict, nw_weights, predict_fplm, semimetric_l2
from distfreg.dgp import gen_fnpm, gen_fplm
from distfreg.errors import CollinearityError, DegenerateSampleError, DegenerateWeightsError
from distfreg.fdcore import pairwise_l2
from distfreg.kernelmodels import NwFit, bandwidth_grid, select_bandwidth


def _const_curves(grid, levels):
    return CurveSet(grid, np.outer(levels, np.ones(grid.size)))


def _nw_fit(curves, y, h):
    y = np.asarray(y, dtype=float)
    return NwFit(curves, y, h, np.zeros(len(y)), np.zeros(len(y), bool))


def test_flat_kernel_limit(unit_grid, rng):
    train = CurveSet(unit_grid, rng.normal(size=(7, 101)))
    w = nw_weights(train.values[2], train, 1e12)
    np.testing.assert_allclose(w, 1 / 7, atol=1e-12)


def test_single_curve(unit_grid):
    train = CurveSet(unit_grid, np.ones((1, 101)))
    assert nw_weights(np.zeros(101), train, 1.0).tolist() == [1.0]


def test_hand_instance(unit_grid):
    # constant curves 0, 1, 2 sit at L2 distances 0, 1, 2 from the zero curve
    train = _const_curves(unit_grid, [0.0, 1.0, 2.0])
    w = nw_weights(np.zeros(101), train, 1.0)
    raw = np.array([0.797885, 0.483941, 0.107982])
    np.testing.assert_allclose(w, raw / raw.sum(), atol=1e-6)
    k = np.array([asym_normal_kernel(d) for d in (0.0, 1.0, 2.0)])
    expected = (k @ [1.0, 2.0, 3.0]) / k.sum()
    pred = nw_predict(_nw_fit(train, [1, 2, 3], 1.0), CurveSet(unit_grid, np.zeros(101)))
    assert pred[0] == pytest.approx(expected, abs=1e-12)
    assert pred[0] == pytest.approx(1.503, abs=0.01)


def test_constant_response(unit_grid, rng):
    train = CurveSet(unit_grid, rng.normal(size=(10, 101)))
    q = CurveSet(unit_grid, rng.normal(size=(4, 101)))
    np.testing.assert_allclose(nw_predict(_nw_fit(train, np.full(10, 2.5), 0.7), q), 2.5, rtol=1e-15)


def test_small_bandwidth_returns_own_response(unit_grid, rng):
    train = CurveSet(unit_grid, rng.normal(size=(5, 101)))
    y = rng.normal(size=5)
    pred = nw_predict(_nw_fit(train, y, 1e-3), train)
    np.testing.assert_allclose(pred, y, atol=1e-12)


def test_degenerate_mass_falls_back_to_mean(unit_grid):
    train = _const_curves(unit_grid, [0.0, 0.1])
    far = CurveSet(unit_grid, np.full((1, 101), 1e3))
    with pytest.raises(DegenerateWeightsError):
        nw_weights(far.values[0], train, 1e-3)
    pred, flags = nw_predict(_nw_fit(train, [1.0, 3.0], 1e-3), far, return_flags=True)
    assert pred[0] == 2.0 and flags.tolist() == [True]


def test_weights_normalized_on_random_instances(unit_grid):
    r = np.random.default_rng(0)
    for _ in range(100):
        n = int(r.integers(1, 15))
        train = CurveSet(unit_grid, r.normal(size=(n, 101)))
        h = float(np.exp(r.uniform(-1, 2)))
        w = nw_weights(r.normal(size=101), train, h)
        assert np.all(w >= 0) and abs(w.sum() - 1) <= 1e-12


@given(st.integers(0, 10_000), st.floats(0.2, 5.0))
def test_predictions_convex(seed, h):
    r = np.random.default_rng(seed)
    g = Grid.uniform(0, 1, 21)
    train = CurveSet(g, r.normal(size=(8, 21)))
    y = r.normal(size=8)
    pred = nw_predict(_nw_fit(train, y, h), CurveSet(g, r.normal(size=(5, 21))))
    assert np.all(pred >= y.min() - 1e-12) and np.all(pred <= y.max() + 1e-12)


def test_scale_equivariance(unit_grid, rng):
    train = CurveSet(unit_grid, rng.normal(size=(9, 101)))
    q = CurveSet(unit_grid, rng.normal(size=(3, 101)))
    y = rng.normal(size=9)
    base = nw_predict(_nw_fit(train, y, 1.3), q)
    for c in (2.0, -0.5, 8.0):
        assert np.array_equal(nw_predict(_nw_fit(train, c * y, 1.3), q), c * base)
    np.testing.assert_allclose(nw_predict(_nw_fit(train, 3.7 * y, 1.3), q), 3.7 * base, rtol=1e-14)


def test_selected_bandwidth_in_grid():
    d = gen_fnpm(60, 3)
    h = select_bandwidth(d.curves, d.y)
    assert h in bandwidth_grid(pairwise_l2(d.curves)).tolist()


def test_duplicated_sample_bandwidth_finite():
    d = gen_fnpm(20, 4)
    x = np.vstack([d.curves.values, d.curves.values])
    h = select_bandwidth(CurveSet(d.curves.grid, x), np.concatenate([d.y, d.y]))
    assert np.isfinite(h) and h > 0


def test_bandwidth_matches_exhaustive_loo_scan():
    d = gen_fnpm(30, 17)
    g = d.curves.grid
    x, y = d.curves.values, d.y
    n = len(y)
    dist = [[semimetric_l2(x[i], x[j], g) for j in range(n)] for i in range(n)]
    cands = bandwidth_grid(np.array(dist))
    best, best_h = np.inf, None
    for h in cands:
        sse = 0.0
        for i in range(n):
            num = den = 0.0
            for j in range(n):
                if j != i:
                    k = asym_normal_kernel(dist[i][j] / h)
                    num += k * y[j]
                    den += k
            pred = num / den if den > 0 else y.mean()
            sse += (y[i] - pred) ** 2
        if sse / n < best:
            best, best_h = sse / n, h
    assert select_bandwidth(d.curves, y) == pytest.approx(best_h, rel=1e-12)


def test_all_curves_identical(unit_grid):
    cs = CurveSet(unit_grid, np.ones((5, 101)))
    with pytest.raises(DegenerateSampleError):
        select_bandwidth(cs, np.arange(5.0))


def test_fnpm_zero_response():
    d = gen_fnpm(40, 1)
    fit = fit_fnpm(d.curves, np.zeros(40))
    assert np.all(fit.fitted == 0)


def test_fnpm_fitted_within_range():
    d = gen_fnpm(80, 2)
    fit = fit_fnpm(d.curves, d.y)
    assert fit.h > 0
    assert np.all(fit.fitted >= d.y.min()) and np.all(fit.fitted <= d.y.max())
    # self-inclusive in-sample fit
    np.testing.assert_allclose(nw_predict(fit, d.curves), fit.fitted, rtol=1e-12)


def test_fplm_zero_covariate():
    d = gen_fplm(30, 1)
    with pytest.raises(CollinearityError):
        fit_fplm(d.curves, d.y, np.zeros(30))


def test_fplm_constant_covariate():
    d = gen_fplm(30, 1)
    with pytest.raises(CollinearityError):
        fit_fplm(d.curves, d.y, np.full(30, 4.0), h=0.5)


def test_fplm_pure_linear_part():
    d = gen_fplm(50, 2)
    fit = fit_fplm(d.curves, 0.5 * d.z, d.z)
    assert fit.beta_nf == pytest.approx(0.5, abs=1e-6)


def test_fplm_adjusted_responses():
    d = gen_fplm(60, 3)
    fit = fit_fplm(d.curves, d.y, d.z)
    np.testing.assert_allclose(fit.nw_adjusted.train_y, d.y - fit.beta_nf * d.z, atol=1e-12)
    np.testing.assert_allclose(fit.fitted, fit.beta_nf * d.z + fit.nw_adjusted.fitted, atol=1e-12)


def test_fplm_bruteforce_small_instance(unit_grid):
    x = np.outer([0.0, 0.4, 1.1], np.ones(101))
    curves = CurveSet(unit_grid, x)
    y = np.array([1.0, -0.5, 2.0])
    z = np.array([0.3, 1.2, -0.7])
    h = 0.8
    k = np.array([[asym_normal_kernel(abs(a - b) / h) for b in (0.0, 0.4, 1.1)] for a in (0.0, 0.4, 1.1)])
    w = k / k.sum(axis=1, keepdims=True)
    zt = z - w @ z
    yt = y - w @ y
    beta = (zt @ yt) / (zt @ zt)
    fit = fit_fplm(curves, y, z, h=h)
    assert fit.beta_nf == pytest.approx(beta, rel=1e-12)
    np.testing.assert_allclose(fit.fitted, beta * z + w @ (y - beta * z), atol=1e-12)
    q = np.array([0.2])
    kq = np.array([asym_normal_kernel(abs(0.2 - b) / h) for b in (0.0, 0.4, 1.1)])
    expected = beta * 1.5 + (kq @ (y - beta * z)) / kq.sum()
    pred = predict_fplm(fit, CurveSet(unit_grid, np.full((1, 101), q[0])), [1.5])
    assert pred[0] == pytest.approx(expected, rel=1e-12)


def test_predict_fplm_reductions(unit_grid, rng):
    d = gen_fplm(40, 6)
    fit = fit_fplm(d.curves, d.y, d.z)
    q = gen_fplm(5, 7).curves
    np.testing.assert_array_equal(predict_fplm(fit, q, np.zeros(5)), nw_predict(fit.nw_adjusted, q))

    curves = CurveSet(unit_grid, rng.normal(size=(6, 101)))
    z = rng.normal(size=6)
    c = 1.25
    fit = fit_fplm(curves, 0.5 * z + c, z, h=1.0)
    assert fit.beta_nf == pytest.approx(0.5, abs=1e-10)
    pred = predict_fplm(fit, CurveSet(unit_grid, rng.normal(size=(1, 101))), [2.0])
    assert pred[0] == pytest.approx(1.0 + c, abs=1e-9)


def test_fplm_recovers_coefficient():
    est = []
    for r in range(10):
        d = gen_fplm(1000, 1000 + r)
        est.append(fit_fplm(d.curves, d.y, d.z).beta_nf)
    est = np.array(est)
    se = est.std(ddof=1) / np.sqrt(est.size)
    assert abs(est.mean() - 0.5) <= 3 * se


def _median_time(fn, runs=5):
    ts = []
    for _ in range(runs):
        t0 = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t0)
    return float(np.median(ts))


def test_fnpm_cost_scales_quadratically():
    d = gen_fnpm(1000, 9)
    half = d.curves.subset(np.arange(500))
    t_full = _median_time(lambda: fit_fnpm(d.curves, d.y))
    t_half = _median_time(lambda: fit_fnpm(half, d.y[:500]))
    assert t_full / t_half >= 3
