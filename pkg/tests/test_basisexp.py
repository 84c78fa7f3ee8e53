import numpy as np
import pytest
from scipy import integrate as spi
from scipy.interpolate import BSpline

from distfreg import CurveSet, Grid, build_bspline, compute_u_matrix, fit_flm_bspline, predict_flm, project_curves
from distfreg.basisexp import FlmBsplineFit
from distfreg.dgp import FLM_COMPONENTS, flm_beta, gen_flm
from distfreg.errors import ConfigurationError, DimensionError, SingularDesignError
from distfreg.fdcore import integrate


def _scalar_cox_de_boor(i, k, t, knots):
    """Textbook recursion, one basis function at one point."""
    if k == 1:
        if knots[i] <= t < knots[i + 1]:
            return 1.0
        # close the last non-empty interval on the right
        if t == knots[-1] and knots[i] < knots[i + 1] == knots[-1]:
            return 1.0
        return 0.0
    out = 0.0
    d1 = knots[i + k - 1] - knots[i]
    d2 = knots[i + k] - knots[i + 1]
    if d1 > 0:
        out += (t - knots[i]) / d1 * _scalar_cox_de_boor(i, k - 1, t, knots)
    if d2 > 0:
        out += (knots[i + k] - t) / d2 * _scalar_cox_de_boor(i + 1, k - 1, t, knots)
    return out


def test_piecewise_constant_indicators(unit_grid):
    b = build_bspline(unit_grid, 4, order=1)
    assert np.all(np.isin(b.eval, (0.0, 1.0)))
    assert np.all(b.eval.sum(axis=0) == 1.0)


def test_partition_of_unity(unit_grid):
    for nb, order in [(10, 4), (20, 4), (5, 3), (7, 2)]:
        b = build_bspline(unit_grid, nb, order)
        np.testing.assert_allclose(b.eval.sum(axis=0), 1.0, atol=1e-10)


def test_first_cubic_function_at_left_end(unit_grid):
    b = build_bspline(unit_grid, 10, 4)
    assert _scalar_cox_de_boor(0, 4, 0.0, b.knots) == 1.0
    assert b.eval[0, 0] == 1.0


def test_matches_bruteforce_and_scipy(unit_grid):
    b = build_bspline(unit_grid, 10, 4)
    brute = np.array([[_scalar_cox_de_boor(i, 4, t, b.knots) for t in unit_grid.points] for i in range(10)])
    np.testing.assert_allclose(b.eval, brute, atol=1e-14)
    dm = BSpline.design_matrix(unit_grid.points, b.knots, 3).toarray().T
    np.testing.assert_allclose(b.eval, dm, atol=1e-12)


def test_clamped_knots(unit_grid):
    b = build_bspline(unit_grid, 10, 4)
    assert np.all(np.diff(b.knots) >= 0)
    assert np.sum(b.knots == 0.0) == 4 and np.sum(b.knots == 1.0) == 4


def test_too_few_functions(unit_grid):
    with pytest.raises(ConfigurationError):
        build_bspline(unit_grid, 3, 4)


def test_project_exact_representation(unit_grid):
    b = build_bspline(unit_grid, 20, 4)
    c = project_curves(CurveSet(unit_grid, b.eval[1]), b)
    e2 = np.zeros(20)
    e2[1] = 1
    np.testing.assert_allclose(c[0], e2, atol=1e-8)
    assert np.all(project_curves(CurveSet(unit_grid, np.zeros(101)), b) == 0)


def test_project_reconstructs_sine(unit_grid):
    b = build_bspline(unit_grid, 20, 4)
    f = np.sin(2 * np.pi * unit_grid.points)
    c = project_curves(CurveSet(unit_grid, f), b)
    assert np.max(np.abs(c[0] @ b.eval - f)) < 1e-3


def test_project_rank_deficient():
    g = Grid.uniform(0, 1, 6)
    b = build_bspline(g, 10, 4)
    with pytest.raises(SingularDesignError):
        project_curves(CurveSet(g, np.ones(6)), b)


def test_u_matrix_examples(unit_grid, rng):
    phi = build_bspline(unit_grid, 4, 4)
    psi = build_bspline(unit_grid, 4, 4)
    assert np.all(compute_u_matrix(np.zeros((3, 4)), phi, psi, unit_grid) == 0)

    one = build_bspline(unit_grid, 1, 1)
    u = compute_u_matrix(np.ones((1, 1)), one, one, unit_grid)
    assert u[0, 0] == pytest.approx(1.0, abs=1e-10)

    c = rng.normal(size=(1, 4))
    u = compute_u_matrix(c, phi, psi, unit_grid)
    curve = c[0] @ phi.eval
    direct = [spi.simpson(curve * psi.eval[q], x=unit_grid.points) for q in range(4)]
    np.testing.assert_allclose(u[0], direct, atol=1e-10)


def test_u_matrix_grid_mismatch(unit_grid):
    phi = build_bspline(unit_grid, 4, 4)
    other = build_bspline(Grid.uniform(0, 1, 51), 4, 4)
    with pytest.raises(DimensionError):
        compute_u_matrix(np.zeros((1, 4)), phi, other, unit_grid)


def test_zero_response_gives_zero_beta():
    d = gen_flm(100, 3)
    fit = fit_flm_bspline(d.curves, np.zeros(100))
    assert np.all(fit.b == 0) and np.all(fit.beta_hat == 0)
    assert np.all(predict_flm(fit, d.curves) == 0)


def test_reconstruction_identity():
    d = gen_flm(200, 4)
    fit = fit_flm_bspline(d.curves, d.y)
    assert np.array_equal(fit.beta_hat, fit.coef_basis.eval.T @ fit.b)
    assert np.all(np.isfinite(fit.beta_hat))


def test_noiseless_fit_equals_population_projection():
    # the simulated curves live in a 5-dim space, so only the part of beta
    # visible through that space is identifiable; the noiseless fit must equal
    # b = A^-1 g with A[j, q] = int v~_j psi_q, g_j = int beta v_j
    d = gen_flm(400, 7)
    grid = d.curves.grid
    t = grid.points
    y = integrate(d.curves.values * d.truth, grid)
    fit = fit_flm_bspline(d.curves, y)
    v = np.array([np.sin(j * np.pi * t) - np.cos(j * np.pi * t) for j in range(1, FLM_COMPONENTS + 1)])
    phi = fit.curve_basis.eval
    v_smooth = np.linalg.lstsq(phi.T, v.T, rcond=None)[0].T @ phi
    a = np.array([[spi.simpson(v_smooth[j] * fit.coef_basis.eval[q], x=t) for q in range(5)] for j in range(5)])
    g = np.array([spi.simpson(flm_beta(t) * v[j], x=t) for j in range(5)])
    b_oracle = np.linalg.solve(a, g)
    np.testing.assert_allclose(fit.b, b_oracle, rtol=1e-7, atol=1e-8)
    fn = np.mean((fit.beta_hat - d.truth) ** 2)
    assert fn == pytest.approx(0.52, abs=0.01)


def test_noiseless_recovery_when_identifiable(unit_grid, rng):
    phi = build_bspline(unit_grid, 20, 4)
    psi = build_bspline(unit_grid, 5, 4)
    x = rng.normal(size=(400, 20)) @ phi.eval
    beta = psi.eval.T @ np.array([1.0, -2.0, 0.5, 3.0, -1.0])
    curves = CurveSet(unit_grid, x)
    fit = fit_flm_bspline(curves, integrate(x * beta, unit_grid))
    assert np.mean((fit.beta_hat - beta) ** 2) < 1e-12


def test_too_few_observations(unit_grid, rng):
    curves = CurveSet(unit_grid, rng.normal(size=(5, 101)))
    with pytest.raises(SingularDesignError):
        fit_flm_bspline(curves, np.zeros(5), num_coef_basis=5)


def test_rank_deficient_design_raises_unless_ridge():
    # simulated curves span 5 dimensions, so 20 coefficient functions are unidentifiable
    d = gen_flm(300, 1)
    with pytest.raises(SingularDesignError):
        fit_flm_bspline(d.curves, d.y, num_coef_basis=20)
    fit = fit_flm_bspline(d.curves, d.y, num_coef_basis=20, ridge=True)
    assert np.all(np.isfinite(fit.beta_hat))


def test_residuals_orthogonal_to_design():
    d = gen_flm(500, 11)
    fit = fit_flm_bspline(d.curves, d.y)
    u = compute_u_matrix(fit.c, fit.curve_basis, fit.coef_basis, d.curves.grid)
    assert np.max(np.abs(u.T @ (d.y - fit.fitted))) < 1e-8 * np.linalg.norm(d.y)


def test_refining_coefficient_basis_never_increases_rmse(unit_grid, rng):
    # cubic bases with Q and 2Q - 3 functions have nested knot sets
    phi = build_bspline(unit_grid, 20, 4)
    curves = CurveSet(unit_grid, rng.normal(size=(200, 20)) @ phi.eval)
    y = rng.normal(size=200)
    rmse = []
    for q in (5, 7, 11, 19):
        fit = fit_flm_bspline(curves, y, num_coef_basis=q)
        rmse.append(np.sqrt(np.mean((y - fit.fitted) ** 2)))
    assert all(b <= a + 1e-12 for a, b in zip(rmse, rmse[1:]))


def test_predict_reproduces_fitted():
    d = gen_flm(300, 5)
    fit = fit_flm_bspline(d.curves, d.y)
    np.testing.assert_allclose(predict_flm(fit, d.curves), fit.fitted, atol=1e-10)


def test_predict_unit_integrand(unit_grid):
    phi = build_bspline(unit_grid, 20, 4)
    psi = build_bspline(unit_grid, 5, 4)
    b = np.ones(5)
    fit = FlmBsplineFit(b=b, curve_basis=phi, coef_basis=psi, beta_hat=psi.eval.T @ b,
                        c=np.zeros((1, 20)), fitted=np.zeros(1))
    assert predict_flm(fit, CurveSet(unit_grid, np.ones(101)))[0] == pytest.approx(1.0, abs=1e-12)


def test_predict_matches_direct_quadrature(unit_grid, rng):
    d = gen_flm(100, 8)
    fit = fit_flm_bspline(d.curves, d.y)
    x = rng.normal(size=(3, 20)) @ fit.curve_basis.eval
    pred = predict_flm(fit, CurveSet(unit_grid, x))
    direct = [spi.simpson(fit.beta_hat * row, x=unit_grid.points) for row in x]
    np.testing.assert_allclose(pred, direct, atol=1e-12)


def test_predict_grid_mismatch():
    d = gen_flm(50, 1)
    fit = fit_flm_bspline(d.curves, d.y)
    with pytest.raises(DimensionError):
        predict_flm(fit, CurveSet(Grid.uniform(0, 1, 51), np.zeros((1, 51))))
