"""B-spline bases and the basis-expansion estimator of the functional linear model.

The pipeline is: project each curve onto a B-spline basis ``phi`` (least
squares on the grid), form ``U[i, q] = int psi_q(t) * sum_p c[i, p] phi_p(t) dt``
for a second B-spline basis ``psi``, regress the responses on ``U`` without an
intercept, and read off ``beta_hat = sum_q b_q psi_q``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.linalg

from .errors import ConfigurationError, DimensionError, SingularDesignError
from .fdcore import CurveSet, Grid, integrate, quadrature_weights

__all__ = [
    "BSplineBasis",
    "FlmBsplineFit",
    "build_bspline",
    "project_curves",
    "compute_u_matrix",
    "fit_flm_bspline",
    "predict_flm",
    "DEFAULT_CURVE_BASIS",
    "DEFAULT_COEF_BASIS",
    "DEFAULT_ORDER",
]

DEFAULT_CURVE_BASIS = 20
DEFAULT_COEF_BASIS = 5
DEFAULT_ORDER = 4

_RANK_TOL = 1e-10


@dataclass(frozen=True)
class BSplineBasis:
    """Clamped B-spline basis evaluated on a grid.

    Attributes
    ----------
    order : int
        Polynomial degree + 1.
    num_basis : int
    knots : ndarray
        Full knot vector with ``order``-fold boundary knots.
    eval : ndarray, shape (num_basis, M)
        Basis function values on the grid.
    grid : Grid
    """

    order: int
    num_basis: int
    knots: np.ndarray
    eval: np.ndarray
    grid: Grid


def _cox_de_boor(t: np.ndarray, knots: np.ndarray, order: int) -> np.ndarray:
    """Evaluate all B-splines of the given order at ``t`` (rows = basis functions)."""
    n_int = knots.size - 1
    right = knots[-1]
    # order-1 indicators; the last non-degenerate interval is closed on the right
    basis = np.zeros((n_int, t.size))
    last = np.max(np.nonzero(knots[1:] > knots[:-1])[0])
    for i in range(n_int):
        lo, hi = knots[i], knots[i + 1]
        if hi <= lo:
            continue
        inside = (t >= lo) & (t < hi)
        if i == last:
            inside |= t == right
        basis[i, inside] = 1.0
    for r in range(2, order + 1):
        nxt = np.zeros((n_int - r + 1, t.size))
        for i in range(n_int - r + 1):
            left_den = knots[i + r - 1] - knots[i]
            right_den = knots[i + r] - knots[i + 1]
            term = np.zeros(t.size)
            if left_den > 0:
                term += (t - knots[i]) / left_den * basis[i]
            if right_den > 0:
                term += (knots[i + r] - t) / right_den * basis[i + 1]
            nxt[i] = term
        basis = nxt
    return basis


def build_bspline(grid: Grid, num_basis: int, order: int = DEFAULT_ORDER) -> BSplineBasis:
    """Clamped B-spline basis with equally spaced interior knots over the grid domain."""
    if order < 1:
        raise ConfigurationError(f"order must be >= 1, got {order}")
    if num_basis < order:
        raise ConfigurationError(f"num_basis ({num_basis}) must be >= order ({order})")
    a, b = grid.domain
    n_interior = num_basis - order
    interior = np.linspace(a, b, n_interior + 2)[1:-1]
    knots = np.concatenate([np.full(order, a), interior, np.full(order, b)])
    values = _cox_de_boor(grid.points, knots, order)
    values.setflags(write=False)
    knots.setflags(write=False)
    return BSplineBasis(order=order, num_basis=num_basis, knots=knots, eval=values, grid=grid)


def _qr_lstsq(design: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    q, r = scipy.linalg.qr(design, mode="economic")
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag.min() <= _RANK_TOL * max(diag.max(), np.finfo(float).tiny):
        raise SingularDesignError(f"{what} is rank deficient")
    return scipy.linalg.solve_triangular(r, q.T @ rhs)


def project_curves(curves: CurveSet, basis: BSplineBasis) -> np.ndarray:
    """Least-squares basis coefficients of every curve, shape ``(N, P)``."""
    curves.check_grid(basis.grid)
    coef = _qr_lstsq(basis.eval.T, curves.values.T, "curve basis on the grid")
    return np.ascontiguousarray(coef.T)


def cross_gram(curve_basis: BSplineBasis, coef_basis: BSplineBasis) -> np.ndarray:
    """``J[p, q] = int phi_p psi_q dt`` by grid quadrature."""
    if not curve_basis.grid.same_as(coef_basis.grid):
        raise DimensionError("bases are evaluated on different grids")
    w = quadrature_weights(curve_basis.grid)
    return (curve_basis.eval * w) @ coef_basis.eval.T


def compute_u_matrix(
    c: np.ndarray, curve_basis: BSplineBasis, coef_basis: BSplineBasis, grid: Grid
) -> np.ndarray:
    """Design matrix ``U = C J`` of the reduced linear model, shape ``(N, Q)``."""
    c = np.atleast_2d(np.asarray(c, dtype=float))
    if not (curve_basis.grid.same_as(grid) and coef_basis.grid.same_as(grid)):
        raise DimensionError("bases must be evaluated on the supplied grid")
    if c.shape[1] != curve_basis.num_basis:
        raise DimensionError(f"c has {c.shape[1]} columns, curve basis has {curve_basis.num_basis}")
    return c @ cross_gram(curve_basis, coef_basis)


@dataclass(frozen=True)
class FlmBsplineFit:
    b: np.ndarray
    curve_basis: BSplineBasis
    coef_basis: BSplineBasis
    beta_hat: np.ndarray
    c: np.ndarray
    fitted: np.ndarray

    @property
    def grid(self) -> Grid:
        return self.coef_basis.grid


def fit_flm_bspline(
    curves: CurveSet,
    y,
    num_curve_basis: int = DEFAULT_CURVE_BASIS,
    num_coef_basis: int = DEFAULT_COEF_BASIS,
    order: int = DEFAULT_ORDER,
    ridge: bool = False,
) -> FlmBsplineFit:
    """Fit the functional linear model through a B-spline expansion.

    No intercept is estimated. ``ridge=True`` adds ``1e-8 * trace(U'U) / Q``
    to the normal equations; otherwise a rank-deficient ``U`` raises
    :class:`SingularDesignError`.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size != curves.n:
        raise DimensionError(f"{y.size} responses for {curves.n} curves")
    if not np.all(np.isfinite(y)):
        raise DimensionError("responses must be finite")
    if curves.n <= num_coef_basis:
        raise SingularDesignError(
            f"need more observations ({curves.n}) than coefficient basis functions ({num_coef_basis})"
        )
    grid = curves.grid
    phi = build_bspline(grid, num_curve_basis, order)
    psi = build_bspline(grid, num_coef_basis, order)
    c = project_curves(curves, phi)
    u = compute_u_matrix(c, phi, psi, grid)
    if ridge:
        gram = u.T @ u
        lam = 1e-8 * np.trace(gram) / num_coef_basis
        b = scipy.linalg.solve(gram + lam * np.eye(num_coef_basis), u.T @ y, assume_a="pos")
    else:
        b = _qr_lstsq(u, y, "U design matrix")
    beta_hat = psi.eval.T @ b
    return FlmBsplineFit(b=b, curve_basis=phi, coef_basis=psi, beta_hat=beta_hat, c=c, fitted=u @ b)


def predict_flm(fit: Union[FlmBsplineFit, "FlmFpcaFit"], curves: CurveSet) -> np.ndarray:  # noqa: F821
    """Predicted responses ``int beta_hat(t) X(t) dt`` for new curves.

    The B-spline variant integrates against the curves' projection onto the
    fitted curve basis, which is the representation the coefficients were
    estimated on; the FPCA variant integrates the raw curves and adds the
    stored response offset.
    """
    curves.check_grid(fit.grid)
    if isinstance(fit, FlmBsplineFit):
        c = project_curves(curves, fit.curve_basis)
        smooth = c @ fit.curve_basis.eval
        return integrate(smooth * fit.beta_hat, fit.grid)
    return integrate(curves.values * fit.beta_hat, fit.grid) + fit.y_offset
