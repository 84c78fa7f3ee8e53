"""Functional principal components and the FPCA form of the functional linear model."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .basisexp import _qr_lstsq
from .errors import ConfigurationError, DimensionError, SingularDesignError
from .fdcore import CurveSet, Grid, integrate, quadrature_weights

__all__ = [
    "FpcaFit",
    "FlmFpcaFit",
    "fit_fpca",
    "fit_flm_fpca",
    "select_num_components",
    "DEFAULT_COMPONENTS",
]

DEFAULT_COMPONENTS = 5


@dataclass(frozen=True)
class FpcaFit:
    """Eigen-decomposition of the empirical covariance operator.

    Attributes
    ----------
    mean_curve : ndarray, shape (M,)
    eigenfunctions : ndarray, shape (P, M)
        Orthonormal under the quadrature inner product.
    eigenvalues : ndarray, shape (P,)
        Non-increasing operator eigenvalues.
    scores : ndarray, shape (N, P)
        ``int (X_i - mean) phi_p dt``.
    grid : Grid
    """

    mean_curve: np.ndarray
    eigenfunctions: np.ndarray
    eigenvalues: np.ndarray
    scores: np.ndarray
    grid: Grid

    @property
    def num_components(self) -> int:
        return self.eigenvalues.size


def _weighted_eigh(curves: CurveSet):
    w = quadrature_weights(curves.grid)
    mean = curves.values.mean(axis=0)
    centered = curves.values - mean
    n = curves.n
    sw = np.sqrt(w)
    # W^1/2 C W^1/2 shares its spectrum with the covariance operator
    a = centered * sw
    op = (a.T @ a) / max(n - 1, 1)
    vals, vecs = scipy.linalg.eigh(op)
    order = np.argsort(vals)[::-1]
    return mean, centered, w, vals[order], vecs[:, order] / sw[:, None]


def fit_fpca(curves: CurveSet, num_components: int = DEFAULT_COMPONENTS) -> FpcaFit:
    """Functional PCA of the centered curves on their grid.

    Parameters
    ----------
    curves : CurveSet
    num_components : int
        Number of leading components, ``1 <= P <= min(N - 1, M)``.
    """
    limit = min(curves.n - 1, curves.grid.size)
    if not 1 <= num_components <= limit:
        raise ConfigurationError(f"num_components must lie in [1, {limit}], got {num_components}")
    mean, centered, w, vals, funcs = _weighted_eigh(curves)
    phi = np.ascontiguousarray(funcs[:, :num_components].T)
    # fix signs so the largest-magnitude entry of each eigenfunction is positive
    pivot = np.argmax(np.abs(phi), axis=1)
    signs = np.sign(phi[np.arange(num_components), pivot])
    signs[signs == 0] = 1.0
    phi *= signs[:, None]
    scores = (centered * w) @ phi.T
    return FpcaFit(
        mean_curve=mean,
        eigenfunctions=phi,
        eigenvalues=vals[:num_components].copy(),
        scores=scores,
        grid=curves.grid,
    )


def select_num_components(curves: CurveSet, threshold: float = 0.99) -> int:
    """Smallest P whose leading eigenvalues explain at least ``threshold`` of the variance."""
    if not 0 < threshold <= 1:
        raise ConfigurationError(f"threshold must lie in (0, 1], got {threshold}")
    _, _, _, vals, _ = _weighted_eigh(curves)
    limit = min(curves.n - 1, curves.grid.size)
    vals = np.clip(vals[:limit], 0.0, None)
    total = vals.sum()
    if total <= 0:
        return 1
    frac = np.cumsum(vals) / total
    return int(min(np.searchsorted(frac, threshold - 1e-12) + 1, limit))


@dataclass(frozen=True)
class FlmFpcaFit:
    """FPCA fit of the functional linear model.

    ``y_offset`` is the additive constant in ``Y = int beta_hat X dt + y_offset``;
    it is zero unless the model was fit with ``intercept=True``.
    """

    fpca: FpcaFit
    b: np.ndarray
    beta_hat: np.ndarray
    y_offset: float
    fitted: np.ndarray
    intercept: bool = False

    @property
    def grid(self) -> Grid:
        return self.fpca.grid


def fit_flm_fpca(
    curves: CurveSet,
    y,
    num_components: Optional[int] = DEFAULT_COMPONENTS,
    intercept: bool = False,
    variance_threshold: float = 0.99,
) -> FlmFpcaFit:
    """Fit the functional linear model on the leading eigenfunctions.

    The eigenfunctions always come from the centered covariance. Without an
    intercept the design is the raw projections ``int X_i phi_p dt``, which
    keeps the model free of a constant term. With ``intercept=True`` the
    centered responses are regressed on the centered scores and the mean
    response is restored at prediction time.

    Parameters
    ----------
    num_components : int or None
        ``None`` picks P by the cumulative-variance rule.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size != curves.n:
        raise DimensionError(f"{y.size} responses for {curves.n} curves")
    if not np.all(np.isfinite(y)):
        raise DimensionError("responses must be finite")
    if num_components is None:
        num_components = select_num_components(curves, variance_threshold)
    if curves.n <= num_components:
        raise SingularDesignError(
            f"need more observations ({curves.n}) than components ({num_components})"
        )
    fp = fit_fpca(curves, num_components)
    w = quadrature_weights(curves.grid)
    phi = fp.eigenfunctions
    if intercept:
        y_mean = float(y.mean())
        b = _qr_lstsq(fp.scores, y - y_mean, "FPCA score matrix")
        beta_hat = phi.T @ b
        fitted = y_mean + fp.scores @ b
        offset = y_mean - integrate(fp.mean_curve * beta_hat, curves.grid)
    else:
        design = (curves.values * w) @ phi.T
        b = _qr_lstsq(design, y, "FPCA projection matrix")
        beta_hat = phi.T @ b
        fitted = design @ b
        offset = 0.0
    return FlmFpcaFit(
        fpca=fp, b=b, beta_hat=beta_hat, y_offset=float(offset), fitted=fitted, intercept=intercept
    )
