"""Functional Nadaraya-Watson regression and the functional partial linear model.

Distances are L2 semi-metrics between sampled curves and the kernel is the
half-normal ``K(u) = 2/sqrt(2 pi) exp(-u^2/2)`` on ``u >= 0``. In-sample fitted
values keep the self term ``K(0)``; only bandwidth cross-validation leaves
the observation out.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    CollinearityError,
    ConfigurationError,
    DegenerateSampleError,
    DegenerateWeightsError,
    DimensionError,
)
from .fdcore import CurveSet, asym_normal_kernel, pairwise_l2

__all__ = [
    "NwFit",
    "FplmFit",
    "nw_weights",
    "nw_predict",
    "bandwidth_grid",
    "select_bandwidth",
    "loo_errors",
    "fit_fnpm",
    "fit_fplm",
    "predict_fplm",
    "DEFAULT_NUM_BANDWIDTHS",
]

DEFAULT_NUM_BANDWIDTHS = 20
_KERNEL_ZERO = 2.0 / np.sqrt(2.0 * np.pi)


def _kernel_matrix(dist: np.ndarray, h: float) -> np.ndarray:
    # distances are non-negative, so the half-normal reduces to a Gaussian bump
    u = dist / h
    return _KERNEL_ZERO * np.exp(-0.5 * u * u)


def _check_h(h) -> float:
    h = float(h)
    if not (np.isfinite(h) and h > 0):
        raise ConfigurationError(f"bandwidth must be positive and finite, got {h}")
    return h


def _smooth(kmat: np.ndarray, y: np.ndarray, fallback: float):
    """Row-normalized kernel average; rows without mass get ``fallback``."""
    mass = kmat.sum(axis=1)
    dead = mass <= 0
    safe = np.where(dead, 1.0, mass)
    pred = (kmat @ y) / safe
    if dead.any():
        pred = np.where(dead, fallback, pred)
    return pred, dead


def _as_vector(v, n, name):
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != n:
        raise DimensionError(f"{name} has length {v.size}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise DimensionError(f"{name} must be finite")
    return v


@dataclass(frozen=True)
class NwFit:
    """Fitted functional Nadaraya-Watson smoother.

    Attributes
    ----------
    train_curves : CurveSet
    train_y : ndarray
    h : float
        Bandwidth in semi-metric units.
    fitted : ndarray
        In-sample fitted values, self term included.
    degenerate : ndarray of bool
        Rows of ``fitted`` that fell back to the training mean.
    """

    train_curves: CurveSet
    train_y: np.ndarray
    h: float
    fitted: np.ndarray
    degenerate: np.ndarray

    @property
    def train_mean(self) -> float:
        return float(self.train_y.mean())


def nw_weights(query, train: CurveSet, h: float) -> np.ndarray:
    """Normalized kernel weights of the training curves at one query curve.

    Raises
    ------
    DegenerateWeightsError
        If every training curve is out of kernel range.
    """
    h = _check_h(h)
    q = CurveSet(train.grid, np.asarray(query, dtype=float).reshape(1, -1))
    d = pairwise_l2(q, train)[0]
    k = np.asarray(asym_normal_kernel(d / h), dtype=float).reshape(-1)
    total = k.sum()
    if total <= 0:
        raise DegenerateWeightsError("zero total kernel mass at the query")
    return k / total


def nw_predict(fit: NwFit, query_curves: CurveSet, return_flags: bool = False):
    """Kernel-weighted response averages at the query curves.

    Queries with zero kernel mass receive the training mean; pass
    ``return_flags=True`` to get a boolean array marking them.
    """
    fit.train_curves.check_grid(query_curves)
    dist = pairwise_l2(query_curves, fit.train_curves)
    pred, dead = _smooth(_kernel_matrix(dist, fit.h), fit.train_y, fit.train_mean)
    return (pred, dead) if return_flags else pred


def bandwidth_grid(dist: np.ndarray, num: int = DEFAULT_NUM_BANDWIDTHS) -> np.ndarray:
    """Geometric bandwidth candidates from a square training distance matrix.

    The grid runs from the median nearest-distinct-neighbour distance up to
    the 95th percentile of the off-diagonal distances.
    """
    n = dist.shape[0]
    if n < 2:
        raise DegenerateSampleError("need at least two curves for a bandwidth grid")
    off = dist[np.triu_indices(n, 1)]
    if not np.any(off > 0):
        raise DegenerateSampleError("all pairwise distances are zero")
    masked = np.where(dist > 0, dist, np.inf)
    nearest = masked.min(axis=1)
    lo = float(np.median(nearest[np.isfinite(nearest)]))
    hi = float(np.percentile(off, 95))
    if hi <= 0:
        hi = float(off.max())
    lo, hi = min(lo, hi), max(lo, hi)
    return np.geomspace(lo, hi, num)


def loo_errors(dist: np.ndarray, y: np.ndarray, candidates) -> np.ndarray:
    """Leave-one-out mean squared error of the kernel smoother at each bandwidth."""
    y = np.asarray(y, dtype=float)
    out = np.empty(len(candidates))
    for j, h in enumerate(candidates):
        kmat = _kernel_matrix(dist, h)
        np.fill_diagonal(kmat, 0.0)
        pred, _ = _smooth(kmat, y, float(y.mean()))
        out[j] = np.mean((y - pred) ** 2)
    return out


def select_bandwidth(
    train: CurveSet,
    y,
    num_candidates: int = DEFAULT_NUM_BANDWIDTHS,
    dist: Optional[np.ndarray] = None,
) -> float:
    """Bandwidth minimizing the leave-one-out squared error over :func:`bandwidth_grid`.

    Ties go to the smallest candidate.
    """
    if train.n < 3:
        raise DegenerateSampleError(f"bandwidth selection needs n >= 3, got {train.n}")
    y = _as_vector(y, train.n, "y")
    if dist is None:
        dist = pairwise_l2(train)
    cands = bandwidth_grid(dist, num_candidates)
    errs = loo_errors(dist, y, cands)
    return float(cands[int(np.argmin(errs))])


def _nw_fit(train: CurveSet, y: np.ndarray, h: float, dist: np.ndarray) -> NwFit:
    fitted, dead = _smooth(_kernel_matrix(dist, h), y, float(y.mean()))
    y = y.copy()
    y.setflags(write=False)
    return NwFit(train_curves=train, train_y=y, h=h, fitted=fitted, degenerate=dead)


def fit_fnpm(
    train: CurveSet,
    y,
    h: Optional[float] = None,
    num_candidates: int = DEFAULT_NUM_BANDWIDTHS,
) -> NwFit:
    """Fit the functional kernel regression, choosing ``h`` by cross-validation unless given."""
    if train.n < 3:
        raise DegenerateSampleError(f"kernel regression needs n >= 3, got {train.n}")
    y = _as_vector(y, train.n, "y")
    dist = pairwise_l2(train)
    if h is None:
        h = select_bandwidth(train, y, num_candidates, dist=dist)
    return _nw_fit(train, y, _check_h(h), dist)


@dataclass(frozen=True)
class FplmFit:
    """Fitted functional partial linear model.

    Attributes
    ----------
    beta_nf : float
        Coefficient of the scalar covariate.
    nw_adjusted : NwFit
        Kernel smoother of ``y - beta_nf * z`` on the curves.
    train_z : ndarray
    h : float
    fitted : ndarray
        ``beta_nf * z + m_hat(X)`` in sample, self term included.
    """

    beta_nf: float
    nw_adjusted: NwFit
    train_z: np.ndarray
    h: float
    fitted: np.ndarray


def fit_fplm(
    train: CurveSet,
    y,
    z,
    h: Optional[float] = None,
    num_candidates: int = DEFAULT_NUM_BANDWIDTHS,
) -> FplmFit:
    """Fit ``Y = beta_nf Z + m(X) + e`` by partialling the kernel smoother out of Y and Z.

    With ``h=None`` the bandwidth is chosen by leave-one-out CV of the plain
    kernel regression of ``y`` on the curves and then held fixed.

    Raises
    ------
    CollinearityError
        If the smoothed covariate residual ``(I - W) z`` vanishes.
    """
    if train.n < 3:
        raise DegenerateSampleError(f"partial linear fit needs n >= 3, got {train.n}")
    y = _as_vector(y, train.n, "y")
    z = _as_vector(z, train.n, "z")
    dist = pairwise_l2(train)
    if h is None:
        h = select_bandwidth(train, y, num_candidates, dist=dist)
    h = _check_h(h)
    kmat = _kernel_matrix(dist, h)
    # the diagonal carries K(0) > 0, so every row has positive mass
    w = kmat / kmat.sum(axis=1, keepdims=True)
    z_res = z - w @ z
    y_res = y - w @ y
    zz = float(z_res @ z_res)
    if not zz > 1e-12 * max(float(z @ z), np.finfo(float).tiny):
        raise CollinearityError("the covariate is absorbed by the kernel smoother")
    beta = float(z_res @ y_res) / zz
    adjusted = y - beta * z
    nw = _nw_fit(train, adjusted, h, dist)
    z = z.copy()
    z.setflags(write=False)
    return FplmFit(beta_nf=beta, nw_adjusted=nw, train_z=z, h=h, fitted=beta * z + nw.fitted)


def predict_fplm(fit: FplmFit, curves: CurveSet, z, return_flags: bool = False):
    """``beta_nf * z + m_hat(X)`` at new curves."""
    z = _as_vector(z, curves.n, "z")
    m, dead = nw_predict(fit.nw_adjusted, curves, return_flags=True)
    pred = fit.beta_nf * z + m
    return (pred, dead) if return_flags else pred
