"""Divide-and-conquer fitting: equal blocks, local fits, averaged predictions and intervals.

Each of the ``K`` blocks is fit on its own. The global model averages the
local coefficient functions (linear models only), the local test predictions,
and the local interval constants ``gamma_k`` and ``sigma_k``. Training fitted
values are stitched: every training point keeps the fit from its own block.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Any, Optional, Union

import numpy as np

from .basisexp import (
    DEFAULT_COEF_BASIS,
    DEFAULT_CURVE_BASIS,
    DEFAULT_ORDER,
    fit_flm_bspline,
    predict_flm,
)
from .errors import BlockFitError, CalibrationError, ConfigurationError, DimensionError, PartitionError
from .fdcore import CurveSet, Dataset, Grid
from .fpca import DEFAULT_COMPONENTS, fit_flm_fpca
from .kernelmodels import (
    DEFAULT_NUM_BANDWIDTHS,
    fit_fnpm,
    fit_fplm,
    nw_predict,
    predict_fplm,
    select_bandwidth,
)

__all__ = [
    "MODEL_KINDS",
    "ModelConfig",
    "BlockPartition",
    "LocalFit",
    "GlobalModel",
    "partition",
    "fit_local",
    "fit_global",
    "predict_global",
    "fitted_global_train",
    "calibrate_gamma",
    "prediction_interval",
]

MODEL_KINDS = ("flm-bspline", "flm-fpca", "fnpm", "fplm")
_FLM_KINDS = ("flm-bspline", "flm-fpca")


@dataclass(frozen=True)
class ModelConfig:
    """Estimator choice and hyperparameters shared by all blocks.

    ``num_components=None`` selects the FPCA dimension by the cumulative
    variance rule (``variance_threshold``). ``fplm_bandwidth`` is ``"pooled"``
    (one cross-validated bandwidth from the whole training set, reused by every
    block) or ``"local"`` (each block cross-validates its own).
    """

    kind: str = "flm-bspline"
    num_curve_basis: int = DEFAULT_CURVE_BASIS
    num_coef_basis: int = DEFAULT_COEF_BASIS
    order: int = DEFAULT_ORDER
    num_components: Optional[int] = DEFAULT_COMPONENTS
    variance_threshold: float = 0.99
    fpca_intercept: bool = False
    num_bandwidths: int = DEFAULT_NUM_BANDWIDTHS
    fplm_bandwidth: str = "pooled"
    ridge: bool = False

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigurationError(f"unknown model kind {self.kind!r}; choose from {MODEL_KINDS}")
        if self.fplm_bandwidth not in ("pooled", "local"):
            raise ConfigurationError(f"fplm_bandwidth must be 'pooled' or 'local', got {self.fplm_bandwidth!r}")
        if self.num_bandwidths < 1:
            raise ConfigurationError("num_bandwidths must be positive")

    @property
    def is_flm(self) -> bool:
        return self.kind in _FLM_KINDS


@dataclass(frozen=True)
class BlockPartition:
    block_indices: tuple
    block_size: int

    @property
    def K(self) -> int:
        return len(self.block_indices)

    @property
    def n_total(self) -> int:
        return self.K * self.block_size


def partition(n_train: int, K: int, shuffle_seed=None) -> BlockPartition:
    """Split ``0..n_train-1`` into ``K`` contiguous equal blocks, optionally after a seeded shuffle."""
    if K < 1:
        raise PartitionError(f"K must be >= 1, got {K}")
    if n_train < 1 or n_train % K:
        raise PartitionError(f"K={K} does not divide n_train={n_train}")
    order = np.arange(n_train)
    if shuffle_seed is not None:
        order = np.random.default_rng(shuffle_seed).permutation(n_train)
    n = n_train // K
    blocks = tuple(np.sort(order[k * n:(k + 1) * n]) for k in range(K))
    for b in blocks:
        b.setflags(write=False)
    return BlockPartition(block_indices=blocks, block_size=n)


@dataclass(frozen=True)
class LocalFit:
    model: Any
    block_id: int
    indices: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    sigma_k: float
    gamma_k: float
    fit_seconds: float


def _sample_sd(residuals: np.ndarray) -> float:
    if residuals.size < 2:
        return 0.0
    return float(np.std(residuals, ddof=1))


def calibrate_gamma(residuals, sigma: float, alpha: float) -> float:
    """Smallest multiplier minimizing the coverage probability difference.

    Scans the exact candidate set ``{0} U {|e_i| / sigma}``; coverage of a
    candidate ``g`` is the share of residuals with ``|e_i| / sigma <= g``.
    """
    e = np.asarray(residuals, dtype=float).reshape(-1)
    if e.size == 0 or not np.all(np.isfinite(e)):
        raise CalibrationError("residuals must be a non-empty finite vector")
    if not (np.isfinite(sigma) and sigma > 0):
        raise CalibrationError(f"sigma must be positive, got {sigma}")
    if not 0 < alpha < 1:
        raise CalibrationError(f"alpha must lie in (0, 1), got {alpha}")
    ratios = np.sort(np.abs(e) / sigma)
    cands = np.concatenate([[0.0], ratios])
    covered = np.searchsorted(ratios, cands, side="right")
    gap = np.abs(covered - (1.0 - alpha) * e.size)
    best = np.flatnonzero(gap <= gap.min() + 1e-9)
    return float(cands[best].min())


def _block_gamma(residuals: np.ndarray, sigma: float, alpha: float) -> float:
    # all-equal residuals leave no spread to scale; the interval collapses
    return calibrate_gamma(residuals, sigma, alpha) if sigma > 0 else 0.0


def fit_local(block: Dataset, cfg: ModelConfig, h: Optional[float] = None):
    """Fit one block; returns ``(model, fitted)``."""
    kind = cfg.kind
    if kind == "flm-bspline":
        m = fit_flm_bspline(block.curves, block.y, cfg.num_curve_basis, cfg.num_coef_basis, cfg.order, cfg.ridge)
    elif kind == "flm-fpca":
        m = fit_flm_fpca(block.curves, block.y, cfg.num_components, cfg.fpca_intercept, cfg.variance_threshold)
    elif kind == "fnpm":
        m = fit_fnpm(block.curves, block.y, h=h, num_candidates=cfg.num_bandwidths)
    else:
        if block.z is None:
            raise DimensionError("the partial linear model needs a scalar covariate z")
        m = fit_fplm(block.curves, block.y, block.z, h=h, num_candidates=cfg.num_bandwidths)
    return m, m.fitted


def _predict_local(model, kind: str, curves: CurveSet, z):
    if kind in _FLM_KINDS:
        pred = predict_flm(model, curves)
        return pred, np.zeros(curves.n, dtype=bool)
    if kind == "fnpm":
        return nw_predict(model, curves, return_flags=True)
    if z is None:
        raise DimensionError("the partial linear model needs test covariates z")
    return predict_fplm(model, curves, z, return_flags=True)


@dataclass(frozen=True)
class GlobalModel:
    """Aggregate of ``K`` local fits.

    Attributes
    ----------
    locals : tuple of LocalFit
        In block-id order.
    beta_hat_global : ndarray or None
        Mean of the local coefficient functions (linear models only).
    gamma, sigma : float
        Means of the local interval constants.
    alpha : float
    shared_bandwidth : float or None
        Pooled bandwidth reused by every block, if any.
    setup_seconds : float
        Time spent on pooled pre-fit work such as the shared bandwidth search.
    """

    locals: tuple
    beta_hat_global: Optional[np.ndarray]
    gamma: float
    sigma: float
    alpha: float
    config: ModelConfig
    partition: BlockPartition
    grid: Grid
    shared_bandwidth: Optional[float] = None
    setup_seconds: float = 0.0

    @property
    def K(self) -> int:
        return len(self.locals)

    @property
    def kind(self) -> str:
        return self.config.kind

    @property
    def mean_block_seconds(self) -> float:
        return float(np.mean([lf.fit_seconds for lf in self.locals]))

    @property
    def total_seconds(self) -> float:
        return self.K * self.mean_block_seconds

    def with_alpha(self, alpha: float) -> "GlobalModel":
        """Recalibrate every block's multiplier for another nominal level."""
        new_locals = tuple(
            replace(lf, gamma_k=_block_gamma(lf.residuals, lf.sigma_k, alpha)) for lf in self.locals
        )
        gamma = float(np.mean([lf.gamma_k for lf in new_locals]))
        return replace(self, locals=new_locals, gamma=gamma, alpha=float(alpha))


def fit_global(
    train: Dataset,
    K: int,
    cfg: Union[ModelConfig, str] = "flm-bspline",
    alpha: float = 0.05,
    shuffle_seed=None,
    threads: int = 1,
) -> GlobalModel:
    """Fit every block, calibrate its interval constant and aggregate.

    Parameters
    ----------
    train : Dataset
    K : int
        Number of blocks; must divide ``train.n``.
    cfg : ModelConfig or str
        A model kind string uses default hyperparameters.
    alpha : float
        Nominal miscoverage of the prediction intervals.
    threads : int
        Worker threads for the block fits. Results do not depend on it.

    Raises
    ------
    BlockFitError
        Wrapping the first failing block (lowest id) and its cause.
    """
    if isinstance(cfg, str):
        cfg = ModelConfig(kind=cfg)
    if not 0 < alpha < 1:
        raise CalibrationError(f"alpha must lie in (0, 1), got {alpha}")
    part = partition(train.n, K, shuffle_seed)

    shared_h = None
    setup = 0.0
    if cfg.kind == "fplm" and cfg.fplm_bandwidth == "pooled":
        t0 = time.perf_counter()
        shared_h = select_bandwidth(train.curves, train.y, cfg.num_bandwidths)
        setup = time.perf_counter() - t0

    def work(k):
        idx = part.block_indices[k]
        block = train.subset(idx)
        try:
            t0 = time.perf_counter()
            model, fitted = fit_local(block, cfg, h=shared_h)
            secs = time.perf_counter() - t0
        except Exception as exc:  # attach the block id to any failure
            return BlockFitError(k, exc)
        resid = block.y - fitted
        sd = _sample_sd(resid)
        try:
            gamma_k = _block_gamma(resid, sd, alpha)
        except Exception as exc:
            return BlockFitError(k, exc)
        return LocalFit(model, k, idx, fitted, resid, sd, gamma_k, secs)

    if threads > 1 and part.K > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, range(part.K)))
    else:
        results = [work(k) for k in range(part.K)]
    for r in results:
        if isinstance(r, BlockFitError):
            raise r

    locals_ = tuple(results)
    beta = None
    if cfg.is_flm:
        beta = np.mean(np.stack([lf.model.beta_hat for lf in locals_]), axis=0)
    return GlobalModel(
        locals=locals_,
        beta_hat_global=beta,
        gamma=float(np.mean([lf.gamma_k for lf in locals_])),
        sigma=float(np.mean([lf.sigma_k for lf in locals_])),
        alpha=float(alpha),
        config=cfg,
        partition=part,
        grid=train.grid,
        shared_bandwidth=shared_h,
        setup_seconds=setup,
    )


def predict_global(
    model: GlobalModel,
    test: Union[Dataset, CurveSet],
    z=None,
    return_flags: bool = False,
):
    """Average of the block predictions at the test curves.

    ``test`` may be a :class:`Dataset` (its ``z`` is used) or a bare
    :class:`CurveSet` with ``z`` passed separately. The optional flags mark
    test points where any block fell back to its training mean.
    """
    if isinstance(test, Dataset):
        curves = test.curves
        if z is None:
            z = test.z
    else:
        curves = test
    if not curves.grid.same_as(model.grid):
        raise DimensionError("test curves are on a different grid than the training curves")
    preds = []
    flags = np.zeros(curves.n, dtype=bool)
    for lf in model.locals:
        p, dead = _predict_local(lf.model, model.kind, curves, z)
        preds.append(p)
        flags |= dead
    out = np.mean(np.stack(preds), axis=0)
    return (out, flags) if return_flags else out


def fitted_global_train(model: GlobalModel) -> np.ndarray:
    """Training fitted values, each taken from the block that holds the point."""
    out = np.empty(model.partition.n_total)
    for lf in model.locals:
        out[lf.indices] = lf.fitted
    return out


def prediction_interval(model: GlobalModel, point_predictions):
    """``(lower, upper)`` with constant half-width ``gamma * sigma``."""
    p = np.asarray(point_predictions, dtype=float)
    hw = model.gamma * model.sigma
    return p - hw, p + hw
