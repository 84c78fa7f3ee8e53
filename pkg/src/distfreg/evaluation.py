"""Point, coefficient and interval accuracy criteria."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, NamedTuple, Optional

import numpy as np

from .errors import ConfigurationError, DimensionError

__all__ = [
    "PointMetrics",
    "CoefMetrics",
    "MetricsReport",
    "point_metrics",
    "f_norm",
    "coef_metrics",
    "ecp",
    "interval_score",
    "METRIC_NAMES",
]

# closed vocabulary used in result rows
METRIC_NAMES = (
    "rmse", "re", "mae",
    "rmsfe", "rfe", "mafe",
    "f_norm", "bias_sq", "st_dev",
    "ecp_train", "ecp_test", "is_train", "is_test",
)

_NEAR_ZERO = 1e-8


def _pair(a, b, names=("observed", "fitted")):
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.size != b.size:
        raise DimensionError(f"{names[0]} has length {a.size}, {names[1]} has length {b.size}")
    if a.size == 0:
        raise DimensionError("need at least one observation")
    return a, b


class PointMetrics(NamedTuple):
    rmse: float
    re: float
    mae: float
    re_flag: bool  # some |observed| < 1e-8, so RE is unreliable


def point_metrics(observed, fitted) -> PointMetrics:
    """RMSE, relative error and MAE.

    RE is ``mean |(y - yhat) / y|`` with no guard against zeros; ``re_flag``
    is set when any ``|y| < 1e-8``.

    Examples
    --------
    >>> point_metrics([1.0, 2.0], [0.0, 4.0])[:3]
    (1.5811388300841898, 1.0, 1.5)
    """
    y, yhat = _pair(observed, fitted)
    err = y - yhat
    flag = bool(np.any(np.abs(y) < _NEAR_ZERO))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        re = float(np.mean(np.abs(err / y)))
    return PointMetrics(
        rmse=float(np.sqrt(np.mean(err * err))),
        re=re,
        mae=float(np.mean(np.abs(err))),
        re_flag=flag,
    )


def f_norm(beta_true, beta_hat) -> float:
    """Grid-averaged squared error of one coefficient estimate."""
    b, bh = _pair(beta_true, beta_hat, ("beta_true", "beta_hat"))
    return float(np.mean((b - bh) ** 2))


class CoefMetrics(NamedTuple):
    f_norm: float
    bias_sq: float
    st_dev: float


def coef_metrics(beta_true, beta_hats) -> CoefMetrics:
    """Mean F.Norm, squared bias and sampling SD of coefficient estimates over replications.

    Parameters
    ----------
    beta_true : array_like, shape (M,)
    beta_hats : array_like, shape (R, M)
        One estimate per replication, ``R >= 2``.
    """
    beta = np.asarray(beta_true, dtype=float).reshape(-1)
    hats = np.atleast_2d(np.asarray(beta_hats, dtype=float))
    if hats.shape[1] != beta.size:
        raise DimensionError(f"estimates have {hats.shape[1]} grid points, truth has {beta.size}")
    if hats.shape[0] < 2:
        raise ConfigurationError("bias and standard deviation need at least two replications")
    fn = float(np.mean(np.mean((hats - beta) ** 2, axis=1)))
    bias_sq = float(np.mean((hats.mean(axis=0) - beta) ** 2))
    st_dev = float(np.sqrt(np.mean(hats.var(axis=0, ddof=1))))
    return CoefMetrics(fn, bias_sq, st_dev)


def ecp(observed, lower, upper) -> float:
    """Share of observations inside ``[lower, upper]`` (endpoints included)."""
    y, lo = _pair(observed, lower, ("observed", "lower"))
    _, hi = _pair(observed, upper, ("observed", "upper"))
    return float(np.mean((y >= lo) & (y <= hi)))


def interval_score(observed, center, half_width: float, alpha: float) -> float:
    """Mean interval score of symmetric intervals ``center -/+ half_width``.

    Examples
    --------
    >>> interval_score([2.0], [0.0], 1.0, 0.2)
    12.0
    """
    if half_width < 0:
        raise ConfigurationError(f"half_width must be non-negative, got {half_width}")
    if not 0 < alpha < 1:
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha}")
    y, c = _pair(observed, center, ("observed", "center"))
    lo = c - half_width
    hi = c + half_width
    below = np.where(y < lo, lo - y, 0.0)
    above = np.where(y > hi, y - hi, 0.0)
    return float(np.mean(2.0 * half_width + (2.0 / alpha) * (below + above)))


@dataclass
class MetricsReport:
    """All criteria for one fitted cell (one replication, one K).

    ``ecp_test`` and ``is_test`` are keyed by ``(alpha, n_test)``;
    ``ecp_train`` and ``is_train`` by ``alpha``.
    """

    model: str
    K: int
    n_train: int
    rmse: float
    re: float
    mae: float
    rmsfe: Dict[int, float]
    rfe: Dict[int, float]
    mafe: Dict[int, float]
    ecp_train: Dict[float, float]
    is_train: Dict[float, float]
    ecp_test: Dict[tuple, float]
    is_test: Dict[tuple, float]
    mean_block_seconds: float
    f_norm: Optional[float] = None
    re_flag: bool = False
    degenerate_predictions: int = 0
    seed: Optional[int] = None
    beta_hat: Optional[np.ndarray] = field(default=None, repr=False)
