"""Distributed scalar-on-function regression.

Functional linear (B-spline and FPCA), kernel and partial linear estimators,
a divide-and-conquer layer that fits them on equal data blocks and averages
predictions and interval constants, simulation designs, accuracy criteria,
and an experiment harness.
"""

from .basisexp import BSplineBasis, FlmBsplineFit, build_bspline, compute_u_matrix, fit_flm_bspline, predict_flm, project_curves
from .distributed import (
    MODEL_KINDS,
    BlockPartition,
    GlobalModel,
    LocalFit,
    ModelConfig,
    calibrate_gamma,
    fit_global,
    fitted_global_train,
    partition,
    predict_global,
    prediction_interval,
)
from .dgp import SimDataset, gen_flm, gen_fnpm, gen_fplm, stream_seed
from .evaluation import MetricsReport, coef_metrics, ecp, f_norm, interval_score, point_metrics
from .fdcore import CurveSet, Dataset, Grid, ScalarSample, asym_normal_kernel, integrate, pairwise_l2, quadrature_weights, semimetric_l2
from .fpca import FlmFpcaFit, FpcaFit, fit_flm_fpca, fit_fpca
from .kernelmodels import FplmFit, NwFit, fit_fnpm, fit_fplm, nw_predict, nw_weights, predict_fplm, select_bandwidth

__version__ = "0.1.0"

__all__ = [
    "BSplineBasis",
    "FlmBsplineFit",
    "build_bspline",
    "compute_u_matrix",
    "fit_flm_bspline",
    "predict_flm",
    "project_curves",
    "MODEL_KINDS",
    "BlockPartition",
    "GlobalModel",
    "LocalFit",
    "ModelConfig",
    "calibrate_gamma",
    "fit_global",
    "fitted_global_train",
    "partition",
    "predict_global",
    "prediction_interval",
    "SimDataset",
    "gen_flm",
    "gen_fnpm",
    "gen_fplm",
    "stream_seed",
    "MetricsReport",
    "coef_metrics",
    "ecp",
    "f_norm",
    "interval_score",
    "point_metrics",
    "CurveSet",
    "Dataset",
    "Grid",
    "ScalarSample",
    "asym_normal_kernel",
    "integrate",
    "pairwise_l2",
    "quadrature_weights",
    "semimetric_l2",
    "FlmFpcaFit",
    "FpcaFit",
    "fit_flm_fpca",
    "fit_fpca",
    "FplmFit",
    "NwFit",
    "fit_fnpm",
    "fit_fplm",
    "nw_predict",
    "nw_weights",
    "predict_fplm",
    "select_bandwidth",
]
