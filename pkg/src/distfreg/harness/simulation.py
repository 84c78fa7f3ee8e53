"""Monte Carlo driver: replications x block counts, summarized into result rows."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence

import numpy as np

from ..dgp import gen_flm, gen_fnpm, gen_fplm, stream_seed
from ..distributed import GlobalModel, fit_global, fitted_global_train, predict_global
from ..errors import DistFregError, ExperimentError
from ..evaluation import MetricsReport, coef_metrics, ecp, f_norm, interval_score, point_metrics
from ..fdcore import Dataset
from .config import ExperimentConfig
from .io import ResultRow

__all__ = ["DGP_FOR_MODEL", "evaluate_model", "run_replication", "summarize", "run_simulation"]

# both linear-model variants see the same simulated samples
DGP_FOR_MODEL = {
    "flm-bspline": ("flm", gen_flm),
    "flm-fpca": ("flm", gen_flm),
    "fnpm": ("fnpm", gen_fnpm),
    "fplm": ("fplm", gen_fplm),
}

TRAIN_ROLE = 0
TEST_ROLE = 1


def evaluate_model(
    model: GlobalModel,
    train: Dataset,
    test: Dataset,
    alphas: Sequence[float],
    n_tests: Sequence[int],
    beta_true: Optional[np.ndarray] = None,
) -> MetricsReport:
    """Every point and interval criterion for one fitted global model.

    Test criteria for each size in ``n_tests`` use the first ``n`` test rows.
    """
    fitted = fitted_global_train(model)
    pm = point_metrics(train.y, fitted)
    pred, flags = predict_global(model, test, return_flags=True)
    rmsfe, rfe, mafe = {}, {}, {}
    for nt in n_tests:
        q = point_metrics(test.y[:nt], pred[:nt])
        rmsfe[nt], rfe[nt], mafe[nt] = q.rmse, q.re, q.mae
    ecp_tr, is_tr, ecp_te, is_te = {}, {}, {}, {}
    for a in alphas:
        m = model if a == model.alpha else model.with_alpha(a)
        hw = m.gamma * m.sigma
        ecp_tr[a] = ecp(train.y, fitted - hw, fitted + hw)
        is_tr[a] = interval_score(train.y, fitted, hw, a)
        for nt in n_tests:
            y, p = test.y[:nt], pred[:nt]
            ecp_te[(a, nt)] = ecp(y, p - hw, p + hw)
            is_te[(a, nt)] = interval_score(y, p, hw, a)
    fn = None
    if beta_true is not None and model.beta_hat_global is not None:
        fn = f_norm(beta_true, model.beta_hat_global)
    return MetricsReport(
        model=model.kind,
        K=model.K,
        n_train=train.n,
        rmse=pm.rmse,
        re=pm.re,
        mae=pm.mae,
        rmsfe=rmsfe,
        rfe=rfe,
        mafe=mafe,
        ecp_train=ecp_tr,
        is_train=is_tr,
        ecp_test=ecp_te,
        is_test=is_te,
        mean_block_seconds=model.mean_block_seconds,
        f_norm=fn,
        re_flag=pm.re_flag,
        degenerate_predictions=int(flags[: max(n_tests)].sum()),
        beta_hat=model.beta_hat_global,
    )


def simulate_data(cfg: ExperimentConfig, rep: int):
    """Train and test samples of replication ``rep``."""
    dgp_name, gen = DGP_FOR_MODEL[cfg.model]
    train = gen(cfg.n_train, stream_seed(cfg.seed, dgp_name, rep, TRAIN_ROLE))
    test = gen(max(cfg.n_test), stream_seed(cfg.seed, dgp_name, rep, TEST_ROLE))
    return train, test


def run_replication(cfg: ExperimentConfig, rep: int) -> List[MetricsReport]:
    """One replication: every K in ``cfg.k`` fit on the same samples."""
    train, test = simulate_data(cfg, rep)
    beta_true = train.truth if train.kind == "flm" else None
    out = []
    for K in cfg.k:
        try:
            model = fit_global(train.dataset, K, cfg.model_config, alpha=cfg.alpha[0])
            out.append(evaluate_model(model, train.dataset, test.dataset, cfg.alpha, cfg.n_test, beta_true))
        except DistFregError as exc:
            raise ExperimentError(rep, K, exc) from exc
    return out


def _mean_se(values):
    v = np.asarray(values, dtype=float)
    mean = float(np.mean(v))
    se = float(np.std(v, ddof=1) / np.sqrt(v.size)) if v.size >= 2 else None
    return mean, se


def _jackknife_se(stat: Callable, data: np.ndarray) -> Optional[float]:
    r = data.shape[0]
    if r < 3:
        return None
    loo = np.array([stat(np.delete(data, i, axis=0)) for i in range(r)])
    return float(np.sqrt((r - 1) / r * np.sum((loo - loo.mean()) ** 2)))


def summarize(
    reports: Sequence[Sequence[MetricsReport]],
    experiment: str,
    alphas: Sequence[float],
    n_tests: Sequence[int],
    beta_true: Optional[np.ndarray] = None,
    suppress_re: bool = False,
    response: str = "",
    covariate: str = "",
) -> List[ResultRow]:
    """Collapse ``reports[rep][k_index]`` into rows of replication means and MC standard errors."""
    R = len(reports)
    rows = []
    for j in range(len(reports[0])):
        cell = [reports[r][j] for r in range(R)]
        first = cell[0]
        K = first.K
        secs = float(np.mean([c.mean_block_seconds for c in cell]))
        base = dict(
            experiment=experiment, model=first.model, K=K, block_size=first.n_train // K,
            n_train=first.n_train, reps=R, mean_block_seconds=secs,
            response=response, covariate=covariate,
        )
        fallbacks = sum(c.degenerate_predictions for c in cell)

        def add(metric, vals, n_test=None, alpha=None, flag=""):
            mean, se = _mean_se(vals)
            rows.append(ResultRow(metric=metric, value=mean, mc_se=se, n_test=n_test, alpha=alpha, flag=flag, **base))

        re_flag = "suppressed" if suppress_re else ("near_zero_response" if any(c.re_flag for c in cell) else "")
        add("rmse", [c.rmse for c in cell])
        add("re", [c.re for c in cell], flag=re_flag)
        add("mae", [c.mae for c in cell])
        test_flag = f"fallback={fallbacks}" if fallbacks else ""
        for nt in n_tests:
            add("rmsfe", [c.rmsfe[nt] for c in cell], n_test=nt, flag=test_flag)
            add("rfe", [c.rfe[nt] for c in cell], n_test=nt, flag="suppressed" if suppress_re else test_flag)
            add("mafe", [c.mafe[nt] for c in cell], n_test=nt, flag=test_flag)
        if beta_true is not None and first.f_norm is not None:
            add("f_norm", [c.f_norm for c in cell])
            if R >= 2:
                hats = np.stack([c.beta_hat for c in cell])
                cm = coef_metrics(beta_true, hats)
                rows.append(ResultRow(
                    metric="bias_sq", value=cm.bias_sq, n_test=None, alpha=None,
                    mc_se=_jackknife_se(lambda h: coef_metrics(beta_true, h).bias_sq, hats), **base))
                rows.append(ResultRow(
                    metric="st_dev", value=cm.st_dev, n_test=None, alpha=None,
                    mc_se=_jackknife_se(lambda h: coef_metrics(beta_true, h).st_dev, hats), **base))
        for a in alphas:
            add("ecp_train", [c.ecp_train[a] for c in cell], alpha=a)
            add("is_train", [c.is_train[a] for c in cell], alpha=a)
            for nt in n_tests:
                add("ecp_test", [c.ecp_test[(a, nt)] for c in cell], n_test=nt, alpha=a, flag=test_flag)
                add("is_test", [c.is_test[(a, nt)] for c in cell], n_test=nt, alpha=a, flag=test_flag)
    return rows


def run_simulation(cfg: ExperimentConfig, return_reports: bool = False):
    """Run every replication and summarize.

    Replications run on ``cfg.threads`` workers; each owns its seed stream
    and results are merged in replication order, so the output does not
    depend on the worker count.
    """
    reps = range(cfg.reps)
    if cfg.threads > 1 and cfg.reps > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            reports = list(pool.map(lambda r: run_replication(cfg, r), reps))
    else:
        reports = [run_replication(cfg, r) for r in reps]
    beta_true = None
    if DGP_FOR_MODEL[cfg.model][0] == "flm":
        beta_true = gen_flm(1, 0).truth
    rows = summarize(
        reports, "simulate", cfg.alpha, cfg.n_test, beta_true,
        suppress_re=cfg.model in ("flm-bspline", "flm-fpca"),
    )
    if not cfg.timing:
        rows = [r.__class__(**{**r.__dict__, "mean_block_seconds": None}) for r in rows]
    return (rows, reports) if return_reports else rows
