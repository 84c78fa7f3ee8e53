"""Partial linear kernel model: small blocks fit the training data too well.

With N_train = 2000 split into 40 blocks of 50, each block's kernel fit
hugs its own responses, so the in-sample error and the calibrated interval
width shrink. Test error does not improve, and the intervals under-cover.

    python3 demos/kernel_overfitting.py
"""

from distfreg import ecp, fit_global, fitted_global_train, point_metrics, predict_global, prediction_interval
from distfreg.dgp import gen_fplm, stream_seed

train = gen_fplm(2000, stream_seed(3, "fplm", 0, 0)).dataset
test = gen_fplm(200, stream_seed(3, "fplm", 0, 1)).dataset

print(f"{'K':>3} {'rmse':>7} {'rmsfe':>7} {'ecp_tr':>7} {'ecp_te':>7} {'beta_nf':>8} {'sec/block':>10}")
for K in (1, 5, 40):
    model = fit_global(train, K, "fplm", alpha=0.05)
    fitted = fitted_global_train(model)
    pred = predict_global(model, test)
    lo, hi = prediction_interval(model, fitted)
    tlo, thi = prediction_interval(model, pred)
    beta = sum(lf.model.beta_nf for lf in model.locals) / K
    print(
        f"{K:>3} {point_metrics(train.y, fitted).rmse:7.3f} {point_metrics(test.y, pred).rmse:7.3f}"
        f" {ecp(train.y, lo, hi):7.3f} {ecp(test.y, tlo, thi):7.3f} {beta:8.3f} {model.mean_block_seconds:10.4f}"
    )
