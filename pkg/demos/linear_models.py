"""Functional linear model fit on one machine and on K blocks.

Draws one training and one test sample from the linear design, then fits
both the B-spline and the FPCA estimator with K = 1 and K = 10 blocks.
The response error barely moves with K; the coefficient error is where the
two estimators differ.

    python3 demos/linear_models.py
"""

import numpy as np

from distfreg import f_norm, fit_global, fitted_global_train, point_metrics, predict_global
from distfreg.dgp import gen_flm, stream_seed

train = gen_flm(2000, stream_seed(7, "flm", 0, 0))
test = gen_flm(800, stream_seed(7, "flm", 0, 1))

print(f"{'model':<12} {'K':>3} {'rmse':>8} {'rmsfe':>8} {'f_norm':>8}")
for kind in ("flm-bspline", "flm-fpca"):
    for K in (1, 10):
        model = fit_global(train.dataset, K, kind)
        fit = point_metrics(train.y, fitted_global_train(model))
        pred = point_metrics(test.y, predict_global(model, test.dataset))
        fn = f_norm(train.truth, model.beta_hat_global)
        print(f"{kind:<12} {K:>3} {fit.rmse:8.4f} {pred.rmse:8.4f} {fn:8.4f}")

# the averaged coefficient function against the truth at a few grid points
model = fit_global(train.dataset, 10, "flm-fpca")
t = train.curves.grid.points
idx = np.arange(0, t.size, 20)
print("\nt        beta    beta_hat (fpca, K=10)")
for i in idx:
    print(f"{t[i]:.2f}  {train.truth[i]:7.3f}  {model.beta_hat_global[i]:7.3f}")
