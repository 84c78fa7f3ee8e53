"""One random 150/65 split of the tecator spectra.

Fits all four estimators for the fat content (moisture as the scalar
covariate of the partial linear model) on the full training set and on
five blocks of 30.

    python3 demos/tecator_split.py
"""

from dataclasses import replace

from distfreg import Dataset, fit_global, fitted_global_train, point_metrics, predict_global
from distfreg.distributed import MODEL_KINDS
from distfreg.harness.config import TECATOR_MODEL_DEFAULTS
from distfreg.harness.tecator import load_tecator, split_tecator, tecator_arrays

curves, contents = tecator_arrays(load_tecator())
tr, te = split_tecator(curves.n, 150, seed=1, rep=0)
y, z = contents["fat"], contents["moisture"]
train = Dataset(curves.subset(tr), y[tr], z[tr])
test = Dataset(curves.subset(te), y[te], z[te])

print(f"{curves.n} spectra on {curves.grid.size} wavelengths; train {train.n}, test {test.n}\n")
print(f"{'model':<12} {'K':>2} {'rmse':>7} {'rmsfe':>7}")
for kind in MODEL_KINDS:
    cfg = replace(TECATOR_MODEL_DEFAULTS, kind=kind)
    for K in (1, 5):
        m = fit_global(train, K, cfg)
        print(
            f"{kind:<12} {K:>2} {point_metrics(train.y, fitted_global_train(m)).rmse:7.3f}"
            f" {point_metrics(test.y, predict_global(m, test)).rmse:7.3f}"
        )
