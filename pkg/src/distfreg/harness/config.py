"""Experiment configuration, presets and the key=value config file format."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

from ..distributed import MODEL_KINDS, ModelConfig
from ..errors import ConfigurationError

__all__ = [
    "ExperimentConfig",
    "TecatorConfig",
    "PROFILES",
    "THREADS_ENV",
    "default_threads",
    "read_config_file",
    "TECATOR_PAIRINGS",
    "TECATOR_PROFILES",
    "TECATOR_MODEL_DEFAULTS",
]

THREADS_ENV = "DISTFREG_THREADS"

# centered FPCA fit with a response offset on five components
TECATOR_MODEL_DEFAULTS = ModelConfig(num_components=5, fpca_intercept=True)

# response -> scalar covariate used by the partial linear model
TECATOR_PAIRINGS = {"fat": "moisture", "moisture": "protein", "protein": "fat"}


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigurationError(f"{THREADS_ENV} must be >= 1, got {n}")
    return n


def _check_alphas(alphas):
    for a in alphas:
        if not 0 < a < 1:
            raise ConfigurationError(f"alpha must lie in (0, 1), got {a}")


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo study: a model, block counts, test sizes and levels.

    Test sets of every size in ``n_test`` are nested prefixes of one draw of
    ``max(n_test)`` observations per replication.
    """

    model: str = "flm-bspline"
    n_train: int = 2000
    n_test: Tuple[int, ...] = (200, 400, 800)
    k: Tuple[int, ...] = (1, 2, 5, 10, 20, 40)
    reps: int = 200
    alpha: Tuple[float, ...] = (0.05, 0.2)
    seed: int = 20240101
    model_config: ModelConfig = field(default_factory=ModelConfig)
    threads: int = 1
    timing: bool = True

    def __post_init__(self):
        if self.model not in MODEL_KINDS:
            raise ConfigurationError(f"unknown model {self.model!r}; choose from {MODEL_KINDS}")
        if self.model_config.kind != self.model:
            object.__setattr__(self, "model_config", replace(self.model_config, kind=self.model))
        object.__setattr__(self, "n_test", tuple(int(v) for v in self.n_test))
        object.__setattr__(self, "k", tuple(int(v) for v in self.k))
        object.__setattr__(self, "alpha", tuple(float(v) for v in self.alpha))
        if self.n_train < 1:
            raise ConfigurationError("n_train must be positive")
        if not self.n_test or min(self.n_test) < 1:
            raise ConfigurationError("n_test needs at least one positive size")
        if not self.k:
            raise ConfigurationError("need at least one block count")
        for K in self.k:
            if K < 1 or self.n_train % K:
                raise ConfigurationError(f"K={K} does not divide n_train={self.n_train}")
        if self.reps < 1:
            raise ConfigurationError("reps must be >= 1")
        if not self.alpha:
            raise ConfigurationError("need at least one alpha")
        _check_alphas(self.alpha)
        if self.threads < 1:
            raise ConfigurationError("threads must be >= 1")


@dataclass(frozen=True)
class TecatorConfig:
    """Repeated random 150/65 splits of the tecator spectra."""

    response: str = "fat"
    covariate: Optional[str] = None
    models: Tuple[str, ...] = MODEL_KINDS
    k: Tuple[int, ...] = (1, 2, 3, 5)
    reps: int = 200
    alpha: Tuple[float, ...] = (0.05, 0.2)
    seed: int = 20240101
    n_train: int = 150
    model_config: ModelConfig = field(default_factory=lambda: TECATOR_MODEL_DEFAULTS)
    data_path: Optional[str] = None
    threads: int = 1
    timing: bool = True

    def __post_init__(self):
        if self.response not in TECATOR_PAIRINGS:
            raise ConfigurationError(f"response must be one of {tuple(TECATOR_PAIRINGS)}, got {self.response!r}")
        cov = self.covariate or TECATOR_PAIRINGS[self.response]
        if cov not in TECATOR_PAIRINGS or cov == self.response:
            raise ConfigurationError(f"invalid covariate {cov!r} for response {self.response!r}")
        object.__setattr__(self, "covariate", cov)
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "k", tuple(int(v) for v in self.k))
        object.__setattr__(self, "alpha", tuple(float(v) for v in self.alpha))
        for m in self.models:
            if m not in MODEL_KINDS:
                raise ConfigurationError(f"unknown model {m!r}")
        if self.reps < 1:
            raise ConfigurationError("reps must be >= 1")
        _check_alphas(self.alpha)
        if self.threads < 1:
            raise ConfigurationError("threads must be >= 1")


# CLI presets; explicit flags override them
PROFILES = {
    "smoke": {"n_train": 200, "n_test": (100,), "k": (1, 2, 5), "reps": 3},
    "paper": {"n_train": 2000, "n_test": (200, 400, 800), "k": (1, 2, 5, 10, 20, 40), "reps": 200},
}
TECATOR_PROFILES = {
    "smoke": {"k": (1, 5), "reps": 3},
    "paper": {"k": (1, 2, 3, 5), "reps": 200},
}


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment. Keys use flag names (``n-train`` or ``n_train``)."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected key=value, got {raw.rstrip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if not key:
                raise ConfigurationError(f"{path}:{lineno}: empty key")
            out[key.replace("-", "_")] = value
    return out
