"""Simulation designs for the linear, non-parametric and partial linear models.

Seeds are :class:`numpy.random.SeedSequence` objects. :func:`stream_seed`
keys them by ``(experiment, replication, role)`` so every replication and
every train/test draw owns an independent stream, whatever order the
replications run in.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .fdcore import CurveSet, Dataset, Grid, integrate

__all__ = [
    "SimDataset",
    "stream_seed",
    "experiment_key",
    "flm_beta",
    "flm_grid",
    "fnpm_grid",
    "gen_flm",
    "gen_fnpm",
    "gen_fplm",
    "fnpm_regression",
    "FLM_COMPONENTS",
    "BETA_NF",
]

FLM_COMPONENTS = 5
BETA_NF = 0.5
FNPM_NOISE_VAR = 2.0

SeedLike = Union[int, np.random.SeedSequence]


@dataclass(frozen=True)
class SimDataset:
    """One simulated sample.

    Attributes
    ----------
    curves : CurveSet
    y : ndarray
    z : ndarray or None
        Scalar covariate (partial linear design only).
    truth : ndarray
        True coefficient function on the grid (linear design) or the true
        regression values ``m(X_i)`` (kernel designs).
    beta_nf : float or None
    seed : SeedSequence
    kind : str
    """

    curves: CurveSet
    y: np.ndarray
    z: Optional[np.ndarray]
    truth: np.ndarray
    beta_nf: Optional[float]
    seed: np.random.SeedSequence
    kind: str

    @property
    def dataset(self) -> Dataset:
        return Dataset(self.curves, self.y, self.z)

    @property
    def n(self) -> int:
        return self.curves.n


def experiment_key(name: str) -> int:
    """Stable 32-bit integer for an experiment label."""
    return zlib.crc32(name.encode("utf-8"))


def stream_seed(seed: int, experiment: Union[int, str] = 0, rep: int = 0, role: int = 0) -> np.random.SeedSequence:
    """Independent seed for one (experiment, replication, role) cell."""
    if isinstance(experiment, str):
        experiment = experiment_key(experiment)
    return np.random.SeedSequence(seed, spawn_key=(int(experiment), int(rep), int(role)))


def _as_seedseq(seed: SeedLike) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _children(seed: np.random.SeedSequence, count: int):
    # rebuild the children from the spawn key so the parent's counter is untouched
    return [
        np.random.default_rng(
            np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + (i,))
        )
        for i in range(count)
    ]


def flm_grid() -> Grid:
    return Grid.uniform(0.0, 1.0, 101)


def fnpm_grid() -> Grid:
    return Grid.uniform(-1.0, 1.0, 101)


def flm_beta(t):
    return 2.0 * np.sin(2.0 * np.pi * np.asarray(t, dtype=float))


def _flm_components(t: np.ndarray) -> np.ndarray:
    j = np.arange(1, FLM_COMPONENTS + 1)[:, None]
    return np.sin(j * np.pi * t) - np.cos(j * np.pi * t)


def gen_flm(N: int, seed: SeedLike = 0) -> SimDataset:
    """Linear design on [0, 1] with step 0.01.

    ``X_i = sum_j k_ij v_j`` with ``v_j(t) = sin(j pi t) - cos(j pi t)``,
    ``k_ij ~ N(0, 4 j^-1.5)``; ``beta(t) = 2 sin(2 pi t)``;
    ``Y_i = int beta X_i dt + e_i`` with standard normal errors.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    ss = _as_seedseq(seed)
    rng_k, rng_e = _children(ss, 2)
    grid = flm_grid()
    t = grid.points
    sd = 2.0 * np.arange(1, FLM_COMPONENTS + 1) ** -0.75
    k = rng_k.standard_normal((N, FLM_COMPONENTS)) * sd
    x = k @ _flm_components(t)
    beta = flm_beta(t)
    signal = integrate(x * beta, grid)
    y = signal + rng_e.standard_normal(N)
    return SimDataset(CurveSet(grid, x), y, None, beta, None, ss, "flm")


def fnpm_regression(omega, a, grid: Grid) -> np.ndarray:
    """``m(X) = int |X'(t)| (1 - cos(pi t)) dt`` from the analytic derivative."""
    t = grid.points
    omega = np.asarray(omega, dtype=float)[:, None]
    a = np.asarray(a, dtype=float)[:, None]
    deriv = -omega * np.sin(omega * t) + (a + 2.0 * np.pi)
    return integrate(np.abs(deriv) * (1.0 - np.cos(np.pi * t)), grid)


def _kernel_design(N: int, ss: np.random.SeedSequence):
    rng_x, rng_e, rng_z = _children(ss, 3)
    grid = fnpm_grid()
    t = grid.points
    a = rng_x.uniform(0.0, 1.0, N)
    b = rng_x.uniform(0.0, 1.0, N)
    omega = rng_x.uniform(0.0, 2.0 * np.pi, N)
    x = np.cos(omega[:, None] * t) + (a[:, None] + 2.0 * np.pi) * t + b[:, None]
    m = fnpm_regression(omega, a, grid)
    eps = rng_e.standard_normal(N) * np.sqrt(FNPM_NOISE_VAR)
    return grid, x, m, eps, rng_z


def gen_fnpm(N: int, seed: SeedLike = 0) -> SimDataset:
    """Non-parametric design on [-1, 1] (101 points).

    ``X_i(t) = cos(w_i t) + (a_i + 2 pi) t + b_i`` with ``a_i, b_i ~ U[0, 1]``,
    ``w_i ~ U[0, 2 pi]``; ``Y_i = m(X_i) + e_i`` with ``e_i ~ N(0, 2)``
    (variance 2).
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    ss = _as_seedseq(seed)
    grid, x, m, eps, _ = _kernel_design(N, ss)
    return SimDataset(CurveSet(grid, x), m + eps, None, m, None, ss, "fnpm")


def gen_fplm(N: int, seed: SeedLike = 0, beta_nf: float = BETA_NF) -> SimDataset:
    """Partial linear design: the non-parametric design plus ``beta_nf * Z``, ``Z ~ N(0, 1)``.

    Curves, ``m`` and errors are drawn from the same sub-streams as
    :func:`gen_fnpm`, so ``beta_nf=0`` reproduces its responses exactly.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    ss = _as_seedseq(seed)
    grid, x, m, eps, rng_z = _kernel_design(N, ss)
    z = rng_z.standard_normal(N)
    y = (m + eps) + beta_nf * z
    return SimDataset(CurveSet(grid, x), y, z, m, float(beta_nf), ss, "fplm")
