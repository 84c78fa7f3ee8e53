"""Functional-data containers, grid quadrature, the L2 semi-metric and the kernel.

Curves are stored densely as ``(N, M)`` arrays sampled on a shared grid.
Every integral in the package goes through :func:`integrate` (composite
Simpson, with a trapezoid patch on the last interval when the interval count
is odd), so distances, inner products and DGP responses use one quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionError, QuadratureError

__all__ = [
    "Grid",
    "CurveSet",
    "ScalarSample",
    "Dataset",
    "quadrature_weights",
    "integrate",
    "semimetric_l2",
    "pairwise_l2",
    "asym_normal_kernel",
]

_UNIFORM_RTOL = 1e-12
_KERNEL_SCALE = 2.0 / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class Grid:
    """Ordered abscissae ``t_1 < ... < t_M`` shared by a set of curves."""

    points: np.ndarray
    uniform_step: Optional[float] = field(init=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim != 1 or pts.size < 3:
            raise DimensionError(f"a grid needs at least 3 points, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise DimensionError("grid points must be finite")
        steps = np.diff(pts)
        if np.any(steps <= 0):
            raise DimensionError("grid points must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        length = pts[-1] - pts[0]
        step = length / (pts.size - 1)
        uniform = np.max(np.abs(steps - step)) <= _UNIFORM_RTOL * abs(length)
        object.__setattr__(self, "uniform_step", float(step) if uniform else None)

    @classmethod
    def uniform(cls, start: float, stop: float, num: int) -> "Grid":
        return cls(np.linspace(start, stop, num))

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.points[0]), float(self.points[-1])

    def same_as(self, other: "Grid") -> bool:
        return self is other or (
            self.size == other.size and np.array_equal(self.points, other.points)
        )

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return self.same_as(other)

    def __hash__(self):
        return hash((self.size, self.points.tobytes()))


@dataclass(frozen=True)
class CurveSet:
    """``N`` curves evaluated on a common :class:`Grid` (row ``i`` is curve ``i``)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.ndim == 1:
            vals = vals[None, :]
        if vals.ndim != 2 or vals.shape[0] < 1:
            raise DimensionError(f"curve values must be an (N, M) matrix, got {vals.shape}")
        if vals.shape[1] != self.grid.size:
            raise DimensionError(
                f"curves have {vals.shape[1]} columns but the grid has {self.grid.size} points"
            )
        if not np.all(np.isfinite(vals)):
            raise DimensionError("curve values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __len__(self):
        return self.n

    def subset(self, idx) -> "CurveSet":
        return CurveSet(self.grid, self.values[np.asarray(idx)])

    def check_grid(self, other: "CurveSet | Grid") -> None:
        grid = other if isinstance(other, Grid) else other.grid
        if not self.grid.same_as(grid):
            raise DimensionError("curve sets live on different grids")


@dataclass(frozen=True)
class ScalarSample:
    """Scalar responses ``y`` and an optional scalar covariate ``z``."""

    y: np.ndarray
    z: Optional[np.ndarray] = None

    def __post_init__(self):
        y = _finite_vector(self.y, "y")
        object.__setattr__(self, "y", y)
        if self.z is not None:
            z = _finite_vector(self.z, "z")
            if z.size != y.size:
                raise DimensionError(f"z has length {z.size}, y has length {y.size}")
            object.__setattr__(self, "z", z)

    def check_matches(self, curves: CurveSet) -> None:
        if self.y.size != curves.n:
            raise DimensionError(f"{self.y.size} responses for {curves.n} curves")


@dataclass(frozen=True)
class Dataset:
    """Paired functional covariates and scalar sample."""

    curves: CurveSet
    y: np.ndarray
    z: Optional[np.ndarray] = None

    def __post_init__(self):
        sample = ScalarSample(self.y, self.z)
        sample.check_matches(self.curves)
        object.__setattr__(self, "y", sample.y)
        object.__setattr__(self, "z", sample.z)

    @property
    def n(self) -> int:
        return self.curves.n

    @property
    def grid(self) -> Grid:
        return self.curves.grid

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        z = None if self.z is None else self.z[idx]
        return Dataset(self.curves.subset(idx), self.y[idx], z)


def _finite_vector(v, name):
    arr = np.array(v, dtype=float, copy=True).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise DimensionError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


def quadrature_weights(grid: Grid, allow_trapezoid: bool = False) -> np.ndarray:
    """Weights ``w`` such that ``values @ w`` approximates the integral over the grid.

    Uniform grids get composite Simpson weights; with an odd number of
    intervals the last interval falls back to the trapezoid rule. Non-uniform
    grids raise :class:`QuadratureError` unless ``allow_trapezoid`` is set.
    """
    m = grid.size
    if grid.uniform_step is None:
        if not allow_trapezoid:
            raise QuadratureError(
                "Simpson quadrature needs a uniform grid; pass allow_trapezoid=True "
                "to integrate with the trapezoid rule instead"
            )
        steps = np.diff(grid.points)
        w = np.zeros(m)
        w[:-1] += steps / 2
        w[1:] += steps / 2
        return w
    h = grid.uniform_step
    n_simpson = m if (m - 1) % 2 == 0 else m - 1
    w = np.zeros(m)
    inner = np.ones(n_simpson)
    inner[1:-1:2] = 4.0
    inner[2:-1:2] = 2.0
    w[:n_simpson] = inner * (h / 3.0)
    if n_simpson < m:
        w[m - 2] += h / 2.0
        w[m - 1] += h / 2.0
    return w


def integrate(values, grid: Grid, allow_trapezoid: bool = False):
    """Integrate function values sampled on ``grid`` along the last axis.

    Parameters
    ----------
    values : array_like, shape (..., M)
        Function values; a 1-D input returns a float.
    grid : Grid
    allow_trapezoid : bool, default False
        Permit non-uniform grids (trapezoid rule).

    Examples
    --------
    >>> g = Grid.uniform(0.0, 1.0, 101)
    >>> round(integrate(g.points ** 2, g), 12)
    0.333333333333
    """
    vals = np.asarray(values, dtype=float)
    if vals.shape[-1] != grid.size:
        raise DimensionError(f"values have {vals.shape[-1]} samples, grid has {grid.size}")
    w = quadrature_weights(grid, allow_trapezoid)
    out = vals @ w
    return float(out) if np.ndim(out) == 0 else out


def semimetric_l2(x, y, grid: Grid, allow_trapezoid: bool = False) -> float:
    """L2 distance between two sampled curves, ``(int |x - y|^2 dt)^(1/2)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionError(f"curves must be 1-D of equal length, got {x.shape} and {y.shape}")
    d2 = integrate((x - y) ** 2, grid, allow_trapezoid)
    return float(np.sqrt(max(d2, 0.0)))


def pairwise_l2(a: CurveSet, b: Optional[CurveSet] = None, allow_trapezoid: bool = False) -> np.ndarray:
    """Matrix of L2 semi-metric distances between the rows of ``a`` and ``b``.

    Uses the weighted Gram expansion ``|x|^2 + |y|^2 - 2<x, y>``; negative
    round-off is clipped to zero. With ``b`` omitted the result is exactly
    symmetric with a zero diagonal.
    """
    w = quadrature_weights(a.grid, allow_trapezoid)
    xa = a.values
    na = (xa * xa) @ w
    if b is None:
        g = (xa * w) @ xa.T
        d2 = na[:, None] + na[None, :] - 2.0 * g
        d2 = 0.5 * (d2 + d2.T)
        np.fill_diagonal(d2, 0.0)
    else:
        a.check_grid(b)
        xb = b.values
        nb = (xb * xb) @ w
        d2 = na[:, None] + nb[None, :] - 2.0 * ((xa * w) @ xb.T)
    return np.sqrt(np.maximum(d2, 0.0))


def asym_normal_kernel(x):
    """Half-normal kernel: ``2/sqrt(2 pi) exp(-x^2/2)`` for ``x >= 0``, else 0."""
    x = np.asarray(x, dtype=float)
    out = np.where(x >= 0, _KERNEL_SCALE * np.exp(-0.5 * x * x), 0.0)
    return float(out) if out.ndim == 0 else out
