"""Spatial grids and temporal meshes.

The temporal mesh is either uniform or graded, t_m = T*(m/M)**r with
r = (2-delta)/delta, which clusters points near t=0 where solutions of
sub-diffusion problems have an initial layer.  Spatial grids are uniform
with N+1 = 2**L subdivisions so that they coarsen exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TemporalMesh",
    "SpatialGrid",
    "make_graded_mesh",
    "make_uniform_mesh",
    "coarsen_space",
]


@dataclass(frozen=True)
class TemporalMesh:
    """Monotone time points t[0..M] with grading exponent r."""

    T: float
    M: int
    r: float
    t: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.t.setflags(write=False)
        if self.t.shape != (self.M + 1,):
            raise ValueError("time point array has wrong length")
        if self.t[0] != 0.0 or not np.all(np.diff(self.t) > 0.0):
            raise ValueError("time points must start at 0 and increase strictly")

    @property
    def tau(self) -> np.ndarray:
        """Step sizes, tau[j-1] = t[j] - t[j-1] for j = 1..M."""
        return np.diff(self.t)


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid on (0, L)^dim with N interior points per axis."""

    dim: int
    L: float
    N: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if self.N < 1 or (self.N + 1) & self.N != 0:
            raise ValueError("N+1 must be a power of two with N >= 1")
        if self.L <= 0:
            raise ValueError("L must be positive")

    @property
    def h(self) -> float:
        return self.L / (self.N + 1)

    @property
    def npoints(self) -> int:
        """Number of interior points."""
        return self.N**self.dim

    def interior_coords(self) -> np.ndarray:
        """Interior coordinates along one axis, x_n = n*h for n = 1..N."""
        return self.h * np.arange(1, self.N + 1)


def _check_time_args(T: float, M: int) -> None:
    if M < 1:
        raise ValueError("M must be at least 1")
    if T <= 0:
        raise ValueError("final time T must be positive")


def make_graded_mesh(T: float, M: int, delta: float) -> TemporalMesh:
    """Graded mesh t_m = T*(m/M)**r with r = (2-delta)/delta."""
    _check_time_args(T, M)
    if not 0.0 < delta < 1.0:
        raise ValueError("fractional order delta must lie in (0, 1)")
    r = (2.0 - delta) / delta
    m = np.arange(M + 1, dtype=float)
    t = np.empty(M + 1)
    t[0] = 0.0
    # exp/log form keeps (m/M)**r monotone when r is large and m/M tiny
    t[1:] = T * np.exp(r * (np.log(m[1:]) - np.log(M)))
    t[M] = T
    return TemporalMesh(T=T, M=M, r=r, t=t)


def make_uniform_mesh(T: float, M: int) -> TemporalMesh:
    """Uniform mesh t_m = m*T/M."""
    _check_time_args(T, M)
    t = T * np.arange(M + 1, dtype=float) / M
    return TemporalMesh(T=T, M=M, r=1.0, t=t)


def coarsen_space(g: SpatialGrid) -> SpatialGrid:
    """Halve the number of subdivisions; the temporal mesh is untouched."""
    if g.N == 1:
        raise ValueError("grid already coarsest")
    return SpatialGrid(dim=g.dim, L=g.L, N=(g.N + 1) // 2 - 1)
