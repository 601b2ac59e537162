"""Assembly of the two benchmark problems as space-time systems.

A problem bundles the spatial grid, temporal mesh, assembled right-hand
side (source samples plus the initial-condition lift) and, when known, a
sampler for the exact solution at the grid points.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytic import exact_solution_1d, manufactured_2d
from .l1disc import initial_lift
from .mesh import SpatialGrid, TemporalMesh, make_graded_mesh, make_uniform_mesh

__all__ = ["Problem", "heat1d", "heat2d"]

FINAL_TIME = 1.0
DOMAIN_LENGTH = np.pi


@dataclass(frozen=True)
class Problem:
    name: str
    grid: SpatialGrid
    mesh: TemporalMesh
    delta: float
    rhs: np.ndarray            # (M, N) or (M, N, N), lift included
    exact: np.ndarray | None   # matching exact solution samples at t_1..t_M


def _make_mesh(M: int, delta: float, mesh_type: str) -> TemporalMesh:
    if mesh_type == "graded":
        return make_graded_mesh(FINAL_TIME, M, delta)
    if mesh_type == "uniform":
        return make_uniform_mesh(FINAL_TIME, M)
    raise ValueError(f"unknown mesh type {mesh_type!r}")


def heat1d(delta: float, N: int, M: int, mesh_type: str = "graded") -> Problem:
    """1D problem on (0, pi) x (0, 1]: f = 0, g(x) = sin x."""
    grid = SpatialGrid(dim=1, L=DOMAIN_LENGTH, N=N)
    mesh = _make_mesh(M, delta, mesh_type)
    x = grid.interior_coords()
    g = np.sin(x)
    rhs = initial_lift(mesh, delta, g)
    exact = exact_solution_1d(x[None, :], mesh.t[1:, None], delta)
    return Problem("heat1d", grid, mesh, delta, rhs, exact)


def heat2d(delta: float, N: int, M: int, mesh_type: str = "graded") -> Problem:
    """2D manufactured problem on (0, pi)^2 x (0, 1]: zero initial data."""
    grid = SpatialGrid(dim=2, L=DOMAIN_LENGTH, N=N)
    mesh = _make_mesh(M, delta, mesh_type)
    x = grid.interior_coords()
    X, Y = np.meshgrid(x, x, indexing="ij")
    u, f = manufactured_2d(X[None, :, :], Y[None, :, :], mesh.t[1:, None, None], delta)
    # zero initial condition: the lift vanishes
    return Problem("heat2d", grid, mesh, delta, f, u)
