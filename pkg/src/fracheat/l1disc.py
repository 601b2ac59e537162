"""L1/Petrov-Galerkin discretization of the Caputo derivative in time.

Discretizing D_t^delta with piecewise linear trial functions and Dirac test
functions at the time points yields a dense lower triangular operator R
acting on the unknowns u_1..u_M, plus a right-hand-side contribution
("initial lift") carrying the initial condition u_0.

Entries are R[m, m-k] = d(m, k+1) - d(m, k) with d(m, 0) = 0,

    d(m, 1) = tau_m**(-delta) / Gamma(2-delta),
    d(m, k) = [(t_m - t_{m-k})**(1-delta) - (t_m - t_{m-k+1})**(1-delta)]
              / (Gamma(2-delta) * tau_{m-k+1}),   k = 2..m,

using the step convention tau_j = t_j - t_{j-1}.
"""
from __future__ import annotations

import csv
import math

import numpy as np

from .mesh import TemporalMesh

__all__ = [
    "d_coeff",
    "d_diag",
    "assemble_dense_R",
    "r_entries",
    "initial_lift",
    "apply_caputo_dense",
    "dump_r_csv",
]


def _pow_diff(b: np.ndarray, tau: np.ndarray, p: float) -> np.ndarray:
    """(b + tau)**p - b**p, stable for tau << b.

    Requires b >= 0 and tau > 0 elementwise.  Direct subtraction loses all
    significant digits once tau/b approaches machine epsilon; the
    expm1/log1p form keeps full relative accuracy of the difference.
    """
    b = np.asarray(b, dtype=float)
    tau = np.broadcast_to(np.asarray(tau, dtype=float), b.shape)
    out = np.empty(b.shape)
    pos = b > 0.0
    out[pos] = b[pos] ** p * np.expm1(p * np.log1p(tau[pos] / b[pos]))
    out[~pos] = tau[~pos] ** p
    return out


def d_coeff(mesh: TemporalMesh, delta: float, m: int, k: int) -> float:
    """Coefficient d(m, k) for 1 <= k <= m <= M."""
    if not (1 <= k <= m <= mesh.M):
        raise IndexError(f"d({m},{k}) out of range for M={mesh.M}")
    t, tau = mesh.t, mesh.tau
    g = math.gamma(2.0 - delta)
    if k == 1:
        return tau[m - 1] ** (-delta) / g
    # (t_m - t_{m-k})**p - (t_m - t_{m-k+1})**p with base b = t_m - t_{m-k+1}
    p = 1.0 - delta
    b = np.atleast_1d(t[m] - t[m - k + 1])
    num = _pow_diff(b, tau[m - k], p)
    return float(num[0]) / (g * tau[m - k])


def d_diag(mesh: TemporalMesh, delta: float) -> np.ndarray:
    """Vector of d(m, m) for m = 1..M (row sums of R)."""
    t, tau = mesh.t, mesh.tau
    g = math.gamma(2.0 - delta)
    p = 1.0 - delta
    out = np.empty(mesh.M)
    out[0] = tau[0] ** (-delta) / g
    if mesh.M > 1:
        tm = t[2:]
        out[1:] = _pow_diff(tm - t[1], np.full(mesh.M - 1, tau[0]), p) / (g * tau[0])
    return out


def r_entries(mesh: TemporalMesh, delta: float, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Exact entries R[m, j] for 1-based index arrays rows (m) and cols (j).

    Vectorized over the full rows x cols block; entries with j > m are zero.
    """
    rows = np.asarray(rows, dtype=int)
    cols = np.asarray(cols, dtype=int)
    t, tau = mesh.t, mesh.tau
    p = 1.0 - delta
    g = math.gamma(2.0 - delta)
    # padded so that j+1 = M+1 is addressable; clip keeps those entries zero
    te = np.append(t, t[-1] + 1.0)
    taue = np.append(tau, 1.0)
    tm = t[rows][:, None]

    def first_diff(j):
        """(t_m - t_{j-1})**p - (t_m - t_j)**p, divided by tau_j; zero if t_j >= t_m."""
        b = tm - te[j]
        res = np.zeros_like(b)
        pos = b > 0.0
        tj = np.broadcast_to(taue[j - 1], b.shape)
        res[pos] = _pow_diff(b[pos], tj[pos], p)
        # j == m: base is zero, contribution tau_j**p
        zero = (b == 0.0)
        res[zero] = tj[zero] ** p
        return res / taue[j - 1]

    d_hi = first_diff(cols)          # d(m, m-j+1) * Gamma(2-delta)
    d_lo = first_diff(cols + 1)      # d(m, m-j)   * Gamma(2-delta)
    out = (d_hi - d_lo) / g
    out[tm - t[cols] < 0.0] = 0.0
    return out


def assemble_dense_R(mesh: TemporalMesh, delta: float) -> np.ndarray:
    """Dense lower triangular M x M operator of L1 coefficients."""
    idx = np.arange(1, mesh.M + 1)
    return r_entries(mesh, delta, idx, idx)


def initial_lift(mesh: TemporalMesh, delta: float, g: np.ndarray) -> np.ndarray:
    """Right-hand-side contribution of the initial condition.

    Restricting R to the unknowns u_1..u_M moves the d(m, m)*u_0 term to the
    right-hand side.  Returns an (M, *spatial) field d(m, m) * g.
    """
    g = np.asarray(g, dtype=float)
    dmm = d_diag(mesh, delta)
    return dmm.reshape((mesh.M,) + (1,) * g.ndim) * g


def apply_caputo_dense(R: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Discrete Caputo action (R u)_m for zero initial data."""
    u = np.asarray(u)
    if u.shape[0] != R.shape[0]:
        raise ValueError("time dimension mismatch")
    return R @ u


def dump_r_csv(R: np.ndarray, path: str) -> None:
    """Debug dump of R as (row, col, value) triples, 1-based, lower triangle."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["row", "col", "value"])
        for m in range(R.shape[0]):
            for j in range(m + 1):
                w.writerow([m + 1, j + 1, repr(float(R[m, j]))])
