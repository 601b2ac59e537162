"""Analytic reference solutions and error diagnostics.

The 1D test problem (f = 0, g = sin x on (0, pi)) has the separable
solution u(x, t) = E_delta(-t**delta) * sin x, with E_delta the
Mittag-Leffler function.  The 2D test uses the manufactured solution
u = (t**3 + t**delta) * sin x * sin y.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MittagLefflerError",
    "mittag_leffler",
    "exact_solution_1d",
    "manufactured_2d",
    "max_error",
    "observed_orders",
    "ErrorStudy",
]

_SERIES_RTOL = 1e-16
_SERIES_MAX_TERMS = 500


class MittagLefflerError(RuntimeError):
    """Series cap reached before the requested tolerance."""


def _ml_scalar(delta: float, z: float) -> float:
    total = 1.0
    term = 1.0
    for k in range(1, _SERIES_MAX_TERMS + 1):
        # term ratio avoids forming Gamma(delta*k+1) past the overflow range
        term *= z * math.exp(math.lgamma(delta * (k - 1) + 1.0) - math.lgamma(delta * k + 1.0))
        total += term
        if abs(term) < _SERIES_RTOL * abs(total):
            return total
    raise MittagLefflerError(f"series did not converge for delta={delta}, z={z}")


def mittag_leffler(delta: float, z):
    """E_delta(z) = sum_k z**k / Gamma(delta*k + 1) for z <= 0.

    Accepts scalars or arrays; the partial sum stops once the next term is
    below 1e-16 relative, capped at 500 terms (raises if the cap is hit).
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr > 0.0):
        raise ValueError("only nonpositive arguments are supported")
    out = np.array([_ml_scalar(delta, zz) for zz in np.atleast_1d(z_arr)])
    return float(out[0]) if z_arr.ndim == 0 else out.reshape(z_arr.shape)


def exact_solution_1d(x, t, delta: float):
    """u(x, t) = E_delta(-t**delta) * sin x."""
    t_arr = np.asarray(t, dtype=float)
    ml = mittag_leffler(delta, -np.power(t_arr, delta))
    return ml * np.sin(x)


def manufactured_2d(x, y, t, delta: float):
    """Manufactured 2D solution and matching right-hand side.

    u = (t**3 + t**delta) sin x sin y and
    f = 2 u + (Gamma(delta+1) + Gamma(4)/Gamma(4-delta) * t**(3-delta)) sin x sin y.
    """
    t_arr = np.asarray(t, dtype=float)
    sxy = np.sin(x) * np.sin(y)
    u = (t_arr**3 + t_arr**delta) * sxy
    f = 2.0 * u + (
        math.gamma(delta + 1.0)
        + math.gamma(4.0) / math.gamma(4.0 - delta) * t_arr ** (3.0 - delta)
    ) * sxy
    return u, f


def max_error(u_num: np.ndarray, u_exact: np.ndarray) -> float:
    """Maximum pointwise error over all interior grid points and times."""
    if u_num.shape != u_exact.shape:
        raise ValueError("field shapes do not match")
    return float(np.abs(u_num - u_exact).max())


@dataclass(frozen=True)
class ErrorStudy:
    """Maximum errors at a sequence of doubling time-step counts."""

    M_values: tuple[int, ...]
    errors: tuple[float, ...]

    def __post_init__(self):
        if len(self.M_values) != len(self.errors) or not self.M_values:
            raise ValueError("study must pair every M with an error")


def observed_orders(study: ErrorStudy) -> list[float]:
    """Reduction orders log2(E_M / E_2M) for consecutive doublings."""
    if len(study.M_values) < 2:
        raise ValueError("need at least two M values")
    orders = []
    for (m1, e1), (m2, e2) in zip(
        zip(study.M_values, study.errors), zip(study.M_values[1:], study.errors[1:])
    ):
        if m2 != 2 * m1:
            raise ValueError("M values must double")
        orders.append(math.log2(e1 / e2))
    return orders
