"""P1 Galerkin solver for the one-dimensional limit problems.

Solves integral(a u' phi' + c u phi) = integral(fhat phi) over (0, 1) with
natural boundary conditions.  Coefficients are sampled per cell at the
midpoint (endpoint average), the load uses the exact integral of the
piecewise-linear interpolant, and the tridiagonal SPD system is solved by
a square-root-free symmetric (LDL^T) factorization.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError
from .homogenize import LimitCoefficients


@dataclass(frozen=True)
class Limit1DSolution:
    """Nodal values of the limit solution on the coefficient grid."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.grid) != len(self.values):
            raise PreconditionError("grid and values must have equal length")
        if not np.all(np.isfinite(self.values)):
            raise PreconditionError("solution values must be finite")


def _ldlt_tridiagonal(diag: np.ndarray, off: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve an SPD tridiagonal system by LDL^T without square roots."""
    n = len(diag)
    d = diag.astype(float).copy()
    low = np.empty(n - 1)
    x = rhs.astype(float).copy()
    for i in range(n - 1):
        if d[i] <= 0:
            raise PreconditionError("tridiagonal system is not positive definite")
        low[i] = off[i] / d[i]
        d[i + 1] = d[i + 1] - low[i] * off[i]
    if d[-1] <= 0:
        raise PreconditionError("tridiagonal system is not positive definite")
    for i in range(1, n):
        x[i] -= low[i - 1] * x[i - 1]
    x /= d
    for i in range(n - 2, -1, -1):
        x[i] -= low[i] * x[i + 1]
    return x


def solve_limit(coeffs: LimitCoefficients) -> Limit1DSolution:
    """Galerkin solution of the limit problem on the coefficient grid."""
    grid = np.asarray(coeffs.grid, dtype=float)
    a = np.asarray(coeffs.a_values, dtype=float)
    c = np.asarray(coeffs.c_values, dtype=float)
    fhat = np.asarray(coeffs.fhat_values, dtype=float)
    if np.any(a <= 0) or np.any(c <= 0):
        raise PreconditionError("coefficient samples must be positive")
    h = np.diff(grid)
    a_mid = 0.5 * (a[:-1] + a[1:])
    c_mid = 0.5 * (c[:-1] + c[1:])

    stiff = a_mid / h
    mass_diag = c_mid * h / 3.0
    mass_off = c_mid * h / 6.0

    n = len(grid)
    diag = np.zeros(n)
    diag[:-1] += stiff + mass_diag
    diag[1:] += stiff + mass_diag
    off = -stiff + mass_off

    rhs = np.zeros(n)
    rhs[:-1] += h / 6.0 * (2.0 * fhat[:-1] + fhat[1:])
    rhs[1:] += h / 6.0 * (fhat[:-1] + 2.0 * fhat[1:])

    return Limit1DSolution(grid, _ldlt_tridiagonal(diag, off, rhs))


def evaluate(sol: Limit1DSolution, x):
    """Piecewise-linear interpolation of the solution at x in [0, 1]."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < -1e-12) or np.any(xa > 1.0 + 1e-12):
        raise DomainError(f"argument outside [0, 1]: {x!r}")
    out = np.interp(np.clip(xa, 0.0, 1.0), sol.grid, sol.values)
    return float(out) if np.isscalar(x) else out


def export_solution_csv(sol: Limit1DSolution, path):
    lines = ["x,u0"]
    for x, v in zip(sol.grid, sol.values):
        lines.append(f"{x!r},{v!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
