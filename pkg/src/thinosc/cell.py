"""Explicit boundary-layer solutions on thin rectangles.

The anisotropic Laplace problem on a rectangle with prescribed trace on the
base and natural conditions elsewhere separates into Neumann cosine modes
in x whose vertical factors are scaled cosh profiles.  Deviation from the
trace average decays exponentially in the distance to the base; the decay
rates and mode energies have closed forms used throughout the estimates.

The full Neumann basis cos(k pi (x - x_lo) / width), k >= 1, is used: the
half-width basis cos(n pi x / half_width) spans only traces that are even
about the rectangle's midline, and the finite-element oracle arbitrates.
"""

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .errors import DomainError, PreconditionError, ResolutionError
from .quadrature import panel_nodes

_MAX_MODES = 2048
_COEFF_CUTOFF = 1e-12


@dataclass(frozen=True)
class FourierCellSolution:
    """Truncated cosine-mode solution on rect = (x_lo, x_hi, y_lo, y_hi).

    Evaluation: mean + sum of coeff * phi_k(x) * cosh-ratio(y), with
    phi_k the orthonormal Neumann cosines on (x_lo, x_hi) and the ratio
    cosh(rate * (y_hi - y)) / cosh(rate * height) computed in log space.
    decay_rates holds the per-mode vertical rates (strictly increasing).
    """

    eps: float
    alpha: float
    rect: Tuple[float, float, float, float]
    mean: float
    mode_indices: Tuple[int, ...]
    coefficients: Tuple[float, ...]
    decay_rates: Tuple[float, ...]

    def __post_init__(self):
        rates = np.asarray(self.decay_rates)
        if len(rates) > 1 and not np.all(np.diff(rates) > 0):
            raise PreconditionError("decay rates must be strictly increasing")
        if not np.all(np.isfinite(np.asarray(self.coefficients))):
            raise PreconditionError("mode coefficients must be finite")

    @property
    def n_modes(self) -> int:
        return len(self.mode_indices)

    @property
    def width(self) -> float:
        return self.rect[1] - self.rect[0]

    @property
    def height(self) -> float:
        return self.rect[3] - self.rect[2]

    def _basis(self, k: int, x: np.ndarray) -> np.ndarray:
        # orthonormal on (x_lo, x_hi): sqrt(2/width) cos(k pi (x-x_lo)/width)
        return np.sqrt(2.0 / self.width) * np.cos(
            k * np.pi * (x - self.rect[0]) / self.width)

    def _cosh_ratio(self, rate: float, y: np.ndarray) -> np.ndarray:
        # cosh(rate (y_hi - y)) / cosh(rate H) via exp of log differences
        s = self.rect[3] - np.asarray(y, dtype=float)
        h = self.height
        log_num = rate * s + np.log1p(np.exp(-2.0 * rate * s))
        log_den = rate * h + np.log1p(np.exp(-2.0 * rate * h))
        return np.exp(log_num - log_den)

    def __call__(self, x, y):
        xa = np.asarray(x, dtype=float)
        ya = np.asarray(y, dtype=float)
        out = np.full(np.broadcast(xa, ya).shape, self.mean, dtype=float)
        for k, coeff, rate in zip(self.mode_indices, self.coefficients,
                                  self.decay_rates):
            out = out + coeff * self._basis(k, xa) * self._cosh_ratio(rate, ya)
        if np.isscalar(x) and np.isscalar(y):
            return float(out)
        return out


def trace_average(u0: Callable, half_width: float, rel_tol: float = 1e-12) -> float:
    """Average of the trace over the symmetric base interval.

    Gauss quadrature with panel doubling to the requested relative
    tolerance.
    """
    if half_width <= 0:
        raise PreconditionError("half_width must be positive")
    panels = 64
    nodes, weights = panel_nodes(-half_width, half_width, panels)
    value = float(np.dot(weights, np.asarray(u0(nodes), dtype=float)))
    while panels < 8192:
        panels *= 2
        nodes, weights = panel_nodes(-half_width, half_width, panels)
        refined = float(np.dot(weights, np.asarray(u0(nodes), dtype=float)))
        if abs(refined - value) <= rel_tol * max(abs(refined), 1e-300) + 1e-15:
            value = refined
            break
        value = refined
    return value / (2.0 * half_width)


def _rect_solution(trace: Callable, rect, eps: float, alpha: float,
                   n_modes: int) -> FourierCellSolution:
    x_lo, x_hi, y_lo, y_hi = rect
    width = x_hi - x_lo
    height = y_hi - y_lo
    if width <= 0 or height <= 0:
        raise DomainError(f"degenerate rectangle {rect}")
    if n_modes < 1:
        raise PreconditionError("need at least one mode")
    if n_modes > _MAX_MODES:
        raise ResolutionError(
            f"quadrature cannot resolve {n_modes} modes (max {_MAX_MODES})")

    # at least 8 quadrature points per oscillation of the highest mode
    panels = max(64, 4 * n_modes)
    nodes, weights = panel_nodes(x_lo, x_hi, panels)
    trace_vals = np.asarray(trace(nodes), dtype=float)
    mean = float(np.dot(weights, trace_vals)) / width
    trace_norm = float(np.sqrt(np.dot(weights, trace_vals ** 2)))

    scaled = np.sqrt(2.0 / width) * np.cos(
        np.arange(1, n_modes + 1)[:, None] * np.pi * (nodes[None, :] - x_lo) / width)
    coeffs = scaled @ (weights * trace_vals)

    keep = n_modes
    cutoff = _COEFF_CUTOFF * max(trace_norm, 1e-300)
    while keep > 0 and abs(coeffs[keep - 1]) < cutoff:
        keep -= 1
    ks = tuple(range(1, keep + 1))
    rates = tuple(eps * k * np.pi / width for k in ks)
    return FourierCellSolution(eps, alpha, tuple(map(float, rect)), mean,
                               ks, tuple(map(float, coeffs[:keep])), rates)


def fourier_solution(u0: Callable, eps: float, alpha: float,
                     n_modes: int = 64) -> FourierCellSolution:
    """Cell solution on the canonical rectangle (-eps^alpha, eps^alpha) x (0, 1).

    Mode k decays vertically at rate k pi / (2 eps^(alpha-1)); trailing
    modes with coefficients below 1e-12 of the trace norm are dropped.
    """
    if eps <= 0 or alpha <= 1:
        raise PreconditionError("need eps > 0 and alpha > 1")
    a = eps ** alpha
    return _rect_solution(u0, (-a, a, 0.0, 1.0), eps, alpha, n_modes)


def build_test_function_X(phi: Callable, rect, eps: float,
                          n_modes: int = 64, alpha: float = float("nan")):
    """Harmonic lift of a base trace into an arbitrary partition rectangle.

    Same separation of variables as the canonical cell after translating
    and scaling the rectangle; the returned solution object evaluates the
    lifted field and exposes its closed-form energy.
    """
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    return _rect_solution(phi, tuple(map(float, rect)), eps, alpha, n_modes)


def decay_profile(sol: FourierCellSolution, y_values) -> np.ndarray:
    """Squared L2 deviation from the trace mean along horizontal lines.

    By orthonormality the integral over x of |u(., y) - mean|^2 is the sum
    of squared mode coefficients times squared cosh ratios.
    """
    ys = np.asarray(y_values, dtype=float)
    if np.any(ys < sol.rect[2] - 1e-12) or np.any(ys > sol.rect[3] + 1e-12):
        raise DomainError("y values outside the rectangle's vertical extent")
    out = np.zeros_like(ys, dtype=float)
    for coeff, rate in zip(sol.coefficients, sol.decay_rates):
        out += coeff ** 2 * sol._cosh_ratio(rate, ys) ** 2
    return out


def cell_energy(sol: FourierCellSolution) -> float:
    """Anisotropic energy of the truncated series, mode by mode.

    For mode k with x-eigenvalue mu = (k pi / width)^2 and vertical rate
    r = eps sqrt(mu), the energy |du/dx|^2 + eps^-2 |du/dy|^2 integrates to
    coeff^2 * mu * tanh(r H) / r.
    """
    total = 0.0
    h = sol.height
    for k, coeff, rate in zip(sol.mode_indices, sol.coefficients, sol.decay_rates):
        mu = (k * np.pi / sol.width) ** 2
        total += coeff ** 2 * mu * np.tanh(rate * h) / rate
    return float(total)


def trace_deviation_energy(sol: FourierCellSolution) -> float:
    """Integral over the base of |trace - mean|^2 (Parseval sum)."""
    return float(sum(c ** 2 for c in sol.coefficients))
