"""Closed-form homogenized coefficients and limiting right-hand sides.

For graph-type domains the limiting diffusion coefficient is b plus the
per-period minimum of the boundary profile and the reaction coefficient is
b plus its per-period average; for comb domains they are b and b plus the
cell-area fraction.  The section integrals of the source converge weakly
to the reaction coefficient times the source when it depends on x1 only.
"""

import dataclasses
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .combgeom import CombSpec, cell_area, section_intervals, tooth_layout
from .errors import PreconditionError
from .geometry import (ProfileSpec, cell_average, eval_G_eps, min_over_period)
from .quadrature import golden_section_min, panel_nodes

DEFAULT_GRID = 1025


@dataclass(frozen=True)
class LimitCoefficients:
    """Sampled coefficients of the one-dimensional limit problem.

    a_values multiplies u' (diffusion), c_values multiplies u (reaction),
    fhat_values is the limiting right-hand side (zeros until attached).
    """

    grid: np.ndarray
    a_values: np.ndarray
    c_values: np.ndarray
    fhat_values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or len(grid) < 3 or not np.all(np.diff(grid) > 0):
            raise PreconditionError("grid must be increasing with >= 3 points")
        for name in ("a_values", "c_values", "fhat_values"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != grid.shape or not np.all(np.isfinite(arr)):
                raise PreconditionError(f"{name} must be finite and match the grid")
        if np.any(np.asarray(self.a_values) <= 0):
            raise PreconditionError("diffusion samples must be positive")

    def with_fhat(self, fhat_values) -> "LimitCoefficients":
        return dataclasses.replace(self, fhat_values=np.asarray(fhat_values, dtype=float))


def default_grid(n: int = DEFAULT_GRID) -> np.ndarray:
    return np.linspace(0.0, 1.0, n)


def coeffs_type1(spec: ProfileSpec, grid=None) -> LimitCoefficients:
    """Graph-type coefficients: a = b + per-period min, c = b + average."""
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    b_vals = spec.b(grid)
    minima = np.array([min_over_period(spec, float(x)) for x in grid])
    averages = cell_average(spec, grid)
    return LimitCoefficients(grid, b_vals + minima, b_vals + averages,
                             np.zeros_like(grid))


def coeffs_type2(spec: CombSpec, grid=None) -> LimitCoefficients:
    """Comb coefficients: a = b, c = |cell| / L + b."""
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    b_vals = spec.b(grid)
    fraction = cell_area(spec) / spec.L
    return LimitCoefficients(grid, b_vals, b_vals + fraction, np.zeros_like(grid))


def effective_diffusion_periodic(b: float, L: float, G: Callable) -> float:
    """Purely periodic effective diffusion L*b / (L*b + integral of G).

    Requires min G = 0 over the period (tolerance 1e-10): the formula is
    the area fraction of the non-oscillating part of the unit cell.
    """
    if b <= 0 or L <= 0:
        raise PreconditionError("b and L must be positive")
    ys = np.linspace(0.0, L, 2049)
    vals = np.asarray(G(ys), dtype=float)
    i = int(np.argmin(vals))
    lo, hi = ys[max(i - 1, 0)], ys[min(i + 1, len(ys) - 1)]
    _, refined = golden_section_min(lambda y: float(G(np.asarray(y))), lo, hi)
    g_min = min(float(vals[i]), refined)
    if abs(g_min) > 1e-10:
        raise PreconditionError(
            f"waveform minimum {g_min} is not 0; the periodic formula needs min G = 0")
    nodes, weights = panel_nodes(0.0, L, 512)
    integral = float(np.dot(weights, np.asarray(G(nodes), dtype=float)))
    return L * b / (L * b + integral)


def _section_integral_type1(f, spec: ProfileSpec, eps, xs, points=32):
    tops = eval_G_eps(spec, eps, xs)
    bottoms = -spec.b(xs)
    t, w = panel_nodes(0.0, 1.0, max(8, points // 4))
    ys = bottoms[:, None] + (tops - bottoms)[:, None] * t[None, :]
    vals = np.asarray(f(np.broadcast_to(xs[:, None], ys.shape), ys), dtype=float)
    return (tops - bottoms) * (vals @ w)


def _section_integral_type2(f, spec: CombSpec, eps, xs, points=32):
    t, w = panel_nodes(0.0, 1.0, max(8, points // 4))
    bottoms = -spec.b(xs)
    base_vals = np.asarray(
        f(np.broadcast_to(xs[:, None], (len(xs), len(t))),
          bottoms[:, None] * (1.0 - t[None, :])), dtype=float)
    out = (-bottoms) * (base_vals @ w)
    layout = tooth_layout(spec, eps)
    offsets = np.array([off for _, off, _ in layout])
    scale = eps ** spec.alpha
    for i, x in enumerate(xs):
        k = np.searchsorted(offsets, x, side="right") - 1
        if k < 0:
            continue
        x_ref = (x - offsets[k]) / scale
        for y_lo, y_hi in section_intervals(spec, x_ref):
            ys = y_lo + (y_hi - y_lo) * t
            vals = np.asarray(f(np.full_like(ys, x), ys), dtype=float)
            out[i] += (y_hi - y_lo) * float(np.dot(w, vals))
    return out


def fhat_epsilon(f: Callable, spec: Union[ProfileSpec, CombSpec], eps: float,
                 grid=None) -> np.ndarray:
    """Vertical-section integrals of the source at fixed eps.

    For graph domains the section is (-b(x), G_eps(x)); for comb domains it
    is the base interval plus the tooth portion above x when present.
    """
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if isinstance(spec, ProfileSpec):
        return _section_integral_type1(f, spec, eps, grid)
    return _section_integral_type2(f, spec, eps, grid)


def fhat_limit_for_x_only_f(f: Callable, coeffs: LimitCoefficients) -> np.ndarray:
    """Limiting right-hand side c(x) * f(x) for sources depending on x1 only."""
    return np.asarray(f(coeffs.grid), dtype=float) * coeffs.c_values


def section_measure_residual(spec: CombSpec, eps: float, phi: Callable) -> float:
    """|integral of (section measure - limit coefficient) * phi| for combs.

    The section measure of the comb at x is b(x) plus the tooth section
    height; its weak-* limit is the reaction coefficient q.  Integration
    splits at every tooth-rectangle edge so the piecewise-smooth integrand
    is integrated exactly panel by panel.
    """
    layout = tooth_layout(spec, eps)
    scale = eps ** spec.alpha
    fraction = cell_area(spec) / spec.L

    breakpoints = {0.0, 1.0}
    for _, offset, s in layout:
        for x_lo, x_hi, y_lo, y_hi in spec.cell:
            breakpoints.add(min(max(offset + s * x_lo, 0.0), 1.0))
            breakpoints.add(min(max(offset + s * x_hi, 0.0), 1.0))
    cuts = np.array(sorted(breakpoints))

    total = 0.0
    offsets = np.array([off for _, off, _ in layout])
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi - lo <= 1e-15:
            continue
        nodes, weights = panel_nodes(lo, hi, 4)
        mid = 0.5 * (lo + hi)
        k = np.searchsorted(offsets, mid, side="right") - 1
        tooth_height = 0.0
        if k >= 0:
            x_ref = (mid - offsets[k]) / scale
            tooth_height = sum(y_hi - y_lo
                               for y_lo, y_hi in section_intervals(spec, x_ref))
        section = spec.b(nodes) + tooth_height
        limit = spec.b(nodes) + fraction
        total += float(np.dot(weights,
                              (section - limit) * np.asarray(phi(nodes), dtype=float)))
    return abs(total)


def export_coefficients_csv(coeffs: LimitCoefficients, path):
    lines = ["x,a,c,fhat"]
    for x, a, c, fh in zip(coeffs.grid, coeffs.a_values, coeffs.c_values,
                           coeffs.fhat_values):
        lines.append(f"{x!r},{a!r},{c!r},{fh!r}")
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")
