"""Comb-like domains: a base strip carrying a periodic array of teeth.

Each tooth is a copy of a reference cell (a union of axis-aligned
rectangles inside (0, L) x (0, G_height)) shrunk horizontally by eps^alpha
and placed at offsets n * L * eps^alpha along the interface {x2 = 0}.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .errors import ConfigurationError
from .geometry import ScalarFunction1D, count_windows, _SAMPLES

_TOL = 1e-12

Rect = Tuple[float, float, float, float]  # x_lo, x_hi, y_lo, y_hi


@dataclass(frozen=True)
class CombSpec:
    """Geometric datum of a comb-like domain."""

    b: ScalarFunction1D
    L: float
    G_height: float
    cell: Tuple[Rect, ...]
    alpha: float

    def __post_init__(self):
        if not self.alpha > 1.0:
            raise ConfigurationError("alpha must be > 1")
        if not self.L > 0:
            raise ConfigurationError("cell width L must be positive")
        if not self.G_height > 0:
            raise ConfigurationError("cell height bound must be positive")
        if not self.cell:
            raise ConfigurationError("reference cell needs at least one rectangle")
        rects = tuple(tuple(float(v) for v in r) for r in self.cell)
        object.__setattr__(self, "cell", rects)
        for r in rects:
            x_lo, x_hi, y_lo, y_hi = r
            if not (x_hi - x_lo > _TOL and y_hi - y_lo > _TOL):
                raise ConfigurationError(f"rectangle {r} must have positive area")
            if x_lo < -_TOL or x_hi > self.L + _TOL:
                raise ConfigurationError(f"rectangle {r} exceeds cell width [0, {self.L}]")
            if y_lo < -_TOL or y_hi > self.G_height + _TOL:
                raise ConfigurationError(f"rectangle {r} exceeds cell height [0, {self.G_height}]")
        for i in range(len(rects)):
            for j in range(i + 1, len(rects)):
                if _interiors_overlap(rects[i], rects[j]):
                    raise ConfigurationError(
                        f"rectangles {rects[i]} and {rects[j]} have overlapping interiors"
                    )
        if min(r[0] for r in rects) <= _TOL and max(r[1] for r in rects) >= self.L - _TOL:
            raise ConfigurationError(
                "cell spans the full width L; adjacent teeth would touch"
            )
        xs = np.linspace(0.0, 1.0, _SAMPLES)
        if np.min(self.b(xs)) <= 0.0:
            raise ConfigurationError("b must be strictly positive on [0, 1]")


def _interiors_overlap(r1: Rect, r2: Rect) -> bool:
    dx = min(r1[1], r2[1]) - max(r1[0], r2[0])
    dy = min(r1[3], r2[3]) - max(r1[2], r2[2])
    return dx > _TOL and dy > _TOL


def cell_area(spec: CombSpec) -> float:
    """Area of the reference cell (rectangles have disjoint interiors)."""
    return float(sum((r[1] - r[0]) * (r[3] - r[2]) for r in spec.cell))


def tooth_layout(spec: CombSpec, eps: float) -> List[Tuple[int, float, float]]:
    """Tooth placements (index, horizontal offset, horizontal scale).

    Tooth n occupies offset + scale * [x_lo, x_hi] for each cell rectangle,
    with offset = n * L * eps^alpha and scale = eps^alpha.  A final tooth
    that would protrude past x = 1 is dropped.
    """
    if eps <= 0:
        raise ConfigurationError("eps must be positive")
    n_teeth = count_windows(spec.L, eps, spec.alpha)
    if n_teeth < 1:
        raise ConfigurationError(
            f"no tooth fits in (0, 1): L*eps^alpha = {spec.L * eps ** spec.alpha}"
        )
    scale = eps ** spec.alpha
    x_hi_max = max(r[1] for r in spec.cell)
    layout = []
    for n in range(1, n_teeth + 1):
        offset = n * spec.L * scale
        if offset + scale * x_hi_max < 1.0 - _TOL:
            layout.append((n, offset, scale))
    if not layout:
        raise ConfigurationError("no tooth fits in (0, 1) after trimming")
    return layout


def gamma0_intervals(spec: CombSpec) -> List[Tuple[float, float]]:
    """Merged x-intervals where the cell touches the interface {x2 = 0}."""
    spans = sorted((r[0], r[1]) for r in spec.cell if r[2] <= _TOL)
    merged: List[Tuple[float, float]] = []
    for lo, hi in spans:
        if merged and lo <= merged[-1][1] + _TOL:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def section_intervals(spec: CombSpec, x_ref: float) -> List[Tuple[float, float]]:
    """Vertical section of the reference cell at abscissa x_ref.

    Rectangles are taken half-open in x so shared vertical edges are not
    counted twice.
    """
    return [
        (r[2], r[3])
        for r in spec.cell
        if r[0] <= x_ref < r[1]
    ]
