"""Geometric data of graph-bounded oscillatory domains.

The upper boundary of a graph-type domain is G(x, x/eps^alpha) where
G(x, y) = base(x) + amp(x) * waveform(y / l(x)) is periodic in y with
x-dependent period l(x).  This module evaluates that family, extracts its
per-period minima and averages, and builds the window partition and step
minorant used to separate the oscillating part of the domain.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import ConfigurationError, DomainError
from .quadrature import golden_section_min, panel_nodes

_DOMAIN_TOL = 1e-12
_SAMPLES = 4097  # dense sampling used for bound validation


@dataclass(frozen=True)
class ScalarFunction1D:
    """Scalar function on [0, 1]: polynomial or piecewise-linear table.

    Polynomials store ascending coefficients (c0 + c1*x + ...).  Tables
    store strictly increasing abscissae that must cover [0, 1].
    """

    kind: str
    data: tuple

    @classmethod
    def from_poly(cls, coeffs) -> "ScalarFunction1D":
        coeffs = tuple(float(c) for c in coeffs)
        if not coeffs:
            raise ConfigurationError("polynomial needs at least one coefficient")
        if not all(np.isfinite(coeffs)):
            raise ConfigurationError("polynomial coefficients must be finite")
        return cls("poly", coeffs)

    @classmethod
    def from_table(cls, points) -> "ScalarFunction1D":
        pts = tuple((float(x), float(v)) for x, v in points)
        if len(pts) < 2:
            raise ConfigurationError("table needs at least two points")
        xs = np.array([p[0] for p in pts])
        vs = np.array([p[1] for p in pts])
        if not (np.all(np.diff(xs) > 0)):
            raise ConfigurationError("table abscissae must be strictly increasing")
        if abs(xs[0]) > _DOMAIN_TOL or abs(xs[-1] - 1.0) > _DOMAIN_TOL:
            raise ConfigurationError("table must cover [0, 1]")
        if not np.all(np.isfinite(vs)):
            raise ConfigurationError("table values must be finite")
        return cls("table", pts)

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        if np.any(xa < -_DOMAIN_TOL) or np.any(xa > 1.0 + _DOMAIN_TOL):
            raise DomainError(f"argument outside [0, 1]: {x!r}")
        xa = np.clip(xa, 0.0, 1.0)
        if self.kind == "poly":
            out = np.polynomial.polynomial.polyval(xa, self.data)
        else:
            xs = np.array([p[0] for p in self.data])
            vs = np.array([p[1] for p in self.data])
            out = np.interp(xa, xs, vs)
        return float(out) if np.isscalar(x) else out


def _wave_sine(t):
    return 0.5 * (1.0 + np.sin(2.0 * np.pi * t))


def _wave_cosine(t):
    # valley at t = 0: 2 * this is 1 - cos(2 pi t)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * t))


def _wave_square(t):
    return np.where(np.mod(t, 1.0) < 0.5, 1.0, 0.0)


def _wave_sawtooth(t):
    return np.mod(t, 1.0)


def _wave_triangle(t):
    return 1.0 - np.abs(2.0 * np.mod(t, 1.0) - 1.0)


_WAVEFORM_FUNCS = {
    "sine": _wave_sine,
    "cosine": _wave_cosine,
    "square": _wave_square,
    "sawtooth": _wave_sawtooth,
    "triangle": _wave_triangle,
}


@dataclass(frozen=True)
class Waveform:
    """Canonical 1-periodic profile with range inside [0, 1]."""

    name: str
    table: Optional[tuple] = None

    def __post_init__(self):
        if self.name == "tabulated":
            if not self.table or len(self.table) < 2:
                raise ConfigurationError("tabulated waveform needs >= 2 points")
            xs = np.array([p[0] for p in self.table])
            vs = np.array([p[1] for p in self.table])
            if not np.all(np.diff(xs) > 0):
                raise ConfigurationError("waveform abscissae must increase")
            if abs(xs[0]) > _DOMAIN_TOL or abs(xs[-1] - 1.0) > _DOMAIN_TOL:
                raise ConfigurationError("waveform table must cover [0, 1]")
            if np.any(vs < -_DOMAIN_TOL) or np.any(vs > 1.0 + _DOMAIN_TOL):
                raise ConfigurationError("waveform values must lie in [0, 1]")
        elif self.name not in _WAVEFORM_FUNCS:
            raise ConfigurationError(f"unknown waveform {self.name!r}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.name == "tabulated":
            xs = np.array([p[0] for p in self.table])
            vs = np.array([p[1] for p in self.table])
            return np.interp(np.mod(t, 1.0), xs, vs)
        return _WAVEFORM_FUNCS[self.name](t)


def waveform(name: str) -> Waveform:
    return Waveform(name)


def waveform_from_table(points) -> Waveform:
    return Waveform("tabulated", tuple((float(x), float(v)) for x, v in points))


@dataclass(frozen=True)
class ProfileSpec:
    """Full geometric datum of a graph-type domain.

    b is the lower-boundary depth, alpha > 1 the oscillation exponent, and
    base/amp/l the coefficient maps of the separable upper-boundary family
    G(x, y) = base(x) + amp(x) * waveform(y / l(x)).
    """

    b: ScalarFunction1D
    waveform: Waveform
    base: ScalarFunction1D
    amp: ScalarFunction1D
    l: ScalarFunction1D
    alpha: float

    def __post_init__(self):
        if not self.alpha > 1.0:
            raise ConfigurationError("alpha must be > 1")
        xs = np.linspace(0.0, 1.0, _SAMPLES)
        b_vals = self.b(xs)
        if np.min(b_vals) <= 0.0:
            raise ConfigurationError("b must be strictly positive on [0, 1]")
        base_vals = self.base(xs)
        amp_vals = self.amp(xs)
        if np.min(base_vals) < 0.0:
            raise ConfigurationError("base must be nonnegative")
        if np.min(amp_vals) < 0.0:
            raise ConfigurationError("amp must be nonnegative")
        l_vals = self.l(xs)
        if np.min(l_vals) <= 0.0:
            raise ConfigurationError("period map l must be strictly positive")
        object.__setattr__(self, "_b_bounds", (float(np.min(b_vals)), float(np.max(b_vals))))
        object.__setattr__(self, "_l_bounds", (float(np.min(l_vals)), float(np.max(l_vals))))
        object.__setattr__(self, "_g_upper", float(np.max(base_vals) + np.max(amp_vals)))

    @property
    def b_min(self) -> float:
        return self._b_bounds[0]

    @property
    def b_max(self) -> float:
        return self._b_bounds[1]

    @property
    def l_min(self) -> float:
        return self._l_bounds[0]

    @property
    def l_max(self) -> float:
        """Upper bound L of the period map; sets the partition window width."""
        return self._l_bounds[1]

    @property
    def g_upper(self) -> float:
        """Upper bound for G over [0, 1] x R (waveform range is [0, 1])."""
        return self._g_upper

    def G(self, x, y):
        """Evaluate G(x, y) = base(x) + amp(x) * waveform(y / l(x))."""
        return self.base(x) + self.amp(x) * self.waveform(np.asarray(y, dtype=float) / self.l(x))

    def oscillating(self) -> bool:
        xs = np.linspace(0.0, 1.0, 257)
        return bool(np.max(self.amp(xs)) > 0.0)


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant function on [0, 1], intervals closed on the left."""

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if bp.size != vals.size + 1:
            raise ConfigurationError("need exactly one value per subinterval")
        if not np.all(np.diff(bp) > 0):
            raise ConfigurationError("breakpoints must be strictly increasing")
        if abs(bp[0]) > _DOMAIN_TOL or abs(bp[-1] - 1.0) > _DOMAIN_TOL:
            raise ConfigurationError("breakpoints must start at 0 and end at 1")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ConfigurationError("values must be finite and nonnegative")

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        if np.any(xa < -_DOMAIN_TOL) or np.any(xa > 1.0 + _DOMAIN_TOL):
            raise DomainError(f"argument outside [0, 1]: {x!r}")
        bp = np.asarray(self.breakpoints)
        idx = np.clip(np.searchsorted(bp, xa, side="right") - 1, 0, len(self.values) - 1)
        out = np.asarray(self.values)[idx]
        return float(out) if np.isscalar(x) else out


def count_windows(period_bound: float, eps: float, alpha: float) -> int:
    """Largest N with N * L * eps^alpha < 1 (robust to rounding near integers)."""
    width = period_bound * eps ** alpha
    if width >= 1.0:
        return 0
    u = 1.0 / width
    nearest = round(u)
    if abs(u - nearest) <= 1e-9 * max(1.0, nearest):
        return int(nearest) - 1
    return int(np.floor(u))


def eval_G_eps(spec: ProfileSpec, eps: float, x):
    """Boundary height G(x, x / eps^alpha) of the rescaled domain."""
    if eps <= 0:
        raise ConfigurationError("eps must be positive")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < -_DOMAIN_TOL) or np.any(xa > 1.0 + _DOMAIN_TOL):
        raise DomainError(f"x outside [0, 1]: {x!r}")
    out = spec.G(xa, xa / eps ** spec.alpha)
    return float(out) if np.isscalar(x) else out


def min_over_period(spec: ProfileSpec, x) -> float:
    """Minimum of y -> G(x, y) over one period.

    Dense sampling (1024 intervals per period) followed by golden-section
    refinement around the best sample; ties broken toward the smallest y.
    """
    if np.ndim(x) > 0:
        return np.array([min_over_period(spec, float(xi)) for xi in np.asarray(x)])
    period = spec.l(x)
    ys = np.linspace(0.0, period, 1025)
    vals = spec.G(x, ys)
    i = int(np.argmin(vals))
    lo = ys[max(i - 1, 0)]
    hi = ys[min(i + 1, len(ys) - 1)]
    y_ref, f_ref = golden_section_min(lambda y: spec.G(x, y), lo, hi, tol=1e-12)
    return float(f_ref) if f_ref < vals[i] else float(vals[i])


def waveform_mean(wave: Waveform, rel_tol=1e-10) -> float:
    """Mean of the canonical waveform over one period, by panel doubling."""

    def integrate(panels):
        t, w = panel_nodes(0.0, 1.0, panels)
        return float(np.dot(w, wave(t)))

    panels = 256
    value = integrate(panels)
    while panels < 16384:
        panels *= 2
        refined = integrate(panels)
        if abs(refined - value) <= rel_tol * max(abs(refined), 1.0):
            return refined
        value = refined
    return value


def cell_average(spec: ProfileSpec, x, rel_tol=1e-10):
    """Per-period average (1/l(x)) * integral of G(x, s) over one period.

    Substituting s = l(x) t reduces the integral to base(x) + amp(x) times
    the waveform mean, which is evaluated by composite Gauss-Legendre with
    panel doubling (256 panels up) to the requested relative tolerance.
    Accepts scalar or array x.
    """
    wbar = waveform_mean(spec.waveform, rel_tol)
    out = spec.base(x) + spec.amp(x) * wbar
    return float(out) if np.isscalar(x) else out


def build_partition(spec: ProfileSpec, eps: float) -> np.ndarray:
    """Window-minimizer partition 0 = g0 <= g1 < ... < gN < g(N+1) = 1.

    Each interior point minimizes x -> G(x, x/eps^alpha) over its window
    [(n-1) L eps^alpha, n L eps^alpha], located by a 1024-interval grid plus
    golden-section refinement; ties resolve to the smallest x.  The first
    minimizer may coincide with 0 (the window endpoints are admissible).
    """
    alpha = spec.alpha
    big_l = spec.l_max
    n_windows = count_windows(big_l, eps, alpha)
    if n_windows < 1:
        raise ConfigurationError(
            f"epsilon too large for partition: no window of width "
            f"{big_l}*{eps}^{alpha} fits in (0, 1)"
        )
    width = big_l * eps ** alpha
    scale = eps ** alpha

    def f_vec(xs):
        return spec.G(xs, xs / scale)

    gammas = [0.0]
    for n in range(1, n_windows + 1):
        a = (n - 1) * width
        b = min(n * width, 1.0)
        xs = np.linspace(a, b, 1025)
        vals = f_vec(xs)
        i = int(np.argmin(vals))
        lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
        x_ref, f_ref = golden_section_min(
            lambda x: float(spec.G(x, x / scale)), lo, hi, tol=1e-12
        )
        gammas.append(float(x_ref) if f_ref < vals[i] else float(xs[i]))
    gammas.append(1.0)
    return np.array(gammas)


def build_step_minorant(spec: ProfileSpec, eps: float) -> StepFunction:
    """Step function built from the per-window boundary minima.

    Takes value G(g1, .) on [0, g1], max of adjacent window minima on each
    [gn, g(n+1)], and G(gN, .) on [gN, 1]; degenerate intervals (the first
    minimizer can sit at 0) are collapsed.
    """
    gammas = build_partition(spec, eps)
    interior = gammas[1:-1]
    scale = eps ** spec.alpha
    g_vals = np.array([spec.G(g, g / scale) for g in interior])
    n = len(interior)

    pieces = [(0.0, interior[0], g_vals[0])]
    for k in range(n - 1):
        pieces.append((interior[k], interior[k + 1], max(g_vals[k], g_vals[k + 1])))
    pieces.append((interior[-1], 1.0, g_vals[-1]))

    breakpoints = [0.0]
    values = []
    for left, right, value in pieces:
        if right - left <= 0.0:
            continue
        breakpoints.append(float(right))
        values.append(float(value))
    return StepFunction(tuple(breakpoints), tuple(values))


def weak_star_residual(spec: ProfileSpec, eps: float, phi: Callable) -> float:
    """|integral of (G_eps - per-period average) * phi over (0, 1)|.

    The oscillatory term is integrated with at least 20 quadrature points
    per oscillation period; the smooth averaged term needs no refinement.
    """
    scale = eps ** spec.alpha
    periods_in_unit = 1.0 / (spec.l_min * scale)
    panels = int(max(64, np.ceil(4.0 * periods_in_unit)))
    nodes, weights = panel_nodes(0.0, 1.0, min(panels, 100000))
    phi_vals = np.asarray(phi(nodes), dtype=float)
    osc = np.dot(weights, eval_G_eps(spec, eps, nodes) * phi_vals)

    nodes_s, weights_s = panel_nodes(0.0, 1.0, 256)
    smooth = np.dot(weights_s, cell_average(spec, nodes_s) * np.asarray(phi(nodes_s), dtype=float))
    return float(abs(osc - smooth))
