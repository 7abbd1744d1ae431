"""Epsilon sweeps comparing solved fields against their 1D limits."""

import hashlib
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import fem1d, fem2d, homogenize
from .combgeom import CombSpec
from .errors import ConfigurationError, PreconditionError
from .geometry import ProfileSpec
from .mesh import mesh_cell, mesh_type1, mesh_type2


@dataclass(frozen=True)
class ReportRow:
    eps: float
    dofs: int
    triangles: int
    l2_error: float
    dx2_over_eps: float
    iterations: int
    wall_time: float


@dataclass
class ConvergenceReport:
    """Rows of an epsilon sweep, sorted by decreasing eps."""

    rows: List[ReportRow]
    metadata: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        eps = [r.eps for r in self.rows]
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigurationError("rows must be sorted by decreasing eps")


def spec_digest(spec) -> str:
    return hashlib.sha256(repr(spec).encode()).hexdigest()[:16]


def default_epsilons(alpha: float) -> List[float]:
    """Preset ladder; the alpha = 2 preset stops at 0.1 to respect the cap."""
    if alpha >= 2.0:
        return [0.2, 0.1]
    return [0.2, 0.1, 0.05]


def _study_rows(eps_list, solve_row):
    rows = []
    for eps in eps_list:
        start = time.perf_counter()
        try:
            rows.append(solve_row(eps, start))
        except Exception as exc:
            raise type(exc)(f"[eps={eps}] {exc}") from exc
    return rows


def run_study_type1(spec: ProfileSpec, f: Callable, eps_list: Sequence[float],
                    cells_per_period: int = 8, ny: int = 8,
                    triangle_cap: int = 200000, tol: float = 1e-10,
                    max_iter: int = 50000, grid_points: int = 1025,
                    fhat: Optional[Callable] = None) -> ConvergenceReport:
    """Sweep of the graph-type problem against its homogenized limit.

    f is a function of x1 alone; its limiting right-hand side is the
    reaction coefficient times f unless an explicit fhat override is given
    (for sources with a documented section-integral limit).
    """
    eps_list = list(eps_list)
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigurationError("eps_list must be strictly decreasing")
    grid = np.linspace(0.0, 1.0, grid_points)
    coeffs = homogenize.coeffs_type1(spec, grid)
    if fhat is None:
        fhat_vals = homogenize.fhat_limit_for_x_only_f(f, coeffs)
    else:
        fhat_vals = np.asarray(fhat(grid), dtype=float)
    u0 = fem1d.solve_limit(coeffs.with_fhat(fhat_vals))

    def solve_row(eps, start):
        mesh = mesh_type1(spec, eps, cells_per_period, ny, triangle_cap)
        system = fem2d.assemble(mesh, eps, lambda x, y: f(x))
        u = fem2d.solve(system, tol, max_iter)
        err = fem2d.l2_distance_to_1d(u, lambda x: fem1d.evaluate(u0, x))
        dx2 = fem2d.norms(u, eps)[3]
        return ReportRow(eps, mesh.num_nodes, mesh.num_triangles, err, dx2,
                         u.iterations, time.perf_counter() - start)

    rows = _study_rows(eps_list, solve_row)
    meta = {
        "domain": "graph",
        "spec": spec_digest(spec),
        "cells_per_period": str(cells_per_period),
        "ny": str(ny),
        "grid_points": str(grid_points),
    }
    return ConvergenceReport(rows, meta)


def run_study_type2(spec: CombSpec, f: Callable, eps_list: Sequence[float],
                    h: float = 1.0 / 16.0, cell_h: float = 1.0 / 32.0,
                    triangle_cap: int = 200000, tol: float = 1e-10,
                    max_iter: int = 50000, grid_points: int = 1025,
                    fhat: Optional[Callable] = None,
                    hq_threshold: float = 1e-6) -> ConvergenceReport:
    """Sweep of the comb problem; validates the cell eigenvalue first."""
    eps_list = list(eps_list)
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigurationError("eps_list must be strictly decreasing")
    e1, _ = fem2d.eigen_first(mesh_cell(spec, cell_h))
    if e1 <= hq_threshold:
        raise PreconditionError(
            f"hypothesis HQ violated: first cell eigenvalue {e1} <= {hq_threshold}")

    grid = np.linspace(0.0, 1.0, grid_points)
    coeffs = homogenize.coeffs_type2(spec, grid)
    if fhat is None:
        fhat_vals = homogenize.fhat_limit_for_x_only_f(f, coeffs)
    else:
        fhat_vals = np.asarray(fhat(grid), dtype=float)
    u0 = fem1d.solve_limit(coeffs.with_fhat(fhat_vals))

    def solve_row(eps, start):
        mesh = mesh_type2(spec, eps, h, triangle_cap)
        system = fem2d.assemble(mesh, eps, lambda x, y: f(x))
        u = fem2d.solve(system, tol, max_iter)
        err = fem2d.l2_distance_to_1d(u, lambda x: fem1d.evaluate(u0, x))
        dx2 = fem2d.norms(u, eps)[3]
        return ReportRow(eps, mesh.num_nodes, mesh.num_triangles, err, dx2,
                         u.iterations, time.perf_counter() - start)

    rows = _study_rows(eps_list, solve_row)
    meta = {
        "domain": "comb",
        "spec": spec_digest(spec),
        "h": repr(h),
        "grid_points": str(grid_points),
        "cell_eigenvalue": repr(e1),
    }
    return ConvergenceReport(rows, meta)


CSV_HEADER = "epsilon,dofs,triangles,l2_error,dx2_over_eps,iterations,wall_time"


def emit_report(report: ConvergenceReport, format: str = "csv") -> str:
    """Render a report as CSV text or as a gnuplot script referencing it."""
    if not report.rows:
        raise ConfigurationError("cannot emit an empty report")
    if format == "csv":
        lines = [CSV_HEADER]
        for r in report.rows:
            lines.append(
                f"{r.eps!r},{r.dofs},{r.triangles},{r.l2_error!r},"
                f"{r.dx2_over_eps!r},{r.iterations},{r.wall_time!r}")
        return "\n".join(lines) + "\n"
    if format == "gnuplot":
        return (
            "set datafile separator ','\n"
            "set logscale x\n"
            "set xlabel 'epsilon'\n"
            "set ylabel 'L2 error'\n"
            "set key left top\n"
            "plot 'report.csv' every ::1 using 1:4 with linespoints "
            "title 'l2_error'\n"
        )
    raise ConfigurationError(f"unknown report format {format!r}")
