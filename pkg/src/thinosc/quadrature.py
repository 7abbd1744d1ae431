"""Composite Gauss-Legendre quadrature helpers."""

import numpy as np


def panel_nodes(a, b, panels, order=5):
    """Nodes and weights of composite Gauss-Legendre quadrature on [a, b]."""
    xg, wg = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


def panel_gauss(f, a, b, panels, order=5):
    nodes, weights = panel_nodes(a, b, panels, order)
    return float(np.dot(weights, f(nodes)))


def adaptive_panel_gauss(f, a, b, start_panels=256, rel_tol=1e-10,
                         max_panels=16384, order=5):
    """Panel-doubling composite Gauss-Legendre integration of f on [a, b].

    Doubles the panel count until successive values agree to rel_tol
    (with an absolute floor for integrals near zero).
    """
    panels = start_panels
    value = panel_gauss(f, a, b, panels, order)
    while panels < max_panels:
        panels *= 2
        refined = panel_gauss(f, a, b, panels, order)
        scale = max(abs(refined), abs(value), 1e-300)
        if abs(refined - value) <= rel_tol * scale + 1e-15:
            return refined
        value = refined
    return value


def golden_section_min(f, a, b, tol=1e-12):
    """Golden-section minimization of f on [a, b] to absolute x-tolerance tol.

    Derivative free and deterministic; returns (x, f(x)). For non-unimodal
    f the result is a local minimum inside the bracket, which is why callers
    seed the bracket from a dense grid first.
    """
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    lo, hi = float(a), float(b)
    if hi < lo:
        lo, hi = hi, lo
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = f(d)
    x = c if fc <= fd else d
    return (x, fc) if fc <= fd else (x, fd)
