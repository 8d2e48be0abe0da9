"""Panelized Gauss-Legendre quadrature with oscillation-aware panel layouts.

Everything downstream (kernel assembly, transforms, determinants) integrates
either smooth decaying profiles or trigonometric/Bessel oscillations whose
frequency is known a priori.  Panels are therefore sized from the requested
node density per oscillation period rather than by adaptive subdivision.
"""

from __future__ import annotations

import numpy as np

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order < 2:
        raise ValueError("Gauss-Legendre order must be >= 2")
    rule = _GL_CACHE.get(order)
    if rule is None:
        rule = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = rule
    return rule


def gauss_panels(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on the panels defined by ``edges``.

    Returns (nodes, weights), both 1-D and ordered; exact for polynomials of
    degree < 2*order on every panel.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("edges must be a 1-D array with at least two entries")
    if not np.all(np.diff(edges) > 0.0):
        raise ValueError("edges must be strictly increasing")
    ref_x, ref_w = _gl_rule(order)
    lo = edges[:-1][:, None]
    hi = edges[1:][:, None]
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo) + half * ref_x).ravel()
    weights = (half * ref_w).ravel()
    return nodes, weights


def uniform_edges(a: float, b: float, panels: int) -> np.ndarray:
    if not b > a:
        raise ValueError("degenerate interval")
    if panels < 1:
        raise ValueError("panels must be >= 1")
    return np.linspace(a, b, panels + 1)


def geometric_edges(a: float, b: float, panels: int, first: float) -> np.ndarray:
    """Edges on [a, b] with the first panel of width ``first``, growing
    geometrically.  Used to resolve integrable endpoint singularities."""
    if not (b > a and 0.0 < first < b - a):
        raise ValueError("need a < b and 0 < first < b - a")
    if panels < 2:
        return np.array([a, b])
    # solve first * (q^panels - 1)/(q - 1) = b - a for the ratio q
    span = b - a
    q_lo, q_hi = 1.0 + 1e-12, 1e6

    def total(q: float) -> float:
        try:
            return first * (q**panels - 1.0) / (q - 1.0)
        except OverflowError:
            return np.inf

    if total(q_lo) > span:
        return np.linspace(a, b, panels + 1)
    for _ in range(200):
        q = 0.5 * (q_lo + q_hi)
        if total(q) < span:
            q_lo = q
        else:
            q_hi = q
    q = 0.5 * (q_lo + q_hi)
    widths = first * q ** np.arange(panels)
    edges = a + np.concatenate(([0.0], np.cumsum(widths)))
    edges *= 1.0  # keep a copy; rescale so the last edge lands exactly on b
    edges = a + (edges - a) * (span / (edges[-1] - a))
    edges[0], edges[-1] = a, b
    return edges


def oscillation_edges(
    a: float,
    b: float,
    omega: float,
    order: int = 12,
    nodes_per_period: float = 8.0,
    max_panel: float = np.inf,
) -> np.ndarray:
    """Edges on [a, b] sized so a frequency-``omega`` oscillation is sampled
    with at least ``nodes_per_period`` Gauss nodes per period."""
    if not b > a:
        raise ValueError("degenerate interval")
    span = b - a
    limit = max_panel
    if omega > 0.0:
        period = 2.0 * np.pi / omega
        limit = min(limit, order * period / nodes_per_period)
    if not np.isfinite(limit) or limit >= span:
        return np.array([a, b])
    panels = int(np.ceil(span / limit))
    return np.linspace(a, b, panels + 1)


def refine_edges(edges: np.ndarray) -> np.ndarray:
    """Halve every panel; used for self-estimates of quadrature error."""
    mids = 0.5 * (edges[:-1] + edges[1:])
    out = np.empty(2 * edges.size - 1)
    out[0::2] = edges
    out[1::2] = mids
    return out


def integrate(f, nodes: np.ndarray, weights: np.ndarray) -> float | complex:
    return np.sum(weights * f(nodes))
