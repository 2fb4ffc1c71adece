"""Panel Gauss-Legendre helpers for singular and oscillatory integrands.

Used by the covariance oracles: power-law kernels are integrable but stiff
near their singular point, so panels are graded geometrically toward it.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _gl_nodes(npts: int):
    x, w = np.polynomial.legendre.leggauss(npts)
    return x, w


def panel_nodes(edges, npts=16):
    """Nodes and weights for Gauss-Legendre on consecutive panels.

    ``edges`` is an increasing 1-d array of panel boundaries; returns flat
    arrays covering all panels.
    """
    edges = np.asarray(edges, dtype=float)
    x, w = _gl_nodes(npts)
    a = edges[:-1][:, None]
    b = edges[1:][:, None]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b) + half * x[None, :]).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


def integrate_panels(f, edges, npts=16):
    """Integrate a vectorized callable over graded panels."""
    nodes, weights = panel_nodes(edges, npts)
    return float(np.dot(weights, f(nodes)))


def geometric_edges(a, b, *, toward="left", ratio=2.0, min_frac=1e-13, max_panels=64):
    """Panel edges on [a, b], graded geometrically toward one or both ends.

    The panel adjacent to the graded end has length ~ ``min_frac * (b - a)``
    so that endpoint algebraic singularities of the integrand's derivatives
    are resolved without adaptive refinement.
    """
    if not b > a:
        raise ValueError("empty interval")
    length = b - a
    if toward == "both":
        mid = 0.5 * (a + b)
        left = geometric_edges(a, mid, toward="left", ratio=ratio,
                               min_frac=min_frac, max_panels=max_panels)
        right = geometric_edges(mid, b, toward="right", ratio=ratio,
                                min_frac=min_frac, max_panels=max_panels)
        return np.concatenate([left[:-1], right])
    n = min(max_panels, max(2, int(np.ceil(np.log(1.0 / min_frac) / np.log(ratio)))))
    t = ratio ** np.arange(n + 1, dtype=float)
    t = (t - 1.0) / (t[-1] - 1.0)
    if toward == "left":
        return a + length * t
    if toward == "right":
        return b - length * t[::-1]
    raise ValueError(f"unknown grading direction {toward!r}")
