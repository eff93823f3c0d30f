"""Gauss-Legendre panel quadrature with square-root endpoint substitution.

Near a simple branch point z0 the integrands behave like (z - z0)^{+-1/2};
substituting z = z0 + w^2 * (segment direction) makes them analytic in w, so
plain Gauss-Legendre panels converge spectrally on the substituted regions.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def gauss_legendre(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def panel_nodes(a, b, order):
    """Nodes and weights of one Gauss-Legendre panel on [a, b]."""
    x, w = gauss_legendre(order)
    return 0.5 * (a + b) + 0.5 * (b - a) * x, 0.5 * (b - a) * w


def segment_plan(n_mid_panels=8, n_end_panels=3, mid_order=32, end_order=24,
                 end_frac=0.1):
    """Quadrature plan for t in [0, 1] with sqrt endpoints at t=0 and t=1.

    Returns (t_nodes, weights) where weights already include the Jacobians of
    the endpoint substitutions t = end_frac * s^2 and t = 1 - end_frac * s^2.
    The substituted integrand is analytic, so moderate end orders suffice and
    keep the innermost node clear of the pole-evaluation guard.
    """
    ts, ws = [], []
    edges = np.linspace(0, 1, n_end_panels + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        s, w = panel_nodes(a, b, end_order)
        ts.append(end_frac * s**2)
        ws.append(w * 2 * end_frac * s)
        ts.append(1 - end_frac * s**2)
        ws.append(w * 2 * end_frac * s)
    mids = np.linspace(end_frac, 1 - end_frac, n_mid_panels + 1)
    for a, b in zip(mids[:-1], mids[1:]):
        t, w = panel_nodes(a, b, mid_order)
        ts.append(t)
        ws.append(w)
    return np.concatenate(ts), np.concatenate(ws)


def edge_plan(order=10, sqrt_at=None):
    """Plan for a single mesh edge parametrized by t in [0, 1].

    sqrt_at: None for an analytic edge, 0 or 1 when that endpoint carries a
    square-root branch point (grid edges incident to a branch point).
    """
    if sqrt_at is None:
        return panel_nodes(0.0, 1.0, order)
    s, w = panel_nodes(0.0, 1.0, order)
    if sqrt_at == 0:
        return s**2, w * 2 * s
    if sqrt_at == 1:
        return 1 - s**2, w * 2 * s
    raise ValueError("sqrt_at must be None, 0 or 1")
