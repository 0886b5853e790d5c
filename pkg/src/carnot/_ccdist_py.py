"""Numpy implementation of the Carnot-Caratheodory distance kernel for H^n.

The distance from the identity depends only on the Euclidean norm h of the
horizontal part and the vertical coordinate v.  For h > 0 the geodesic
parameter mu in (0, 2*pi) solves

    (mu - sin mu) / (4 (1 - cos mu)) = |v| / h**2

(the left side is strictly increasing), after which rho = h / eps(mu) with
eps(mu) = sqrt(2 (1 - cos mu)) / mu.  On the vertical axis rho =
sqrt(4*pi*|v|).  Series branches keep the small-mu regime stable.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi
_SMALL = 1e-2
_BISECT_STEPS = 64


def eps_factor(mu):
    """sqrt(2(1-cos mu))/|mu|, the horizontal shrink factor; eps(0) = 1."""
    mu = np.asarray(mu, dtype=float)
    small = np.abs(mu) < _SMALL
    m2 = mu * mu
    series = 1.0 - m2 / 24.0 + m2 * m2 / 1920.0
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.sqrt(np.maximum(2.0 * (1.0 - np.cos(mu)), 0.0)) / np.abs(mu)
    return np.where(small, series, direct)


def vertical_ratio(mu):
    """(mu - sin mu) / (4 (1 - cos mu)); equals |v|/h^2 on the unit sphere."""
    mu = np.asarray(mu, dtype=float)
    small = np.abs(mu) < _SMALL
    m2 = mu * mu
    series = (mu / 12.0) * (1.0 + m2 / 30.0 + m2 * m2 / 840.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (mu - np.sin(mu)) / (4.0 * (1.0 - np.cos(mu)))
    return np.where(small, series, direct)


def solve_mu(q):
    """Inverse of vertical_ratio on (0, 2*pi) by bisection; q >= 0."""
    q = np.asarray(q, dtype=float)
    lo = np.zeros_like(q)
    hi = np.full_like(q, TWO_PI)
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        below = vertical_ratio(mid) < q
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def cc_distance_batch(h, v):
    """Distance from the identity for batches of (|horizontal|, vertical)."""
    h = np.asarray(h, dtype=float)
    v = np.abs(np.asarray(v, dtype=float))
    out = np.empty(np.broadcast(h, v).shape)
    h, v = np.broadcast_arrays(h, v)
    on_axis = h == 0.0
    flat = v == 0.0
    out[on_axis] = np.sqrt(4.0 * np.pi * v[on_axis])
    out[flat] = h[flat]
    rest = ~(on_axis | flat)
    if rest.any():
        mu = solve_mu(v[rest] / h[rest] ** 2)
        out[rest] = h[rest] / eps_factor(mu)
    return out
