"""The Heisenberg group H^n in exponential coordinates.

Points are vectors (x^1, ..., x^{2n+1}); the first 2n coordinates are
horizontal, the last one is central.  The scalar product makes e_1..e_{2n+1}
orthonormal (unit vertical direction).
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .algebra import StratifiedAlgebra, heisenberg_algebra

__all__ = [
    "group_dim",
    "identity",
    "group_multiply",
    "group_inverse",
    "left_frame",
    "left_coframe",
    "dilation",
    "GeodesicState",
    "geodesic",
    "geodesic_velocity_field",
    "ball_parametrization",
    "cc_distance",
    "cc_distance_hv",
    "metric_factor_estimate",
    "VERTICAL_HALF_WIDTH",
]

# Extreme vertical coordinate on the unit ball, attained at mu0 = pi.
VERTICAL_HALF_WIDTH = 1.0 / (2.0 * np.pi)


def group_dim(p) -> int:
    m = len(p)
    if m % 2 != 1 or m < 3:
        raise ValueError("Heisenberg points have odd dimension 2n+1 >= 3")
    return (m - 1) // 2


def identity(n: int) -> np.ndarray:
    return np.zeros(2 * n + 1)


def group_multiply(p, q) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("dimension mismatch")
    n = group_dim(p)
    out = p + q
    out[2 * n] += 0.5 * (p[:n] @ q[n : 2 * n] - q[:n] @ p[n : 2 * n])
    return out


def group_inverse(p) -> np.ndarray:
    return -np.asarray(p, dtype=float)


def left_frame(p) -> np.ndarray:
    """Columns are the left-invariant fields e_1..e_{2n+1} at p (coordinates)."""
    p = np.asarray(p, dtype=float)
    n = group_dim(p)
    E = np.eye(2 * n + 1)
    E[2 * n, :n] = -0.5 * p[n : 2 * n]
    E[2 * n, n : 2 * n] = 0.5 * p[:n]
    return E


def left_coframe(p) -> np.ndarray:
    """Rows are the dual forms e^1..e^{2n+1} at p; inverse of left_frame."""
    p = np.asarray(p, dtype=float)
    n = group_dim(p)
    C = np.eye(2 * n + 1)
    C[2 * n, :n] = 0.5 * p[n : 2 * n]
    C[2 * n, n : 2 * n] = -0.5 * p[:n]
    return C


def dilation(lam: float, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    n = group_dim(p)
    out = lam * p
    out[2 * n] = lam * lam * p[2 * n]
    return out


def _sin_over(x):
    """sin(x)/x with the removable singularity filled in."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-2
    x2 = x * x
    series = 1.0 - x2 / 6.0 + x2 * x2 / 120.0
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.sin(x) / x
    return np.where(small, series, direct)


def _one_minus_cos_over(x):
    """(1 - cos x)/x with the removable singularity filled in."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-2
    x2 = x * x
    series = x * (0.5 - x2 / 24.0 + x2 * x2 / 720.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (1.0 - np.cos(x)) / x
    return np.where(small, series, direct)


def _x_minus_sin_over_sq(x):
    """(x - sin x)/x^2 with the removable singularity filled in."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-2
    x2 = x * x
    series = x * (1.0 / 6.0 - x2 / 120.0 + x2 * x2 / 5040.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (x - np.sin(x)) / x2
    return np.where(small, series, direct)


class GeodesicState:
    """Initial covector of a unit-time geodesic through the identity.

    mu0 is the vertical component, mu the 2n horizontal components; the
    curve speed equals |mu|.
    """

    def __init__(self, mu0: float, mu):
        self.mu0 = float(mu0)
        self.mu = np.asarray(mu, dtype=float)
        if self.mu.ndim != 1 or self.mu.size % 2 != 0:
            raise ValueError("mu must have even length 2n")

    @property
    def n(self) -> int:
        return self.mu.size // 2

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.mu))


def geodesic(state: GeodesicState, t) -> np.ndarray:
    """Closed-form geodesic point at time t (t may be an array).

    Horizontal components rotate with angular rate mu0; the vertical
    coordinate grows like the swept area.  mu0 = 0 gives a straight
    horizontal line.
    """
    t = np.asarray(t, dtype=float)
    n = state.n
    a, b = state.mu[:n], state.mu[n:]
    th = state.mu0 * t
    S = t * _sin_over(th)            # sin(mu0 t) / mu0
    C = t * _one_minus_cos_over(th)  # (1 - cos(mu0 t)) / mu0
    # (mu0 t - sin(mu0 t)) / (2 mu0^2) * |mu|^2, stable at mu0 -> 0.
    vert = 0.5 * (state.mu @ state.mu) * t * t * _x_minus_sin_over_sq(th)
    xj = np.multiply.outer(S, a) - np.multiply.outer(C, b)
    xjn = np.multiply.outer(C, a) + np.multiply.outer(S, b)
    return np.concatenate([xj, xjn, np.expand_dims(vert, -1) if t.ndim else [vert]], axis=-1)


def geodesic_velocity_field(state: GeodesicState):
    """Right-hand side of the geodesic ODE, for integration cross-checks.

    State vector y = (x^1..x^{2n+1}, lambda_1..lambda_{2n}); lambda rotates
    at rate mu0 and x follows the horizontal lift.
    """
    n = state.n
    mu0 = state.mu0

    def rhs(_t, y):
        lam = y[2 * n + 1 :]
        dx = np.empty(2 * n + 1)
        dx[: 2 * n] = lam
        dx[2 * n] = 0.5 * (y[:n] @ lam[n:] - lam[:n] @ y[n : 2 * n])
        dlam = np.empty(2 * n)
        dlam[:n] = -mu0 * lam[n:]
        dlam[n:] = mu0 * lam[:n]
        return np.concatenate([dx, dlam])

    return rhs


def ball_parametrization(mu0: float, mubar) -> np.ndarray:
    """Point of the closed unit ball with parameters (mu0, mubar).

    Requires |mu0| <= 2*pi and |mubar| <= 1; the boundary |mubar| = 1 is
    the unit sphere.
    """
    mubar = np.asarray(mubar, dtype=float)
    if abs(mu0) > 2.0 * np.pi + 1e-15:
        raise ValueError("mu0 outside [-2*pi, 2*pi]")
    r2 = float(mubar @ mubar)
    if r2 > 1.0 + 1e-12:
        raise ValueError("|mubar| > 1")
    eps = float(kernels.eps_factor(mu0))
    vert = float(_x_minus_sin_over_sq(mu0)) / 2.0 * r2
    return np.concatenate([eps * mubar, [vert]])


def cc_distance_hv(h, v):
    """Distance from the identity given |horizontal| and vertical parts."""
    return kernels.cc_distance_batch(h, v)


def cc_distance(p) -> float:
    """Carnot-Caratheodory distance from the identity to p."""
    p = np.asarray(p, dtype=float)
    n = group_dim(p)
    h = float(np.linalg.norm(p[: 2 * n]))
    return float(kernels.cc_distance_batch(h, p[2 * n]))


def _subspace_basis(subspace, n: int):
    """Validate an orthonormal basis containing the vertical direction.

    Returns the number of horizontal axes; the sampling box is a product of
    [-1, 1] per horizontal axis and the vertical slab.
    """
    B = np.column_stack([np.asarray(v, dtype=float) for v in subspace])
    if B.shape[0] != 2 * n + 1:
        raise ValueError("subspace vectors must have length 2n+1")
    m = B.shape[1]
    gram = B.T @ B
    if not np.allclose(gram, np.eye(m), atol=1e-10):
        raise ValueError("subspace basis is not orthonormal")
    ez = np.zeros(2 * n + 1)
    ez[2 * n] = 1.0
    coeff, res, *_ = np.linalg.lstsq(B, ez, rcond=None)
    if np.linalg.norm(B @ coeff - ez) > 1e-10:
        raise ValueError("subspace must contain the vertical direction e_{2n+1}")
    # Horizontal part of the subspace, orthonormalized.
    H = B - np.outer(ez, B[2 * n])
    q, r = np.linalg.qr(H)
    keep = np.abs(np.diag(r)) > 1e-12
    Hb = q[:, keep]
    if Hb.shape[1] != m - 1:
        raise ValueError("degenerate subspace basis")
    return m - 1


def metric_factor_estimate(subspace, samples: int, seed: int, n: int | None = None, batch: int = 1 << 19):
    """Monte-Carlo estimate of the unit-ball slice volume spanned by `subspace`.

    subspace: orthonormal vectors spanning the tangent-direction space; the
    vertical direction must lie in their span.  Returns (estimate,
    standard_error).  Sampling splits into fixed-size batches whose RNG
    substreams derive from (seed, batch index), so the result does not
    depend on how batches are scheduled.
    """
    if n is None:
        n = group_dim(np.asarray(subspace[0]))
    dim_h = _subspace_basis(subspace, n)
    volume = (2.0 ** dim_h) * 2.0 * VERTICAL_HALF_WIDTH
    total = 0
    hits = 0
    index = 0
    while total < samples:
        size = min(batch, samples - total)
        rng = np.random.default_rng([seed, index])
        c = rng.uniform(-1.0, 1.0, size=(size, dim_h))
        t = rng.uniform(-VERTICAL_HALF_WIDTH, VERTICAL_HALF_WIDTH, size=size)
        rho = kernels.cc_distance_batch(np.linalg.norm(c, axis=1), t)
        hits += int(np.count_nonzero(rho < 1.0))
        total += size
        index += 1
    p_hat = hits / total
    estimate = volume * p_hat
    stderr = volume * np.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / total)
    return estimate, stderr


def standard_algebra(n: int) -> StratifiedAlgebra:
    """Heisenberg algebra with the unit-vertical scalar product."""
    return heisenberg_algebra(n)
