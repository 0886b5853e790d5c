"""Explicit surface constructions in Heisenberg groups.

Covers the complex/rotation operators on the horizontal plane of H^2, the
orthonormal frames they generate, the rotation ODE for surfaces swept by
horizontal curves with its closed-form fundamental matrix, ruled and
tube-shaped surfaces built over a transverse curve, vertical cylinders
over Euclidean submanifolds, and the PDE machinery for vertical graphs
(horizontal gradient, divergence-form curvature, graph residual).
"""

from __future__ import annotations

import numpy as np

from . import heisenberg as hg
from .algebra import StratifiedAlgebra, heisenberg_algebra, left_frame_matrix
from .frames import FramedImmersion, Immersion

__all__ = [
    "CharacteristicPointError",
    "J_MATRIX",
    "R_MATRIX",
    "apply_J",
    "apply_R",
    "jr_frame",
    "system_matrix",
    "fundamental_matrix",
    "TransverseCurve",
    "circle_curve",
    "vertical_line_curve",
    "ruled_surface",
    "tubular_surface",
    "surface_from_curve",
    "explicit_circle_tube",
    "vertical_cylinder",
    "GraphFunction",
    "QuadraticGraph",
    "hyperbolic_paraboloid",
    "graph_immersion",
    "graph_level_function",
    "graph_horizontal_gradient",
    "graph_residual",
    "divergence_mean_curvature",
    "jr_shape_coefficients",
]


class CharacteristicPointError(ValueError):
    """The horizontal gradient vanishes (characteristic point of a graph)."""


# The complex-structure operator J and the rotation operator R on the
# horizontal plane of H^2.  J is the unique linear map with J e1 = e3,
# J e2 = e4 and J^2 = -Id (so J e3 = -e1, J e4 = -e2); R sends e1 -> e2,
# e3 -> -e4 with R^2 = -Id.  They anticommute and both are orthogonal.
J_MATRIX = np.array(
    [
        [0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
    ]
)
R_MATRIX = np.array(
    [
        [0.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ]
)


def _horizontal4(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape == (5,):
        if abs(x[4]) > 1e-12:
            raise ValueError("vector is not horizontal")
        return x[:4]
    if x.shape != (4,):
        raise ValueError("expected a horizontal vector of H^2")
    return x


def apply_J(x) -> np.ndarray:
    return J_MATRIX @ _horizontal4(x)


def apply_R(x) -> np.ndarray:
    return R_MATRIX @ _horizontal4(x)


def jr_frame(f4) -> np.ndarray:
    """Columns f1..f4 of the orthonormal horizontal frame generated by f4.

    f3 = R f4, f2 = -J f4, f1 = -R f2; the only nonzero pointwise brackets
    are [f1, f3] = [f2, f4] = e5.
    """
    f4 = _horizontal4(f4)
    if abs(np.linalg.norm(f4) - 1.0) > 1e-10:
        raise ValueError("f4 must be a unit vector")
    f3 = R_MATRIX @ f4
    f2 = -(J_MATRIX @ f4)
    f1 = -(R_MATRIX @ f2)
    return np.column_stack([f1, f2, f3, f4])


def system_matrix(b1: float, b3: float) -> np.ndarray:
    """Coefficient matrix of the frame rotation ODE d a/ds = M a."""
    return np.array(
        [
            [0.0, -b3, 0.0, b1],
            [b3, 0.0, -b1, 0.0],
            [0.0, b1, 0.0, b3],
            [-b1, 0.0, -b3, 0.0],
        ]
    )


def fundamental_matrix(b1: float, b3: float, s: float) -> np.ndarray:
    """Closed-form solution Phi(s) of the rotation ODE; orthogonal, Phi(0)=I."""
    b = float(np.hypot(b1, b3))
    if b == 0.0:
        raise ValueError("b1 = b3 = 0: the ruled branch has no rotation")
    cs = np.cos(s * b)
    k1 = b1 * np.sin(s * b) / b
    k3 = b3 * np.sin(s * b) / b
    return np.array(
        [
            [cs, -k3, 0.0, k1],
            [k3, cs, -k1, 0.0],
            [0.0, k1, cs, k3],
            [-k1, 0.0, -k3, cs],
        ]
    )


class TransverseCurve:
    """Curve in H^2 transverse to the horizontal distribution, with a unit
    horizontal direction field along it.

    gamma(t) returns coordinates, f4(t) the horizontal algebra coefficients
    of the direction field; dgamma is optional and replaced by central
    differences when absent.
    """

    def __init__(self, gamma, f4, dgamma=None, name: str = ""):
        self.gamma = gamma
        self.f4 = f4
        self.dgamma = dgamma
        self.name = name

    def velocity(self, t: float, h: float = 1e-6) -> np.ndarray:
        if self.dgamma is not None:
            return np.asarray(self.dgamma(t), dtype=float)
        return (np.asarray(self.gamma(t + h), dtype=float) - np.asarray(self.gamma(t - h), dtype=float)) / (2.0 * h)

    def data(self, t: float) -> dict:
        """Frame, decomposition coefficients and rotation coefficients at t.

        The velocity splits as lam1 * f4 + lam2 * f5 with
        f5 = e5 - sum_a A5[a] f_a; transversality requires lam2 != 0.
        The rotation coefficients follow the tube convention
        b1 = -A5^3, b3 = +A5^1.
        """
        point = np.asarray(self.gamma(t), dtype=float)
        f4 = np.asarray(self.f4(t), dtype=float)
        nrm = np.linalg.norm(f4)
        if abs(nrm - 1.0) > 1e-8:
            raise ValueError("direction field is not unit length")
        frame = jr_frame(f4 / nrm)
        E = hg.left_frame(point)
        v = np.linalg.solve(E, self.velocity(t))
        lam2 = v[4]
        if abs(lam2) < 1e-12:
            raise ValueError(f"curve is not transverse at t={t}")
        lam1 = float(v[:4] @ f4)
        A5 = -(frame[:, :3].T @ (v[:4] - lam1 * f4)) / lam2
        b1, b3 = -A5[2], A5[0]
        return {
            "point": point,
            "frame": frame,
            "lam1": lam1,
            "lam2": float(lam2),
            "A5": A5,
            "b1": float(b1),
            "b3": float(b3),
            "b": float(np.hypot(b1, b3)),
        }


def circle_curve(r: float) -> TransverseCurve:
    """Horizontal-plane circle of radius r with the rotating direction field."""

    def gamma(t):
        return np.array([r * np.cos(t / r), 0.0, r * np.sin(t / r), 0.0, 0.0])

    def dgamma(t):
        return np.array([-np.sin(t / r), 0.0, np.cos(t / r), 0.0, 0.0])

    def f4(t):
        return np.array([0.0, np.cos(t / r), 0.0, np.sin(t / r)])

    return TransverseCurve(gamma, f4, dgamma=dgamma, name=f"circle(r={r})")


def vertical_line_curve(direction=None) -> TransverseCurve:
    """Vertical axis with a constant horizontal direction field."""
    d = np.array([1.0, 0.0, 0.0, 0.0]) if direction is None else np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)

    def gamma(t):
        return np.array([0.0, 0.0, 0.0, 0.0, t])

    def dgamma(t):
        return np.array([0.0, 0.0, 0.0, 0.0, 1.0])

    return TransverseCurve(gamma, lambda t: d, dgamma=dgamma, name="vertical-line")


def _displace(point, horizontal) -> np.ndarray:
    """Left-invariant horizontal displacement of a point of H^2."""
    step = np.zeros(5)
    step[:4] = horizontal
    return hg.group_multiply(point, step)


def ruled_surface(curve: TransverseCurve) -> Immersion:
    """Surface swept by horizontal lines along the curve: phi(t, s) = gamma(t) . (s f4)."""

    def fn(u):
        t, s = u
        d = curve.data(t)
        return _displace(d["point"], s * d["frame"][:, 3])

    def jac(u):
        t, s = u
        h = 1e-6
        col_t = (fn((t + h, s)) - fn((t - h, s))) / (2.0 * h)
        d = curve.data(t)
        phi = _displace(d["point"], s * d["frame"][:, 3])
        col_s = hg.left_frame(phi) @ np.concatenate([d["frame"][:, 3], [0.0]])
        return np.column_stack([col_t, col_s])

    return Immersion(fn, 2, 5, jacobian=jac, name=f"ruled[{curve.name}]")


def tubular_surface(curve: TransverseCurve, t_range=None, check_points: int = 33) -> Immersion:
    """Surface swept by horizontal circles along the curve.

    phi(t, s) = gamma(t) . ( sin(s b)/b f4 - (cos(s b) - 1)/b^2 (b3 f3 + b1 f1) ),
    a left-invariant displacement in the frame at gamma(t).  Requires the
    rotation coefficient b(t) to stay away from zero; pass t_range to check.
    """
    if t_range is not None:
        for t in np.linspace(t_range[0], t_range[1], check_points):
            if curve.data(t)["b"] < 1e-10:
                raise ValueError(f"b(t) vanishes near t={t}; split the range or use ruled_surface")

    def fn(u):
        t, s = u
        d = curve.data(t)
        b1, b3, b = d["b1"], d["b3"], d["b"]
        fr = d["frame"]
        disp = (np.sin(s * b) / b) * fr[:, 3] - ((np.cos(s * b) - 1.0) / b**2) * (b3 * fr[:, 2] + b1 * fr[:, 0])
        return _displace(d["point"], disp)

    def jac(u):
        t, s = u
        h = 1e-6
        col_t = (fn((t + h, s)) - fn((t - h, s))) / (2.0 * h)
        d = curve.data(t)
        a_ts = fundamental_matrix(d["b1"], d["b3"], s) @ d["frame"][:, 3]
        phi = fn(u)
        col_s = hg.left_frame(phi) @ np.concatenate([a_ts, [0.0]])
        return np.column_stack([col_t, col_s])

    return Immersion(fn, 2, 5, jacobian=jac, name=f"tubular[{curve.name}]")


def surface_from_curve(curve: TransverseCurve, t_range, check_points: int = 33):
    """Build the swept surface determined by (gamma, f4).

    Extracts the rotation coefficients b1 = -A5^3, b3 = +A5^1 from the
    curve data and dispatches to the ruled branch when they vanish
    identically, or to the tube branch otherwise.  Mixed ranges (b crossing
    zero) are rejected.  Returns (immersion, info).
    """
    ts = np.linspace(t_range[0], t_range[1], check_points)
    data = [curve.data(t) for t in ts]
    bs = np.array([d["b"] for d in data])
    info = {
        "convention": "b1 = -A5^3, b3 = +A5^1",
        "b_min": float(bs.min()),
        "b_max": float(bs.max()),
        "t_range": [float(t_range[0]), float(t_range[1])],
    }
    if bs.max() < 1e-10:
        info["kind"] = "ruled"
        return ruled_surface(curve), info
    if bs.min() < 1e-10:
        raise ValueError("b(t) crosses zero inside the range; split it")
    info["kind"] = "tubular"
    return tubular_surface(curve, t_range=t_range, check_points=check_points), info


def explicit_circle_tube(r: float) -> Immersion:
    """Closed-form tube over the circle of radius r (reference parametrization)."""

    def fn(u):
        t, s = u
        ct, st = np.cos(t / r), np.sin(t / r)
        c2, s2 = np.cos(2.0 * s / r), np.sin(2.0 * s / r)
        return 0.5 * r * np.array([ct * (1.0 + c2), s2 * ct, st * (1.0 + c2), s2 * st, 0.0])

    return Immersion(fn, 2, 5, name=f"circle-tube(r={r})")


def vertical_cylinder(base_fn, base_dim: int, n: int, base_jacobian=None, name: str = "") -> Immersion:
    """Cylinder (M x vertical line) over a patch M of the horizontal plane R^{2n}.

    Parameters are (u_1..u_k, t); the map is (base_fn(u), t).
    """

    def fn(params):
        params = np.asarray(params, dtype=float)
        base = np.asarray(base_fn(params[:base_dim]), dtype=float)
        return np.concatenate([base, [params[base_dim]]])

    jac = None
    if base_jacobian is not None:

        def jac(params):
            params = np.asarray(params, dtype=float)
            Jb = np.asarray(base_jacobian(params[:base_dim]), dtype=float)
            out = np.zeros((2 * n + 1, base_dim + 1))
            out[: 2 * n, :base_dim] = Jb
            out[2 * n, base_dim] = 1.0
            return out

    return Immersion(fn, base_dim + 1, 2 * n + 1, jacobian=jac, name=name or "vertical-cylinder")


# -- vertical graphs -----------------------------------------------------------


class GraphFunction:
    """Function u on the horizontal coordinates with derivatives.

    Subclasses provide value(); gradient and hessian default to central
    differences sized for smooth double-precision inputs.
    """

    def __init__(self, n: int):
        self.n = int(n)

    def value(self, x) -> float:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        h = 1e-6 * max(1.0, float(np.max(np.abs(x))))
        g = np.empty(2 * self.n)
        for i in range(2 * self.n):
            dx = np.zeros(2 * self.n)
            dx[i] = h
            g[i] = (self.value(x + dx) - self.value(x - dx)) / (2.0 * h)
        return g

    def hessian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        h = 1e-2 * max(1.0, float(np.max(np.abs(x))))
        m = 2 * self.n
        H = np.empty((m, m))
        f0 = self.value(x)
        for i in range(m):
            ei = np.zeros(m)
            ei[i] = h
            H[i, i] = (self.value(x + ei) - 2.0 * f0 + self.value(x - ei)) / h**2
            for j in range(i + 1, m):
                ej = np.zeros(m)
                ej[j] = h
                H[i, j] = H[j, i] = (
                    self.value(x + ei + ej) - self.value(x + ei - ej) - self.value(x - ei + ej) + self.value(x - ei - ej)
                ) / (4.0 * h**2)
        return H


class QuadraticGraph(GraphFunction):
    """u(x) = x^T Q x / 2 + b . x with exact derivatives."""

    def __init__(self, Q, b=None):
        Q = np.asarray(Q, dtype=float)
        super().__init__(Q.shape[0] // 2)
        self.Q = (Q + Q.T) / 2.0
        self.b = np.zeros(Q.shape[0]) if b is None else np.asarray(b, dtype=float)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * float(x @ self.Q @ x) + float(self.b @ x)

    def gradient(self, x):
        return self.Q @ np.asarray(x, dtype=float) + self.b

    def hessian(self, x):
        return self.Q.copy()


def hyperbolic_paraboloid(n: int) -> QuadraticGraph:
    """u(x) = (1/4) sum_i (x_i^2 - x_{i+n}^2); a minimal vertical graph."""
    Q = np.diag(np.concatenate([np.full(n, 0.5), np.full(n, -0.5)]))
    return QuadraticGraph(Q)


def graph_immersion(g: GraphFunction, name: str = "") -> Immersion:
    """Vertical graph x -> (x, u(x)) as an immersion into H^n."""
    n = g.n

    def fn(x):
        x = np.asarray(x, dtype=float)
        return np.concatenate([x, [g.value(x)]])

    def jac(x):
        out = np.zeros((2 * n + 1, 2 * n))
        out[: 2 * n] = np.eye(2 * n)
        out[2 * n] = g.gradient(x)
        return out

    return Immersion(fn, 2 * n, 2 * n + 1, jacobian=jac, name=name or "graph")


def graph_level_function(g: GraphFunction):
    """Level function phi(y) = u(y_h) - y_vert with its coordinate gradient."""
    n = g.n

    def value(y):
        y = np.asarray(y, dtype=float)
        return g.value(y[: 2 * n]) - y[2 * n]

    def gradient(y):
        y = np.asarray(y, dtype=float)
        return np.concatenate([g.gradient(y[: 2 * n]), [-1.0]])

    return value, gradient


def graph_horizontal_gradient(g: GraphFunction, x) -> np.ndarray:
    """Components of the horizontal gradient of u(x_h) - x_vert along e_1..e_{2n}.

    With the left-invariant fields of the exponential coordinates these are
    phi_j = u_j + x_{j+n}/2 and phi_{j+n} = u_{j+n} - x_j/2.
    """
    x = np.asarray(x, dtype=float)[: 2 * g.n]
    grad = g.gradient(x)
    n = g.n
    phi = np.empty(2 * n)
    phi[:n] = grad[:n] + 0.5 * x[n:]
    phi[n:] = grad[n:] - 0.5 * x[:n]
    return phi


def graph_residual(g: GraphFunction, x) -> float:
    """Defect of the minimal-graph equation at x.

    sum_i u_ii - (1/N^2) sum_ij phi_i phi_j u_ij with N = |phi|; zero exactly
    on minimal vertical graphs.  Raises at characteristic points (N = 0).
    """
    phi = graph_horizontal_gradient(g, x)
    N2 = float(phi @ phi)
    if N2 < 1e-24:
        raise CharacteristicPointError(f"characteristic point at x={x!r}")
    Hu = g.hessian(np.asarray(x, dtype=float)[: 2 * g.n])
    return float(np.trace(Hu) - (phi @ Hu @ phi) / N2)


def divergence_mean_curvature(phi_value, x, n: int, phi_gradient=None, h: float = 1e-4) -> float:
    """Divergence of the unit horizontal gradient of a level function.

    Computes sum_k e_k( phi_k / |grad_D phi| ) at x by central differences
    along the left-invariant directions; phi_k = e_k(phi).  Equals the mean
    curvature of the level set through x up to the frame-orientation sign.
    Raises at characteristic points.
    """
    x = np.asarray(x, dtype=float)

    if phi_gradient is None:
        def coord_grad(y, step=1e-6):
            out = np.empty(2 * n + 1)
            for i in range(2 * n + 1):
                dy = np.zeros(2 * n + 1)
                dy[i] = step
                out[i] = (phi_value(y + dy) - phi_value(y - dy)) / (2.0 * step)
            return out
    else:
        coord_grad = phi_gradient

    def unit_horizontal(y):
        E = hg.left_frame(y)
        horiz = coord_grad(y) @ E[:, : 2 * n]
        N = np.linalg.norm(horiz)
        if N < 1e-12:
            raise CharacteristicPointError(f"characteristic point at {y!r}")
        return horiz / N

    E0 = hg.left_frame(x)
    div = 0.0
    for k in range(2 * n):
        v = E0[:, k]
        div += (unit_horizontal(x + h * v)[k] - unit_horizontal(x - h * v)[k]) / (2.0 * h)
    return float(div)


# -- two-dimensional surfaces of H^2: shape data in the JR gauge ---------------


def jr_shape_coefficients(im: Immersion, u, h: float = 1e-6, f4_ref=None) -> dict:
    """Rotation and decomposition coefficients of a 2-surface of H^2 in the
    frame generated by its horizontal tangent direction.

    Returns omega_4^1(f4), omega_4^3(f4) (the local rotation coefficients),
    the coefficients A5 of the non-horizontal frame vector, and the mean
    curvature/torsion components in this gauge.  The sign of f4 is free;
    pass f4_ref to pick the orientation with positive overlap.
    """
    alg = heisenberg_algebra(2)
    fi = FramedImmersion(im, alg)
    u = np.asarray(u, dtype=float)

    def f4_at(v, ref=None):
        fr = fi.frame(v)
        f4 = fr.vectors[:4, 3]
        if ref is not None and f4 @ ref < 0:
            f4 = -f4
        return f4 / np.linalg.norm(f4), fr

    f4, fr0 = f4_at(u, ref=f4_ref)
    frame = jr_frame(f4)
    c4 = fi.tangent_direction(fr0, np.concatenate([f4, [0.0]]))
    step = h / max(np.linalg.norm(c4), 1e-300)
    fp, _ = f4_at(u + step * c4, ref=f4)
    fm, _ = f4_at(u - step * c4, ref=f4)
    da = (fp - fm) / (2.0 * step)
    b1 = float(da @ frame[:, 0])
    b2 = float(da @ frame[:, 1])
    b3 = float(da @ frame[:, 2])

    T = fr0.tangent
    # Non-horizontal tangent direction: velocity with unit vertical component.
    w = None
    for k in range(T.shape[1]):
        if abs(T[4, k]) > 1e-12:
            w = T[:, k] / T[4, k]
            break
    if w is None:
        raise ValueError("surface is horizontal at this point")
    w = w - (w[:4] @ f4) * np.concatenate([f4, [0.0]])
    A5 = -(frame[:, :3].T @ w[:4])
    H = np.array([-b1, -b2, -b3])
    sigma = np.array([A5[2], 0.0, -A5[0]])
    return {
        "omega41": b1,
        "omega42": b2,
        "omega43": b3,
        "A5": A5,
        "H": H,
        "sigma": sigma,
        "point": fr0.point,
        "f4": f4,
    }
