"""Measure integrals and the first variation on parameter patches.

The induced measure of a patch is integrated with tensor-product
Gauss-Legendre rules.  For a one-parameter family of immersions the
derivative of the measure is computed two ways: a central difference of
the integral, and the geometric formula

    dV = int_M f^a(W) (H_a + sigma_a) dmu  +  boundary flux of W^T,

whose agreement is the working check of the theory.  The boundary term is
the outward flux through the parameter-box faces of the tangential part
of the variation field, contracted into the measure density.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .algebra import StratifiedAlgebra, left_frame_matrix
from .frames import FramedImmersion, Immersion

__all__ = [
    "QuadratureGrid",
    "VariationFamily",
    "mu_measure",
    "first_variation_numeric",
    "first_variation_analytic",
    "minimality_residual",
]


@dataclass
class QuadratureGrid:
    """Tensor-product Gauss-Legendre rule over a rectangular parameter box."""

    bounds: tuple
    order: int
    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def gauss_legendre(cls, bounds, order: int = 16) -> "QuadratureGrid":
        bounds = tuple((float(a), float(b)) for a, b in bounds)
        pts, wts = leggauss(order)
        axes, waxes = [], []
        for a, b in bounds:
            axes.append(0.5 * (b - a) * pts + 0.5 * (a + b))
            waxes.append(0.5 * (b - a) * wts)
        grids = np.meshgrid(*axes, indexing="ij")
        nodes = np.column_stack([g.ravel() for g in grids])
        wgrids = np.meshgrid(*waxes, indexing="ij")
        weights = np.prod(np.column_stack([w.ravel() for w in wgrids]), axis=1)
        return cls(bounds=bounds, order=order, nodes=nodes, weights=weights)

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def boundary_faces(self):
        """Quadrature on each face of the box with its outward axis and sign."""
        pts, wts = leggauss(self.order)
        m = self.dim
        for axis in range(m):
            others = [k for k in range(m) if k != axis]
            if others:
                axes_pts, axes_w = [], []
                for k in others:
                    a, b = self.bounds[k]
                    axes_pts.append(0.5 * (b - a) * pts + 0.5 * (a + b))
                    axes_w.append(0.5 * (b - a) * wts)
                grids = np.meshgrid(*axes_pts, indexing="ij")
                face_other = np.column_stack([g.ravel() for g in grids])
                wgrids = np.meshgrid(*axes_w, indexing="ij")
                face_w = np.prod(np.column_stack([w.ravel() for w in wgrids]), axis=1)
            else:
                face_other = np.zeros((1, 0))
                face_w = np.ones(1)
            for side, value in ((-1.0, self.bounds[axis][0]), (1.0, self.bounds[axis][1])):
                nodes = np.empty((face_other.shape[0], m))
                nodes[:, others] = face_other
                nodes[:, axis] = value
                yield {"axis": axis, "side": side, "nodes": nodes, "weights": face_w}


def _framed(im, alg) -> FramedImmersion:
    return im if isinstance(im, FramedImmersion) else FramedImmersion(im, alg)


def mu_measure(im, grid: QuadratureGrid, alg: StratifiedAlgebra | None = None) -> float:
    """Integral of the induced measure density over the parameter box."""
    fi = _framed(im, alg)
    return float(sum(w * fi.mu_density(u) for u, w in zip(grid.nodes, grid.weights)))


class VariationFamily:
    """One-parameter family of immersions F(w, .) with F(0, .) = base.

    deform(w, params) returns coordinates; the variation field W is the
    w-derivative at 0 (analytic callable, or a central difference).
    """

    def __init__(self, base: Immersion, deform, field=None, w_max: float = 0.1):
        self.base = base
        self.deform = deform
        self._field = field
        self.w_max = float(w_max)

    def immersion_at(self, w: float) -> Immersion:
        if abs(w) > self.w_max:
            raise ValueError("variation parameter beyond the declared range")
        return Immersion(
            lambda u, w=w: self.deform(w, u), self.base.domain_dim, self.base.ambient_dim
        )

    def field(self, params) -> np.ndarray:
        if self._field is not None:
            return np.asarray(self._field(params), dtype=float)
        h = 1e-6
        return (self.deform(h, params) - self.deform(-h, params)) / (2.0 * h)

    @classmethod
    def from_normal_bump(cls, base: Immersion, alg: StratifiedAlgebra, grid_bounds, normal_index: int = 0, w_max: float = 0.05):
        """Deform along an adapted normal frame direction with a boundary-fixed bump."""
        fi = FramedImmersion(base, alg)
        bounds = tuple(grid_bounds)

        def bump(u):
            val = 1.0
            for (a, b), x in zip(bounds, u):
                val *= np.sin(np.pi * (x - a) / (b - a)) ** 2
            return val

        def field(u):
            fr = fi.frame(u)
            E = left_frame_matrix(alg, fr.point)
            return bump(u) * (E @ fr.vectors[:, normal_index])

        def deform(w, u):
            return base.point(u) + w * field(u)

        return cls(base, deform, field=field, w_max=w_max)


def first_variation_numeric(fam: VariationFamily, grid: QuadratureGrid, alg: StratifiedAlgebra, eps: float = 1e-4) -> dict:
    """Central difference of the measure, with one Richardson refinement."""

    def measure(w):
        return mu_measure(fam.immersion_at(w), grid, alg)

    coarse = (measure(eps) - measure(-eps)) / (2.0 * eps)
    fine = (measure(eps / 2.0) - measure(-eps / 2.0)) / eps
    return {"value": (4.0 * fine - coarse) / 3.0, "coarse": coarse, "fine": fine, "eps": eps}


def first_variation_analytic(fam: VariationFamily, grid: QuadratureGrid, alg: StratifiedAlgebra, h: float | None = None) -> dict:
    """Interior curvature term and boundary flux of the first variation."""
    fi = _framed(fam.base, alg)
    interior = 0.0
    for u, w in zip(grid.nodes, grid.weights):
        sd = fi.shape_data(u, h=h)
        fr = sd.frame
        E = left_frame_matrix(alg, fr.point)
        We = np.linalg.solve(E, fam.field(u))
        interior += w * fi.mu_density(u, fr) * float(fr.normal_coeffs(We) @ (sd.H + sd.sigma))

    boundary = 0.0
    for face in grid.boundary_faces():
        axis, side = face["axis"], face["side"]
        for u, w in zip(face["nodes"], face["weights"]):
            fr = fi.frame(u)
            E = left_frame_matrix(alg, fr.point)
            We = np.linalg.solve(E, fam.field(u))
            Wtop = We - fr.vectors[:, : fi.p] @ fr.normal_coeffs(We)
            c, *_ = np.linalg.lstsq(fr.tangent, Wtop, rcond=None)
            boundary += w * side * fi.mu_density(u, fr) * c[axis]
    return {"interior": float(interior), "boundary": float(boundary), "total": float(interior + boundary)}


def minimality_residual(im, grid: QuadratureGrid, alg: StratifiedAlgebra | None = None, h: float | None = None, worst: int = 3) -> dict:
    """Grid norms of the defect H + sigma on the normal frame.

    The pointwise value is the Euclidean norm of the vector
    (H_{f_a} + sigma_{f_a})_a, which does not depend on the normal-frame
    gauge.  Returns the sup norm, the measure-weighted L2 norm, the
    diagnostic norm of H - sigma, and the worst offending nodes.
    """
    fi = _framed(im, alg)
    values = []
    diag = []
    total_w = 0.0
    l2 = 0.0
    for u, w in zip(grid.nodes, grid.weights):
        sd = fi.shape_data(u, h=h)
        r = float(np.linalg.norm(sd.H + sd.sigma))
        values.append((r, u))
        diag.append(float(np.linalg.norm(sd.H - sd.sigma)))
        dens = fi.mu_density(u, sd.frame)
        l2 += w * dens * r * r
        total_w += w * dens
    values.sort(key=lambda t: -t[0])
    return {
        "sup": values[0][0] if values else 0.0,
        "l2": float(np.sqrt(max(l2, 0.0))),
        "mean_square": float(np.sqrt(max(l2 / total_w, 0.0))) if total_w else 0.0,
        "h_minus_sigma_sup": max(diag) if diag else 0.0,
        "worst": [{"residual": r, "u": u.tolist()} for r, u in values[:worst]],
        "nodes": len(values),
    }
