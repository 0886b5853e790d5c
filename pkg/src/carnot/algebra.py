"""Stratified (Carnot) Lie algebras given by structure constants.

An algebra is stored as layer dimensions d_1..d_r, a sparse table of
structure constants c_ij^k (1-based indices, antisymmetric in i,j) and a
scalar product on the underlying vector space.  The scalar product on the
first layer is always the identity in the chosen basis; higher layers may
carry the identity, an explicit block, or the canonical extension built
from the bracket map.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import factorial

import numpy as np

__all__ = [
    "StratifiedAlgebra",
    "ValidationReport",
    "bracket",
    "torsion",
    "degree",
    "validate",
    "canonical_metric_extension",
    "hausdorff_dimension",
    "left_frame_matrix",
    "heisenberg_algebra",
    "free_step_two_algebra",
    "engel_algebra",
    "load_algebra",
    "dump_algebra",
]

RANK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class StratifiedAlgebra:
    """Stratified Lie algebra with a scalar product.

    layer_dims : dimensions (d_1, ..., d_r) of the layers.
    constants  : map (i, j, k) -> c_ij^k with 1 <= i < j <= n; the
                 antisymmetric counterpart is implied.
    metric     : (n, n) symmetric positive-definite matrix, block
                 diagonal by layer, identity on layer 1.
    """

    layer_dims: tuple[int, ...]
    constants: dict[tuple[int, int, int], float]
    metric: np.ndarray = None

    def __post_init__(self):
        n = self.dim
        for (i, j, k) in self.constants:
            if not (1 <= i < j <= n and 1 <= k <= n):
                raise ValueError(f"bracket entry ({i},{j},{k}) out of range for n={n}")
        metric = np.eye(n) if self.metric is None else np.asarray(self.metric, dtype=float)
        if metric.shape != (n, n):
            raise ValueError("metric has wrong shape")
        object.__setattr__(self, "metric", metric)
        object.__setattr__(self, "_tensor", None)

    @property
    def dim(self) -> int:
        return int(sum(self.layer_dims))

    @property
    def step(self) -> int:
        return len(self.layer_dims)

    @property
    def degrees(self) -> np.ndarray:
        """Array of length n; entry m is the degree of basis vector e_{m+1}."""
        return np.repeat(np.arange(1, self.step + 1), self.layer_dims)

    def layer_slice(self, level: int) -> slice:
        """0-based slice of the basis indices in layer `level` (1-based level)."""
        start = int(sum(self.layer_dims[: level - 1]))
        return slice(start, start + self.layer_dims[level - 1])

    @property
    def tensor(self) -> np.ndarray:
        """Dense (n, n, n) array c[i, j, k] of structure constants, 0-based."""
        if self._tensor is None:
            n = self.dim
            c = np.zeros((n, n, n))
            for (i, j, k), v in self.constants.items():
                c[i - 1, j - 1, k - 1] += v
                c[j - 1, i - 1, k - 1] -= v
            object.__setattr__(self, "_tensor", c)
        return self._tensor

    def inner(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(np.asarray(x) @ self.metric @ np.asarray(y))

    def with_metric(self, metric: np.ndarray) -> "StratifiedAlgebra":
        return StratifiedAlgebra(self.layer_dims, dict(self.constants), metric)


def degree(k: int, alg: StratifiedAlgebra) -> int:
    """Degree of the basis vector e_k (1-based index)."""
    if not 1 <= k <= alg.dim:
        raise IndexError(f"basis index {k} out of range 1..{alg.dim}")
    return int(alg.degrees[k - 1])


def bracket(x: np.ndarray, y: np.ndarray, alg: StratifiedAlgebra) -> np.ndarray:
    """Lie bracket [x, y] of coefficient vectors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (alg.dim,) or y.shape != (alg.dim,):
        raise ValueError("vector dimension mismatch")
    return np.einsum("i,j,ijk->k", x, y, alg.tensor)


def torsion(x: np.ndarray, y: np.ndarray, alg: StratifiedAlgebra) -> np.ndarray:
    """Torsion of the flat left-invariant connection: -[x, y]."""
    return -bracket(x, y, alg)


@dataclass
class ValidationReport:
    violations: list[tuple[str, float]] = field(default_factory=list)

    def add(self, name: str, residual: float, tol: float = RANK_TOL):
        if residual > tol:
            self.violations.append((name, float(residual)))

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        if self.ok:
            return "valid"
        return "; ".join(f"{name} (residual {r:.3e})" for name, r in self.violations)


def validate(alg: StratifiedAlgebra) -> ValidationReport:
    """Check the stratification axioms; the report lists every violation."""
    report = ValidationReport()
    c = alg.tensor
    n = alg.dim
    deg = alg.degrees

    report.add("antisymmetry", float(np.abs(c + c.transpose(1, 0, 2)).max()))

    # Jacobi: sum over cyclic permutations of c_ij^m c_mk^l.
    jac = (
        np.einsum("ijm,mkl->ijkl", c, c)
        + np.einsum("jkm,mil->ijkl", c, c)
        + np.einsum("kim,mjl->ijkl", c, c)
    )
    report.add("jacobi", float(np.abs(jac).max()))

    # Grading: c_ij^k = 0 unless deg k = deg i + deg j.
    bad = deg[:, None, None] + deg[None, :, None] != deg[None, None, :]
    report.add("grading", float(np.abs(c[bad]).max()) if bad.any() else 0.0)

    # Generation: brackets of layer 1 with layer m span layer m+1.
    scale = max(1.0, float(np.abs(c).max()))
    for m in range(1, alg.step):
        s1, sm, snext = alg.layer_slice(1), alg.layer_slice(m), alg.layer_slice(m + 1)
        img = c[s1, sm, snext].reshape(-1, alg.layer_dims[m])
        rank = np.linalg.matrix_rank(img, tol=RANK_TOL * scale)
        if rank < alg.layer_dims[m]:
            report.add(f"generation(layer {m + 1})", 1.0, tol=0.0)

    g = alg.metric
    report.add("metric symmetry", float(np.abs(g - g.T).max()))
    d1 = alg.layer_dims[0]
    report.add("metric layer-1 orthonormal", float(np.abs(g[:d1, :d1] - np.eye(d1)).max()))
    for la in range(1, alg.step + 1):
        sl = alg.layer_slice(la)
        off = g[sl].copy()
        off[:, sl] = 0.0
        report.add("metric block-diagonal", float(np.abs(off).max()))
    try:
        eig = np.linalg.eigvalsh((g + g.T) / 2)
        report.add("metric positive-definite", float(max(0.0, -eig.min())), tol=0.0)
    except np.linalg.LinAlgError:
        report.add("metric positive-definite", np.inf, tol=0.0)

    return report


def canonical_metric_extension(alg: StratifiedAlgebra) -> StratifiedAlgebra:
    """Extend the layer-1 scalar product to all layers through the bracket.

    Layer by layer, the bracket map B(x (x) y) = [x, y] from
    layer1 (x) layer_k onto layer_{k+1} is restricted to the orthogonal
    complement of its kernel, where it is declared an isometry.  Raises if
    B fails to be surjective (broken stratification).
    """
    n = alg.dim
    c = alg.tensor
    metric = np.eye(n)
    d1 = alg.layer_dims[0]
    s1 = alg.layer_slice(1)
    for k in range(1, alg.step):
        sk, snext = alg.layer_slice(k), alg.layer_slice(k + 1)
        dk, dnext = alg.layer_dims[k - 1], alg.layer_dims[k]
        # B as a (dnext, d1*dk) matrix in the tensor-product basis.
        B = c[s1, sk, snext].reshape(d1 * dk, dnext).T
        # Orthonormalize the tensor factor: G_tensor = I (x) G_k.
        Gk = metric[sk, sk.start : sk.stop]
        L = np.linalg.cholesky(Gk)
        B_on = B @ np.kron(np.eye(d1), np.linalg.inv(L).T)
        U, sv, _ = np.linalg.svd(B_on, full_matrices=False)
        if sv.size < dnext or sv[dnext - 1] <= RANK_TOL * sv[0]:
            raise ValueError(f"bracket map onto layer {k + 1} is not surjective")
        Gnext = U @ np.diag(sv**-2.0) @ U.T
        metric[snext, snext.start : snext.stop] = (Gnext + Gnext.T) / 2
    return alg.with_metric(metric)


def hausdorff_dimension(alg: StratifiedAlgebra) -> int:
    """Homogeneous dimension Q = sum_i i * d_i."""
    return int(sum((i + 1) * d for i, d in enumerate(alg.layer_dims)))


# Coefficients of z / (1 - e^{-z}): left-translation differential in
# exponential coordinates is the series sum_m coeff[m] * ad_x^m.
_BERNOULLI_PLUS = [1.0, 0.5, 1.0 / 12, 0.0, -1.0 / 720, 0.0, 1.0 / 30240, 0.0]


def left_frame_matrix(alg: StratifiedAlgebra, x: np.ndarray) -> np.ndarray:
    """Matrix with columns the left-invariant frame e_i at the point x.

    Exponential coordinates of the group defined by BCH on the algebra;
    column i gives the coordinate components of e_i at x.
    """
    x = np.asarray(x, dtype=float)
    n = alg.dim
    ad = np.einsum("i,ijk->kj", x, alg.tensor)  # ad_x as a matrix acting on columns
    E = np.eye(n)
    term = np.eye(n)
    for m in range(1, alg.step):
        term = ad @ term
        if _BERNOULLI_PLUS[m] != 0.0:
            E = E + _BERNOULLI_PLUS[m] * term
    return E


def heisenberg_algebra(n: int, metric_higher: str = "identity") -> StratifiedAlgebra:
    """Heisenberg algebra h^n: [e_i, e_{i+n}] = e_{2n+1}, layers (2n, 1).

    metric_higher: "identity" keeps the vertical direction unit length
    (the convention used by every Heisenberg routine here); "canonical"
    applies the bracket-transported extension instead.
    """
    constants = {(i, i + n, 2 * n + 1): 1.0 for i in range(1, n + 1)}
    alg = StratifiedAlgebra((2 * n, 1), constants)
    if metric_higher == "canonical":
        alg = canonical_metric_extension(alg)
    elif metric_higher != "identity":
        raise ValueError("metric_higher must be 'identity' or 'canonical'")
    return alg


def free_step_two_algebra(m: int) -> StratifiedAlgebra:
    """Free 2-step algebra on m generators; layer 2 is spanned by [e_i, e_j], i<j."""
    constants = {}
    k = m + 1
    for i in range(1, m + 1):
        for j in range(i + 1, m + 1):
            constants[(i, j, k)] = 1.0
            k += 1
    return StratifiedAlgebra((m, m * (m - 1) // 2), constants)


def engel_algebra() -> StratifiedAlgebra:
    """Step-3 Engel algebra: [e1,e2]=e3, [e1,e3]=e4, layers (2,1,1)."""
    return StratifiedAlgebra((2, 1, 1), {(1, 2, 3): 1.0, (1, 3, 4): 1.0})


def _metric_from_spec(layer_dims, spec, constants) -> StratifiedAlgebra:
    alg = StratifiedAlgebra(tuple(layer_dims), constants)
    if spec == "identity" or spec is None:
        return alg
    if spec == "canonical":
        return canonical_metric_extension(alg)
    # Explicit blocks for layers 2..r.
    metric = np.eye(alg.dim)
    blocks = [np.asarray(b, dtype=float) for b in spec]
    if len(blocks) != alg.step - 1:
        raise ValueError("need one explicit metric block per layer above the first")
    for level, block in enumerate(blocks, start=2):
        sl = alg.layer_slice(level)
        if block.shape != (alg.layer_dims[level - 1],) * 2:
            raise ValueError(f"metric block for layer {level} has wrong shape")
        metric[sl, sl.start : sl.stop] = block
    return alg.with_metric(metric)


def load_algebra(path) -> StratifiedAlgebra:
    """Read an algebra definition file (JSON, 1-based bracket indices)."""
    with open(path) as fh:
        data = json.load(fh)
    constants = {}
    for i, j, k, v in data["brackets"]:
        i, j, k = int(i), int(j), int(k)
        if i == j:
            raise ValueError(f"bracket entry ({i},{i}) must vanish")
        if i > j:
            i, j, v = j, i, -v
        key = (i, j, k)
        if key in constants and constants[key] != v:
            raise ValueError(f"conflicting entries for bracket ({i},{j},{k})")
        constants[key] = float(v)
    return _metric_from_spec(data["layer_dims"], data.get("metric_higher_layers"), constants)


def dump_algebra(alg: StratifiedAlgebra, path) -> None:
    data = {
        "layer_dims": list(alg.layer_dims),
        "brackets": [[i, j, k, v] for (i, j, k), v in sorted(alg.constants.items())],
        "metric_higher_layers": "identity"
        if np.allclose(alg.metric, np.eye(alg.dim))
        else [alg.metric[alg.layer_slice(m)][:, alg.layer_slice(m)].tolist() for m in range(2, alg.step + 1)],
    }
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1)
