import json

import numpy as np
import pytest

from carnot import algebra as al


def basis(alg, k):
    """1-based basis vector e_k."""
    v = np.zeros(alg.dim)
    v[k - 1] = 1.0
    return v


# -- degree / bracket / torsion -------------------------------------------------


def test_degree_values(h1, h2):
    assert al.degree(1, h1) == 1
    assert al.degree(3, h1) == 2
    assert al.degree(4, h2) == 1
    assert al.degree(5, h2) == 2
    with pytest.raises(IndexError):
        al.degree(0, h1)
    with pytest.raises(IndexError):
        al.degree(6, h2)


def test_bracket_h2_table(h2):
    assert np.allclose(al.bracket(basis(h2, 1), basis(h2, 3), h2), basis(h2, 5))
    assert np.allclose(al.bracket(basis(h2, 2), basis(h2, 4), h2), basis(h2, 5))
    assert np.allclose(al.bracket(basis(h2, 1), basis(h2, 2), h2), 0.0)
    assert np.allclose(al.bracket(basis(h2, 3), basis(h2, 4), h2), 0.0)


def test_bracket_bilinear_antisymmetric(h2, rng):
    for _ in range(20):
        x, y = rng.normal(size=(2, 5))
        a, b = rng.normal(size=2)
        assert np.allclose(al.bracket(x, x, h2), 0.0)
        assert np.allclose(al.bracket(x, y, h2), -al.bracket(y, x, h2))
        z = rng.normal(size=5)
        assert np.allclose(
            al.bracket(a * x + b * z, y, h2),
            a * al.bracket(x, y, h2) + b * al.bracket(z, y, h2),
        )


def test_bracket_dimension_mismatch(h1):
    with pytest.raises(ValueError):
        al.bracket(np.zeros(4), np.zeros(3), h1)


def test_torsion_is_negative_bracket(h2, rng):
    x, y = rng.normal(size=(2, 5))
    assert np.allclose(al.torsion(x, y, h2), -al.bracket(x, y, h2))
    assert np.allclose(al.torsion(x, x, h2), 0.0)


def test_torsion_layer1_component_vanishes(h2, engel, rng):
    for alg in (h2, engel):
        d1 = alg.layer_dims[0]
        for _ in range(10):
            x, y = rng.normal(size=(2, alg.dim))
            assert np.allclose(al.torsion(x, y, alg)[:d1], 0.0)


# -- validation -----------------------------------------------------------------


def test_validate_heisenberg_family():
    for n in range(1, 5):
        report = al.validate(al.heisenberg_algebra(n))
        assert report.ok, str(report)


def test_validate_engel_and_free(engel, free32):
    assert al.validate(engel).ok
    assert al.validate(free32).ok


def test_validate_rejects_layer1_target():
    # c_12^1 != 0 lands in layer 1, forbidden by the grading.
    alg = al.StratifiedAlgebra((2, 1), {(1, 2, 1): 1.0, (1, 2, 3): 1.0})
    names = [name for name, _ in al.validate(alg).violations]
    assert any("grading" in n for n in names)


def test_validate_rejects_abelian_stratification():
    alg = al.StratifiedAlgebra((2, 1), {})
    names = [name for name, _ in al.validate(alg).violations]
    assert any("generation" in n for n in names)


def test_validate_rejects_jacobi_failure():
    # [e1,e2]=e4, [e1,e3]=e5 plus a spurious [e2,e3]=e1-degree term is graded
    # but violates Jacobi: use a step-3 table with an inconsistent constant.
    constants = {(1, 2, 3): 1.0, (1, 3, 4): 1.0, (2, 3, 4): 1.0}
    alg = al.StratifiedAlgebra((2, 1, 1), constants)
    report = al.validate(alg)
    names = [name for name, _ in report.violations]
    assert any("jacobi" in n for n in names)


def test_validate_metric_checks(h1):
    bad = h1.with_metric(np.diag([1.0, 2.0, 1.0]))
    names = [name for name, _ in al.validate(bad).violations]
    assert any("layer-1" in n for n in names)


# -- canonical metric extension -------------------------------------------------


def brute_force_layer2_metric(alg):
    """Dense tensor-space oracle for the first extension step."""
    d1 = alg.layer_dims[0]
    d2 = alg.layer_dims[1]
    pairs = [(i, j) for i in range(d1) for j in range(d1)]
    B = np.zeros((d2, len(pairs)))
    for col, (i, j) in enumerate(pairs):
        B[:, col] = al.bracket(np.eye(alg.dim)[i], np.eye(alg.dim)[j], alg)[d1 : d1 + d2]
    U, sv, _ = np.linalg.svd(B)
    return U[:, :d2] @ np.diag(sv[:d2] ** -2.0) @ U[:, :d2].T


def test_extension_h1_value(h1):
    ext = al.canonical_metric_extension(h1)
    assert ext.metric[2, 2] == pytest.approx(0.5, abs=1e-12)


def test_extension_h2_value(h2):
    ext = al.canonical_metric_extension(h2)
    assert ext.metric[4, 4] == pytest.approx(0.25, abs=1e-12)
    assert np.allclose(ext.metric[:4, :4], np.eye(4))


def test_extension_matches_brute_force(h1, h2, free32):
    for alg in (h1, h2, free32):
        ext = al.canonical_metric_extension(alg)
        d1, d2 = alg.layer_dims[0], alg.layer_dims[1]
        sl = slice(d1, d1 + d2)
        assert np.allclose(ext.metric[sl, sl], brute_force_layer2_metric(alg), atol=1e-12)


def test_extension_step1_unchanged():
    abelian = al.StratifiedAlgebra((3,), {})
    ext = al.canonical_metric_extension(abelian)
    assert np.allclose(ext.metric, np.eye(3))


def test_extension_requires_surjectivity():
    alg = al.StratifiedAlgebra((2, 1), {})
    with pytest.raises(ValueError):
        al.canonical_metric_extension(alg)


def graded_rotation_h(n, theta):
    """Automorphism of the Heisenberg algebra: same rotation on both blocks."""
    c, s = np.cos(theta), np.sin(theta)
    Q = np.eye(n)
    Q[0, 0] = Q[1, 1] = c
    Q[0, 1], Q[1, 0] = -s, s
    f = np.eye(2 * n + 1)
    f[:n, :n] = Q
    f[n : 2 * n, n : 2 * n] = Q
    return f


def test_isometry_of_graded_automorphisms(h2, free32, rng):
    # Heisenberg: compatible block rotations fix the center.
    ext = al.canonical_metric_extension(h2)
    for theta in rng.uniform(0, 2 * np.pi, 5):
        f = graded_rotation_h(2, theta)
        assert np.allclose(f.T @ ext.metric @ f, ext.metric, atol=1e-10)
    # Free 2-step algebra: any O(3) on the generators induces a graded
    # automorphism acting nontrivially on layer 2.
    ext = al.canonical_metric_extension(free32)
    pairs = [(0, 1), (0, 2), (1, 2)]
    for _ in range(5):
        Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        f = np.zeros((6, 6))
        f[:3, :3] = Q
        for col, (i, j) in enumerate(pairs):
            image = al.bracket(f[:, i], f[:, j], free32)
            f[3:, 3 + col] = image[3:]
        # graded automorphism by construction; check the isometry property
        assert np.allclose(f.T @ ext.metric @ f, ext.metric, atol=1e-10)


# -- dimensions and frame matrix -------------------------------------------------


def test_hausdorff_dimension(h1, h2, engel):
    assert al.hausdorff_dimension(h1) == 4
    assert al.hausdorff_dimension(h2) == 6
    assert al.hausdorff_dimension(al.StratifiedAlgebra((3,), {})) == 3
    assert al.hausdorff_dimension(al.StratifiedAlgebra((3, 1), {(1, 2, 4): 1.0})) == 5
    assert al.hausdorff_dimension(engel) == 7


def vector_field_bracket(alg, i, j, x, h=1e-5):
    """Numerical Lie bracket of the left-invariant fields e_i, e_j at x."""

    def field(k, y):
        return al.left_frame_matrix(alg, y)[:, k]

    vi, vj = field(i, x), field(j, x)
    dj = (field(j, x + h * vi) - field(j, x - h * vi)) / (2 * h)
    di = (field(i, x + h * vj) - field(i, x - h * vj)) / (2 * h)
    return dj - di


def test_left_frame_matrix_commutators(h2, engel, rng):
    # The coordinate fields built from the frame matrix realize the algebra.
    for alg in (h2, engel):
        x = rng.normal(size=alg.dim)
        for i in range(alg.dim):
            for j in range(i + 1, alg.dim):
                expected = al.bracket(np.eye(alg.dim)[i], np.eye(alg.dim)[j], alg)
                expected = al.left_frame_matrix(alg, x) @ expected
                got = vector_field_bracket(alg, i, j, x)
                assert np.allclose(got, expected, atol=1e-8)


# -- JSON round trip --------------------------------------------------------------


def test_json_roundtrip(tmp_path, h2):
    path = tmp_path / "alg.json"
    al.dump_algebra(h2, path)
    loaded = al.load_algebra(path)
    assert loaded.layer_dims == h2.layer_dims
    assert np.allclose(loaded.tensor, h2.tensor)
    assert np.allclose(loaded.metric, h2.metric)


def test_json_canonical_and_explicit(tmp_path):
    path = tmp_path / "alg.json"
    payload = {"layer_dims": [2, 1], "brackets": [[1, 2, 3, 1.0]], "metric_higher_layers": "canonical"}
    path.write_text(json.dumps(payload))
    alg = al.load_algebra(path)
    assert alg.metric[2, 2] == pytest.approx(0.5)
    payload["metric_higher_layers"] = [[[4.0]]]
    path.write_text(json.dumps(payload))
    alg = al.load_algebra(path)
    assert alg.metric[2, 2] == pytest.approx(4.0)


def test_json_antisymmetry_normalization(tmp_path):
    path = tmp_path / "alg.json"
    payload = {"layer_dims": [2, 1], "brackets": [[2, 1, 3, -1.0]], "metric_higher_layers": "identity"}
    path.write_text(json.dumps(payload))
    alg = al.load_algebra(path)
    assert alg.constants == {(1, 2, 3): 1.0}
    payload["brackets"] = [[1, 1, 3, 1.0]]
    path.write_text(json.dumps(payload))
    with pytest.raises(ValueError):
        al.load_algebra(path)
