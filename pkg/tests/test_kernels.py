import numpy as np
import pytest

from carnot import kernels
from carnot import _ccdist_py as pyk


def test_vertical_ratio_series_matches_direct():
    # Continuity across the series/direct crossover at |mu| = 1e-2.
    mus = np.array([1e-3, 9.9e-3, 1.01e-2, 0.1, 1.0, 3.0, 6.0])
    direct = (mus - np.sin(mus)) / (4.0 * (1.0 - np.cos(mus)))
    assert np.allclose(pyk.vertical_ratio(mus), direct, rtol=1e-10)
    eps_direct = np.sqrt(2.0 * (1.0 - np.cos(mus))) / mus
    assert np.allclose(pyk.eps_factor(mus), eps_direct, rtol=1e-10)


def test_solve_mu_inverts_ratio(rng):
    q = 10.0 ** rng.uniform(-6, 4, size=200)
    mu = pyk.solve_mu(q)
    assert np.all((mu > 0) & (mu < 2 * np.pi))
    assert np.allclose(pyk.vertical_ratio(mu), q, rtol=1e-9)


def test_distance_monotone_in_vertical(rng):
    h = 0.8
    v = np.linspace(0.0, 2.0, 50)
    rho = pyk.cc_distance_batch(np.full_like(v, h), v)
    assert np.all(np.diff(rho) > 0)


def test_backends_agree(rng):
    impls = kernels.available_backends()
    if "compiled" not in impls:
        pytest.skip("compiled kernel not built")
    h = rng.uniform(0, 3, size=2000)
    v = rng.uniform(-2, 2, size=2000)
    h[:10] = 0.0
    v[10:20] = 0.0
    a = impls["numpy"].cc_distance_batch(h, v)
    b = impls["compiled"].cc_distance_batch(h, v)
    assert np.allclose(a, b, rtol=1e-14, atol=1e-14)


def test_edge_cases():
    out = kernels.cc_distance_batch([0.0, 1.0, 0.0], [0.5, 0.0, 0.0])
    assert out[0] == pytest.approx(np.sqrt(2.0 * np.pi), rel=1e-12)
    assert out[1] == 1.0
    assert out[2] == 0.0
