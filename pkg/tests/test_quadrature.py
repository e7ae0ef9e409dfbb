import math

import numpy as np
import pytest

from sobolev_needlets.engine.diagnostics import cubature_exactness_check
from sobolev_needlets.engine.errors import QuadratureError
from sobolev_needlets.engine.harmonics import real_harmonics
from sobolev_needlets.engine.models import n_coefficients
from sobolev_needlets.engine.quadrature import gauss_legendre, integrate, sphere_cubature


def test_gauss_legendre_exact_to_degree_2n_minus_1():
    x, w = gauss_legendre(5)

    # 1) ascending nodes, positive weights summing to 2
    assert np.all(np.diff(x) > 0)
    assert np.all(w > 0)
    assert w.sum() == pytest.approx(2.0, abs=1e-14)

    # 2) monomials up to degree 9
    for k in range(10):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert float(w @ x ** k) == pytest.approx(exact, abs=1e-14)


def test_gauss_legendre_large_n_and_copies():
    x, w = gauss_legendre(200)
    assert w.sum() == pytest.approx(2.0, abs=1e-12)
    assert np.max(np.abs(x)) < 1.0

    # callers get their own arrays
    x[0] = 5.0
    assert gauss_legendre(200)[0][0] != 5.0

    with pytest.raises(QuadratureError):
        gauss_legendre(0)


def test_sphere_cubature_shape_and_mass():
    rule = sphere_cubature(10)
    assert rule.size == 6 * 11
    assert rule.exactness_degree == 10
    assert rule.weights.sum() == pytest.approx(4.0 * math.pi, abs=1e-12)
    assert np.allclose(np.linalg.norm(rule.nodes, axis=1), 1.0, atol=1e-14)

    # cached and immutable
    assert sphere_cubature(10) is rule
    with pytest.raises(ValueError):
        rule.weights[0] = 0.0


def test_sphere_cubature_integrates_harmonics_exactly():
    for D in (0, 1, 7, 24):
        rule = sphere_cubature(D)
        integrals = rule.weights @ real_harmonics(D, rule.nodes)
        expected = np.zeros(n_coefficients(D))
        expected[0] = math.sqrt(4.0 * math.pi)
        assert np.max(np.abs(integrals - expected)) < 1e-12


def test_frame_rules_pass_exactness_diagnostic(frame):
    res = cubature_exactness_check(frame)
    assert res.passed
    assert set(res.details["per_level"]) == {"0", "1", "2", "3", "4"}


def test_integrate_density_and_gradient_energy(zonal2):
    # 1) the density integrates to one
    assert integrate(sphere_cubature(2), zonal2.pdf) == pytest.approx(1.0, abs=1e-13)

    # 2) |grad f|^2 for the axial degree-2 density: (alpha 15 t / 4 pi)^2 (1 - t^2)
    alpha = 0.1

    def grad_sq(x):
        t = x[:, 2]
        return (alpha * 15.0 * t / (4.0 * math.pi)) ** 2 * (1.0 - t * t)

    # Green's identity: int |grad f|^2 = T_1(f) = 7.5 alpha^2 / pi
    assert integrate(sphere_cubature(6), grad_sq) == pytest.approx(7.5 * alpha ** 2 / math.pi, rel=1e-12)


def test_integrate_rejects_bad_integrands():
    rule = sphere_cubature(4)
    with pytest.raises(QuadratureError):
        integrate(rule, lambda x: np.full(x.shape[0], np.nan))
    with pytest.raises(QuadratureError):
        integrate(rule, lambda x: np.ones(3))
    with pytest.raises(QuadratureError):
        sphere_cubature(-1)
