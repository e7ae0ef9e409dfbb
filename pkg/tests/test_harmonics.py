import math

import numpy as np
import pytest

from conftest import random_expansion, random_unit_vectors
from sobolev_needlets.engine.errors import HarmonicDomainError
from sobolev_needlets.engine.harmonics import (
    addition_kernel,
    eigenvalue,
    eval_harmonic,
    evaluate_expansion,
    from_spherical,
    legendre_table,
    multiplicity,
    real_harmonics,
    sobolev_energy,
    spectral_weights,
)
from sobolev_needlets.engine.models import HarmonicExpansion, HarmonicIndex
from sobolev_needlets.engine.quadrature import sphere_cubature


def test_eigenvalues_and_multiplicities():
    # 1) S^2
    assert eigenvalue(0) == 0.0
    assert eigenvalue(3) == 12.0
    assert [multiplicity(l) for l in range(5)] == [1, 3, 5, 7, 9]

    # 2) S^3: (l + 1)^2
    assert [multiplicity(l, d=3) for l in range(5)] == [1, 4, 9, 16, 25]

    # 3) domain checks
    with pytest.raises(HarmonicDomainError):
        eigenvalue(-1)
    with pytest.raises(HarmonicDomainError):
        multiplicity(2, d=1)


def test_harmonic_index_flat_layout():
    assert HarmonicIndex.from_conventional(0, 0).flat == 0
    assert HarmonicIndex.from_conventional(2, -2).flat == 4
    assert HarmonicIndex.from_conventional(2, 2).flat == 8
    assert HarmonicIndex(degree=3, order=4).m == 0

    with pytest.raises(HarmonicDomainError):
        HarmonicIndex(degree=2, order=0)
    with pytest.raises(HarmonicDomainError):
        HarmonicIndex(degree=1, order=4)


def test_legendre_table_values():
    P = legendre_table(3, np.array([0.5, 1.0, -1.0]))
    assert P.shape == (4, 3)
    assert P[2, 0] == pytest.approx(-0.125)
    assert P[3, 0] == pytest.approx(-0.4375)
    assert np.allclose(P[:, 1], 1.0)
    assert np.allclose(P[:, 2], [1.0, -1.0, 1.0, -1.0])


def test_low_degree_closed_forms():
    pts = random_unit_vectors(50, seed=1)
    Y = real_harmonics(1, pts)
    c = math.sqrt(3.0 / (4.0 * math.pi))

    # flat order: (0,0), (1,-1), (1,0), (1,1) -> 1/sqrt(4pi), c y, c z, c x
    assert np.allclose(Y[:, 0], 1.0 / math.sqrt(4.0 * math.pi))
    assert np.allclose(Y[:, 1], c * pts[:, 1], atol=1e-14)
    assert np.allclose(Y[:, 2], c * pts[:, 2], atol=1e-14)
    assert np.allclose(Y[:, 3], c * pts[:, 0], atol=1e-14)


@pytest.mark.slow
def test_orthonormality_on_exact_rule():
    L = 64
    rule = sphere_cubature(2 * L)
    Y = real_harmonics(L, rule.nodes)
    size = Y.shape[1]
    assert size == 65 * 65

    worst = 0.0
    for start in range(0, size, 512):
        stop = min(start + 512, size)
        block = (rule.weights[:, None] * Y[:, start:stop]).T @ Y
        block[np.arange(stop - start), np.arange(start, stop)] -= 1.0
        worst = max(worst, float(np.max(np.abs(block))))
    assert worst < 1e-10


def test_addition_theorem_up_to_degree_64():
    x = random_unit_vectors(100, seed=2)
    y = random_unit_vectors(100, seed=3)
    Yx = real_harmonics(64, x)
    Yy = real_harmonics(64, y)
    t = np.sum(x * y, axis=1)

    for ell in range(65):
        block = slice(ell * ell, (ell + 1) * (ell + 1))
        lhs = np.sum(Yx[:, block] * Yy[:, block], axis=1)
        assert np.allclose(lhs, addition_kernel(ell, t), rtol=0.0, atol=1e-10)


def test_addition_kernel_rejects_bad_cosines():
    with pytest.raises(HarmonicDomainError):
        addition_kernel(3, 1.01)
    assert addition_kernel(0, 0.3) == pytest.approx(1.0 / (4.0 * math.pi))


def test_point_validation():
    with pytest.raises(HarmonicDomainError):
        real_harmonics(2, np.array([[1.0, 1.0, 0.0]]))
    with pytest.raises(HarmonicDomainError):
        real_harmonics(-1, np.array([[0.0, 0.0, 1.0]]))

    pole = from_spherical(0.0, 0.0)
    assert np.allclose(pole, [0.0, 0.0, 1.0])
    assert eval_harmonic(HarmonicIndex.from_conventional(2, 0), pole) == pytest.approx(
        math.sqrt(5.0 / (4.0 * math.pi))
    )


def test_spectral_weights_kernel_of_derivative():
    w0 = spectral_weights(3, 0.0)
    w1 = spectral_weights(3, 1.0)
    assert np.all(w0 == 1.0)
    # constants vanish under a derivative of positive order
    assert w1[0] == 0.0
    assert w1[1:4] == pytest.approx([math.sqrt(2.0)] * 3)
    assert w1[9] == pytest.approx(math.sqrt(12.0))

    with pytest.raises(HarmonicDomainError):
        spectral_weights(3, -0.5)


def test_evaluate_expansion_spectral_derivative(zonal2):
    pole = np.array([0.0, 0.0, 1.0])

    # 1) r = 0 is the density itself: 1/(4 pi) + alpha (2l+1)/(4 pi) at the axis
    assert evaluate_expansion(zonal2.expansion, pole) == pytest.approx(1.5 / (4.0 * math.pi))

    # 2) r = 1 scales the degree-2 part by sqrt(6) and drops the mean
    expected = math.sqrt(6.0) * 0.1 * 5.0 / (4.0 * math.pi)
    assert evaluate_expansion(zonal2.expansion, pole, r=1.0) == pytest.approx(expected)


def test_sobolev_energy_matches_quadrature():
    f = random_expansion(6, seed=4, zero_mean=False)
    rule = sphere_cubature(12)

    # 1) Parseval
    vals = evaluate_expansion(f, rule.nodes)
    assert sobolev_energy(f, 0.0) == pytest.approx(float(rule.weights @ vals ** 2), rel=1e-12)

    # 2) r = 2 energy is the squared L2 norm of the Laplacian
    lap = evaluate_expansion(f, rule.nodes, r=2.0)
    assert sobolev_energy(f, 2.0) == pytest.approx(float(rule.weights @ lap ** 2), rel=1e-12)


def test_expansion_coefficients_are_read_only():
    f = HarmonicExpansion.from_mapping({(1, 0): 0.5, (2, -1): 0.25})
    assert f.max_degree == 2
    assert f.coefficient(HarmonicIndex.from_conventional(2, -1)) == 0.25
    assert f.coefficient(HarmonicIndex.from_conventional(5, 0)) == 0.0
    assert np.allclose(f.degree_energy(), [0.0, 0.25, 0.0625])
    with pytest.raises(ValueError):
        f.coeffs[0] = 1.0
