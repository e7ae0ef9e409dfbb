import math

import numpy as np
import pytest
from scipy import stats

from sobolev_needlets.engine.densities import (
    density_from_descriptor,
    empirical_expansion,
    exact_T,
    make_multiband_density,
    make_uniform_density,
    make_zonal_density,
    parse_density_descriptor,
    sample,
)
from sobolev_needlets.engine.errors import (
    DensityValidationError,
    EstimatorInputError,
    SamplingError,
)
from sobolev_needlets.engine.harmonics import real_harmonics
from sobolev_needlets.engine.quadrature import integrate, sphere_cubature

FOUR_PI = 4.0 * math.pi


def test_uniform_density():
    f = make_uniform_density()
    rule = sphere_cubature(4)
    assert np.allclose(f.pdf(rule.nodes), 1.0 / FOUR_PI)
    assert exact_T(f, 0.0) == pytest.approx(1.0 / FOUR_PI)
    assert exact_T(f, 1.0) == 0.0
    assert f.sup_bound == pytest.approx(1.0 / FOUR_PI)


def test_zonal_functionals(zonal2):
    # 1) known values of the degree-2, alpha = 0.1 density
    assert exact_T(zonal2, 1.0) == pytest.approx(0.0238732, rel=1e-5)
    assert exact_T(zonal2, 2.0) == pytest.approx(0.143239, rel=1e-5)
    assert exact_T(zonal2, 0.0) == pytest.approx((1.0 + 0.05) / FOUR_PI, rel=1e-12)

    # 2) unit mass and the sup bound
    assert integrate(sphere_cubature(2), zonal2.pdf) == pytest.approx(1.0, abs=1e-13)
    assert zonal2.sup_bound == pytest.approx(1.5 / FOUR_PI)


def test_functional_does_not_depend_on_axis():
    a = make_zonal_density(3, 0.1, axis=(0.0, 0.0, 1.0))
    b = make_zonal_density(3, 0.1, axis=(1.0, 2.0, -0.5))
    for r in (0.0, 0.5, 1.0):
        assert exact_T(a, r) == pytest.approx(exact_T(b, r), rel=1e-12)


def test_multiband_energy(multiband):
    extra = (0.05 ** 2 * 5 + 0.01 ** 2 * 17) / FOUR_PI
    assert extra == pytest.approx(0.00113, rel=1e-6)
    assert exact_T(multiband, 0.0) == pytest.approx(1.0 / FOUR_PI + extra, rel=1e-12)
    assert multiband.max_degree == 8


def test_nonnegativity_guards():
    with pytest.raises(DensityValidationError):
        make_zonal_density(2, 0.5)
    with pytest.raises(DensityValidationError):
        make_zonal_density(0, 0.1)
    with pytest.raises(DensityValidationError):
        make_multiband_density({2: 0.1, 4: 0.1})
    with pytest.raises(DensityValidationError):
        make_multiband_density({})
    with pytest.raises(DensityValidationError):
        make_zonal_density(2, 0.1, axis=(0.0, 0.0, 0.0))


def test_descriptor_parsing():
    desc = parse_density_descriptor({"kind": "zonal", "degree": 2, "alpha": 0.1, "axis": [0, 0, 2]})
    assert desc.amplitudes == ((2, 0.1),)
    assert desc.axis == (0.0, 0.0, 1.0)
    assert desc.to_dict() == {"kind": "zonal", "degree": 2, "alpha": 0.1, "axis": [0.0, 0.0, 1.0]}

    f = density_from_descriptor({"kind": "multiband", "amplitudes": {"2": 0.05, "8": 0.01}})
    assert f.descriptor.amplitudes == ((2, 0.05), (8, 0.01))
    assert density_from_descriptor({"kind": "uniform"}).max_degree == 0


@pytest.mark.parametrize(
    "raw",
    [
        {"kind": "gaussian"},
        {"kind": "zonal", "degree": 2},
        {"kind": "zonal", "degree": 2, "alpha": 0.1, "beta": 1.0},
        {"kind": "multiband", "amplitudes": [0.1]},
        {"kind": "zonal", "degree": "two", "alpha": 0.1},
        "uniform",
    ],
)
def test_descriptor_rejects_bad_input(raw):
    with pytest.raises(DensityValidationError):
        density_from_descriptor(raw)


def test_sampling_is_seeded(zonal2):
    a = sample(zonal2, 500, seed=42)
    b = sample(zonal2, 500, seed=42)
    c = sample(zonal2, 500, seed=43)

    # 1) shape and unit norm
    assert a.n == 500
    assert np.allclose(np.linalg.norm(a.points, axis=1), 1.0, atol=1e-12)

    # 2) same seed, same points; other seed, other points
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points)
    assert a.proposals >= 500


def test_uniform_sample_passes_chi_square():
    pts = sample(make_uniform_density(), 10_000, seed=1).points

    # z is uniform on [-1, 1] under the uniform law
    counts, _ = np.histogram(pts[:, 2], bins=10, range=(-1.0, 1.0))
    stat = float(np.sum((counts - 1000.0) ** 2 / 1000.0))
    assert stat < stats.chi2.ppf(0.999, df=9)


def test_sample_recovers_coefficients(zonal2):
    pts = sample(zonal2, 20_000, seed=5).points
    emp = empirical_expansion(pts, 2)

    # a_{2,0} = alpha Y_{2,0}(pole); Y_{2,0} is bounded by sqrt(5/(4 pi))
    a20 = 0.1 * math.sqrt(5.0 / FOUR_PI)
    se = math.sqrt(5.0 / FOUR_PI) / math.sqrt(20_000)
    assert emp.coeffs[0] == pytest.approx(1.0 / math.sqrt(FOUR_PI))
    assert abs(emp.coeffs[6] - a20) < 5 * se
    assert np.all(np.abs(emp.coeffs[[4, 5, 7, 8]]) < 5 * se)


def test_empirical_moments_match_coefficients(multiband):
    n = 100_000
    pts = sample(multiband, n, seed=11).points
    idx = np.arange(1, 21)

    # E Y_{l,m}(X) = a_{l,m}; Hotelling-type statistic over 20 coefficients
    Y = real_harmonics(4, pts)[:, idx]
    diff = Y.mean(axis=0) - multiband.expansion.coeffs[idx]
    cov = np.cov(Y, rowvar=False)
    stat = float(n * diff @ np.linalg.solve(cov, diff))
    assert stat < stats.chi2.ppf(0.99, df=20)

    assert np.allclose(empirical_expansion(pts, 4).coeffs[idx], Y.mean(axis=0), atol=1e-12)


def test_sampling_errors(zonal2):
    with pytest.raises(SamplingError):
        sample(zonal2, 0, seed=1)
    with pytest.raises(EstimatorInputError):
        empirical_expansion(np.empty((0, 3)), 2)
