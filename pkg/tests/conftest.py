from __future__ import annotations

import numpy as np
import pytest

from sobolev_needlets.engine.densities import make_multiband_density, make_zonal_density
from sobolev_needlets.engine.models import HarmonicExpansion, n_coefficients
from sobolev_needlets.engine.needlets import build_frame


@pytest.fixture(scope="session")
def frame():
    """Dyadic frame with levels 0..4 (degrees up to 32)."""
    return build_frame(2.0, J_cap=4)


@pytest.fixture(scope="session")
def zonal2():
    return make_zonal_density(2, 0.1)


@pytest.fixture(scope="session")
def multiband():
    return make_multiband_density({2: 0.05, 8: 0.01}, axis=(0.0, 0.6, 0.8))


def random_expansion(max_degree: int, seed: int, *, zero_mean: bool = True) -> HarmonicExpansion:
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal(n_coefficients(max_degree))
    if zero_mean:
        coeffs[0] = 0.0
    return HarmonicExpansion(max_degree=max_degree, coeffs=coeffs)


def random_unit_vectors(count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((count, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)
