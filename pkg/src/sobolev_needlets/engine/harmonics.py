from __future__ import annotations

import math
from typing import Tuple, Union

import numpy as np

from .errors import HarmonicDomainError
from .models import UNIT_TOL, HarmonicExpansion, HarmonicIndex, n_coefficients


MAX_DEGREE = 512
_FOUR_PI = 4.0 * math.pi
_INT64_MAX = 2 ** 63 - 1

ArrayLike = Union[np.ndarray, list, tuple]


# -----------------------
# Spectral data
# -----------------------
def eigenvalue(ell: int, d: int = 2) -> float:
    """
    Laplace-Beltrami eigenvalue on S^d:

        e_{l,d} = l (l + d - 1)
    """
    if ell < 0 or d < 1:
        raise HarmonicDomainError(f"eigenvalue needs l >= 0 and d >= 1; got l={ell}, d={d}")
    return float(int(ell) * (int(ell) + int(d) - 1))


def multiplicity(ell: int, d: int = 2) -> int:
    """
    Dimension of the degree-l harmonic space on S^d:

        M_{l;d} = (2l + d - 1) (l + d - 2)! / (l! (d - 1)!)

    Computed as (2l + d - 1) * C(l + d - 2, d - 2) / (d - 1) with exact
    multiplicative accumulation.
    """
    if ell < 0 or d < 2:
        raise HarmonicDomainError(f"multiplicity needs l >= 0 and d >= 2; got l={ell}, d={d}")
    ell, d = int(ell), int(d)
    binom = 1
    for i in range(1, d - 1):
        binom = binom * (ell + i) // i
    out = (2 * ell + d - 1) * binom // (d - 1)
    if out > _INT64_MAX:
        raise HarmonicDomainError(f"multiplicity overflows for l={ell}, d={d}: degree too large")
    return out


def degrees_of(max_degree: int) -> np.ndarray:
    """Degree l of every flat coefficient position up to max_degree."""
    ells = np.arange(max_degree + 1)
    return np.repeat(ells, 2 * ells + 1)


def spectral_weights(max_degree: int, r: float) -> np.ndarray:
    """
    Per-coefficient multipliers e_l^{r/2} of the operator (-Delta)^{r/2}.

    The l = 0 weight is 1 for r = 0 and 0 otherwise (constants are in the kernel).
    """
    if r < 0:
        raise HarmonicDomainError(f"r must be >= 0; got {r}")
    ells = degrees_of(max_degree).astype(float)
    if r == 0:
        return np.ones_like(ells)
    return (ells * (ells + 1.0)) ** (0.5 * r)


# -----------------------
# Points
# -----------------------
def as_points(points: ArrayLike) -> Tuple[np.ndarray, bool]:
    """Returns ((n, 3) float array, was_single_point) after the unit-norm check."""
    arr = np.asarray(points, dtype=float)
    single = arr.ndim == 1
    arr = arr.reshape(-1, 3)
    if arr.size and np.max(np.abs(np.linalg.norm(arr, axis=1) - 1.0)) > UNIT_TOL:
        raise HarmonicDomainError("points must be unit vectors (|x| = 1 within 1e-12)")
    return arr, single


def from_spherical(theta: ArrayLike, phi: ArrayLike) -> np.ndarray:
    """Unit vectors from colatitude theta and longitude phi."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


# -----------------------
# Legendre
# -----------------------
def legendre_table(max_degree: int, t: ArrayLike) -> np.ndarray:
    """P_0..P_L at t via (l) P_l = (2l - 1) t P_{l-1} - (l - 1) P_{l-2}; shape (L+1,) + t.shape."""
    t = np.asarray(t, dtype=float)
    out = np.empty((max_degree + 1,) + t.shape)
    out[0] = 1.0
    if max_degree >= 1:
        out[1] = t
    for ell in range(2, max_degree + 1):
        out[ell] = ((2 * ell - 1) * t * out[ell - 1] - (ell - 1) * out[ell - 2]) / ell
    return out


def _check_cosines(t: ArrayLike) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + 1e-12):
        raise HarmonicDomainError("addition kernel needs |t| <= 1")
    return np.clip(t, -1.0, 1.0)


def addition_kernel(ell: int, t: ArrayLike) -> Union[float, np.ndarray]:
    """
    sum_m Y_{l,m}(x) Y_{l,m}(y) = (2l + 1)/(4 pi) P_l(<x, y>)
    """
    if ell < 0:
        raise HarmonicDomainError(f"degree must be >= 0; got {ell}")
    tt = _check_cosines(t)
    val = (2 * ell + 1) / _FOUR_PI * legendre_table(ell, tt)[ell]
    return float(val) if np.ndim(val) == 0 else val


# -----------------------
# Real spherical harmonics
# -----------------------
def _harmonics_block(max_degree: int, pts: np.ndarray) -> np.ndarray:
    z = np.clip(pts[:, 2], -1.0, 1.0)
    s = np.hypot(pts[:, 0], pts[:, 1])
    phi = np.arctan2(pts[:, 1], pts[:, 0])

    out = np.empty((pts.shape[0], n_coefficients(max_degree)))
    sqrt2 = math.sqrt(2.0)
    pmm = np.full(pts.shape[0], 1.0 / math.sqrt(_FOUR_PI))

    for m in range(max_degree + 1):
        if m > 0:
            pmm = pmm * math.sqrt((2 * m + 1) / (2.0 * m)) * s
            cos_m = sqrt2 * np.cos(m * phi)
            sin_m = sqrt2 * np.sin(m * phi)

        p_prev2 = None
        p_prev = pmm
        for ell in range(m, max_degree + 1):
            if ell == m:
                p = pmm
            elif ell == m + 1:
                p = math.sqrt(2 * m + 3) * z * pmm
            else:
                a = math.sqrt((4.0 * ell * ell - 1.0) / (ell * ell - m * m))
                b = math.sqrt(((ell - 1.0) ** 2 - m * m) / (4.0 * (ell - 1.0) ** 2 - 1.0))
                p = a * (z * p_prev - b * p_prev2)
            if ell > m:
                p_prev2, p_prev = p_prev, p

            centre = ell * ell + ell
            if m == 0:
                out[:, centre] = p
            else:
                out[:, centre + m] = p * cos_m
                out[:, centre - m] = p * sin_m
    return out


def real_harmonics(max_degree: int, points: ArrayLike, *, chunk: int = 8192) -> np.ndarray:
    """
    All real orthonormal Y_{l,m}, l <= max_degree, at the points.

    Returns shape (npoints, (L+1)^2) in flat order l^2 + l + m. Uses the fully
    normalized associated Legendre recurrence (no Condon-Shortley phase);
    m > 0 columns carry sqrt(2) cos(m phi), m < 0 columns sqrt(2) sin(|m| phi).
    """
    if max_degree < 0 or max_degree > MAX_DEGREE:
        raise HarmonicDomainError(f"degree must be in 0..{MAX_DEGREE}; got {max_degree}")
    pts, _ = as_points(points)
    if pts.shape[0] <= chunk:
        return _harmonics_block(max_degree, pts)
    return np.vstack([
        _harmonics_block(max_degree, pts[i:i + chunk]) for i in range(0, pts.shape[0], chunk)
    ])


def eval_harmonic(idx: HarmonicIndex, point: ArrayLike) -> Union[float, np.ndarray]:
    pts, single = as_points(point)
    vals = real_harmonics(idx.degree, pts)[:, idx.flat]
    return float(vals[0]) if single else vals


def evaluate_expansion(
    f: HarmonicExpansion,
    points: ArrayLike,
    r: float = 0.0,
    *,
    chunk: int = 8192,
) -> Union[float, np.ndarray]:
    """
    Pointwise spectral derivative:

        f^(r)(x) = sum_{l,m} e_l^{r/2} a_{l,m} Y_{l,m}(x)

    with the l = 0 term dropped for r > 0.
    """
    pts, single = as_points(points)
    w = spectral_weights(f.max_degree, r) * f.coeffs
    vals = np.zeros(pts.shape[0])
    for i in range(0, pts.shape[0], chunk):
        vals[i:i + chunk] = real_harmonics(f.max_degree, pts[i:i + chunk]) @ w
    return float(vals[0]) if single else vals


def sobolev_energy(f: HarmonicExpansion, r: float) -> float:
    """
    T_r = sum_{l,m} e_l^r a_{l,m}^2, l = 0 included only when r = 0.
    """
    w = spectral_weights(f.max_degree, r)
    return float(np.sum(w * w * f.coeffs ** 2))
