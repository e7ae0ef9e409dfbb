from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .errors import FrameIndexError, WindowParameterError
from .harmonics import (
    MAX_DEGREE,
    ArrayLike,
    as_points,
    degrees_of,
    legendre_table,
    real_harmonics,
)
from .models import CubatureRule, HarmonicExpansion, n_coefficients
from .quadrature import gauss_legendre, sphere_cubature

logger = logging.getLogger(__name__)

_FOUR_PI = 4.0 * math.pi
_BOUND_EPS = 1e-9
_BUMP_NODES = 64


# ============================================================
# WINDOW
# ============================================================

def _bump(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


@lru_cache(maxsize=1)
def _bump_rule() -> Tuple[np.ndarray, np.ndarray, float]:
    x, w = gauss_legendre(_BUMP_NODES)
    mass = float(w @ _bump(x))
    return x, w, mass


def _bump_cdf(u: np.ndarray) -> np.ndarray:
    """int_{-1}^{u} g / int_{-1}^{1} g for u in [-1, 1]."""
    x, w, mass = _bump_rule()
    half = 0.5 * (u + 1.0)
    pts = -1.0 + half[:, None] * (x[None, :] + 1.0)
    return (half[:, None] * w[None, :] * _bump(pts)).sum(axis=1) / mass


@dataclass(frozen=True)
class NeedletWindow:
    """
    Littlewood-Paley window for band ratio B.

        phi(t) = 1                    t <= 1/B
        phi(t) = G(u(t))              1/B < t < 1,  u = 1 - 2B/(B-1) (t - 1/B)
        phi(t) = 0                    t >= 1

        b^2(t) = phi(t/B) - phi(t)

    G is the normalized integral of g(x) = exp(-1/(1-x^2)), so
    sum_j b^2(l / B^j) telescopes to 1 for every l >= 1.
    """
    B: float

    def phi(self, t: ArrayLike) -> Union[float, np.ndarray]:
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros_like(tt)
        out[tt <= 1.0 / self.B] = 1.0
        mid = (tt > 1.0 / self.B) & (tt < 1.0)
        if np.any(mid):
            u = 1.0 - 2.0 * self.B / (self.B - 1.0) * (tt[mid] - 1.0 / self.B)
            out[mid] = _bump_cdf(np.clip(u, -1.0, 1.0))
        return float(out[0]) if np.ndim(t) == 0 else out

    def b2(self, t: ArrayLike) -> Union[float, np.ndarray]:
        tt = np.asarray(t, dtype=float)
        val = np.maximum(np.asarray(self.phi(tt / self.B)) - np.asarray(self.phi(tt)), 0.0)
        return float(val) if np.ndim(t) == 0 else val

    def b(self, t: ArrayLike) -> Union[float, np.ndarray]:
        val = np.sqrt(self.b2(t))
        return float(val) if np.ndim(t) == 0 else val


def build_window(B: float) -> NeedletWindow:
    if not np.isfinite(B) or B <= 1.0:
        raise WindowParameterError(f"band ratio B must be > 1; got {B}")
    return NeedletWindow(B=float(B))


# ============================================================
# FRAME
# ============================================================

@dataclass(frozen=True, eq=False)
class NeedletLevel:
    j: int
    ell_min: int
    ell_max: int
    rule: CubatureRule
    window_weights: np.ndarray      # b(l / B^j) for l = ell_min..ell_max

    @property
    def K(self) -> int:
        return self.rule.size

    @property
    def degrees(self) -> np.ndarray:
        return np.arange(self.ell_min, self.ell_max + 1)

    @property
    def band_slice(self) -> slice:
        return slice(self.ell_min * self.ell_min, (self.ell_max + 1) * (self.ell_max + 1))

    @property
    def central_index(self) -> int:
        """Node with the largest cubature weight (an equatorial node of the product rule)."""
        return int(np.argmax(self.rule.weights))

    def degree_weights(self, r: float) -> np.ndarray:
        """e_l^{r/2} b(l / B^j) per degree of the band."""
        ells = self.degrees.astype(float)
        return (ells * (ells + 1.0)) ** (0.5 * r) * self.window_weights

    def coefficient_weights(self, r: float) -> np.ndarray:
        """degree_weights repeated over the 2l + 1 orders."""
        return np.repeat(self.degree_weights(r), 2 * self.degrees + 1)


class NeedletFrame:
    """
    Window plus per-level bands and cubature rules.

    Harmonics at the nodes of each level are computed on first use and cached;
    the cache is guarded so frames can be shared across worker threads.
    """

    def __init__(self, window: NeedletWindow, levels: Tuple[NeedletLevel, ...]):
        self.window = window
        self.levels = levels
        self._node_harmonics: Dict[int, np.ndarray] = {}
        self._lock = threading.Lock()

    @property
    def B(self) -> float:
        return self.window.B

    @property
    def J_cap(self) -> int:
        return len(self.levels) - 1

    def level(self, j: int) -> NeedletLevel:
        if not 0 <= j <= self.J_cap:
            raise FrameIndexError(f"level {j} outside frame levels 0..{self.J_cap}")
        return self.levels[j]

    def node_harmonics(self, j: int) -> np.ndarray:
        """Y_{l,m}(xi_{j,k}) for l in the band of level j; shape (K_j, band coefficients)."""
        lvl = self.level(j)
        with self._lock:
            cached = self._node_harmonics.get(j)
            if cached is None:
                if lvl.ell_min > lvl.ell_max:
                    cached = np.zeros((lvl.K, 0))
                else:
                    cached = real_harmonics(lvl.ell_max, lvl.rule.nodes)[:, lvl.band_slice]
                cached.setflags(write=False)
                self._node_harmonics[j] = cached
                logger.debug("cached node harmonics for level %d: shape %s", j, cached.shape)
        return cached

    def summary(self) -> Dict[str, object]:
        return {
            "B": self.B,
            "J_cap": self.J_cap,
            "levels": [
                {
                    "j": lvl.j,
                    "ell_min": lvl.ell_min,
                    "ell_max": lvl.ell_max,
                    "exactness_degree": lvl.rule.exactness_degree,
                    "K": lvl.K,
                }
                for lvl in self.levels
            ],
        }


def level_band(B: float, j: int) -> Tuple[int, int]:
    """ceil(B^{j-1}) <= l <= floor(B^{j+1}); level 0 starts at l = 1."""
    lo = 1 if j == 0 else max(1, math.ceil(B ** (j - 1) - _BOUND_EPS))
    hi = math.floor(B ** (j + 1) + _BOUND_EPS)
    return lo, hi


def level_exactness(B: float, j: int) -> int:
    return 2 * math.ceil(B ** (j + 1) - _BOUND_EPS)


def build_frame(B: float = 2.0, J_cap: int = 4) -> NeedletFrame:
    window = build_window(B)
    if J_cap < 0:
        raise FrameIndexError(f"J_cap must be >= 0; got {J_cap}")

    levels: List[NeedletLevel] = []
    for j in range(J_cap + 1):
        lo, hi = level_band(window.B, j)
        if hi > MAX_DEGREE:
            raise FrameIndexError(
                f"level {j} reaches degree {hi}, above the harmonic degree cap {MAX_DEGREE}"
            )
        ells = np.arange(lo, hi + 1, dtype=float)
        weights = np.asarray(window.b(ells / window.B ** j), dtype=float).reshape(-1)
        rule = sphere_cubature(level_exactness(window.B, j))
        levels.append(NeedletLevel(j=j, ell_min=lo, ell_max=hi, rule=rule, window_weights=weights))

    logger.debug(
        "built needlet frame B=%s J_cap=%d nodes=%s",
        window.B, J_cap, [lvl.K for lvl in levels],
    )
    return NeedletFrame(window=window, levels=tuple(levels))


def covering_level(frame: NeedletFrame, max_degree: int) -> int:
    """Smallest J with B^J >= max_degree: levels 0..J carry full window mass for l <= max_degree."""
    J = 0
    while frame.B ** J < max_degree - _BOUND_EPS:
        J += 1
    if J > frame.J_cap:
        raise FrameIndexError(
            f"degree {max_degree} needs level {J}, above frame cap {frame.J_cap}"
        )
    return J


# ============================================================
# COEFFICIENTS
# ============================================================

@dataclass(frozen=True, eq=False)
class NeedletCoefficients:
    r: float
    levels: Tuple[np.ndarray, ...]

    @property
    def J(self) -> int:
        return len(self.levels) - 1

    def level_energy(self, j: int) -> float:
        return float(np.dot(self.levels[j], self.levels[j]))


def _check_J(frame: NeedletFrame, J: int) -> None:
    if J < 0 or J > frame.J_cap:
        raise FrameIndexError(f"J={J} outside frame levels 0..{frame.J_cap}")


def level_transform(frame: NeedletFrame, j: int, coeff_vec: np.ndarray, r: float) -> np.ndarray:
    """
    beta_{j,k} = sqrt(lambda_{j,k}) sum_{l in band} e_l^{r/2} b(l/B^j) sum_m c_{l,m} Y_{l,m}(xi_{j,k})

    coeff_vec is a flat harmonic vector reaching at least the band top of level j.
    """
    lvl = frame.level(j)
    if lvl.ell_min > lvl.ell_max:
        return np.zeros(lvl.K)
    band = coeff_vec[lvl.band_slice] * lvl.coefficient_weights(r)
    return np.sqrt(lvl.rule.weights) * (frame.node_harmonics(j) @ band)


def analyze(frame: NeedletFrame, f: HarmonicExpansion, r: float, J: int) -> NeedletCoefficients:
    """
    Exact Sobolev-needlet coefficients beta^(r)_{j,k} = <f^(r), psi_{j,k}>, j <= J.

    Closed-form spectral sum; degrees of f above the band of level J do not
    touch these levels.
    """
    _check_J(frame, J)
    vec = f.padded(frame.level(J).ell_max)
    return NeedletCoefficients(
        r=float(r),
        levels=tuple(level_transform(frame, j, vec, r) for j in range(J + 1)),
    )


def frame_energy(coeffs: NeedletCoefficients, J: int) -> float:
    """T_r^(J) = sum_{j <= J} sum_k (beta^(r)_{j,k})^2."""
    if J < 0 or J > coeffs.J:
        raise FrameIndexError(f"J={J} outside coefficient levels 0..{coeffs.J}")
    return float(sum(coeffs.level_energy(j) for j in range(J + 1)))


def synthesize(frame: NeedletFrame, coeffs: NeedletCoefficients) -> HarmonicExpansion:
    """
    sum_{j,k} beta_{j,k} psi_{j,k}, returned as harmonic coefficients.

    For coefficients of a bandlimited f covered by the levels this gives back
    the coefficients of f^(r) without its mean.
    """
    top = frame.level(coeffs.J).ell_max
    out = np.zeros(n_coefficients(top))
    for j, beta in enumerate(coeffs.levels):
        lvl = frame.level(j)
        if lvl.ell_min > lvl.ell_max:
            continue
        spread = frame.node_harmonics(j).T @ (np.sqrt(lvl.rule.weights) * beta)
        out[lvl.band_slice] += np.repeat(lvl.window_weights, 2 * lvl.degrees + 1) * spread
    return HarmonicExpansion(max_degree=top, coeffs=out)


def littlewood_paley_energy(coeffs: NeedletCoefficients, B: float, r: float, J: int) -> float:
    """
    sum_{j <= J} B^{2 j r} sum_k beta_{j,k}^2 for plain (r = 0) coefficients.

    Equivalent to T_r^(J) up to the band constants of lp_equivalence_bounds.
    """
    if coeffs.r != 0:
        raise ValueError("littlewood_paley_energy expects r = 0 coefficients")
    if J < 0 or J > coeffs.J:
        raise FrameIndexError(f"J={J} outside coefficient levels 0..{coeffs.J}")
    return float(sum(B ** (2 * j * r) * coeffs.level_energy(j) for j in range(J + 1)))


def lp_equivalence_bounds(frame: NeedletFrame, r: float, J: int) -> Tuple[float, float]:
    """(lo, hi) with lo * LP <= T_r^(J) <= hi * LP, from e_l^r / B^{2jr} over occupied bands."""
    _check_J(frame, J)
    ratios = []
    for j in range(J + 1):
        lvl = frame.level(j)
        ells = lvl.degrees[lvl.window_weights > 0].astype(float)
        ratios.extend((ells * (ells + 1.0)) ** r / frame.B ** (2 * j * r))
    return float(min(ratios)), float(max(ratios))


# ============================================================
# ATOMS
# ============================================================

def _zonal_atom(lvl: NeedletLevel, r: float, t: np.ndarray) -> np.ndarray:
    """sum_{l in band} e_l^{r/2} b (2l+1)/(4 pi) P_l(t), without the sqrt(lambda) factor."""
    if lvl.ell_min > lvl.ell_max:
        return np.zeros_like(t)
    P = legendre_table(lvl.ell_max, t)[lvl.ell_min:]
    coef = lvl.degree_weights(r) * (2 * lvl.degrees + 1) / _FOUR_PI
    return np.tensordot(coef, P, axes=1)


def _check_node(lvl: NeedletLevel, k: int) -> None:
    if not 0 <= k < lvl.K:
        raise FrameIndexError(f"node {k} outside 0..{lvl.K - 1} at level {lvl.j}")


def eval_atom(
    frame: NeedletFrame,
    j: int,
    k: int,
    r: float,
    x: ArrayLike,
) -> Union[float, np.ndarray]:
    """
    psi^(r)_{j,k}(x) = sqrt(lambda_{j,k}) sum_{l in band} e_l^{r/2} b(l/B^j) K_l(<xi_{j,k}, x>)

    K_l is the addition kernel; r = 0 gives the plain needlet.
    """
    lvl = frame.level(j)
    _check_node(lvl, k)
    pts, single = as_points(x)
    t = np.clip(pts @ lvl.rule.nodes[k], -1.0, 1.0)
    vals = math.sqrt(lvl.rule.weights[k]) * _zonal_atom(lvl, r, t)
    return float(vals[0]) if single else vals


def atom_profile(
    frame: NeedletFrame,
    j: int,
    r: float,
    angles: ArrayLike,
    *,
    k: Optional[int] = None,
) -> np.ndarray:
    """psi^(r)_{j,k} against geodesic distance from its centre (default: the central node)."""
    lvl = frame.level(j)
    k = lvl.central_index if k is None else k
    _check_node(lvl, k)
    t = np.cos(np.asarray(angles, dtype=float))
    return math.sqrt(lvl.rule.weights[k]) * _zonal_atom(lvl, r, t)


@dataclass(frozen=True)
class AtomNorms:
    l1: float
    l2: float
    sup: float


def atom_norms(frame: NeedletFrame, j: int, k: int, r: float = 0.0) -> AtomNorms:
    """
    Norms of a zonal atom through int_{S^2} h(<xi, x>) dx = 2 pi int_{-1}^{1} h(t) dt.

    L2 is exact (Gauss-Legendre with ell_max + 1 nodes); L1 uses a dense rule
    since |h| has kinks; sup is taken over a fine angle grid.
    """
    lvl = frame.level(j)
    _check_node(lvl, k)
    scale = math.sqrt(lvl.rule.weights[k])

    t2, w2 = gauss_legendre(lvl.ell_max + 1)
    l2 = scale * math.sqrt(2.0 * math.pi * float(w2 @ _zonal_atom(lvl, r, t2) ** 2))

    t1, w1 = gauss_legendre(max(256, 16 * lvl.ell_max))
    l1 = scale * 2.0 * math.pi * float(w1 @ np.abs(_zonal_atom(lvl, r, t1)))

    theta = np.linspace(0.0, math.pi, max(4097, 64 * lvl.ell_max + 1))
    sup = scale * float(np.max(np.abs(_zonal_atom(lvl, r, np.cos(theta)))))

    return AtomNorms(l1=l1, l2=l2, sup=sup)
