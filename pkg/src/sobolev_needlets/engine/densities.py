from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DensityValidationError, EstimatorInputError, SamplingError
from .harmonics import (
    MAX_DEGREE,
    ArrayLike,
    as_points,
    evaluate_expansion,
    real_harmonics,
    sobolev_energy,
)
from .models import (
    DENSITY_A00,
    DensityDescriptor,
    HarmonicExpansion,
    SphericalSample,
    n_coefficients,
)
from .quadrature import sphere_cubature
from .rng import make_generator

logger = logging.getLogger(__name__)

_FOUR_PI = 4.0 * math.pi
VALIDATION_DEGREE = 140          # product rule with 71 x 141 = 10011 nodes
NONNEGATIVITY_TOL = 1e-12
MIN_ACCEPTANCE = 1e-3
MAX_BATCH = 1_000_000


@dataclass(frozen=True, eq=False)
class TestDensity:
    """Bandlimited density with known coefficients and an upper bound f <= sup_bound."""
    __test__ = False

    expansion: HarmonicExpansion
    sup_bound: float
    descriptor: DensityDescriptor

    @property
    def max_degree(self) -> int:
        return self.expansion.max_degree

    def pdf(self, points: ArrayLike) -> Union[float, np.ndarray]:
        return evaluate_expansion(self.expansion, points, 0.0)


# -----------------------
# Construction
# -----------------------
def _unit_axis(axis: Sequence[float]) -> Tuple[float, float, float]:
    v = np.asarray(axis, dtype=float).reshape(-1)
    if v.size != 3 or not np.all(np.isfinite(v)):
        raise DensityValidationError(f"axis must be a finite 3-vector; got {axis!r}")
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise DensityValidationError("axis must be nonzero")
    v = v / norm
    return (float(v[0]), float(v[1]), float(v[2]))


def _superposition(
    amplitudes: Mapping[int, float],
    axis: Sequence[float],
    kind: str,
) -> TestDensity:
    """
    f(x) = 1/(4 pi) + sum_l alpha_l K_l(<x, axis>),   a_{l,m} = alpha_l Y_{l,m}(axis)

    sup_bound = (1 + sum_l |alpha_l| (2l + 1)) / (4 pi)
    """
    amps = {int(l): float(a) for l, a in amplitudes.items()}
    for l in amps:
        if not 1 <= l <= MAX_DEGREE:
            raise DensityValidationError(f"degrees must be in 1..{MAX_DEGREE}; got {l}")
    load = sum(abs(a) * (2 * l + 1) for l, a in amps.items())
    if load > 1.0 + 1e-12:
        raise DensityValidationError(
            f"sum |alpha_l| (2l+1) = {load:.6g} exceeds 1; nonnegativity is not guaranteed"
        )

    unit = _unit_axis(axis)
    L = max(amps, default=0)
    coeffs = np.zeros(n_coefficients(L))
    coeffs[0] = DENSITY_A00
    if L > 0:
        y_axis = real_harmonics(L, np.asarray(unit))[0]
        for l, a in amps.items():
            block = slice(l * l, (l + 1) * (l + 1))
            coeffs[block] += a * y_axis[block]

    density = TestDensity(
        expansion=HarmonicExpansion(max_degree=L, coeffs=coeffs, is_density=True),
        sup_bound=(1.0 + load) / _FOUR_PI,
        descriptor=DensityDescriptor(
            kind=kind,  # type: ignore[arg-type]
            amplitudes=tuple(sorted(amps.items())),
            axis=unit,
        ),
    )
    _validate_nonnegative(density)
    return density


def _validate_nonnegative(f: TestDensity) -> None:
    grid = sphere_cubature(VALIDATION_DEGREE)
    low = float(np.min(f.pdf(grid.nodes)))
    if low < -NONNEGATIVITY_TOL:
        raise DensityValidationError(f"density is negative on the validation grid (min {low:.3e})")


def make_uniform_density() -> TestDensity:
    return _superposition({}, (0.0, 0.0, 1.0), "uniform")


def make_zonal_density(
    ell: int,
    alpha: float,
    axis: Sequence[float] = (0.0, 0.0, 1.0),
) -> TestDensity:
    """
    f(x) = 1/(4 pi) + alpha K_l(<x, axis>), nonnegative for |alpha| <= 1/(2l + 1).
    """
    if ell < 1:
        raise DensityValidationError(f"zonal degree must be >= 1; got {ell}")
    if abs(alpha) > 1.0 / (2 * ell + 1) + 1e-15:
        raise DensityValidationError(
            f"|alpha| must be <= 1/(2l+1) = {1.0 / (2 * ell + 1):.6g} for l={ell}; got {alpha}"
        )
    return _superposition({ell: alpha}, axis, "zonal")


def make_multiband_density(
    amplitudes: Mapping[int, float],
    axis: Sequence[float] = (0.0, 0.0, 1.0),
) -> TestDensity:
    """Zonal components sharing one axis; needs sum |alpha_l| (2l + 1) <= 1."""
    if not amplitudes:
        raise DensityValidationError("multiband density needs at least one degree")
    return _superposition(amplitudes, axis, "multiband")


def parse_density_descriptor(raw: Union[Mapping[str, object], DensityDescriptor]) -> DensityDescriptor:
    """Reads {kind: uniform | zonal | multiband, ...} mappings (JSON/YAML shaped)."""
    if isinstance(raw, DensityDescriptor):
        return raw
    if not isinstance(raw, Mapping):
        raise DensityValidationError(f"density descriptor must be a mapping; got {type(raw).__name__}")
    try:
        kind = str(raw["kind"]).strip().lower()
        axis = _unit_axis(raw.get("axis", (0.0, 0.0, 1.0)))  # type: ignore[arg-type]

        if kind == "uniform":
            allowed = {"kind", "axis"}
            amps: Tuple[Tuple[int, float], ...] = ()
        elif kind == "zonal":
            allowed = {"kind", "axis", "degree", "alpha"}
            amps = ((int(raw["degree"]), float(raw["alpha"])),)  # type: ignore[arg-type]
        elif kind == "multiband":
            allowed = {"kind", "axis", "amplitudes"}
            table = raw["amplitudes"]
            if not isinstance(table, Mapping):
                raise DensityValidationError("multiband amplitudes must map degree -> alpha")
            amps = tuple(sorted((int(l), float(a)) for l, a in table.items()))
        else:
            raise DensityValidationError(
                f"density kind must be one of ['multiband', 'uniform', 'zonal']; got '{kind}'"
            )

        unknown = sorted(set(raw) - allowed)
        if unknown:
            raise DensityValidationError(f"unknown density descriptor keys for '{kind}': {unknown}")
        return DensityDescriptor(kind=kind, amplitudes=amps, axis=axis)  # type: ignore[arg-type]

    except KeyError as e:
        raise DensityValidationError(f"Missing required density field: {e}") from e
    except (TypeError, ValueError) as e:
        raise DensityValidationError(f"Invalid density field value: {e}") from e


def density_from_descriptor(raw: Union[Mapping[str, object], DensityDescriptor]) -> TestDensity:
    desc = parse_density_descriptor(raw)
    if desc.kind == "uniform":
        return make_uniform_density()
    if desc.kind == "zonal":
        (deg, alpha), = desc.amplitudes
        return make_zonal_density(deg, alpha, desc.axis)
    return make_multiband_density(dict(desc.amplitudes), desc.axis)


# -----------------------
# Functionals
# -----------------------
def exact_T(f: TestDensity, r: float) -> float:
    """
    T_r(f) = sum_{l,m} e_l^r a_{l,m}^2 (mean term only at r = 0).
    """
    return sobolev_energy(f.expansion, r)


def empirical_expansion(points: ArrayLike, max_degree: int, *, chunk: int = 4096) -> HarmonicExpansion:
    """
    Empirical coefficients (1/n) sum_i Y_{l,m}(X_i), the sample side of
    a_{l,m} = E_f[Y_{l,m}(X)].
    """
    pts, _ = as_points(points)
    if pts.shape[0] == 0:
        raise EstimatorInputError("empirical coefficients need at least one point")
    total = np.zeros(n_coefficients(max_degree))
    for i in range(0, pts.shape[0], chunk):
        total += real_harmonics(max_degree, pts[i:i + chunk]).sum(axis=0)
    return HarmonicExpansion(max_degree=max_degree, coeffs=total / pts.shape[0])


# -----------------------
# Sampling
# -----------------------
def _uniform_proposals(rng: np.random.Generator, count: int) -> Tuple[np.ndarray, np.ndarray]:
    u = rng.random((count, 3))
    z = 1.0 - 2.0 * u[:, 0]
    phi = 2.0 * math.pi * u[:, 1]
    s = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    pts = np.column_stack([s * np.cos(phi), s * np.sin(phi), z])
    return pts, u[:, 2]


def sample(f: TestDensity, n: int, seed: int) -> SphericalSample:
    """
    n i.i.d. draws by rejection from the uniform proposal.

    A proposal x is kept when U * sup_bound <= f(x), U ~ U[0, 1). The expected
    acceptance rate is 1 / (4 pi sup_bound), so each batch is sized to finish
    in one pass on average.
    """
    if n < 1:
        raise SamplingError(f"sample size must be >= 1; got {n}")
    rate = 1.0 / (_FOUR_PI * f.sup_bound)
    if rate < MIN_ACCEPTANCE:
        raise SamplingError(f"acceptance rate {rate:.2e} below {MIN_ACCEPTANCE}: density bound too loose")

    rng = make_generator(seed)
    chunks = []
    got = 0
    proposals = 0
    while got < n:
        need = n - got
        batch = min(max(need, int(math.ceil(need / rate - 1e-9))), MAX_BATCH)
        pts, u = _uniform_proposals(rng, batch)
        dens = np.asarray(f.pdf(pts))
        if np.any(dens > f.sup_bound * (1.0 + 1e-9)):
            raise SamplingError("density exceeds its declared sup_bound")
        kept = pts[u * f.sup_bound <= dens][:need]
        chunks.append(kept)
        got += kept.shape[0]
        proposals += batch
        if proposals >= 10_000 and got / proposals < MIN_ACCEPTANCE:
            raise SamplingError(f"observed acceptance {got / proposals:.2e} below {MIN_ACCEPTANCE}")

    logger.debug("sampled n=%d seed=%d proposals=%d", n, seed, proposals)
    return SphericalSample(points=np.vstack(chunks), seed=int(seed), proposals=proposals)
