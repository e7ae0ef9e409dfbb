from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Literal, Mapping, Optional, Tuple

import numpy as np

from .errors import (
    DensityValidationError,
    EstimatorInputError,
    HarmonicDomainError,
    LepskiConfigError,
)


UNIT_TOL = 1e-12
DENSITY_A00 = 1.0 / np.sqrt(4.0 * np.pi)

DensityKind = Literal["uniform", "zonal", "multiband"]
C0Policy = Literal["fixed", "calibrated"]


def n_coefficients(max_degree: int) -> int:
    """Number of real harmonics of degree <= max_degree on S^2."""
    return (int(max_degree) + 1) ** 2


# -----------------------
# Harmonic coordinates
# -----------------------
@dataclass(frozen=True)
class HarmonicIndex:
    """
    (degree, order) with order in 1..2l+1.

    order k maps to the conventional m = k - l - 1 in -l..l, and the flat
    storage position is l^2 + l + m.
    """
    degree: int
    order: int

    def __post_init__(self) -> None:
        if self.degree < 0:
            raise HarmonicDomainError(f"degree must be >= 0; got {self.degree}")
        if not 1 <= self.order <= 2 * self.degree + 1:
            raise HarmonicDomainError(
                f"order must be in 1..{2 * self.degree + 1} for degree {self.degree}; got {self.order}"
            )

    @classmethod
    def from_conventional(cls, degree: int, m: int) -> "HarmonicIndex":
        return cls(degree=int(degree), order=int(m) + int(degree) + 1)

    @property
    def m(self) -> int:
        return self.order - self.degree - 1

    @property
    def flat(self) -> int:
        return self.degree * self.degree + self.order - 1


@dataclass(frozen=True, eq=False)
class HarmonicExpansion:
    """
    Real coefficients a_{l,m}, l <= max_degree, stored flat (see HarmonicIndex.flat).

    Density-flagged expansions carry a_{0,0} = 1/sqrt(4 pi).
    """
    max_degree: int
    coeffs: np.ndarray
    is_density: bool = False
    dimension: int = 2

    def __post_init__(self) -> None:
        if self.dimension != 2:
            raise HarmonicDomainError("only S^2 expansions (dimension=2) are supported")
        arr = np.array(self.coeffs, dtype=float).reshape(-1)
        if arr.size != n_coefficients(self.max_degree):
            raise HarmonicDomainError(
                f"expected {n_coefficients(self.max_degree)} coefficients for max_degree "
                f"{self.max_degree}; got {arr.size}"
            )
        if not np.all(np.isfinite(arr)):
            raise HarmonicDomainError("harmonic coefficients must be finite")
        if self.is_density and abs(arr[0] - DENSITY_A00) > 1e-12:
            raise DensityValidationError(
                f"density expansions need a_00 = 1/sqrt(4 pi); got {arr[0]!r}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def zeros(cls, max_degree: int) -> "HarmonicExpansion":
        return cls(max_degree=max_degree, coeffs=np.zeros(n_coefficients(max_degree)))

    @classmethod
    def from_mapping(
        cls,
        values: Mapping[Tuple[int, int], float],
        *,
        max_degree: Optional[int] = None,
        is_density: bool = False,
    ) -> "HarmonicExpansion":
        """Build from {(l, m_conventional): a}."""
        top = max((l for l, _ in values), default=0)
        L = top if max_degree is None else int(max_degree)
        out = np.zeros(n_coefficients(L))
        for (l, m), a in values.items():
            idx = HarmonicIndex.from_conventional(l, m)
            if idx.degree > L:
                raise HarmonicDomainError(f"degree {idx.degree} exceeds max_degree {L}")
            out[idx.flat] = float(a)
        return cls(max_degree=L, coeffs=out, is_density=is_density)

    def coefficient(self, idx: HarmonicIndex) -> float:
        if idx.degree > self.max_degree:
            return 0.0
        return float(self.coeffs[idx.flat])

    def degree_block(self, degree: int) -> np.ndarray:
        if degree > self.max_degree:
            return np.zeros(2 * degree + 1)
        return self.coeffs[degree * degree:(degree + 1) * (degree + 1)]

    def degree_energy(self) -> np.ndarray:
        """sum_m a_{l,m}^2 for l = 0..max_degree."""
        sq = self.coeffs ** 2
        return np.array([sq[l * l:(l + 1) * (l + 1)].sum() for l in range(self.max_degree + 1)])

    def padded(self, max_degree: int) -> np.ndarray:
        """Coefficient vector zero-padded (or cut) to max_degree."""
        out = np.zeros(n_coefficients(max_degree))
        m = min(out.size, self.coeffs.size)
        out[:m] = self.coeffs[:m]
        return out


# -----------------------
# Quadrature
# -----------------------
@dataclass(frozen=True, eq=False)
class CubatureRule:
    exactness_degree: int
    nodes: np.ndarray      # (K, 3) unit vectors
    weights: np.ndarray    # (K,) steradians

    def __post_init__(self) -> None:
        nodes = np.array(self.nodes, dtype=float).reshape(-1, 3)
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if nodes.shape[0] != weights.size:
            raise HarmonicDomainError("cubature nodes and weights differ in length")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return int(self.weights.size)


# -----------------------
# Densities and samples
# -----------------------
@dataclass(frozen=True)
class DensityDescriptor:
    kind: DensityKind
    amplitudes: Tuple[Tuple[int, float], ...] = ()   # (degree, alpha), sorted by degree
    axis: Tuple[float, float, float] = (0.0, 0.0, 1.0)

    def to_dict(self) -> Dict[str, object]:
        out: Dict[str, object] = {"kind": self.kind}
        if self.kind == "zonal":
            (deg, alpha), = self.amplitudes
            out.update({"degree": deg, "alpha": alpha, "axis": list(self.axis)})
        elif self.kind == "multiband":
            out.update({
                "amplitudes": {str(d): a for d, a in self.amplitudes},
                "axis": list(self.axis),
            })
        return out


@dataclass(frozen=True, eq=False)
class SphericalSample:
    points: np.ndarray     # (n, 3)
    seed: int
    proposals: Optional[int] = None

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=float).reshape(-1, 3)
        if pts.size and np.max(np.abs(np.linalg.norm(pts, axis=1) - 1.0)) > UNIT_TOL:
            raise HarmonicDomainError("sample points must be unit vectors")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    def subset(self, indices: np.ndarray) -> "SphericalSample":
        return SphericalSample(points=self.points[np.asarray(indices)], seed=self.seed)


# -----------------------
# Estimation configs
# -----------------------
@dataclass(frozen=True)
class EstimatorConfig:
    r: float
    J: int
    split_seed: int = 0
    include_mean_term: Optional[bool] = None     # None -> (r == 0)

    def __post_init__(self) -> None:
        if self.r < 0:
            raise EstimatorInputError(f"r must be >= 0; got {self.r}")
        if self.J < 0:
            raise EstimatorInputError(f"J must be >= 0; got {self.J}")

    @property
    def mean_term_included(self) -> bool:
        if self.include_mean_term is None:
            return self.r == 0
        return bool(self.include_mean_term)


@dataclass(frozen=True)
class ResolutionGrid:
    J_min: int
    J_max: int
    B: float = 2.0

    def __post_init__(self) -> None:
        if self.J_min < 0:
            raise LepskiConfigError(f"J_min must be >= 0; got {self.J_min}")
        if self.J_min > self.J_max:
            raise LepskiConfigError(f"J_min ({self.J_min}) > J_max ({self.J_max})")
        if self.B <= 1:
            raise LepskiConfigError(f"B must be > 1; got {self.B}")

    @property
    def levels(self) -> Tuple[int, ...]:
        return tuple(range(self.J_min, self.J_max + 1))

    def __len__(self) -> int:
        return self.J_max - self.J_min + 1


@dataclass(frozen=True)
class LepskiConfig:
    C0: float
    grid: ResolutionGrid
    r: float = 0.0
    d: int = 2

    def __post_init__(self) -> None:
        if not np.isfinite(self.C0) or self.C0 <= 0:
            raise LepskiConfigError(f"C0 must be positive and finite; got {self.C0}")
        if self.r < 0:
            raise LepskiConfigError(f"r must be >= 0; got {self.r}")


# -----------------------
# Experiments
# -----------------------
@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    density: DensityDescriptor
    r: float
    sample_sizes: Tuple[int, ...]
    replicates: int
    master_seed: int
    c0_policy: C0Policy = "calibrated"
    C0: Optional[float] = None
    kappa: float = 1.5
    calibration_replicates: int = 100
    pilot: Optional[DensityDescriptor] = None     # None -> uniform pilot
    B: float = 2.0
    J_min: int = 0
    J_max: Optional[int] = None
    J_cap: int = 4
    description: str = field(default="", compare=False)
