from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Union

import numpy as np

from .densities import TestDensity, make_uniform_density
from .errors import CalibrationError, LepskiConfigError
from .estimator import TruncatedEstimate, estimate_truncated, replicate_level_estimates
from .models import EstimatorConfig, LepskiConfig, ResolutionGrid, SphericalSample
from .needlets import NeedletFrame
from .rng import CALIBRATION_STREAM, derive_seed

logger = logging.getLogger(__name__)

DEFAULT_KAPPA = 1.5
MIN_CALIBRATION_REPLICATES = 50
# C0 reported for a one-level grid, where select_J never consults a threshold.
SINGLE_LEVEL_C0 = 1.0


# -----------------------
# Grid
# -----------------------
def variance_guard(n: int, r: float, *, B: float = 2.0, d: int = 2) -> int:
    """floor(ln n / ((d + 4r) ln B)): the largest J whose variance B^{J(d+4r)}/n stays O(1)."""
    if n < 1:
        raise LepskiConfigError(f"n must be >= 1; got {n}")
    return max(0, int(math.floor(math.log(n) / ((d + 4.0 * r) * math.log(B)) + 1e-12)))


def make_grid(
    n: int,
    r: float,
    *,
    B: float = 2.0,
    d: int = 2,
    J_min: int = 0,
    J_max: Optional[int] = None,
    J_cap: Optional[int] = None,
) -> ResolutionGrid:
    """
    Admissible levels J_min..J_max.

    Default J_max is the variance guard, cut at the frame cap; an explicit
    J_max may exceed the guard by at most one level.
    """
    guard = variance_guard(n, r, B=B, d=d)
    if J_max is None:
        top = guard if J_cap is None else min(guard, J_cap)
        top = max(top, J_min)
    else:
        top = int(J_max)
    if top > guard + 1:
        raise LepskiConfigError(
            f"J_max={top} exceeds the variance guard {guard} + 1 for n={n}, r={r}"
        )
    if J_cap is not None and top > J_cap:
        raise LepskiConfigError(f"J_max={top} above frame cap {J_cap}")
    return ResolutionGrid(J_min=int(J_min), J_max=top, B=float(B))


# -----------------------
# Threshold and selection
# -----------------------
def omega(J: int, n: int, cfg: LepskiConfig) -> float:
    """
    omega(J) = C0 n^{-1/2} B^{J (d/2 + 2r)}
    """
    if n < 1:
        raise LepskiConfigError(f"n must be >= 1; got {n}")
    return cfg.C0 / math.sqrt(n) * cfg.grid.B ** (J * (cfg.d / 2.0 + 2.0 * cfg.r))


def _value(est: Union[TruncatedEstimate, float]) -> float:
    return float(est.value) if isinstance(est, TruncatedEstimate) else float(est)


def select_J(
    estimates: Mapping[int, Union[TruncatedEstimate, float]],
    cfg: LepskiConfig,
    n: int,
) -> int:
    """
    J_hat = min { J in grid : |T_hat^(J) - T_hat^(J')| <= omega(J') for all J' > J in grid }

    The largest level is vacuously admissible, so the set is never empty.
    """
    levels = cfg.grid.levels
    missing = [J for J in levels if J not in estimates]
    if missing:
        raise LepskiConfigError(f"estimates missing for grid levels {missing}")

    values = {J: _value(estimates[J]) for J in levels}
    thresholds = {J: omega(J, n, cfg) for J in levels}
    for J in levels:
        if all(abs(values[J] - values[Jp]) <= thresholds[Jp] for Jp in levels if Jp > J):
            return J
    return cfg.grid.J_max


@dataclass(frozen=True)
class AdaptiveResult:
    value: float
    J_hat: int
    per_level_estimates: Dict[int, float]
    thresholds: Dict[int, float]
    C0: float
    n: int

    def to_dict(self) -> Dict[str, object]:
        return {
            "J_hat": self.J_hat,
            "value": self.value,
            "per_level_estimates": {str(J): v for J, v in self.per_level_estimates.items()},
            "thresholds": {str(J): w for J, w in self.thresholds.items()},
            "C0": self.C0,
            "n": self.n,
        }


def adaptive_estimate(
    sample_: SphericalSample,
    frame: NeedletFrame,
    cfg: LepskiConfig,
    *,
    split_seed: int = 0,
) -> AdaptiveResult:
    """
    T_tilde_r = T_hat_r^(J_hat).

    One split, one pass up to J_max; every T_hat^(J) on the grid is a partial
    sum of the same per-level contributions.
    """
    grid = cfg.grid
    est = estimate_truncated(
        sample_, frame, EstimatorConfig(r=cfg.r, J=grid.J_max, split_seed=split_seed)
    )
    values = {J: est.partial(J) for J in grid.levels}
    J_hat = select_J(values, cfg, sample_.n)
    return AdaptiveResult(
        value=values[J_hat],
        J_hat=J_hat,
        per_level_estimates=values,
        thresholds={J: omega(J, sample_.n, cfg) for J in grid.levels},
        C0=cfg.C0,
        n=sample_.n,
    )


# -----------------------
# Calibration
# -----------------------
def c0_from_level_matrix(
    matrix: np.ndarray,
    grid: ResolutionGrid,
    n: int,
    r: float,
    *,
    d: int = 2,
    kappa: float = DEFAULT_KAPPA,
) -> float:
    """
    C0 = kappa * max_J sd(T_hat^(J) - T_hat^(J+1)) * sqrt(n) * B^{-(J+1)(d/2 + 2r)}

    over adjacent grid pairs; matrix columns are indexed by J.
    """
    if len(grid) < 2:
        raise CalibrationError("calibration needs a grid with at least two levels")
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] < 2 or m.shape[1] <= grid.J_max:
        raise CalibrationError(f"replicate matrix of shape {m.shape} does not cover the grid")

    expo = d / 2.0 + 2.0 * r
    spreads = [
        float(np.std(m[:, J] - m[:, J + 1], ddof=1)) * math.sqrt(n) * grid.B ** (-(J + 1) * expo)
        for J in grid.levels[:-1]
    ]
    c0 = kappa * max(spreads)
    if not np.isfinite(c0) or c0 <= 0.0:
        raise CalibrationError(f"calibrated C0 must be positive and finite; got {c0}")
    return float(c0)


def calibrate_C0(
    f_pilot: Optional[TestDensity],
    frame: NeedletFrame,
    r: float,
    n: int,
    replicates: int,
    seed: int,
    *,
    grid: Optional[ResolutionGrid] = None,
    kappa: float = DEFAULT_KAPPA,
    threads: Optional[int] = 1,
) -> float:
    """Pilot Monte Carlo estimate of the fluctuation constant; the pilot defaults to uniform."""
    if replicates < MIN_CALIBRATION_REPLICATES:
        raise CalibrationError(
            f"calibration needs >= {MIN_CALIBRATION_REPLICATES} replicates; got {replicates}"
        )
    pilot = make_uniform_density() if f_pilot is None else f_pilot
    grid = make_grid(n, r, B=frame.B, J_cap=frame.J_cap) if grid is None else grid
    if len(grid) == 1:
        logger.info("one-level grid at J=%d; C0 is not used, reporting %s", grid.J_min, SINGLE_LEVEL_C0)
        return SINGLE_LEVEL_C0

    matrix = replicate_level_estimates(
        pilot, frame, r, grid.J_max, n, replicates,
        derive_seed(seed, CALIBRATION_STREAM),
        threads=threads,
    )
    c0 = c0_from_level_matrix(matrix, grid, n, r, kappa=kappa)
    logger.info("calibrated C0=%.4g (n=%d, r=%s, kappa=%s, replicates=%d)", c0, n, r, kappa, replicates)
    return c0
