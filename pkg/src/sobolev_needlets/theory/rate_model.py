from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence, Tuple

import numpy as np
from scipy import stats

from sobolev_needlets.engine.errors import RateModelError
from sobolev_needlets.engine.models import ResolutionGrid


@dataclass(frozen=True)
class RateModel:
    """
    Asymptotic risk model of the truncated estimator at level J:

        Bias^2(J) = c_bias * B^{-4 J (s - r)}
        Var(J)    = c_var * B^{J (d + 4r)} / n
    """
    d: int
    r: float
    s: float
    n: int
    B: float = 2.0
    c_bias: float = 1.0
    c_var: float = 1.0

    def __post_init__(self) -> None:
        if self.d < 1:
            raise RateModelError(f"d must be >= 1; got {self.d}")
        if self.r < 0:
            raise RateModelError(f"r must be >= 0; got {self.r}")
        if not self.s > self.r:
            raise RateModelError(f"smoothness s must exceed r (s={self.s}, r={self.r})")
        if self.B <= 1:
            raise RateModelError(f"B must be > 1; got {self.B}")
        if self.n < 1:
            raise RateModelError(f"n must be >= 1; got {self.n}")
        if self.c_bias <= 0 or self.c_var <= 0:
            raise RateModelError("model constants must be positive")

    @property
    def bias_exponent(self) -> float:
        return 4.0 * (self.s - self.r)

    @property
    def variance_exponent(self) -> float:
        return self.d + 4.0 * self.r


@dataclass(frozen=True)
class ModelRisk:
    bias2: float
    var: float
    mse: float


def model_mse(model: RateModel, J: float) -> ModelRisk:
    if J < 0:
        raise RateModelError(f"J must be >= 0; got {J}")
    bias2 = model.c_bias * model.B ** (-model.bias_exponent * J)
    var = model.c_var * model.B ** (model.variance_exponent * J) / model.n
    return ModelRisk(bias2=bias2, var=var, mse=bias2 + var)


def oracle_J(model: RateModel, grid: ResolutionGrid) -> int:
    """Grid minimizer of the model MSE; ties go to the smaller J."""
    best_J = grid.J_min
    best = model_mse(model, best_J).mse
    for J in grid.levels[1:]:
        mse = model_mse(model, J).mse
        if mse < best:
            best_J, best = J, mse
    return best_J


def model_adaptive_J(model: RateModel, grid: ResolutionGrid) -> int:
    """
    Adjacent-level rule: the smallest J with Bias^2(J) <= Var(J + 1), else J_max.
    """
    if len(grid) < 2:
        raise RateModelError("adjacent-level selection needs at least two grid levels")
    for J in grid.levels[:-1]:
        if model_mse(model, J).bias2 <= model_mse(model, J + 1).var:
            return J
    return grid.J_max


def rate_exponent(s: float, r: float, d: int) -> float:
    """
    -4 (s - r) / (2s + d + 4r)
    """
    if not s > r:
        raise RateModelError(f"rate exponent needs s > r (s={s}, r={r})")
    return -4.0 * (s - r) / (2.0 * s + d + 4.0 * r)


def nominal_balance_J(model: RateModel) -> float:
    """ln n / ((2s + d + 4r) ln B), from B^{J*} = n^{1/(2s+d+4r)}."""
    return math.log(model.n) / ((2.0 * model.s + model.d + 4.0 * model.r) * math.log(model.B))


def balance_J(model: RateModel) -> float:
    """
    Continuous minimizer of the model MSE, clipped at 0:

        J = ln(a c_bias n / (b c_var)) / ((a + b) ln B),   a = 4(s - r), b = d + 4r
    """
    a, b = model.bias_exponent, model.variance_exponent
    J = math.log(a * model.c_bias * model.n / (b * model.c_var)) / ((a + b) * math.log(model.B))
    return max(0.0, J)


def continuous_oracle_risk(model: RateModel) -> float:
    return model_mse(model, balance_J(model)).mse


def oracle_level(bias2: Mapping[int, float], var: Mapping[int, float]) -> int:
    """Argmin over J of a measured bias^2 + variance profile; ties go to the smaller J."""
    levels = sorted(bias2)
    if not levels or set(levels) != set(var):
        raise RateModelError("bias and variance profiles must share the same nonempty levels")
    best_J = levels[0]
    best = bias2[best_J] + var[best_J]
    for J in levels[1:]:
        risk = bias2[J] + var[J]
        if risk < best:
            best_J, best = J, risk
    return best_J


def fit_rate(points: Sequence[Tuple[float, float]]) -> float:
    """
    Least-squares slope of log(risk) against log(n).

    Needs at least three points, all positive. Constant risks give slope 0.
    """
    if len(points) < 3:
        raise RateModelError(f"fit_rate needs at least 3 points; got {len(points)}")
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise RateModelError("fit_rate expects (n, risk) pairs")
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise RateModelError("fit_rate needs positive, finite n and risk values")
    try:
        fit = stats.linregress(np.log(arr[:, 0]), np.log(arr[:, 1]))
    except ValueError as e:
        raise RateModelError(f"cannot fit a rate: {e}") from e
    return float(fit.slope)
