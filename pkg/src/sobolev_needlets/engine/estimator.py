from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .densities import TestDensity, empirical_expansion, exact_T, sample
from .errors import EstimatorInputError, FrameIndexError
from .models import DENSITY_A00, EstimatorConfig, SphericalSample
from .needlets import NeedletCoefficients, NeedletFrame, analyze, frame_energy
from .parallel import run_replicates
from .rng import SAMPLE_STREAM, SPLIT_STREAM, derive_seed, make_generator

logger = logging.getLogger(__name__)

MEAN_TERM = DENSITY_A00 ** 2        # a_00^2 = 1/(4 pi) for every density

RISK_COLUMNS = ["n", "r", "J", "bias", "var", "mse", "se_bias", "se_var", "se_mse"]


@dataclass(frozen=True, eq=False)
class TruncatedEstimate:
    """
    T_hat^(J) = mean_term + sum_{j <= J} per_level[j]

    per_level[j] = sum_k beta_hat_{j,k;(1)} beta_hat_{j,k;(2)}
    """
    value: float
    per_level: Tuple[float, ...]
    n: int
    config: EstimatorConfig
    mean_term: float = 0.0

    def partial(self, J: int) -> float:
        """The nested estimate T_hat^(J) for J <= config.J, from the same split."""
        if not 0 <= J < len(self.per_level):
            raise FrameIndexError(f"J={J} outside estimated levels 0..{len(self.per_level) - 1}")
        return float(self.cumulative()[J])

    def cumulative(self) -> np.ndarray:
        return self.mean_term + np.cumsum(np.asarray(self.per_level, dtype=float))


# -----------------------
# Coefficients and the split estimator
# -----------------------
def _check_frame_level(frame: NeedletFrame, J: int) -> None:
    if J > frame.J_cap:
        raise FrameIndexError(f"J={J} above frame cap {frame.J_cap}")


def empirical_coefficients(
    frame: NeedletFrame,
    half: SphericalSample,
    r: float,
    J: int,
) -> NeedletCoefficients:
    """
    beta_hat^(r)_{j,k} = (1/|D|) sum_{X_i in D} psi^(r)_{j,k}(X_i),  j <= J

    Evaluated through the empirical harmonic coefficients of the half-sample
    followed by the level transform; identical to averaging the atoms.
    """
    if half.n == 0:
        raise EstimatorInputError("empirical coefficients need a nonempty half-sample")
    _check_frame_level(frame, J)
    emp = empirical_expansion(half.points, frame.level(J).ell_max)
    return analyze(frame, emp, r, J)


def split_sample(sample_: SphericalSample, split_seed: int) -> Tuple[SphericalSample, SphericalSample]:
    """Seeded permutation into halves of sizes ceil(n/2) and floor(n/2)."""
    perm = make_generator(derive_seed(split_seed, SPLIT_STREAM)).permutation(sample_.n)
    cut = (sample_.n + 1) // 2
    return sample_.subset(perm[:cut]), sample_.subset(perm[cut:])


def cross_estimate(
    frame: NeedletFrame,
    half_a: SphericalSample,
    half_b: SphericalSample,
    cfg: EstimatorConfig,
) -> TruncatedEstimate:
    """Sum over levels of the cross products of the two half-sample coefficient sets."""
    beta_a = empirical_coefficients(frame, half_a, cfg.r, cfg.J)
    beta_b = empirical_coefficients(frame, half_b, cfg.r, cfg.J)
    per_level = tuple(float(np.dot(a, b)) for a, b in zip(beta_a.levels, beta_b.levels))
    mean_term = MEAN_TERM if cfg.mean_term_included else 0.0
    return TruncatedEstimate(
        value=float(mean_term + np.cumsum(per_level)[-1]),
        per_level=per_level,
        n=half_a.n + half_b.n,
        config=cfg,
        mean_term=mean_term,
    )


def estimate_truncated(
    sample_: SphericalSample,
    frame: NeedletFrame,
    cfg: EstimatorConfig,
) -> TruncatedEstimate:
    """
    Split-sample estimator of the truncated functional:

        T_hat_r^(J) = sum_{j <= J} sum_k beta_hat^(r)_{j,k;(1)} beta_hat^(r)_{j,k;(2)}

    plus a_00^2 = 1/(4 pi) when r = 0. The halves are independent, so each
    product is unbiased for beta_{j,k}^2.
    """
    if sample_.n < 2:
        raise EstimatorInputError(f"estimator needs at least 2 points; got {sample_.n}")
    _check_frame_level(frame, cfg.J)
    half_1, half_2 = split_sample(sample_, cfg.split_seed)
    return cross_estimate(frame, half_1, half_2, cfg)


def truncated_exact(
    f: TestDensity,
    frame: NeedletFrame,
    r: float,
    J: int,
    *,
    include_mean_term: Optional[bool] = None,
) -> float:
    """T_r^(J)(f) from exact coefficients, plus the mean term at r = 0."""
    energy = frame_energy(analyze(frame, f.expansion, r, J), J)
    with_mean = (r == 0) if include_mean_term is None else include_mean_term
    return float(energy + (MEAN_TERM if with_mean else 0.0))


# -----------------------
# Replicates
# -----------------------
def replicate_level_estimates(
    f: TestDensity,
    frame: NeedletFrame,
    r: float,
    J_max: int,
    n: int,
    replicates: int,
    seed: int,
    *,
    include_mean_term: Optional[bool] = None,
    threads: Optional[int] = 1,
) -> np.ndarray:
    """
    Matrix (replicates, J_max + 1) of T_hat^(J), J = 0..J_max.

    Replicate i draws its sample and its split from seeds derived from
    (seed, i), and all J share that one split.
    """
    cfg_base = EstimatorConfig(r=r, J=J_max, include_mean_term=include_mean_term)

    def task(i: int) -> np.ndarray:
        draw = sample(f, n, derive_seed(seed, i, SAMPLE_STREAM))
        cfg = replace(cfg_base, split_seed=derive_seed(seed, i, SPLIT_STREAM))
        return estimate_truncated(draw, frame, cfg).cumulative()

    rows = run_replicates(task, replicates, threads=threads)
    return np.vstack(rows)


def jackknife_se(values: np.ndarray, statistic: Callable[[np.ndarray], np.ndarray]) -> float:
    """
    Jackknife standard error; `statistic` maps a (m, m-1) matrix of
    leave-one-out samples to m values.
    """
    x = np.asarray(values, dtype=float)
    m = x.size
    if m < 2:
        return float("nan")
    loo = np.broadcast_to(x, (m, m))[~np.eye(m, dtype=bool)].reshape(m, m - 1)
    theta = statistic(loo)
    return float(math.sqrt((m - 1) / m * np.sum((theta - theta.mean()) ** 2)))


@dataclass(frozen=True, eq=False)
class RiskReport:
    n: int
    r: float
    J: int
    replicates: int
    truth: float
    truncated_truth: float
    bias: float
    variance: float
    mse: float
    se_bias: float
    se_variance: float
    se_mse: float
    values: np.ndarray

    def to_row(self) -> Dict[str, float]:
        return {
            "n": self.n,
            "r": self.r,
            "J": self.J,
            "bias": self.bias,
            "var": self.variance,
            "mse": self.mse,
            "se_bias": self.se_bias,
            "se_var": self.se_variance,
            "se_mse": self.se_mse,
        }


def mc_risk(
    f: TestDensity,
    frame: NeedletFrame,
    cfg: EstimatorConfig,
    n: int,
    replicates: int,
    seed: int,
    *,
    threads: Optional[int] = 1,
) -> RiskReport:
    """
    Monte Carlo bias, variance and MSE of T_hat_r^(J) against exact_T.

    Per-replicate sample and split seeds derive from `seed`; cfg supplies
    r, J and the mean-term switch, which applies to the truth as well.
    """
    if replicates < 2:
        raise EstimatorInputError(f"mc_risk needs at least 2 replicates; got {replicates}")

    matrix = replicate_level_estimates(
        f, frame, cfg.r, cfg.J, n, replicates, seed,
        include_mean_term=cfg.include_mean_term,
        threads=threads,
    )
    values = matrix[:, cfg.J]
    truth = exact_T(f, cfg.r)
    # exact_T carries a_00^2 only at r = 0; follow the config switch instead
    if cfg.mean_term_included and cfg.r > 0:
        truth += MEAN_TERM
    elif not cfg.mean_term_included and cfg.r == 0:
        truth -= MEAN_TERM
    err = values - truth

    report = RiskReport(
        n=int(n),
        r=float(cfg.r),
        J=int(cfg.J),
        replicates=int(replicates),
        truth=truth,
        truncated_truth=truncated_exact(
            f, frame, cfg.r, cfg.J, include_mean_term=cfg.mean_term_included
        ),
        bias=float(err.mean()),
        variance=float(values.var(ddof=1)),
        mse=float(np.mean(err ** 2)),
        se_bias=jackknife_se(err, lambda x: x.mean(axis=1)),
        se_variance=jackknife_se(values, lambda x: x.var(axis=1, ddof=1)),
        se_mse=jackknife_se(err, lambda x: np.mean(x ** 2, axis=1)),
        values=values,
    )
    logger.info(
        "mc_risk n=%d r=%s J=%d: bias=%.3e var=%.3e mse=%.3e",
        n, cfg.r, cfg.J, report.bias, report.variance, report.mse,
    )
    return report


def risk_reports_to_frame(reports: Sequence[RiskReport]) -> pd.DataFrame:
    return pd.DataFrame([rep.to_row() for rep in reports], columns=RISK_COLUMNS)
