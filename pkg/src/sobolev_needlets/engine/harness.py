from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

from sobolev_needlets.theory.rate_model import oracle_level

from .adaptive import calibrate_C0, make_grid, omega, select_J
from .densities import density_from_descriptor, exact_T
from .estimator import jackknife_se, replicate_level_estimates, truncated_exact
from .models import ExperimentSpec, LepskiConfig
from .needlets import build_frame
from .rng import CALIBRATION_STREAM, REPLICATE_STREAM, derive_seed

logger = logging.getLogger(__name__)

CURVE_COLUMNS = [
    "n",
    "oracle_risk",
    "adaptive_risk",
    "mean_J_hat",
    "freq_oversmooth",
    "se_oracle",
    "se_adaptive",
]


@dataclass(frozen=True, eq=False)
class RiskCurve:
    """One row per sample size (CURVE_COLUMNS) plus the metadata needed to rerun."""
    table: pd.DataFrame
    metadata: Dict[str, object]


def spec_to_dict(spec: ExperimentSpec) -> Dict[str, object]:
    return {
        "name": spec.name,
        "description": spec.description,
        "density": spec.density.to_dict(),
        "r": spec.r,
        "sample_sizes": list(spec.sample_sizes),
        "replicates": spec.replicates,
        "master_seed": spec.master_seed,
        "grid": {"B": spec.B, "J_min": spec.J_min, "J_max": spec.J_max, "J_cap": spec.J_cap},
        "c0": {
            "policy": spec.c0_policy,
            "value": spec.C0,
            "kappa": spec.kappa,
            "replicates": spec.calibration_replicates,
            "pilot": None if spec.pilot is None else spec.pilot.to_dict(),
        },
    }


def run_experiment(spec: ExperimentSpec, *, threads: Optional[int] = 1) -> RiskCurve:
    """
    Oracle versus adaptive risk across sample sizes.

    Per n:
      - C0 fixed or calibrated on the pilot density
      - replicates of T_hat^(J) for every grid level, one split each
      - J* = argmin_J (T_r^(J) - T_r)^2 + Var_hat(T_hat^(J)), exact truncation bias
      - oracle risk: empirical MSE of T_hat^(J*); adaptive risk: of T_hat^(J_hat)
      - omega(J') / sd(T_hat^(J*) - T_hat^(J')) for J' > J*, which drives freq_oversmooth
    Risks are measured against exact_T.
    """
    density = density_from_descriptor(spec.density)
    pilot = None if spec.pilot is None else density_from_descriptor(spec.pilot)
    frame = build_frame(spec.B, J_cap=spec.J_cap)
    truth = exact_T(density, spec.r)

    rows = []
    per_n = []
    for i_n, n in enumerate(spec.sample_sizes):
        grid = make_grid(
            n, spec.r, B=spec.B, J_min=spec.J_min, J_max=spec.J_max, J_cap=spec.J_cap
        )
        calibration_seed = derive_seed(spec.master_seed, i_n, CALIBRATION_STREAM)
        replicate_seed = derive_seed(spec.master_seed, i_n, REPLICATE_STREAM)

        if spec.c0_policy == "fixed":
            C0 = float(spec.C0)  # type: ignore[arg-type]
        else:
            C0 = calibrate_C0(
                pilot, frame, spec.r, n, spec.calibration_replicates, calibration_seed,
                grid=grid, kappa=spec.kappa, threads=threads,
            )
        lepski = LepskiConfig(C0=C0, grid=grid, r=spec.r)

        matrix = replicate_level_estimates(
            density, frame, spec.r, grid.J_max, n, spec.replicates, replicate_seed,
            threads=threads,
        )
        J_hat = np.array([
            select_J({J: row[J] for J in grid.levels}, lepski, n) for row in matrix
        ])

        bias2 = {J: (truncated_exact(density, frame, spec.r, J) - truth) ** 2 for J in grid.levels}
        var = {J: float(matrix[:, J].var(ddof=1)) for J in grid.levels}
        J_star = oracle_level(bias2, var)
        # J_hat > J* needs |T_hat^(J*) - T_hat^(J')| > omega(J') for some J' > J*;
        # a ratio z gives a near-Gaussian exceedance rate of about 2 (1 - Phi(z))
        threshold_to_sd = {}
        for Jp in grid.levels:
            if Jp > J_star:
                sd = float(np.std(matrix[:, J_star] - matrix[:, Jp], ddof=1))
                threshold_to_sd[str(Jp)] = omega(Jp, n, lepski) / sd if sd > 0 else float("inf")

        oracle_sq = (matrix[:, J_star] - truth) ** 2
        adaptive_sq = (matrix[np.arange(matrix.shape[0]), J_hat] - truth) ** 2

        rows.append({
            "n": int(n),
            "oracle_risk": float(oracle_sq.mean()),
            "adaptive_risk": float(adaptive_sq.mean()),
            "mean_J_hat": float(J_hat.mean()),
            "freq_oversmooth": float(np.mean(J_hat > J_star)),
            "se_oracle": jackknife_se(oracle_sq, lambda x: x.mean(axis=1)),
            "se_adaptive": jackknife_se(adaptive_sq, lambda x: x.mean(axis=1)),
        })
        per_n.append({
            "n": int(n),
            "C0": C0,
            "J_star": int(J_star),
            "grid": {"J_min": grid.J_min, "J_max": grid.J_max},
            "J_hat_counts": {str(J): int(np.sum(J_hat == J)) for J in grid.levels},
            "threshold_to_sd": threshold_to_sd,
            "calibration_seed": calibration_seed,
            "replicate_seed": replicate_seed,
        })
        logger.info(
            "%s n=%d: J*=%d mean J_hat=%.2f oracle=%.3e adaptive=%.3e",
            spec.name, n, J_star, rows[-1]["mean_J_hat"],
            rows[-1]["oracle_risk"], rows[-1]["adaptive_risk"],
        )

    metadata: Dict[str, object] = {
        "spec": spec_to_dict(spec),
        "frame": frame.summary(),
        "truth": truth,
        "levels": per_n,
    }
    return RiskCurve(table=pd.DataFrame(rows, columns=CURVE_COLUMNS), metadata=metadata)


# -----------------------
# Export
# -----------------------
def _paths(prefix: Union[str, Path]) -> Dict[str, Path]:
    base = str(prefix)
    return {"csv": Path(base + ".csv"), "json": Path(base + ".json")}


def export_results(curve: RiskCurve, path: Union[str, Path]) -> List[Path]:
    """Writes <path>.csv (one row per n) and <path>.json (rows + metadata)."""
    paths = _paths(path)
    paths["csv"].parent.mkdir(parents=True, exist_ok=True)
    curve.table.to_csv(paths["csv"], index=False, columns=CURVE_COLUMNS)

    payload = dict(curve.metadata)
    payload["rows"] = curve.table.to_dict(orient="records")
    paths["json"].write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return [paths["csv"], paths["json"]]


def load_results(path: Union[str, Path]) -> RiskCurve:
    paths = _paths(path)
    table = pd.read_csv(paths["csv"])
    payload = json.loads(paths["json"].read_text())
    payload.pop("rows", None)
    return RiskCurve(table=table, metadata=payload)
