from __future__ import annotations

from .rate_model import (
    ModelRisk,
    RateModel,
    balance_J,
    continuous_oracle_risk,
    fit_rate,
    model_adaptive_J,
    model_mse,
    nominal_balance_J,
    oracle_J,
    oracle_level,
    rate_exponent,
)
from .table import REGIMES, bias_variance_curve, load_rows, model_grid, oracle_table, reference_rows

__all__ = [
    "ModelRisk",
    "RateModel",
    "REGIMES",
    "balance_J",
    "bias_variance_curve",
    "continuous_oracle_risk",
    "fit_rate",
    "load_rows",
    "model_adaptive_J",
    "model_grid",
    "model_mse",
    "nominal_balance_J",
    "oracle_J",
    "oracle_level",
    "oracle_table",
    "rate_exponent",
    "reference_rows",
]
