from __future__ import annotations

from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import yaml  # pyyaml

from sobolev_needlets.engine.adaptive import variance_guard
from sobolev_needlets.engine.errors import RateModelError
from sobolev_needlets.engine.models import ResolutionGrid

from .rate_model import RateModel, model_adaptive_J, model_mse, oracle_J

TABLES_DIR = Path(__file__).resolve().parents[1] / "data" / "tables"

TABLE_COLUMNS = [
    "s", "n", "J_star", "J_hat", "oracle_mse", "adaptive_mse", "risk_ratio",
    "r", "d", "B", "c_bias", "c_var",
]

# Named parameter regimes for bias-variance curves.
REGIMES: Dict[str, RateModel] = {
    "classical": RateModel(d=2, r=1.0, s=2.5, n=4000),
    "low_regularity": RateModel(d=2, r=0.0, s=0.6, n=200_000),
}


# -----------------------
# Rows
# -----------------------
def _parse_rows(raw: object) -> List[Tuple[float, int]]:
    items = raw.get("rows") if isinstance(raw, dict) else raw
    if not isinstance(items, list) or not items:
        raise RateModelError("row spec must be a nonempty list of {s, n} entries")
    try:
        return [(float(item["s"]), int(item["n"])) for item in items]
    except KeyError as e:
        raise RateModelError(f"Missing required row field: {e}") from e
    except (TypeError, ValueError) as e:
        raise RateModelError(f"Invalid row value: {e}") from e


def load_rows(path: Union[str, Path]) -> List[Tuple[float, int]]:
    """(s, n) rows from a YAML or JSON file: a list or a mapping with a `rows` list."""
    p = Path(path)
    if not p.exists():
        raise RateModelError(f"row spec not found: {p}")
    return _parse_rows(yaml.safe_load(p.read_text()))


def reference_rows() -> List[Tuple[float, int]]:
    return load_rows(TABLES_DIR / "reference_grid.yml")


# -----------------------
# Tables and curves
# -----------------------
def model_grid(model: RateModel, *, J_min: int = 0, J_max: Optional[int] = None) -> ResolutionGrid:
    """Levels J_min..max(J_min + 1, guard + 1) unless J_max is given."""
    if J_max is None:
        guard = variance_guard(model.n, model.r, B=model.B, d=model.d)
        J_max = max(J_min + 1, guard + 1)
    return ResolutionGrid(J_min=J_min, J_max=J_max, B=model.B)


def oracle_table(
    rows: Iterable[Tuple[float, int]],
    *,
    r: float = 1.0,
    d: int = 2,
    B: float = 2.0,
    c_bias: float = 1.0,
    c_var: float = 1.0,
    J_min: int = 0,
    J_max: Optional[int] = None,
) -> pd.DataFrame:
    """
    One row per (s, n):

      J_star       = oracle_J on the model grid
      J_hat        = model_adaptive_J (adjacent-level rule)
      oracle_mse   = MSE(J_star),  adaptive_mse = MSE(J_hat)
    """
    out = []
    for s, n in rows:
        model = RateModel(d=d, r=r, s=s, n=n, B=B, c_bias=c_bias, c_var=c_var)
        grid = model_grid(model, J_min=J_min, J_max=J_max)
        j_star = oracle_J(model, grid)
        j_hat = model_adaptive_J(model, grid)
        oracle_mse = model_mse(model, j_star).mse
        adaptive_mse = model_mse(model, j_hat).mse
        out.append({
            "s": s,
            "n": n,
            "J_star": j_star,
            "J_hat": j_hat,
            "oracle_mse": oracle_mse,
            "adaptive_mse": adaptive_mse,
            "risk_ratio": adaptive_mse / oracle_mse,
            "r": r,
            "d": d,
            "B": B,
            "c_bias": c_bias,
            "c_var": c_var,
        })
    return pd.DataFrame(out, columns=TABLE_COLUMNS)


def bias_variance_curve(model: RateModel, levels: Optional[Sequence[float]] = None) -> pd.DataFrame:
    """
    Plot-ready model curve: columns J, bias2, var, mse, is_oracle.

    Default levels are 0..guard+2; is_oracle marks the minimizer among the
    given levels (first one on ties).
    """
    if levels is None:
        guard = variance_guard(model.n, model.r, B=model.B, d=model.d)
        levels = list(range(guard + 3))
    risks = [model_mse(model, J) for J in levels]
    mse = np.array([risk.mse for risk in risks])
    best = int(np.argmin(mse))
    return pd.DataFrame({
        "J": list(levels),
        "bias2": [risk.bias2 for risk in risks],
        "var": [risk.var for risk in risks],
        "mse": mse,
        "is_oracle": [i == best for i in range(len(risks))],
    })
