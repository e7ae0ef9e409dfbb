from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Optional, Union

import yaml  # pyyaml

from .densities import density_from_descriptor, parse_density_descriptor
from .errors import (
    DensityValidationError,
    ExperimentNotFoundError,
    ExperimentSpecValidationError,
)
from .models import ExperimentSpec

EXPERIMENTS_DIR = Path(__file__).resolve().parents[1] / "data" / "experiments"

_TOP_KEYS = {
    "schema_version", "name", "description", "density", "r", "sample_sizes",
    "replicates", "master_seed", "grid", "c0",
}
_GRID_KEYS = {"B", "J_min", "J_max", "J_cap"}
_C0_KEYS = {"policy", "value", "kappa", "replicates", "pilot"}


class ExperimentCatalog:
    """
    Loads experiment specs from YAML files and caches them by name.
    """

    def __init__(self, experiments_dir: Path = EXPERIMENTS_DIR):
        self.experiments_dir = experiments_dir
        self._cache: Dict[str, ExperimentSpec] = {}

    def list_experiments(self) -> List[str]:
        return sorted([p.stem.lower() for p in self.experiments_dir.glob("*.yml")])

    def get(self, name: str) -> ExperimentSpec:
        key = name.strip().lower()
        if key in self._cache:
            return self._cache[key]

        path = self.experiments_dir / f"{key}.yml"
        if not path.exists():
            raise ExperimentNotFoundError(f"Experiment '{key}' not found: {path}")

        spec = self._parse_spec(yaml.safe_load(path.read_text()), default_name=key)
        self._cache[key] = spec
        return spec

    # -----------------------
    # Internal parsing / validation
    # -----------------------
    def _parse_spec(self, raw: dict, *, default_name: str = "") -> ExperimentSpec:
        return parse_experiment_spec(raw, default_name=default_name)


def _reject_unknown(section: str, raw: dict, allowed: set) -> None:
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ExperimentSpecValidationError(f"unknown keys in {section}: {unknown}")


def parse_experiment_spec(raw: object, *, default_name: str = "") -> ExperimentSpec:
    if not isinstance(raw, dict):
        raise ExperimentSpecValidationError("experiment spec must be a mapping")
    try:
        _reject_unknown("experiment spec", raw, _TOP_KEYS)
        name = str(raw.get("name") or default_name)

        # -----------------------
        # Density and sizes
        # -----------------------
        density = parse_density_descriptor(raw["density"])
        density_from_descriptor(density)  # nonnegativity check
        r = float(raw["r"])
        if r < 0:
            raise ExperimentSpecValidationError(f"{name}: r must be >= 0; got {r}")

        sizes = tuple(int(n) for n in raw["sample_sizes"])
        if not sizes:
            raise ExperimentSpecValidationError(f"{name}: sample_sizes must be nonempty")
        if any(n < 2 for n in sizes):
            raise ExperimentSpecValidationError(f"{name}: every sample size must be >= 2")
        if list(sizes) != sorted(sizes):
            raise ExperimentSpecValidationError(f"{name}: sample_sizes must be sorted ascending")

        replicates = int(raw["replicates"])
        if replicates < 2:
            raise ExperimentSpecValidationError(f"{name}: replicates must be >= 2; got {replicates}")
        master_seed = int(raw["master_seed"])
        if master_seed < 0:
            raise ExperimentSpecValidationError(f"{name}: master_seed must be >= 0")

        # -----------------------
        # Grid
        # -----------------------
        grid = raw.get("grid") or {}
        _reject_unknown("grid", grid, _GRID_KEYS)
        B = float(grid.get("B", 2.0))
        if B <= 1:
            raise ExperimentSpecValidationError(f"{name}: grid.B must be > 1; got {B}")
        J_min = int(grid.get("J_min", 0))
        J_max: Optional[int] = None if grid.get("J_max") is None else int(grid["J_max"])
        J_cap = int(grid.get("J_cap", 4))
        if J_max is not None and J_max < J_min:
            raise ExperimentSpecValidationError(f"{name}: grid.J_max < grid.J_min")

        # -----------------------
        # C0 policy
        # -----------------------
        c0 = raw.get("c0") or {"policy": "calibrated"}
        _reject_unknown("c0", c0, _C0_KEYS)
        policy = str(c0.get("policy", "calibrated")).lower()
        allowed = {"fixed", "calibrated"}
        if policy not in allowed:
            raise ExperimentSpecValidationError(
                f"{name}: c0.policy must be one of {sorted(allowed)}; got '{policy}'"
            )
        value = None if c0.get("value") is None else float(c0["value"])
        if policy == "fixed" and (value is None or value <= 0):
            raise ExperimentSpecValidationError(f"{name}: c0.value > 0 is required when policy == fixed")
        pilot = None if c0.get("pilot") is None else parse_density_descriptor(c0["pilot"])
        if pilot is not None:
            density_from_descriptor(pilot)

        return ExperimentSpec(
            name=name,
            density=density,
            r=r,
            sample_sizes=sizes,
            replicates=replicates,
            master_seed=master_seed,
            c0_policy=policy,  # type: ignore[arg-type]
            C0=value,
            kappa=float(c0.get("kappa", 1.5)),
            calibration_replicates=int(c0.get("replicates", 100)),
            pilot=pilot,
            B=B,
            J_min=J_min,
            J_max=J_max,
            J_cap=J_cap,
            description=str(raw.get("description", "")),
        )

    except DensityValidationError as e:
        raise ExperimentSpecValidationError(f"Invalid density: {e}") from e
    except KeyError as e:
        raise ExperimentSpecValidationError(f"Missing required field: {e}") from e
    except (TypeError, ValueError) as e:
        raise ExperimentSpecValidationError(f"Invalid value type: {e}") from e


def load_experiment_spec(source: Union[str, Path], catalog: Optional[ExperimentCatalog] = None) -> ExperimentSpec:
    """A spec file path, or the name of a shipped experiment."""
    path = Path(source)
    if path.suffix.lower() in {".yml", ".yaml", ".json"} or path.exists():
        if not path.exists():
            raise ExperimentNotFoundError(f"experiment spec not found: {path}")
        return parse_experiment_spec(yaml.safe_load(path.read_text()), default_name=path.stem)
    return (catalog or ExperimentCatalog()).get(str(source))
