from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, Mapping, Optional, Sequence

import pandas as pd
import yaml  # pyyaml

from sobolev_needlets.engine.adaptive import (
    DEFAULT_KAPPA,
    adaptive_estimate,
    calibrate_C0,
    make_grid,
)
from sobolev_needlets.engine.catalog import load_experiment_spec
from sobolev_needlets.engine.densities import (
    density_from_descriptor,
    exact_T,
    parse_density_descriptor,
    sample,
)
from sobolev_needlets.engine.diagnostics import run_frame_diagnostics
from sobolev_needlets.engine.errors import (
    ConfigError,
    DensityValidationError,
    ExperimentNotFoundError,
    ExperimentSpecValidationError,
    LepskiConfigError,
    RateModelError,
    SobolevNeedletsError,
    WindowParameterError,
)
from sobolev_needlets.engine.estimator import estimate_truncated, truncated_exact
from sobolev_needlets.engine.harness import export_results, run_experiment
from sobolev_needlets.engine.models import EstimatorConfig, LepskiConfig
from sobolev_needlets.engine.needlets import build_frame
from sobolev_needlets.engine.rng import SAMPLE_STREAM, SPLIT_STREAM, derive_seed
from sobolev_needlets.theory.rate_model import RateModel
from sobolev_needlets.theory.table import REGIMES, bias_variance_curve, load_rows, oracle_table, reference_rows

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

USAGE_ERRORS = (
    WindowParameterError,
    DensityValidationError,
    RateModelError,
    ExperimentNotFoundError,
    ExperimentSpecValidationError,
    ConfigError,
    LepskiConfigError,
)

# -----------------------
# Defaults (flags > config file > these)
# -----------------------
COMMON_DEFAULTS: Dict[str, object] = {
    "seed": None,
    "threads": 1,
    "output": None,
    "log_level": "WARNING",
}

COMMAND_DEFAULTS: Dict[str, Dict[str, object]] = {
    "frame-check": {"B": 2.0, "J_max": 4},
    "estimate": {"density": {"kind": "uniform"}, "r": 0.0, "J": 3, "n": 2000, "B": 2.0},
    "lepski": {
        "density": {"kind": "uniform"},
        "r": 0.0,
        "n": 2000,
        "B": 2.0,
        "J_min": 0,
        "J_max": None,
        "J_cap": 4,
        "c0_policy": None,
        "C0": None,
        "kappa": DEFAULT_KAPPA,
        "calibration_replicates": 100,
        "pilot": None,
    },
    "oracle-table": {
        "rows": None, "r": 1.0, "d": 2, "B": 2.0, "c_bias": 1.0, "c_var": 1.0,
        "J_min": 0, "J_max": None,
    },
    "tradeoff": {
        "regime": "classical", "s": None, "r": None, "d": None, "n": None, "B": None,
        "c_bias": None, "c_var": None, "max_level": None,
    },
    "experiment": {"spec": None},
}

CONFIG_KEYS = set(COMMON_DEFAULTS).union(*[set(d) for d in COMMAND_DEFAULTS.values()])


# -----------------------
# Config
# -----------------------
def load_cli_config(path: Optional[str]) -> Dict[str, object]:
    """Flat JSON/YAML mapping of option names; dashes and underscores are interchangeable."""
    if path is None:
        return {}
    p = Path(path)
    try:
        raw = yaml.safe_load(p.read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config file {p}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"config file {p} is not valid JSON/YAML: {e}") from e

    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {p} must hold a mapping")
    config = {str(k).replace("-", "_"): v for k, v in raw.items()}
    unknown = sorted(set(config) - CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys in {p}: {unknown}")
    return config


def resolve_options(command: str, args: argparse.Namespace) -> Dict[str, object]:
    opts: Dict[str, object] = dict(COMMON_DEFAULTS)
    opts.update(COMMAND_DEFAULTS[command])
    config = load_cli_config(args.config)
    opts.update({k: v for k, v in config.items() if k in opts})
    for key in opts:
        value = getattr(args, key, None)
        if value is not None:
            opts[key] = value
    return opts


def _require_seed(opts: Mapping[str, object]) -> int:
    if opts.get("seed") is None:
        raise ConfigError("this command is randomized: pass --seed or set `seed` in the config file")
    seed = int(opts["seed"])  # type: ignore[arg-type]
    if seed < 0:
        raise ConfigError(f"seed must be >= 0; got {seed}")
    return seed


def _density(raw: object) -> Mapping[str, object]:
    """A mapping, an inline JSON/YAML string, a bare kind name, or a file path."""
    if isinstance(raw, Mapping):
        return raw
    text = str(raw)
    path = Path(text)
    if path.suffix.lower() in {".json", ".yml", ".yaml"}:
        if not path.exists():
            raise DensityValidationError(f"density file not found: {path}")
        text = path.read_text()
    try:
        parsed = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise DensityValidationError(f"cannot parse density descriptor: {e}") from e
    if isinstance(parsed, str):
        parsed = {"kind": parsed}
    if not isinstance(parsed, Mapping):
        raise DensityValidationError(f"density descriptor must be a mapping; got {raw!r}")
    return parsed


# -----------------------
# Output
# -----------------------
def _emit(text: str, output: Optional[object]) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    path = Path(str(output))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    logger.info("wrote %s", path)


def _emit_json(payload: Mapping[str, object], output: Optional[object]) -> None:
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", output)


def _emit_csv(table: pd.DataFrame, output: Optional[object]) -> None:
    _emit(table.to_csv(index=False, float_format="%.10g"), output)


# -----------------------
# Commands
# -----------------------
def cmd_frame_check(opts: Dict[str, object]) -> int:
    J_max = int(opts["J_max"])  # type: ignore[arg-type]
    if J_max < 0:
        raise ConfigError(f"J_max must be >= 0; got {J_max}")
    frame = build_frame(float(opts["B"]), J_cap=J_max)  # type: ignore[arg-type]
    seed = 0 if opts.get("seed") is None else int(opts["seed"])  # type: ignore[arg-type]
    results = run_frame_diagnostics(frame, seed=seed)
    passed = all(res.passed for res in results)
    _emit_json(
        {
            "frame": frame.summary(),
            "diagnostics": [res.to_dict() for res in results],
            "passed": passed,
        },
        opts["output"],
    )
    for res in results:
        if not res.passed:
            logger.warning("diagnostic %s failed: error %.3g > %.3g", res.name, res.error, res.tolerance)
    return EXIT_OK if passed else EXIT_FAILURE


def cmd_estimate(opts: Dict[str, object]) -> int:
    seed = _require_seed(opts)
    desc = parse_density_descriptor(_density(opts["density"]))
    density = density_from_descriptor(desc)
    r, J, n = float(opts["r"]), int(opts["J"]), int(opts["n"])  # type: ignore[arg-type]
    if J < 0:
        raise ConfigError(f"J must be >= 0; got {J}")
    if n < 2:
        raise ConfigError(f"n must be >= 2; got {n}")

    frame = build_frame(float(opts["B"]), J_cap=J)  # type: ignore[arg-type]
    points = sample(density, n, derive_seed(seed, SAMPLE_STREAM))
    est = estimate_truncated(
        points, frame, EstimatorConfig(r=r, J=J, split_seed=derive_seed(seed, SPLIT_STREAM))
    )
    truth = exact_T(density, r)
    _emit_json(
        {
            "value": est.value,
            "truth": truth,
            "error": est.value - truth,
            "truncated_truth": truncated_exact(density, frame, r, J),
            "per_level": [float(v) for v in est.per_level],
            "density": desc.to_dict(),
            "r": r,
            "J": J,
            "n": n,
            "seed": seed,
        },
        opts["output"],
    )
    return EXIT_OK


def cmd_lepski(opts: Dict[str, object]) -> int:
    seed = _require_seed(opts)
    desc = parse_density_descriptor(_density(opts["density"]))
    density = density_from_descriptor(desc)
    r, n = float(opts["r"]), int(opts["n"])  # type: ignore[arg-type]
    J_cap = int(opts["J_cap"])  # type: ignore[arg-type]
    J_max = None if opts["J_max"] is None else int(opts["J_max"])  # type: ignore[arg-type]
    if J_max is not None:
        J_cap = max(J_cap, J_max)

    frame = build_frame(float(opts["B"]), J_cap=J_cap)  # type: ignore[arg-type]
    grid = make_grid(
        n, r, B=frame.B, J_min=int(opts["J_min"]), J_max=J_max, J_cap=J_cap,  # type: ignore[arg-type]
    )

    policy = opts["c0_policy"] or ("fixed" if opts["C0"] is not None else "calibrated")
    if policy == "fixed":
        if opts["C0"] is None:
            raise ConfigError("c0_policy fixed needs a C0 value")
        C0 = float(opts["C0"])  # type: ignore[arg-type]
    elif policy == "calibrated":
        pilot = None if opts["pilot"] is None else density_from_descriptor(_density(opts["pilot"]))
        C0 = calibrate_C0(
            pilot, frame, r, n, int(opts["calibration_replicates"]), seed,  # type: ignore[arg-type]
            grid=grid, kappa=float(opts["kappa"]), threads=int(opts["threads"]),  # type: ignore[arg-type]
        )
    else:
        raise ConfigError(f"c0_policy must be 'fixed' or 'calibrated'; got '{policy}'")

    points = sample(density, n, derive_seed(seed, SAMPLE_STREAM))
    result = adaptive_estimate(
        points, frame, LepskiConfig(C0=C0, grid=grid, r=r),
        split_seed=derive_seed(seed, SPLIT_STREAM),
    )
    payload = result.to_dict()
    payload.update({
        "c0_policy": policy,
        "grid": {"J_min": grid.J_min, "J_max": grid.J_max, "B": grid.B},
        "truth": exact_T(density, r),
        "density": desc.to_dict(),
        "r": r,
        "seed": seed,
    })
    _emit_json(payload, opts["output"])
    return EXIT_OK


def cmd_oracle_table(opts: Dict[str, object]) -> int:
    rows = reference_rows() if opts["rows"] is None else load_rows(str(opts["rows"]))
    table = oracle_table(
        rows,
        r=float(opts["r"]),  # type: ignore[arg-type]
        d=int(opts["d"]),  # type: ignore[arg-type]
        B=float(opts["B"]),  # type: ignore[arg-type]
        c_bias=float(opts["c_bias"]),  # type: ignore[arg-type]
        c_var=float(opts["c_var"]),  # type: ignore[arg-type]
        J_min=int(opts["J_min"]),  # type: ignore[arg-type]
        J_max=None if opts["J_max"] is None else int(opts["J_max"]),  # type: ignore[arg-type]
    )
    _emit_csv(table, opts["output"])
    return EXIT_OK


def cmd_tradeoff(opts: Dict[str, object]) -> int:
    regime = str(opts["regime"])
    if regime not in REGIMES:
        raise ConfigError(f"regime must be one of {sorted(REGIMES)}; got '{regime}'")
    overrides = {
        key: opts[key]
        for key in ("s", "r", "d", "n", "B", "c_bias", "c_var")
        if opts[key] is not None
    }
    try:
        model: RateModel = dataclasses.replace(REGIMES[regime], **overrides)
    except TypeError as e:
        raise ConfigError(f"invalid model override: {e}") from e
    levels = None if opts["max_level"] is None else list(range(int(opts["max_level"]) + 1))  # type: ignore[arg-type]
    _emit_csv(bias_variance_curve(model, levels), opts["output"])
    return EXIT_OK


def cmd_experiment(opts: Dict[str, object]) -> int:
    if opts["spec"] is None:
        raise ConfigError("experiment needs a spec path or shipped experiment name")
    spec = load_experiment_spec(str(opts["spec"]))
    if opts["seed"] is not None:
        spec = dataclasses.replace(spec, master_seed=_require_seed(opts))
    curve = run_experiment(spec, threads=int(opts["threads"]))  # type: ignore[arg-type]
    prefix = opts["output"] or Path("results") / spec.name
    for path in export_results(curve, str(prefix)):
        print(path)
    return EXIT_OK


COMMANDS: Dict[str, Callable[[Dict[str, object]], int]] = {
    "frame-check": cmd_frame_check,
    "estimate": cmd_estimate,
    "lepski": cmd_lepski,
    "oracle-table": cmd_oracle_table,
    "tradeoff": cmd_tradeoff,
    "experiment": cmd_experiment,
}


# -----------------------
# Parser
# -----------------------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="JSON/YAML file of option defaults")
    common.add_argument("--seed", type=int, default=None, help="master seed for randomized commands")
    common.add_argument("--threads", type=int, default=None, help="worker threads for Monte Carlo loops")
    common.add_argument("--output", default=None, help="output file (experiment: output prefix)")
    common.add_argument("--log-level", dest="log_level", default=None,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    parser = argparse.ArgumentParser(
        prog="sobolev-needlets",
        description="Needlet estimation of Sobolev functionals of densities on the sphere.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("frame-check", parents=[common], help="needlet frame diagnostics")
    p.add_argument("--B", type=float, default=None)
    p.add_argument("--J-max", dest="J_max", type=int, default=None)

    p = sub.add_parser("estimate", parents=[common], help="one truncated estimate on a simulated sample")
    p.add_argument("--density", default=None, help="descriptor: kind name, inline JSON/YAML or file")
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--J", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--B", type=float, default=None)

    p = sub.add_parser("lepski", parents=[common], help="adaptive resolution selection")
    p.add_argument("--density", default=None)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--B", type=float, default=None)
    p.add_argument("--J-min", dest="J_min", type=int, default=None)
    p.add_argument("--J-max", dest="J_max", type=int, default=None)
    p.add_argument("--J-cap", dest="J_cap", type=int, default=None)
    p.add_argument("--c0-policy", dest="c0_policy", choices=["fixed", "calibrated"], default=None)
    p.add_argument("--C0", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--calibration-replicates", dest="calibration_replicates", type=int, default=None)
    p.add_argument("--pilot", default=None, help="pilot density descriptor for calibration")

    p = sub.add_parser("oracle-table", parents=[common], help="oracle vs adaptive levels from the rate model")
    p.add_argument("--rows", default=None, help="YAML/JSON list of {s, n}; default: shipped reference grid")
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--B", type=float, default=None)
    p.add_argument("--c-bias", dest="c_bias", type=float, default=None)
    p.add_argument("--c-var", dest="c_var", type=float, default=None)
    p.add_argument("--J-min", dest="J_min", type=int, default=None)
    p.add_argument("--J-max", dest="J_max", type=int, default=None)

    p = sub.add_parser("tradeoff", parents=[common], help="model bias-variance curve")
    p.add_argument("--regime", choices=sorted(REGIMES), default=None)
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--B", type=float, default=None)
    p.add_argument("--c-bias", dest="c_bias", type=float, default=None)
    p.add_argument("--c-var", dest="c_var", type=float, default=None)
    p.add_argument("--max-level", dest="max_level", type=int, default=None)

    p = sub.add_parser("experiment", parents=[common], help="Monte Carlo oracle vs adaptive risk curve")
    p.add_argument("spec", nargs="?", default=None, help="spec file or shipped experiment name")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        opts = resolve_options(args.command, args)
    except ConfigError as e:
        logging.basicConfig(level=logging.WARNING, stream=sys.stderr)
        logger.error("%s", e)
        return EXIT_USAGE

    logging.basicConfig(
        level=getattr(logging, str(opts["log_level"]).upper(), logging.WARNING),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logger.debug("options for %s: %s", args.command, opts)

    try:
        return COMMANDS[args.command](opts)
    except USAGE_ERRORS as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_USAGE
    except (SobolevNeedletsError, OSError) as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
