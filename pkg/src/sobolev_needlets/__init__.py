"""Needlet estimation of quadratic Sobolev functionals of densities on the sphere."""
from __future__ import annotations

__version__ = "0.1.0"

from .engine.adaptive import adaptive_estimate, calibrate_C0, make_grid, select_J
from .engine.densities import (
    density_from_descriptor,
    exact_T,
    make_multiband_density,
    make_uniform_density,
    make_zonal_density,
    sample,
)
from .engine.estimator import estimate_truncated, mc_risk, truncated_exact
from .engine.harness import export_results, load_results, run_experiment
from .engine.models import EstimatorConfig, LepskiConfig, ResolutionGrid
from .engine.needlets import analyze, build_frame, synthesize

__all__ = [
    "__version__",
    "EstimatorConfig",
    "LepskiConfig",
    "ResolutionGrid",
    "adaptive_estimate",
    "analyze",
    "build_frame",
    "calibrate_C0",
    "density_from_descriptor",
    "estimate_truncated",
    "exact_T",
    "export_results",
    "load_results",
    "make_grid",
    "make_multiband_density",
    "make_uniform_density",
    "make_zonal_density",
    "mc_risk",
    "run_experiment",
    "sample",
    "select_J",
    "synthesize",
    "truncated_exact",
]
