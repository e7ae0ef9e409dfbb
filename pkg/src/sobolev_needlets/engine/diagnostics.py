from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List

import numpy as np
from scipy import stats

from .harmonics import real_harmonics
from .models import HarmonicExpansion, n_coefficients
from .needlets import NeedletFrame, analyze, atom_norms, covering_level, frame_energy
from .rng import make_generator

PARTITION_TOL = 1e-12
EXACTNESS_TOL = 1e-10
TIGHT_FRAME_TOL = 1e-9
LP_SLOPE_TOL = 0.3


@dataclass(frozen=True)
class DiagnosticResult:
    name: str
    passed: bool
    error: float
    tolerance: float
    details: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


def partition_of_unity_check(frame: NeedletFrame) -> DiagnosticResult:
    """max_l |sum_j b^2(l / B^j) - 1| over l = 1..floor(B^{J_cap + 1})."""
    B = frame.B
    top = frame.level(frame.J_cap).ell_max
    ells = np.arange(1, top + 1, dtype=float)
    n_levels = int(math.ceil(math.log(top) / math.log(B))) + 3 if top > 1 else 3
    total = np.zeros_like(ells)
    for j in range(n_levels):
        total += np.asarray(frame.window.b2(ells / B ** j))
    err = float(np.max(np.abs(total - 1.0)))
    return DiagnosticResult(
        name="partition_of_unity",
        passed=err <= PARTITION_TOL,
        error=err,
        tolerance=PARTITION_TOL,
        details={"max_degree": int(top)},
    )


def cubature_exactness_check(frame: NeedletFrame) -> DiagnosticResult:
    """Every level rule integrates Y_{l,m}, l <= its exactness degree, to sqrt(4 pi) delta_{l0}."""
    per_level = {}
    worst = 0.0
    for lvl in frame.levels:
        D = lvl.rule.exactness_degree
        integrals = lvl.rule.weights @ real_harmonics(D, lvl.rule.nodes)
        expected = np.zeros(n_coefficients(D))
        expected[0] = math.sqrt(4.0 * math.pi)
        err = float(np.max(np.abs(integrals - expected)))
        per_level[str(lvl.j)] = err
        worst = max(worst, err)
    return DiagnosticResult(
        name="cubature_exactness",
        passed=worst <= EXACTNESS_TOL,
        error=worst,
        tolerance=EXACTNESS_TOL,
        details={"per_level": per_level},
    )


def tight_frame_check(frame: NeedletFrame, *, seed: int = 0, trials: int = 5) -> DiagnosticResult:
    """
    sum_{j,k} <g, psi_{j,k}>^2 = ||g||^2 for random zero-mean g of degree floor(B^{J_cap}).
    """
    L = max(1, int(math.floor(frame.B ** frame.J_cap + 1e-9)))
    J = covering_level(frame, L)
    rng = make_generator(seed)
    worst = 0.0
    for _ in range(trials):
        coeffs = rng.standard_normal(n_coefficients(L))
        coeffs[0] = 0.0
        g = HarmonicExpansion(max_degree=L, coeffs=coeffs)
        energy = frame_energy(analyze(frame, g, 0.0, J), J)
        norm2 = float(coeffs @ coeffs)
        worst = max(worst, abs(energy - norm2) / norm2)
    return DiagnosticResult(
        name="tight_frame",
        passed=worst <= TIGHT_FRAME_TOL,
        error=worst,
        tolerance=TIGHT_FRAME_TOL,
        details={"max_degree": L, "levels": J + 1, "trials": trials},
    )


def lp_scaling_check(frame: NeedletFrame) -> DiagnosticResult:
    """
    Slopes of log ||psi_{j,k}||_p against j log B at the central node:
    -1 (L1), 0 (L2), +1 (sup) on S^2, each within 0.3.
    """
    levels = list(range(max(2, frame.J_cap - 3), frame.J_cap + 1))
    if len(levels) < 2:
        return DiagnosticResult(
            name="lp_scaling", passed=True, error=0.0, tolerance=LP_SLOPE_TOL,
            details={"skipped": "needs J_max >= 3"},
        )

    norms = [atom_norms(frame, j, frame.level(j).central_index) for j in levels]
    x = np.array(levels, dtype=float) * math.log(frame.B)
    slopes = {
        "l1": float(stats.linregress(x, np.log([nm.l1 for nm in norms])).slope),
        "l2": float(stats.linregress(x, np.log([nm.l2 for nm in norms])).slope),
        "sup": float(stats.linregress(x, np.log([nm.sup for nm in norms])).slope),
    }
    targets = {"l1": -1.0, "l2": 0.0, "sup": 1.0}
    err = max(abs(slopes[key] - targets[key]) for key in slopes)
    return DiagnosticResult(
        name="lp_scaling",
        passed=err <= LP_SLOPE_TOL,
        error=err,
        tolerance=LP_SLOPE_TOL,
        details={"levels": levels, "slopes": slopes, "targets": targets},
    )


def run_frame_diagnostics(frame: NeedletFrame, *, seed: int = 0) -> List[DiagnosticResult]:
    return [
        partition_of_unity_check(frame),
        cubature_exactness_check(frame),
        tight_frame_check(frame, seed=seed),
        lp_scaling_check(frame),
    ]
