import math

import numpy as np
import pytest

from conftest import random_expansion, random_unit_vectors
from sobolev_needlets.engine.densities import exact_T, make_multiband_density
from sobolev_needlets.engine.diagnostics import (
    lp_scaling_check,
    partition_of_unity_check,
    tight_frame_check,
)
from sobolev_needlets.engine.errors import FrameIndexError, WindowParameterError
from sobolev_needlets.engine.harmonics import real_harmonics, sobolev_energy
from sobolev_needlets.engine.needlets import (
    analyze,
    atom_norms,
    atom_profile,
    build_frame,
    build_window,
    covering_level,
    eval_atom,
    frame_energy,
    level_band,
    littlewood_paley_energy,
    lp_equivalence_bounds,
    synthesize,
)


# -----------------------
# Window
# -----------------------
def test_window_shape():
    w = build_window(2.0)

    # 1) phi is 1 below 1/B and 0 from 1 on
    assert w.phi(0.1) == 1.0
    assert w.phi(0.5) == 1.0
    assert w.phi(1.0) == 0.0
    assert 0.0 < w.phi(0.75) < 1.0

    # 2) b^2 lives on (1/B, B)
    assert w.b2(0.5) == 0.0
    assert w.b2(2.0) == 0.0
    assert w.b2(1.0) == pytest.approx(1.0)
    assert w.b(1.5) == pytest.approx(math.sqrt(w.b2(1.5)))


def test_window_rejects_bad_ratio():
    for B in (1.0, 0.5, float("inf"), float("nan")):
        with pytest.raises(WindowParameterError):
            build_window(B)
    with pytest.raises(WindowParameterError):
        build_frame(1.0, J_cap=2)


@pytest.mark.parametrize("B", [2.0, 1.5, 3.0])
def test_partition_of_unity(B):
    res = partition_of_unity_check(build_frame(B, J_cap=3))
    assert res.passed, res.error


# -----------------------
# Frame structure
# -----------------------
def test_level_bands_and_summary(frame):
    assert level_band(2.0, 0) == (1, 2)
    assert level_band(2.0, 1) == (1, 4)
    assert level_band(2.0, 3) == (4, 16)

    summary = frame.summary()
    assert summary["J_cap"] == 4
    assert [lvl["ell_max"] for lvl in summary["levels"]] == [2, 4, 8, 16, 32]
    for lvl in summary["levels"]:
        # the product rule is exact for products of band harmonics
        assert lvl["exactness_degree"] >= 2 * lvl["ell_max"]
        assert lvl["K"] > 0


def test_frame_index_errors(frame):
    with pytest.raises(FrameIndexError):
        frame.level(5)
    with pytest.raises(FrameIndexError):
        analyze(frame, random_expansion(4, seed=0), 0.0, 5)
    with pytest.raises(FrameIndexError):
        covering_level(frame, 40)
    with pytest.raises(FrameIndexError):
        eval_atom(frame, 1, frame.level(1).K, 0.0, [0.0, 0.0, 1.0])
    assert covering_level(frame, 2) == 1
    assert covering_level(frame, 16) == 4


# -----------------------
# Tight frame and exact representation
# -----------------------
def test_tight_frame_energy_random_functions(frame):
    for seed in range(20):
        g = random_expansion(16, seed=seed)
        energy = frame_energy(analyze(frame, g, 0.0, covering_level(frame, 16)), 4)
        norm2 = float(g.coeffs @ g.coeffs)
        assert abs(energy - norm2) / norm2 < 1e-9


def test_tight_frame_diagnostic(frame):
    res = tight_frame_check(frame, seed=3)
    assert res.passed, res.error


def test_synthesis_reconstructs_zero_mean_part(frame):
    g = random_expansion(8, seed=11, zero_mean=False)
    J = covering_level(frame, 8)
    back = synthesize(frame, analyze(frame, g, 0.0, J))

    # 1) degrees 1..8 come back, the mean does not
    assert back.max_degree == frame.level(J).ell_max
    assert back.coeffs[0] == 0.0
    assert np.allclose(back.coeffs[1:81], g.coeffs[1:], atol=1e-12)

    # 2) nothing leaks above the input degree
    assert np.max(np.abs(back.coeffs[81:])) < 1e-12


def test_frame_energy_recovers_sobolev_functional():
    rng = np.random.default_rng(5)
    frame = build_frame(2.0, J_cap=4)
    for _ in range(10):
        degrees = rng.choice(np.arange(1, 17), size=4, replace=False)
        raw = rng.uniform(-1.0, 1.0, size=4)
        load = sum(abs(a) * (2 * l + 1) for l, a in zip(degrees, raw))
        amps = {int(l): 0.9 * a / load for l, a in zip(degrees, raw)}
        f = make_multiband_density(amps, axis=tuple(rng.standard_normal(3)))
        J = covering_level(frame, f.max_degree)

        for r in (0.0, 0.5, 1.0, 2.0):
            mean = 1.0 / (4.0 * math.pi) if r == 0 else 0.0
            energy = frame_energy(analyze(frame, f.expansion, r, J), J) + mean
            assert energy == pytest.approx(exact_T(f, r), rel=1e-9)


def test_band_energy_sandwich(frame):
    g = random_expansion(32, seed=8)
    plain = analyze(frame, g, 0.0, 4)
    for r in (0.5, 1.0, 2.0):
        deriv = analyze(frame, g, r, 4)
        for j in range(5):
            lvl = frame.level(j)
            ratio = deriv.level_energy(j) / plain.level_energy(j)
            lo = (lvl.ell_min * (lvl.ell_min + 1.0)) ** r
            hi = (lvl.ell_max * (lvl.ell_max + 1.0)) ** r
            assert lo * (1 - 1e-12) <= ratio <= hi * (1 + 1e-12)


def test_littlewood_paley_equivalence(frame):
    g = random_expansion(16, seed=9)
    plain = analyze(frame, g, 0.0, 4)

    # 1) r = 0 weights are all one
    assert littlewood_paley_energy(plain, 2.0, 0.0, 4) == pytest.approx(frame_energy(plain, 4))

    # 2) the dyadic proxy sandwiches T_1^(J)
    lp = littlewood_paley_energy(plain, 2.0, 1.0, 4)
    exact = frame_energy(analyze(frame, g, 1.0, 4), 4)
    lo, hi = lp_equivalence_bounds(frame, 1.0, 4)
    assert lo * lp <= exact <= hi * lp
    assert exact == pytest.approx(sobolev_energy(g, 1.0), rel=1e-9)

    with pytest.raises(ValueError):
        littlewood_paley_energy(analyze(frame, g, 1.0, 4), 2.0, 1.0, 4)


# -----------------------
# Atoms
# -----------------------
def test_atom_matches_harmonic_sum(frame):
    j, k = 2, 7
    lvl = frame.level(j)
    x = random_unit_vectors(5, seed=12)

    Yx = real_harmonics(lvl.ell_max, x)[:, lvl.band_slice]
    Yk = frame.node_harmonics(j)[k]
    expected = math.sqrt(lvl.rule.weights[k]) * (Yx * lvl.coefficient_weights(0.0)) @ Yk
    assert np.allclose(eval_atom(frame, j, k, 0.0, x), expected, atol=1e-12)

    # the profile at angle 0 is the value at the centre
    centre = lvl.rule.nodes[k]
    assert atom_profile(frame, j, 0.0, [0.0], k=k)[0] == pytest.approx(eval_atom(frame, j, k, 0.0, centre))


def test_atom_l2_norms_stay_bounded(frame):
    for j in range(5):
        norms = atom_norms(frame, j, frame.level(j).central_index)
        assert 0.3 < norms.l2 < 1.0
        assert norms.l1 < norms.l2 * math.sqrt(4.0 * math.pi) + 1e-12


def test_atom_lp_scaling():
    res = lp_scaling_check(build_frame(2.0, J_cap=5))
    assert res.passed, res.details
    assert res.details["levels"] == [2, 3, 4, 5]


def test_derivative_atoms_grow_with_level(frame):
    ratios = []
    for j in range(1, 5):
        k = frame.level(j).central_index
        ratios.append(atom_norms(frame, j, k, r=1.0).l2 / atom_norms(frame, j, k).l2)
    # e_l^{1/2} ~ l, so each level roughly doubles the ratio
    growth = np.array(ratios[1:]) / np.array(ratios[:-1])
    assert np.all(growth > 1.5)
    assert np.all(growth < 2.5)
