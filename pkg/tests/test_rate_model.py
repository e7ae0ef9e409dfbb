import math

import numpy as np
import pytest

from sobolev_needlets.engine.errors import RateModelError
from sobolev_needlets.engine.models import ResolutionGrid
from sobolev_needlets.theory.rate_model import (
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
from sobolev_needlets.theory.table import model_grid

SIZES = np.logspace(3, 6, 7).round().astype(int)


def test_model_validation():
    with pytest.raises(RateModelError):
        RateModel(d=2, r=1.0, s=1.0, n=100)
    with pytest.raises(RateModelError):
        RateModel(d=2, r=1.0, s=2.0, n=100, B=1.0)
    with pytest.raises(RateModelError):
        RateModel(d=2, r=1.0, s=2.0, n=100, c_var=0.0)
    with pytest.raises(RateModelError):
        model_mse(RateModel(d=2, r=1.0, s=2.0, n=100), -1)


def test_model_mse_worked_example():
    risk = model_mse(RateModel(d=2, r=1.0, s=2.5, n=4000), 2)
    assert risk.bias2 == pytest.approx(2.0 ** -12)
    assert risk.var == pytest.approx(1.024)
    assert risk.mse == pytest.approx(2.0 ** -12 + 1.024)


def test_oracle_and_adaptive_levels():
    model = RateModel(d=2, r=1.0, s=2.2, n=8000)
    grid = model_grid(model)
    assert grid.levels == (0, 1, 2, 3)
    assert oracle_J(model, grid) == 1
    assert model_adaptive_J(model, grid) == 1

    # 1) overwhelming bias pushes both to the finest level
    loud = RateModel(d=2, r=1.0, s=2.2, n=1000, c_bias=1e12)
    g = model_grid(loud)
    assert oracle_J(loud, g) == g.J_max
    assert model_adaptive_J(loud, g) == g.J_max

    # 2) the adjacent-level rule needs two levels
    with pytest.raises(RateModelError):
        model_adaptive_J(model, ResolutionGrid(J_min=1, J_max=1))


def test_rate_exponent_values():
    assert rate_exponent(2.5, 1.0, 2) == pytest.approx(-6.0 / 11.0)
    with pytest.raises(RateModelError):
        rate_exponent(1.0, 1.0, 2)


@pytest.mark.parametrize("s", [2.2, 2.6, 3.0])
def test_continuous_oracle_recovers_rate(s):
    points = [(n, continuous_oracle_risk(RateModel(d=2, r=1.0, s=s, n=int(n)))) for n in SIZES]
    slope = fit_rate(points)

    # 1) balancing B^{-4J(s-r)} against B^{J(d+4r)}/n gives n^{-4(s-r)/(4s+d)}
    assert slope == pytest.approx(-4.0 * (s - 1.0) / (4.0 * s + 2.0), rel=1e-9)

    # 2) and the minimax exponent to within 15%
    target = rate_exponent(s, 1.0, 2)
    assert abs(slope - target) <= 0.15 * abs(target)


@pytest.mark.parametrize("s", [2.2, 2.6, 3.0])
def test_integer_oracle_risk_decreases(s):
    risks = []
    for n in SIZES:
        model = RateModel(d=2, r=1.0, s=s, n=int(n))
        risks.append(model_mse(model, oracle_J(model, model_grid(model))).mse)
    assert all(b <= a for a, b in zip(risks, risks[1:]))
    assert fit_rate(list(zip(SIZES, risks))) < 0


def test_balance_level_minimizes_the_model():
    model = RateModel(d=2, r=0.5, s=2.0, n=50_000, c_bias=2.0, c_var=0.5)
    J = balance_J(model)
    mse = model_mse(model, J).mse
    assert mse <= model_mse(model, J - 0.01).mse
    assert mse <= model_mse(model, J + 0.01).mse

    # unit constants: the nominal balance differs by a bounded shift
    unit = RateModel(d=2, r=1.0, s=2.5, n=4000)
    assert nominal_balance_J(unit) == pytest.approx(math.log(4000) / (11.0 * math.log(2.0)))
    assert balance_J(RateModel(d=2, r=1.0, s=2.5, n=1)) == 0.0


def test_oracle_level_from_measured_profiles():
    assert oracle_level({0: 1.0, 1: 0.1, 2: 0.01}, {0: 0.0, 1: 0.05, 2: 0.5}) == 1
    # ties go to the coarser level
    assert oracle_level({0: 0.5, 1: 0.25}, {0: 0.0, 1: 0.25}) == 0
    with pytest.raises(RateModelError):
        oracle_level({0: 1.0}, {1: 1.0})


def test_fit_rate_inputs():
    assert fit_rate([(10, 1.0), (100, 0.1), (1000, 0.01)]) == pytest.approx(-1.0)
    assert fit_rate([(10, 2.0), (100, 2.0), (1000, 2.0)]) == pytest.approx(0.0)
    with pytest.raises(RateModelError):
        fit_rate([(10, 1.0), (100, 0.1)])
    with pytest.raises(RateModelError):
        fit_rate([(10, 1.0), (100, 0.0), (1000, 0.1)])
