import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wormhole_teleport.errors import DomainError
from wormhole_teleport.model import (
    J_UNIT,
    K_QUANTUM,
    ModelParams,
    Regime,
    TimeGrid,
    critical_points,
    derived_rates,
)


@pytest.mark.parametrize(
    "gamma, expected",
    [(0.0, (1.0, 1.0)), (1.0, (2.0, 0.0)), (0.4, (1.4, 0.6))],
)
def test_derived_rates_examples(gamma, expected):
    got = derived_rates(ModelParams(gamma=gamma, g=0.01))
    assert got == pytest.approx(expected, abs=1e-15)


@given(st.floats(0.0, 50.0), st.floats(-math.pi, math.pi))
def test_rates_sum_to_two(gamma, g):
    p = ModelParams(gamma=gamma, g=g)
    big_gamma, kappa = derived_rates(p)
    assert big_gamma + kappa == pytest.approx(2.0, abs=1e-12)
    assert p.decay_rate == pytest.approx(big_gamma, rel=1e-15)
    assert p.lyapunov == kappa


def test_critical_points():
    gq, gc = critical_points()
    assert gq == pytest.approx(0.17157287525381, abs=1e-13)
    assert (1.0 - gq) / 2.0 == pytest.approx(math.sqrt(2.0) - 1.0, abs=1e-15)
    assert gc == 1.0
    assert K_QUANTUM == pytest.approx(math.sqrt(2.0) - 1.0)


def test_j_unit_is_fixed():
    p = ModelParams(gamma=0.3, g=0.0)
    assert p.j_unit == J_UNIT == 0.25
    with pytest.raises(TypeError):
        ModelParams(gamma=0.3, g=0.0, j_unit=1.0)


@pytest.mark.parametrize("gamma, g", [(-0.1, 0.0), (float("nan"), 0.0), (0.1, 3.5), (0.1, float("inf"))])
def test_params_rejects_invalid(gamma, g):
    with pytest.raises(DomainError):
        ModelParams(gamma=gamma, g=g)


def test_params_are_immutable():
    p = ModelParams(gamma=0.3, g=0.01)
    with pytest.raises(AttributeError):
        p.gamma = 0.5


def test_regime_ordering_and_labels():
    assert Regime.QUANTUM > Regime.CLASSICAL > Regime.NO_SIGNAL
    assert [r.label for r in Regime] == ["NoSignal", "Classical", "Quantum"]


def test_time_grid():
    grid = TimeGrid.from_step(15.0, 1e-3)
    assert grid.n_steps == 15000
    assert grid.dt == pytest.approx(1e-3)
    t = grid.points()
    assert t[0] == 0.0 and t[-1] == 15.0
    assert np.allclose(np.diff(t), grid.dt)
    assert grid.refined(2).n_steps == 30000


@pytest.mark.parametrize("t_max, n", [(0.0, 10), (-1.0, 10), (1.0, 0), (1.0, 2.5)])
def test_time_grid_rejects_invalid(t_max, n):
    with pytest.raises(DomainError):
        TimeGrid(t_max, n)


def test_time_grid_rejects_bad_step():
    with pytest.raises(DomainError):
        TimeGrid.from_step(1.0, 0.0)
