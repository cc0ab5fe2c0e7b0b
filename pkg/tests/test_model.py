import math

import pytest

from biaspower.model import (
    Arena,
    BaseStation,
    ControlPoint,
    ReparamControl,
    Scenario,
    ScenarioError,
    controls_from_reparam,
    quincunx_scenario,
    reparam_from_controls,
    reparam_layout,
    two_bs_scenario,
    validate_scenario,
)


def test_two_bs_defaults():
    s = two_bs_scenario()
    assert s.n == 2
    assert s.arena.lower == -5 and s.arena.upper == 5
    assert s.arena.measure == 10
    assert reparam_layout(s) == "two_bs"


def test_quincunx_layout():
    s = quincunx_scenario()
    assert s.n == 5
    assert s.arena.dim == 2
    assert s.arena.measure == pytest.approx(36.0)
    assert reparam_layout(s) == "quincunx"


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(d1=1.0),
        dict(d2=0.5),
        dict(alpha=0.5),
        dict(delta=-0.1),
        dict(eta=-1.0),
        dict(delta=1.0),  # deadzones touch at the origin
        dict(d1=1.05, delta=0.1),  # deadzone pokes out of the arena
        dict(resolution=2),
    ],
)
def test_invalid_two_bs(kwargs):
    with pytest.raises(ScenarioError):
        two_bs_scenario(**kwargs)


def test_single_station_needs_noise():
    arena = Arena.interval(3, 3, 101)
    with pytest.raises(ScenarioError):
        validate_scenario(Scenario(arena, (BaseStation((0.0,)),)))
    assert validate_scenario(Scenario(arena, (BaseStation((0.0,)),), eta=0.1)).n == 1


def test_location_dimension_checked():
    with pytest.raises(ScenarioError):
        validate_scenario(Scenario(Arena.square(3, 11), (BaseStation((0.0,)), BaseStation((1.0, 1.0)))))


def test_rectangle_must_be_symmetric():
    arena = Arena("rectangle", -2.0, 3.0, 11)
    with pytest.raises(ScenarioError):
        validate_scenario(Scenario(arena, (BaseStation((0.0, 0.0)), BaseStation((1.0, 1.0)))))


def test_control_point_validation():
    with pytest.raises(ScenarioError):
        ControlPoint((1.0, 0.0), (1.0, 1.0))
    with pytest.raises(ScenarioError):
        ControlPoint((1.0, 1.0), (1.0, math.inf))
    with pytest.raises(ScenarioError):
        ControlPoint((1.0,), (1.0, 1.0))
    with pytest.raises(ScenarioError):
        ReparamControl(math.nan, 0.0)


@pytest.mark.parametrize("tau,beta", [(0, 0), (2.5, -1.0), (-7.0, 3.0)])
def test_reparam_round_trip(tau, beta):
    s = two_bs_scenario()
    c = controls_from_reparam(s, ReparamControl(tau, beta))
    assert c.powers[1] == 1.0 and c.biases[1] == 1.0
    back = reparam_from_controls(c)
    assert back.tau == pytest.approx(tau, abs=1e-14)
    assert back.beta == pytest.approx(beta, abs=1e-14)


def test_reparam_only_for_preset_layouts():
    arena = Arena.interval(5, 5, 101)
    s = validate_scenario(Scenario(arena, (BaseStation((-2.0,)), BaseStation((2.0,)))))
    assert reparam_layout(s) is None
    with pytest.raises(ScenarioError):
        controls_from_reparam(s, ReparamControl(0, 0))


def test_quincunx_reparam_moves_only_the_centre():
    s = quincunx_scenario()
    c = controls_from_reparam(s, ReparamControl(1.0, -2.0))
    assert c.powers == (math.e, 1.0, 1.0, 1.0, 1.0)
    assert c.biases[0] == pytest.approx(math.exp(-2.0))


def test_with_resolution():
    s = two_bs_scenario().with_resolution(101)
    assert s.arena.resolution == 101
    assert s.arena.cell_measure == pytest.approx(10 / 101)
