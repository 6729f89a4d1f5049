import math

import numpy
import pytest

from nqwalk.exceptions import BoundaryViolation, NumericFailure
from nqwalk.lattice import (
    LatticeConfig,
    Spinor,
    WalkerState,
    charge_density,
    check_guard,
    guard_boundaries,
    total_charge,
)
from nqwalk.linear_walk import linear_step


def random_amps(rng, n_sites, interior=True):
    amps = rng.normal(size=(2, n_sites)) + 1j * rng.normal(size=(2, n_sites))
    if interior:
        amps[:, [0, -1]] = 0
    return amps


def test_lattice_config():
    config = LatticeConfig(11)
    assert config.origin_index == 5
    assert config.boundary_guard_eps == 1e-12
    assert list(config.positions) == list(range(-5, 6))
    assert config.half_width == 5
    assert config.index_of(-5) == 0
    assert config.index_of(3) == 8
    assert config.to_dict() == {
        "n_sites": 11,
        "origin_index": 5,
        "boundary_guard_eps": 1e-12,
    }

    shifted = LatticeConfig(10, origin_index=2)
    assert shifted.positions[0] == -2
    assert shifted.half_width == 7


def test_lattice_for_run():
    config = LatticeConfig.for_run(steps=200, profile_halfwidth=1)
    assert config.n_sites == 405
    assert config.origin_index == 202
    assert LatticeConfig.for_run(100, 71).n_sites == 345


def test_lattice_config_invalid_values():
    with pytest.raises(TypeError) as e:
        LatticeConfig(11.0)
    assert str(e.value) == "Type of n_sites must be int."
    with pytest.raises(ValueError) as e:
        LatticeConfig(2)
    assert str(e.value) == "Lattice must have at least 3 sites."
    with pytest.raises(TypeError) as e:
        LatticeConfig(5, origin_index="0")
    assert str(e.value) == "Type of origin_index must be int or None."
    with pytest.raises(ValueError) as e:
        LatticeConfig(5, origin_index=7)
    assert str(e.value) == "Origin index must be in [0, 5) (got 7)."
    with pytest.raises(TypeError) as e:
        LatticeConfig(5, boundary_guard_eps="small")
    assert str(e.value) == "Type of boundary_guard_eps must be float."
    with pytest.raises(ValueError) as e:
        LatticeConfig(5, boundary_guard_eps=-1.0)
    assert str(e.value) == "Boundary guard epsilon must be a nonnegative number."
    with pytest.raises(ValueError) as e:
        LatticeConfig(11).index_of(10)
    assert str(e.value) == "Position 10 is outside of the lattice."


def test_walker_state():
    config = LatticeConfig(7)
    state = WalkerState.localized(config, (0.6, 0.8j), x=1)
    assert state.t == 0
    assert state.spinor(1) == Spinor(0.6, 0.8j)
    assert state.spinor(0) == Spinor(0, 0)
    assert len(state.spinors()) == 7
    assert numpy.allclose(charge_density(state), [0, 0, 0, 0, 1, 0, 0])
    assert math.isclose(total_charge(state), 1.0)
    assert repr(state) == "WalkerState(n_sites=7, t=0)"

    same = WalkerState.from_spinors(config, state.spinors())
    assert numpy.array_equal(same.amps, state.amps)

    later = state.with_amps(state.amps, t=3)
    assert later.t == 3
    assert later.config is config


def test_walker_state_is_read_only():
    state = WalkerState.localized(LatticeConfig(5), (1, 0))
    with pytest.raises(ValueError):
        state.amps[0, 0] = 1


def test_walker_state_invalid_values():
    config = LatticeConfig(5)
    with pytest.raises(TypeError) as e:
        WalkerState({"n_sites": 5}, numpy.zeros((2, 5)))
    assert str(e.value) == "Type of config must be LatticeConfig."
    with pytest.raises(ValueError) as e:
        WalkerState(config, numpy.ones((2, 4)))
    assert str(e.value) == "Amplitudes must have shape (2, 5) (got (2, 4))."
    with pytest.raises(ValueError) as e:
        WalkerState(config, numpy.ones((2, 5)), t=-1)
    assert str(e.value) == "Step count must be a nonnegative integer."
    with pytest.raises(ValueError) as e:
        WalkerState(config, numpy.zeros((2, 5)))
    assert str(e.value) == "Total charge must be strictly positive."
    amps = numpy.ones((2, 5), dtype=complex)
    amps[1, 2] = numpy.nan
    with pytest.raises(NumericFailure):
        WalkerState(config, amps)


def test_charge_density_matches_elementwise_recomputation():
    rng = numpy.random.default_rng(3)
    config = LatticeConfig(64)
    amps = random_amps(rng, 64, interior=False)
    state = WalkerState(config, amps)
    expected = [abs(u) ** 2 + abs(v) ** 2 for u, v in zip(amps[0], amps[1])]
    assert numpy.allclose(charge_density(state), expected, rtol=1e-15)


def test_total_charge():
    config = LatticeConfig(5)
    state = WalkerState.from_spinors(config, [(0, 0), (1, 1), (0, 0), (1, 1), (0, 0)])
    assert total_charge(state) == 4.0


def test_guard_boundaries():
    config = LatticeConfig(101)
    state = WalkerState.localized(config, (1, 0))
    report = guard_boundaries(state)
    assert report.ok
    assert bool(report)
    assert report.edge_fraction == 0

    edge = WalkerState.localized(config, (1, 0), x=-50)
    report = guard_boundaries(edge)
    assert not report.ok
    assert report.left_fraction == 1.0
    assert report.right_fraction == 0.0
    with pytest.raises(BoundaryViolation) as e:
        check_guard(edge)
    assert e.value.report == report
    assert str(e.value).startswith("Boundary guard violated at step 0")


def test_guard_tolerates_charge_below_eps():
    config = LatticeConfig(11, boundary_guard_eps=1e-6)
    amps = numpy.zeros((2, 11), dtype=complex)
    amps[0, 5] = 1
    amps[1, 10] = 1e-4
    assert guard_boundaries(WalkerState(config, amps)).ok
    amps[1, 10] = 1e-2
    assert not guard_boundaries(WalkerState(config, amps)).ok


def test_guard_light_cone():
    config = LatticeConfig(11)
    state = WalkerState.localized(config, (1 / math.sqrt(2), 1j / math.sqrt(2)))
    for _ in range(4):
        state = linear_step(state, math.pi / 4)
        assert guard_boundaries(state).ok
    state = linear_step(state, math.pi / 4)
    report = guard_boundaries(state)
    assert not report.ok
    assert report.t == 5
