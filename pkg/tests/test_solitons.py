import logging
import math

import numpy
import pytest

from nqwalk.exceptions import BoundaryViolation
from nqwalk.lattice import LatticeConfig, charge_density, guard_fractions, total_charge
from nqwalk.linear_walk import dirac_params
from nqwalk.nonlinear import InteractionType, WalkParams, bilinear
from nqwalk.solitons import (
    SolitonSpec,
    analytic_charge,
    build_initial_state,
    lorentz_matrix,
    moving_components,
    moving_profile,
    profile_halfwidth,
    spin_rotation,
    stationary_components,
    stationary_profile,
    walk_components,
    walk_frame_rotation,
)
from nqwalk.utils import IDENTITY, SIGMA_1, SIGMA_2, SIGMA_3, SOLITON_ALPHA

THETA = math.pi / 4
WINDOW = numpy.arange(-200, 201)


def spec(kind="scalar", omega_ratio=0.99, velocity_ratio=0.0, **kwargs):
    return SolitonSpec.from_ratios(
        kind=kind,
        g=1.0,
        theta=THETA,
        omega_ratio=omega_ratio,
        velocity_ratio=velocity_ratio,
        **kwargs,
    )


def test_soliton_spec_derived_values():
    s = spec()
    assert s.kind is InteractionType.SCALAR
    assert s.mass_energy == pytest.approx(1.0)
    assert s.c == pytest.approx(math.sqrt(2))
    assert s.omega == pytest.approx(0.99)
    assert s.a == pytest.approx(0.070888, abs=1e-6)
    assert s.b == pytest.approx(0.141067, abs=1e-6)
    assert s.width == pytest.approx(1 / s.b)
    assert s.gamma == 1.0

    moving = spec(velocity_ratio=0.6)
    assert moving.velocity == pytest.approx(0.6 * math.sqrt(2))
    assert moving.gamma == pytest.approx(1.25)
    assert moving.at_rest().velocity == 0.0


def test_soliton_spec_invalid_values():
    with pytest.raises(ValueError) as e:
        SolitonSpec("scalar", 1.0, omega=1.5, theta=THETA)
    assert str(e.value).startswith("Soliton frequency must satisfy 0 < omega < mc^2")
    with pytest.raises(ValueError) as e:
        SolitonSpec("scalar", 1.0, omega=0.9, theta=THETA, velocity=2.0)
    assert str(e.value).startswith("Soliton speed must be below c")
    with pytest.raises(ValueError) as e:
        SolitonSpec("scalar", 0.0, omega=0.9, theta=THETA)
    assert str(e.value) == "Soliton coupling g must be positive."
    with pytest.raises(TypeError) as e:
        SolitonSpec("scalar", 1.0, omega="0.9", theta=THETA)
    assert str(e.value) == "Type of omega must be float."


def test_fast_soliton_warns(caplog):
    with caplog.at_level(logging.WARNING, logger="nqwalk.solitons"):
        spec(velocity_ratio=0.5)
    assert not caplog.records
    with caplog.at_level(logging.WARNING, logger="nqwalk.solitons"):
        spec(velocity_ratio=0.9)
    assert "exceeds the stable limit" in caplog.text


def test_soliton_spec_from_dict():
    walk = WalkParams(math.pi / 6, "vector", 2.0)
    s = SolitonSpec.from_dict({"omega_ratio": 0.95, "velocity_ratio": -0.3, "center": 12}, walk)
    assert s.kind is InteractionType.VECTOR
    assert s.g == 2.0
    assert s.theta == math.pi / 6
    assert s.omega == pytest.approx(0.95 * dirac_params(math.pi / 6).mass_energy)
    assert s.velocity == pytest.approx(-0.3 * dirac_params(math.pi / 6).c)
    assert s.center == 12.0

    again = SolitonSpec.from_dict(s.to_dict())
    assert again == s

    with pytest.raises(ValueError) as e:
        SolitonSpec.from_dict({"width": 3})
    assert str(e.value) == "Unknown soliton keys ['width']."
    with pytest.raises(ValueError) as e:
        SolitonSpec.from_dict({"omega": 0.5, "omega_ratio": 0.5})
    assert str(e.value) == "Soliton entry may set only one of omega and omega_ratio."


def test_coefficient_formats():
    assert spec(coefficient=[1.0, -2.0]).coefficient == complex(1, -2)
    assert spec(coefficient=2).coefficient == complex(2)
    with pytest.raises(TypeError):
        spec(coefficient="1")


def test_stationary_profile():
    s = spec()
    center = stationary_profile(0.0, s)
    assert center.u == pytest.approx(math.sqrt(0.02), rel=1e-12)
    assert center.v == 0.0
    far = stationary_profile(400.0, s)
    assert abs(far.u) < 1e-20 and abs(far.v) < 1e-20


@pytest.mark.parametrize("kind", ["scalar", "vector"])
def test_stationary_profile_parity(kind):
    s = spec(kind)
    x = numpy.linspace(0, 60, 31)
    right = stationary_components(x, s)
    left = stationary_components(-x, s)
    assert right.dtype == numpy.float64
    assert numpy.allclose(left[0], right[0], rtol=0, atol=1e-15)
    assert numpy.allclose(left[1], -right[1], rtol=0, atol=1e-15)


def test_analytic_charge():
    s = spec()
    assert analytic_charge(s) == pytest.approx(2 * s.b / 0.99)
    assert analytic_charge(s) == pytest.approx(0.285, abs=1e-3)
    v = spec("vector")
    assert analytic_charge(v) == pytest.approx(2 * math.atan(v.b / 0.99))
    assert analytic_charge(v) == pytest.approx(0.2831, abs=5e-4)
    assert analytic_charge(spec(omega_ratio=0.999999)) < 1e-2


@pytest.mark.parametrize("kind", ["scalar", "vector"])
@pytest.mark.parametrize("omega_ratio", [0.95, 0.99])
def test_sampled_charge_matches_closed_form(kind, omega_ratio):
    s = spec(kind, omega_ratio)
    sampled = numpy.sum(stationary_components(WINDOW, s) ** 2)
    assert sampled == pytest.approx(analytic_charge(s), rel=0.02)


def test_spin_rotation():
    assert numpy.allclose(spin_rotation("z", 0.0), IDENTITY)
    assert numpy.allclose(spin_rotation("x", math.pi), -1j * SIGMA_1)
    with pytest.raises(ValueError) as e:
        spin_rotation("w", 1.0)
    assert str(e.value) == "Invalid rotation axis w. Must be one of [x, y, z]."


def test_walk_frame_rotation():
    r = walk_frame_rotation(THETA)
    assert numpy.allclose(r @ SIGMA_3 @ r.conj().T, SIGMA_2, rtol=0, atol=1e-14)
    theta = math.pi / 6
    r = walk_frame_rotation(theta)
    alpha = -math.cos(theta) * SIGMA_3 + math.sin(theta) * SIGMA_1
    assert numpy.allclose(r @ SOLITON_ALPHA @ r.conj().T, alpha, rtol=0, atol=1e-14)


@pytest.mark.parametrize("theta", numpy.linspace(-math.pi, math.pi, 100))
def test_walk_frame_rotation_maps_dirac_matrices(theta):
    r = walk_frame_rotation(theta)
    dirac = dirac_params(theta) if abs(math.cos(theta)) > 1e-9 else None
    assert numpy.allclose(r.conj().T @ r, IDENTITY, rtol=0, atol=1e-13)
    assert numpy.allclose(r @ SIGMA_3 @ r.conj().T, SIGMA_2, rtol=0, atol=1e-13)
    alpha = -math.cos(theta) * SIGMA_3 + math.sin(theta) * SIGMA_1
    assert numpy.allclose(r @ SOLITON_ALPHA @ r.conj().T, alpha, rtol=0, atol=1e-13)
    if dirac is not None:
        assert numpy.allclose(dirac.alpha, alpha)


def test_lorentz_matrix():
    c = math.sqrt(2)
    assert numpy.array_equal(lorentz_matrix(0.0, c), IDENTITY)
    boost = lorentz_matrix(0.6 * c, c)
    assert numpy.allclose(boost, math.sqrt(1.125) * IDENTITY - math.sqrt(0.125) * SOLITON_ALPHA)
    for v in [-1.2, -0.3, 0.05, 0.9, 1.4]:
        assert numpy.allclose(lorentz_matrix(v, c) @ lorentz_matrix(-v, c), IDENTITY, atol=1e-14)
    with pytest.raises(ValueError) as e:
        lorentz_matrix(c, c)
    assert str(e.value).startswith("Boost speed must be below c")


def test_moving_profile_at_rest():
    s = spec()
    x = numpy.arange(-20, 21)
    assert numpy.array_equal(moving_components(x, 0, s), stationary_components(x, s))
    assert numpy.allclose(moving_profile(3.0, 0, s), stationary_profile(3.0, s))
    later = moving_components(x, 5, s)
    assert numpy.allclose(later, stationary_components(x, s) * numpy.exp(-5j * s.omega))


def test_moving_profile_is_compressed_and_phased():
    s = spec(velocity_ratio=0.3)
    x = numpy.arange(-100, 101, dtype=float)
    moving = moving_components(x, 0, s)
    density = numpy.sum(numpy.abs(moving) ** 2, axis=0)
    rest = numpy.sum(stationary_components(s.gamma * x, s) ** 2, axis=0)
    assert numpy.allclose(density, s.gamma * rest, rtol=1e-12, atol=1e-18)
    unboosted = lorentz_matrix(s.velocity, s.c) @ moving
    phase = numpy.angle(unboosted[0])
    expected = s.omega * s.gamma * s.velocity * x / s.c**2
    assert numpy.allclose(numpy.exp(1j * phase), numpy.exp(1j * expected), atol=1e-9)


@pytest.mark.parametrize("velocity_ratio", [-0.5, -0.2, 0.25, 0.5])
def test_moving_charge_is_velocity_independent(velocity_ratio):
    s = spec(velocity_ratio=velocity_ratio)
    x = numpy.arange(-400, 401)
    charge = numpy.sum(numpy.abs(moving_components(x, 0, s)) ** 2)
    assert charge == pytest.approx(analytic_charge(s), rel=0.02)


def test_walk_components_mirror_the_documented_boost():
    s = spec(velocity_ratio=0.4)
    x = numpy.arange(-60, 61, dtype=float)
    mirrored = SolitonSpec.from_ratios("scalar", 1.0, THETA, 0.99, velocity_ratio=-0.4)
    assert numpy.array_equal(walk_components(x, 0, s), moving_components(-x, 0, mirrored))
    rest = spec()
    assert numpy.array_equal(walk_components(x, 3, rest), moving_components(-x, 3, rest))


def test_drift_velocity_is_the_walk_group_velocity():
    rest = spec()
    assert rest.momentum == 0.0
    assert rest.drift_velocity == 0.0
    half = spec(velocity_ratio=0.5)
    assert half.momentum == pytest.approx(0.99 / math.sqrt(6), rel=1e-12)
    assert half.drift_velocity == pytest.approx(0.3660, abs=2e-4)
    assert spec(velocity_ratio=-0.5).drift_velocity == pytest.approx(-half.drift_velocity)
    fast = spec(velocity_ratio=0.9)
    assert fast.drift_velocity < fast.velocity
    assert fast.drift_velocity <= math.cos(THETA)


def test_profile_halfwidth():
    s = spec()
    assert profile_halfwidth([s]) == 110
    assert profile_halfwidth([s], decay_lengths=200) == math.ceil(200 / s.b)
    shifted = spec(center=-40.0)
    assert profile_halfwidth([shifted]) >= math.ceil(40 + 10 / s.b)
    assert profile_halfwidth([spec(), shifted]) >= profile_halfwidth([shifted])
    loose = profile_halfwidth([s], eps=1e-6)
    assert math.ceil(10 / s.b) <= loose < profile_halfwidth([s])
    assert profile_halfwidth([s], eps=0.0) > profile_halfwidth([s])


@pytest.mark.parametrize("kind", ["scalar", "vector"])
@pytest.mark.parametrize(
    "entries",
    [
        [(0.99, 0.0, 0.0, 1.0)],
        [(0.95, 0.5, 0.0, 1.0)],
        [(0.999, -0.9, 0.0, 1.0)],
        [(0.99, 0.3, -20.0, math.sqrt(2)), (0.99, -0.3, 20.0, 1.0)],
        [(0.99, 0.0, -5.0, 1e-3), (0.9, 0.0, 5.0, 1.0)],
    ],
)
def test_profile_halfwidth_keeps_tails_below_the_guard(kind, entries):
    specs = [
        spec(kind, omega_ratio=w, velocity_ratio=v, center=c, coefficient=k)
        for w, v, c, k in entries
    ]
    halfwidth = profile_halfwidth(specs)
    state = build_initial_state(LatticeConfig.for_run(0, halfwidth), specs, THETA)
    assert guard_fractions(state.amps, total_charge(state)).max() <= 1e-12

    wide = LatticeConfig(2 * (halfwidth + 300) + 1)
    density = charge_density(build_initial_state(wide, specs, THETA))
    outside = density[numpy.abs(wide.positions) > halfwidth].sum()
    assert outside <= 1e-12 * density.sum()


def test_build_initial_state_single_soliton():
    s = spec()
    config = LatticeConfig(401)
    state = build_initial_state(config, [s], THETA)
    expected = walk_frame_rotation(THETA) @ stationary_components(-config.positions, s)
    assert numpy.allclose(state.amps, expected, rtol=0, atol=1e-15)
    assert total_charge(state) == pytest.approx(analytic_charge(s), rel=0.02)
    assert numpy.argmax(charge_density(state)) == config.origin_index


def test_placed_soliton_reads_the_rest_frame_scalar():
    s = spec()
    state = build_initial_state(LatticeConfig(401), [s], THETA)
    rest = stationary_components(numpy.arange(-200, 201), s)
    dirac = [bilinear(spinor, "scalar", "dirac") for spinor in state.amps.T]
    assert numpy.allclose(dirac, rest[0] ** 2 - rest[1] ** 2, rtol=0, atol=1e-15)
    center = state.amps[:, state.config.origin_index]
    assert bilinear(center, "scalar") == pytest.approx(0.0, abs=1e-15)


def test_build_initial_state_collision():
    x0 = 20.0
    specs = [
        spec(velocity_ratio=0.3, center=-x0, coefficient=math.sqrt(2)),
        spec(velocity_ratio=-0.3, center=x0, coefficient=1.0),
    ]
    config = LatticeConfig(2 * profile_halfwidth(specs) + 1)
    state = build_initial_state(config, specs, THETA)
    density = charge_density(state)
    left = density[config.index_of(-20)]
    right = density[config.index_of(20)]
    assert left / right == pytest.approx(2.0, rel=0.05)


def test_build_initial_state_errors():
    config = LatticeConfig(401)
    with pytest.raises(ValueError) as e:
        build_initial_state(config, [], THETA)
    assert str(e.value) == "At least one soliton is required."
    with pytest.raises(ValueError) as e:
        build_initial_state(config, [spec(coefficient=0.0)], THETA)
    assert str(e.value) == "Total charge must be strictly positive."
    with pytest.raises(BoundaryViolation):
        build_initial_state(LatticeConfig(21), [spec()], THETA)


def test_build_initial_state_warns_on_theta_mismatch(caplog):
    with caplog.at_level(logging.WARNING, logger="nqwalk.solitons"):
        build_initial_state(LatticeConfig(401), [spec()], math.pi / 5)
    assert "placed on a walk with theta" in caplog.text
