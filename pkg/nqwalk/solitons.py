"""Stationary and boosted solitons of the nonlinear Dirac equation.

The analytic profiles live in the representation beta = sigma_3,
alpha = -sigma_2 where they are real. :func:`walk_frame_rotation` carries
them into the walk basis before they are placed on the lattice.

The walk moves u toward larger x, so its generator is -alpha rather than
alpha. A profile moving with velocity v on the walk is therefore the mirror
image x -> -x of the documented profile moving with -v
(:func:`walk_components`).
"""

import logging
import math
import sys
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional

import numpy
from scipy.linalg import expm

from nqwalk.lattice import (
    DEFAULT_GUARD_EPS,
    LatticeConfig,
    Spinor,
    WalkerState,
    check_guard,
)
from nqwalk.linear_walk import DiracParams, dirac_params, group_velocity
from nqwalk.nonlinear import InteractionType, WalkParams
from nqwalk.utils import (
    IDENTITY,
    PAULI,
    SOLITON_ALPHA,
    STABLE_VELOCITY_FRACTION,
    parse_angle,
)

logger = logging.getLogger(__name__)

# Profile tails are sized this many times below the boundary guard
GUARD_HEADROOM = 10.0

SOLITON_KEYS = [
    "kind",
    "g",
    "omega",
    "omega_ratio",
    "theta",
    "velocity",
    "velocity_ratio",
    "center",
    "coefficient",
]


def _parse_coefficient(value) -> complex:
    if isinstance(value, bool):
        raise TypeError("Type of coefficient must be float, complex or [re, im].")
    if isinstance(value, (int, float, complex)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise TypeError("Type of coefficient must be float, complex or [re, im].")


@dataclass(frozen=True)
class SolitonSpec:
    """One soliton: interaction, frequency, coin angle, velocity and placement.

    ``omega`` is in energy units (0 < omega < m c^2) and ``velocity`` in
    lattice sites per step (|velocity| < c). Both m c^2 and c follow from
    ``theta`` through :func:`nqwalk.linear_walk.dirac_params`.
    """

    kind: InteractionType
    g: float
    omega: float
    theta: float
    velocity: float = 0.0
    center: float = 0.0
    coefficient: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", InteractionType.parse(self.kind))
        object.__setattr__(self, "theta", parse_angle(self.theta, "theta"))
        for name in ["g", "omega", "velocity", "center"]:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeError(f"Type of {name} must be float.")
            if not math.isfinite(value):
                raise ValueError(f"Soliton {name} must be finite.")
            object.__setattr__(self, name, float(value))
        object.__setattr__(self, "coefficient", _parse_coefficient(self.coefficient))
        if self.g <= 0:
            raise ValueError("Soliton coupling g must be positive.")
        mass_energy = self.mass_energy
        if not 0 < self.omega < mass_energy:
            raise ValueError(
                f"Soliton frequency must satisfy 0 < omega < mc^2 = {mass_energy!r} (got {self.omega!r})."
            )
        if abs(self.velocity) >= self.c:
            raise ValueError(
                f"Soliton speed must be below c = {self.c!r} (got {self.velocity!r})."
            )
        if abs(self.velocity) > STABLE_VELOCITY_FRACTION * self.c:
            logger.warning(
                "Soliton velocity %.3fc exceeds the stable limit of %.1fc",
                self.velocity / self.c,
                STABLE_VELOCITY_FRACTION,
            )

    @classmethod
    def from_ratios(
        cls,
        kind=InteractionType.SCALAR,
        g: float = 1.0,
        theta=math.pi / 4,
        omega_ratio: float = 0.99,
        velocity_ratio: float = 0.0,
        center: float = 0.0,
        coefficient=1.0,
    ) -> "SolitonSpec":
        """Build a spec with omega given as a fraction of m c^2 and velocity as a fraction of c."""
        dirac = dirac_params(parse_angle(theta, "theta"))
        return cls(
            kind=kind,
            g=g,
            omega=omega_ratio * dirac.mass_energy,
            theta=theta,
            velocity=velocity_ratio * dirac.c,
            center=center,
            coefficient=coefficient,
        )

    @classmethod
    def from_dict(
        cls, entry: Dict, walk: Optional[WalkParams] = None
    ) -> "SolitonSpec":
        """Build a spec from a configuration entry; kind, g and theta default to ``walk``."""
        if not isinstance(entry, dict):
            raise TypeError("Type of soliton entry must be Dict.")
        unknown = sorted(set(entry) - set(SOLITON_KEYS))
        if unknown:
            raise ValueError(f"Unknown soliton keys {unknown}.")
        if "omega" in entry and "omega_ratio" in entry:
            raise ValueError("Soliton entry may set only one of omega and omega_ratio.")
        if "velocity" in entry and "velocity_ratio" in entry:
            raise ValueError(
                "Soliton entry may set only one of velocity and velocity_ratio."
            )
        walk = walk or WalkParams(theta=math.pi / 4)
        theta = parse_angle(entry.get("theta", walk.theta), "theta")
        dirac = dirac_params(theta)
        if "omega" in entry:
            omega = entry["omega"]
        else:
            omega = entry.get("omega_ratio", 0.99) * dirac.mass_energy
        if "velocity" in entry:
            velocity = entry["velocity"]
        else:
            velocity = entry.get("velocity_ratio", 0.0) * dirac.c
        return cls(
            kind=entry.get("kind", walk.kind),
            g=entry.get("g", walk.g),
            omega=omega,
            theta=theta,
            velocity=velocity,
            center=entry.get("center", 0.0),
            coefficient=entry.get("coefficient", 1.0),
        )

    def to_dict(self) -> Dict:
        coefficient = self.coefficient
        return {
            "kind": self.kind.value,
            "g": self.g,
            "omega": self.omega,
            "theta": self.theta,
            "velocity": self.velocity,
            "center": self.center,
            "coefficient": [coefficient.real, coefficient.imag],
        }

    @property
    def dirac(self) -> DiracParams:
        return dirac_params(self.theta)

    @property
    def mass_energy(self) -> float:
        return self.dirac.mass_energy

    @property
    def c(self) -> float:
        return self.dirac.c

    @property
    def a(self) -> float:
        mc2 = self.mass_energy
        return math.sqrt((mc2 - self.omega) / (mc2 + self.omega))

    @property
    def b(self) -> float:
        mc2 = self.mass_energy
        return math.sqrt(mc2 * mc2 - self.omega * self.omega)

    @property
    def width(self) -> float:
        """Decay length 1/b of the profile."""
        return 1.0 / self.b

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - (self.velocity / self.c) ** 2)

    @property
    def momentum(self) -> float:
        """Carrier quasi-momentum gamma omega v / c^2 of the boosted profile."""
        return self.gamma * self.omega * self.velocity / self.c**2

    @property
    def drift_velocity(self) -> float:
        """Sites per step the profile drifts on the walk.

        The walk's group velocity at the carrier momentum. It stays below
        cos(theta) while ``velocity`` may approach c = sec(theta).
        """
        return group_velocity(self.momentum, self.theta)

    def at_rest(self) -> "SolitonSpec":
        return replace(self, velocity=0.0)


def stationary_components(x, spec: SolitonSpec) -> numpy.ndarray:
    """Real rest-frame profile at positions ``x`` as an array of shape (2, len(x)).

    u = sqrt(2 (mc^2 - omega) / g) sech(bx) / (1 -+ a^2 tanh^2(bx)) with the
    minus sign for the scalar kind, and v = a tanh(bx) u.
    """
    x = numpy.asarray(x, dtype=float)
    a, b = spec.a, spec.b
    amplitude = math.sqrt(2.0 * (spec.mass_energy - spec.omega) / spec.g)
    tanh = numpy.tanh(b * x)
    sign = -1.0 if spec.kind is InteractionType.SCALAR else 1.0
    u = amplitude / numpy.cosh(b * x) / (1.0 + sign * a * a * tanh * tanh)
    return numpy.stack([u, a * tanh * u])


def stationary_profile(x: float, spec: SolitonSpec) -> Spinor:
    """Rest-frame spinor at position ``x`` (the velocity of ``spec`` is ignored)."""
    u, v = stationary_components([x], spec)[:, 0]
    return Spinor(float(u), float(v))


def analytic_charge(spec: SolitonSpec) -> float:
    """Closed-form charge: 2b/(g omega) for the scalar kind, (2/g) arctan(b/omega) for the vector kind."""
    if spec.kind is InteractionType.SCALAR:
        return 2.0 * spec.b / (spec.g * spec.omega)
    return 2.0 / spec.g * math.atan(spec.b / spec.omega)


def spin_rotation(axis: str, phi: float) -> numpy.ndarray:
    """exp(-i phi sigma_k / 2) for ``axis`` in x, y, z."""
    if axis not in PAULI:
        raise ValueError(f"Invalid rotation axis {axis}. Must be one of [x, y, z].")
    return expm(-0.5j * phi * PAULI[axis])


def walk_frame_rotation(theta: float) -> numpy.ndarray:
    """R(theta) = R_y(pi - theta) R_x(-pi/2), mapping the profile representation onto the walk basis."""
    theta = parse_angle(theta, "theta")
    return spin_rotation("y", math.pi - theta) @ spin_rotation("x", -math.pi / 2)


def lorentz_matrix(
    v: float, c: float, alpha: numpy.ndarray = SOLITON_ALPHA
) -> numpy.ndarray:
    """Spinor boost sqrt((gamma+1)/2) I - sgn(v) sqrt((gamma-1)/2) alpha."""
    if abs(v) >= c:
        raise ValueError(f"Boost speed must be below c = {c!r} (got {v!r}).")
    if v == 0:
        return IDENTITY.copy()
    gamma = 1.0 / math.sqrt(1.0 - (v / c) ** 2)
    return math.sqrt((gamma + 1) / 2) * IDENTITY - math.copysign(
        math.sqrt((gamma - 1) / 2), v
    ) * numpy.asarray(alpha)


def _boosted_components(x, t: int, spec: SolitonSpec, v: float) -> numpy.ndarray:
    x = numpy.asarray(x, dtype=float)
    c = spec.c
    if v == 0:
        return stationary_components(x, spec) * numpy.exp(-1j * spec.omega * t)
    gamma = 1.0 / math.sqrt(1.0 - (v / c) ** 2)
    x_rest = gamma * (x - v * t)
    t_rest = gamma * (t - v * x / (c * c))
    rest = stationary_components(x_rest, spec) * numpy.exp(-1j * spec.omega * t_rest)
    return lorentz_matrix(-v, c) @ rest


def moving_components(x, t: int, spec: SolitonSpec) -> numpy.ndarray:
    """Boosted profile Lambda(-v) psi_st(x') exp(-i omega t') of shape (2, len(x)).

    Uses x' = gamma (x - v t) and t' = gamma (t - v x / c^2). The phase is
    kept at t = 0 since its x-dependence carries the momentum.
    """
    return _boosted_components(x, t, spec, spec.velocity)


def walk_components(x, t: int, spec: SolitonSpec) -> numpy.ndarray:
    """Profile moving with ``spec.velocity`` under the walk's generator -alpha.

    The mirror image of :func:`moving_components` for the opposite velocity.
    Its carrier momentum is ``spec.momentum`` on the positive-energy band.
    """
    x = numpy.asarray(x, dtype=float)
    return _boosted_components(-x, t, spec, -spec.velocity)


def moving_profile(x: float, t: int, spec: SolitonSpec) -> Spinor:
    u, v = moving_components([x], t, spec)[:, 0]
    return Spinor(complex(u), complex(v))


def tail_prefactor(spec: SolitonSpec) -> float:
    """Bound T with |psi(x)|^2 <= T exp(-2 b |x - center|) for the unweighted profile.

    sech(y) <= 2 exp(-|y|), the scalar denominator is at least 1 - a^2, and
    the boost raises the density by at most gamma + sqrt(gamma^2 - 1).
    """
    a2 = spec.a**2
    amplitude2 = 2.0 * (spec.mass_energy - spec.omega) / spec.g
    gamma = spec.gamma
    boost = gamma + math.sqrt(gamma * gamma - 1.0)
    return 4.0 * amplitude2 * (1.0 + a2) / (1.0 - a2) ** 2 * boost


def profile_halfwidth(
    specs: Iterable[SolitonSpec],
    eps: float = DEFAULT_GUARD_EPS,
    decay_lengths: float = 10.0,
) -> int:
    """Sites needed on each side of the origin to hold all profiles.

    Every profile reaches at least ``decay_lengths`` decay lengths past its
    center, and far enough that the charge left outside the window is
    ``GUARD_HEADROOM`` times below ``eps`` times the total charge. A run of
    any length then never carries more than that charge to the edges.
    """
    specs = list(specs)
    charge = sum(abs(s.coefficient) ** 2 * analytic_charge(s) for s in specs)
    floor = max(eps, sys.float_info.min)
    halfwidth = 0
    for spec in specs:
        reach = decay_lengths * spec.width
        weight = abs(spec.coefficient) ** 2
        if weight > 0 and charge > 0:
            two_b = 2.0 * spec.b
            # tail sum over one side, summed over both sides and all profiles
            log_scale = (
                math.log(2.0 * len(specs) ** 2 * GUARD_HEADROOM * weight)
                + math.log(tail_prefactor(spec))
                - math.log(-math.expm1(-two_b))
                - math.log(floor)
                - math.log(charge)
            )
            reach = max(reach, log_scale / two_b)
        halfwidth = max(halfwidth, math.ceil(abs(spec.center) + reach))
    return halfwidth


def superpose(
    positions, specs: List[SolitonSpec], theta: float, t: int = 0
) -> numpy.ndarray:
    """Coefficient-weighted sum of centered walk profiles, rotated into the walk basis."""
    positions = numpy.asarray(positions, dtype=float)
    total = numpy.zeros((2, positions.size), dtype=numpy.complex128)
    for spec in specs:
        total += spec.coefficient * walk_components(positions - spec.center, t, spec)
    return walk_frame_rotation(theta) @ total


def build_initial_state(
    config: LatticeConfig, specs: List[SolitonSpec], theta: float
) -> WalkerState:
    """Sample the superposed solitons on every site and rotate them into the walk basis.

    Raises:
        ValueError: when ``specs`` is empty or the superposition carries no charge.
        BoundaryViolation: when a profile reaches the lattice edges.
    """
    if not specs:
        raise ValueError("At least one soliton is required.")
    theta = parse_angle(theta, "theta")
    for spec in specs:
        if not math.isclose(spec.theta, theta, abs_tol=1e-12):
            logger.warning(
                "Soliton built for theta=%.6f placed on a walk with theta=%.6f",
                spec.theta,
                theta,
            )
    state = WalkerState(config, superpose(config.positions, specs, theta))
    check_guard(state)
    return state
