"""Feed-forward nonlinear gates and the nonlinear walk step.

Every site is measured before the step; the measured intensities set a
unitary gate that acts after the coin and before the shift:

    [u(t+1, x+1); v(t+1, x-1)] = G[psi(t, x)] C [u(t, x); v(t, x)]

For the scalar (Gross-Neveu) coupling G is a coin-form rotation by -g s,
where s reads either the intensity difference |u|^2 - |v|^2 or the Dirac
bilinear psi^dagger sigma_2 psi = 2 Im(u* v) (beta = sigma_2 in the walk
basis). For the vector (Thirring) coupling G is the phase
exp(+i g (|u|^2 + |v|^2)).
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Optional

import numpy

from nqwalk.exceptions import BoundaryViolation, NumericFailure
from nqwalk.lattice import (
    GuardReport,
    LatticeConfig,
    WalkerState,
    check_guard,
    guard_fractions,
    site_densities,
    total_charge,
)
from nqwalk.linear_walk import (
    coin_components,
    coin_matrix,
    rotate_amplitudes,
    shift_amplitudes,
)
from nqwalk.utils import IDENTITY, parse_angle

logger = logging.getLogger(__name__)


class InteractionType(str, Enum):
    SCALAR = "scalar"
    VECTOR = "vector"

    @classmethod
    def parse(cls, value) -> "InteractionType":
        if isinstance(value, cls):
            return value
        if not isinstance(value, str):
            raise TypeError("Type of kind must be str.")
        try:
            return cls(value.lower())
        except ValueError:
            raise ValueError(
                f"Invalid interaction type {value}. Must be one of [scalar, vector]."
            )


class ScalarBilinear(str, Enum):
    """What the scalar gate measures at each site."""

    INTENSITY = "intensity"
    DIRAC = "dirac"

    @classmethod
    def parse(cls, value) -> "ScalarBilinear":
        if isinstance(value, cls):
            return value
        if not isinstance(value, str):
            raise TypeError("Type of scalar_bilinear must be str.")
        try:
            return cls(value.lower())
        except ValueError:
            raise ValueError(
                f"Invalid scalar bilinear {value}. Must be one of [intensity, dirac]."
            )


@dataclass(frozen=True)
class WalkParams:
    """Coin angle, interaction type and coupling of a nonlinear walk.

    ``scalar_bilinear`` selects what the scalar gate measures and is ignored
    by the vector gate.
    """

    theta: float
    kind: InteractionType = InteractionType.SCALAR
    g: float = 1.0
    scalar_bilinear: ScalarBilinear = ScalarBilinear.INTENSITY

    def __post_init__(self):
        object.__setattr__(self, "theta", parse_angle(self.theta, "theta"))
        object.__setattr__(self, "kind", InteractionType.parse(self.kind))
        object.__setattr__(
            self, "scalar_bilinear", ScalarBilinear.parse(self.scalar_bilinear)
        )
        if isinstance(self.g, bool) or not isinstance(self.g, (int, float)):
            raise TypeError("Type of g must be float.")
        if not math.isfinite(self.g) or self.g < 0:
            raise ValueError("Coupling g must be a finite nonnegative number.")
        object.__setattr__(self, "g", float(self.g))

    @property
    def is_linear(self) -> bool:
        return self.g == 0

    def linear(self) -> "WalkParams":
        """The same walk with the nonlinearity switched off."""
        return replace(self, g=0.0)

    def with_kind(self, kind) -> "WalkParams":
        return replace(self, kind=InteractionType.parse(kind))

    def to_dict(self):
        return {
            "theta": self.theta,
            "kind": self.kind.value,
            "g": self.g,
            "scalar_bilinear": self.scalar_bilinear.value,
        }


def bilinear(spinor, kind, scalar_bilinear=ScalarBilinear.INTENSITY) -> float:
    """Scalar or vector bilinear of one spinor.

    The scalar kind gives |u|^2 - |v|^2, or 2 Im(u* v) when
    ``scalar_bilinear`` is ``dirac``. The vector kind gives |u|^2 + |v|^2.
    """
    u, v = spinor
    if InteractionType.parse(kind) is InteractionType.SCALAR:
        if ScalarBilinear.parse(scalar_bilinear) is ScalarBilinear.DIRAC:
            return 2.0 * (complex(u).conjugate() * complex(v)).imag
        return abs(u) ** 2 - abs(v) ** 2
    return abs(u) ** 2 + abs(v) ** 2


def nonlinear_gate(spinor, params: WalkParams) -> numpy.ndarray:
    """2x2 feed-forward gate set by the measured spinor at one site."""
    value = bilinear(spinor, params.kind, params.scalar_bilinear)
    if params.kind is InteractionType.SCALAR:
        return coin_matrix(-params.g * value)
    return numpy.exp(1j * params.g * value) * IDENTITY


def _scalar_reading(measured: numpy.ndarray, scalar_bilinear) -> numpy.ndarray:
    u = measured[..., 0, :]
    v = measured[..., 1, :]
    if scalar_bilinear is ScalarBilinear.DIRAC:
        return 2.0 * (u.real * v.imag - u.imag * v.real)
    return (u.real**2 + u.imag**2) - (v.real**2 + v.imag**2)


def gate_amplitudes(
    measured: numpy.ndarray, coined: numpy.ndarray, params: WalkParams
) -> numpy.ndarray:
    """Apply the gates set by ``measured`` (pre-step amplitudes) to ``coined``."""
    if params.is_linear:
        return coined
    if params.kind is InteractionType.SCALAR:
        angle = -params.g * _scalar_reading(measured, params.scalar_bilinear)
        return rotate_amplitudes(coined, numpy.cos(angle), numpy.sin(angle))
    angle = params.g * site_densities(measured)[..., None, :]
    cos, sin = numpy.cos(angle), numpy.sin(angle)
    # product in real arithmetic, without fused multiply-adds
    out = numpy.empty_like(coined)
    out.real = coined.real * cos - coined.imag * sin
    out.imag = coined.real * sin + coined.imag * cos
    return out


def step_amplitudes(
    amps: numpy.ndarray, params: WalkParams, charge, eps: float, t: int = 0
) -> numpy.ndarray:
    """One nonlinear step on amplitudes of shape (..., 2, n_sites)."""
    coined = rotate_amplitudes(amps, *coin_components(params.theta))
    return shift_amplitudes(gate_amplitudes(amps, coined, params), charge, eps, t)


def nqw_step(state: WalkerState, params: WalkParams) -> WalkerState:
    """One step of the nonlinear walk; the gates read the pre-step spinors."""
    charge = float(numpy.sum(site_densities(state.amps)))
    amps = step_amplitudes(
        state.amps, params, charge, state.config.boundary_guard_eps, state.t
    )
    return state.with_amps(amps, t=state.t + 1)


def evolve(
    state: WalkerState,
    params: WalkParams,
    steps: int,
    observer: Optional[Callable[[WalkerState], None]] = None,
) -> WalkerState:
    """Apply ``steps`` nonlinear steps.

    Parameters:
        state: Initial state; must pass the boundary guard.
        params: Walk parameters. ``g == 0`` gives the linear walk.
        steps: Number of steps (0 returns ``state`` itself).
        observer: Called with every new state, in order.

    Raises:
        BoundaryViolation: at the first step whose state breaks the guard.
        NumericFailure: when amplitudes stop being finite.
    """
    if isinstance(steps, bool) or not isinstance(steps, (int, numpy.integer)):
        raise TypeError("Type of steps must be int.")
    if steps < 0:
        raise ValueError("Number of steps must be a nonnegative integer.")
    charge = total_charge(state)
    check_guard(state, charge)
    eps = state.config.boundary_guard_eps
    for _ in range(steps):
        amps = step_amplitudes(state.amps, params, charge, eps, state.t)
        state = state.with_amps(amps, t=state.t + 1)
        check_guard(state, charge)
        if observer is not None:
            observer(state)
    return state


def evolve_batch(
    amps: numpy.ndarray,
    params: WalkParams,
    steps: int,
    config: LatticeConfig,
    observer: Optional[Callable[[int, numpy.ndarray], None]] = None,
) -> numpy.ndarray:
    """Evolve a batch of states of shape (B, 2, n_sites) sharing one lattice.

    Each batch element is guarded against its own initial charge. The
    observer, if given, receives ``(t, amps)`` after every step.
    """
    amps = numpy.array(amps, dtype=numpy.complex128)
    if amps.ndim != 3 or amps.shape[1:] != (2, config.n_sites):
        raise ValueError(
            f"Batch amplitudes must have shape (B, 2, {config.n_sites}) (got {amps.shape})."
        )
    eps = config.boundary_guard_eps
    charge = numpy.sum(site_densities(amps), axis=-1)
    if not numpy.all(numpy.isfinite(charge)):
        raise NumericFailure("Non-finite charge in initial batch.")
    if numpy.any(charge <= 0):
        raise ValueError("Total charge must be strictly positive.")
    _check_batch_guard(amps, charge, eps, 0)
    for t in range(steps):
        amps = step_amplitudes(amps, params, charge, eps, t)
        _check_batch_guard(amps, charge, eps, t + 1)
        if observer is not None:
            observer(t + 1, amps)
    return amps


def _check_batch_guard(amps, charge, eps, t):
    if not numpy.isfinite(amps).all():
        raise NumericFailure(f"Non-finite amplitudes at step {t}.")
    fractions = guard_fractions(amps, charge)
    bad = ~numpy.all(fractions <= eps, axis=-1)
    if bad.any():
        index = int(numpy.flatnonzero(bad)[0])
        left, right = fractions[index]
        raise BoundaryViolation(
            GuardReport(False, t, float(left), float(right), eps, index)
        )
