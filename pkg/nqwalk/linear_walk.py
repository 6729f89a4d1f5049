"""Coin and shift operators of the linear walk and its Dirac-equation reading."""

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy

from nqwalk.exceptions import BoundaryViolation
from nqwalk.lattice import GuardReport, WalkerState, site_densities
from nqwalk.utils import IDENTITY, SIGMA_1, SIGMA_2, SIGMA_3

logger = logging.getLogger(__name__)

# |cos(theta)| below this counts as zero for the Dirac mapping
COS_ZERO_TOLERANCE = 1e-12

HALF_PI = math.pi / 2


def coin_components(theta: float) -> Tuple[float, float]:
    """(cos theta, sin theta) of the coin.

    Angles above pi/2 go through pi - theta, so the coins at theta and
    pi - theta differ only in the sign of the cosine, bit for bit. The
    quarter turn itself is an exact swap.
    """
    if theta >= HALF_PI:
        reflected = math.pi - theta
        if reflected == theta:
            return 0.0, 1.0
        return -math.cos(reflected), math.sin(reflected)
    return math.cos(theta), math.sin(theta)


def coin_matrix(theta: float) -> numpy.ndarray:
    """Real rotation coin [[cos t, -sin t], [sin t, cos t]]."""
    c, s = coin_components(theta)
    return numpy.array([[c, -s], [s, c]], dtype=numpy.complex128)


def rotate_amplitudes(amps: numpy.ndarray, cos, sin) -> numpy.ndarray:
    """Apply the rotation [[cos, -sin], [sin, cos]] site by site.

    ``cos`` and ``sin`` are scalars or arrays broadcastable to (..., n_sites).
    Works on amplitudes of shape (..., 2, n_sites).
    """
    u = amps[..., 0, :]
    v = amps[..., 1, :]
    out = numpy.empty_like(amps)
    out[..., 0, :] = cos * u - sin * v
    out[..., 1, :] = sin * u + cos * v
    return out


def shift_amplitudes(amps: numpy.ndarray, charge, eps: float, t: int = 0) -> numpy.ndarray:
    """Move u one site right and v one site left.

    Charge leaving the lattice through an edge must not exceed ``eps * charge``
    (``charge`` is a scalar or one value per batch element). Amplitude at or
    below that bound is discarded; anything above raises
    :class:`BoundaryViolation`.
    """
    left = amps[..., 1, 0].real ** 2 + amps[..., 1, 0].imag ** 2
    right = amps[..., 0, -1].real ** 2 + amps[..., 0, -1].imag ** 2
    charge = numpy.asarray(charge, dtype=float)
    departing = left + right
    over = numpy.atleast_1d(departing > eps * charge)
    if over.any():
        index = int(numpy.flatnonzero(over)[0])
        q = float(numpy.broadcast_to(charge, over.shape)[index])
        report = GuardReport(
            ok=False,
            t=t,
            left_fraction=float(numpy.atleast_1d(left)[index]) / q,
            right_fraction=float(numpy.atleast_1d(right)[index]) / q,
            eps=eps,
            batch_index=index if amps.ndim > 2 else None,
        )
        raise BoundaryViolation(
            report,
            f"Nonzero amplitude would leave the lattice at step {t}: "
            + report.message,
        )
    if numpy.any(departing > 0):
        logger.debug("Dropping sub-guard edge amplitude at step %d", t)
    out = numpy.zeros_like(amps)
    out[..., 0, 1:] = amps[..., 0, :-1]
    out[..., 1, :-1] = amps[..., 1, 1:]
    return out


def _shift(state: WalkerState, amps: numpy.ndarray) -> numpy.ndarray:
    charge = float(numpy.sum(site_densities(state.amps)))
    return shift_amplitudes(amps, charge, state.config.boundary_guard_eps, state.t)


def apply_shift(state: WalkerState) -> WalkerState:
    """Shift operator: u(x+1) <- u(x), v(x-1) <- v(x). The step count is unchanged."""
    return state.with_amps(_shift(state, state.amps))


def linear_step(state: WalkerState, theta: float) -> WalkerState:
    """One step of the linear walk: coin on every site, then shift."""
    coined = rotate_amplitudes(state.amps, *coin_components(theta))
    amps = _shift(state, coined)
    return state.with_amps(amps, t=state.t + 1)


def dispersion_omega(p, theta):
    """Quasi-energy omega in [0, pi] with cos(omega) = cos(theta) cos(p).

    Uses sin(omega)^2 = sin(theta)^2 + cos(theta)^2 sin(p)^2 so that the result
    stays accurate near the band edges. Accepts scalars or arrays.
    """
    cos_omega = numpy.cos(theta) * numpy.cos(p)
    sin_omega = numpy.hypot(numpy.sin(theta), numpy.cos(theta) * numpy.sin(p))
    omega = numpy.arctan2(sin_omega, cos_omega)
    if numpy.ndim(omega) == 0:
        return float(omega)
    return omega


def group_velocity(p, theta):
    """d omega / d p = cos(theta) sin(p) / sin(omega), in sites per step.

    This is the drift of a wave packet on the positive-energy band centered
    at quasi-momentum p; its magnitude never exceeds |cos(theta)|.
    """
    sin_omega = numpy.hypot(numpy.sin(theta), numpy.cos(theta) * numpy.sin(p))
    velocity = numpy.cos(theta) * numpy.sin(p) / sin_omega
    if numpy.ndim(velocity) == 0:
        return float(velocity)
    return velocity


def walk_momentum_matrix(p: float, theta: float) -> numpy.ndarray:
    """Step operator at momentum p: diag(e^{ip}, e^{-ip}) times the coin."""
    phases = numpy.array([numpy.exp(1j * p), numpy.exp(-1j * p)])
    return phases[:, None] * coin_matrix(theta)


def walk_eigenphases(p: float, theta: float) -> Tuple[float, float]:
    """Eigenphases (+omega, -omega) of the momentum-space step operator, omega in [0, pi]."""
    eigenvalues = numpy.linalg.eigvals(walk_momentum_matrix(p, theta))
    magnitudes = numpy.abs(numpy.angle(eigenvalues))
    omega = float(0.5 * (magnitudes[0] + magnitudes[1]))
    return omega, -omega


def effective_hamiltonian_scale(p: float, theta: float) -> Tuple[float, float, float]:
    """The factor omega/sin(omega) and its two approximations, 1 and 1/cos(theta)."""
    omega = dispersion_omega(p, theta)
    exact = 1.0 if omega == 0 else omega / math.sin(omega)
    return exact, 1.0, 1.0 / math.cos(theta)


@dataclass(frozen=True)
class DiracParams:
    """Dirac parameters read off the walk with coin angle ``theta``."""

    theta: float
    c: float
    mass_energy: float
    mass: float
    alpha: numpy.ndarray
    beta: numpy.ndarray

    def anticommutator_residual(self) -> float:
        """Largest entrywise deviation from alpha beta + beta alpha = 0 and alpha^2 = beta^2 = 1."""
        a, b = self.alpha, self.beta
        residuals = [a @ b + b @ a, a @ a - IDENTITY, b @ b - IDENTITY]
        return float(max(numpy.max(numpy.abs(r)) for r in residuals))

    def to_dict(self):
        return {
            "theta": self.theta,
            "c": self.c,
            "mass_energy": self.mass_energy,
            "mass": self.mass,
        }


def dirac_params(theta: float) -> DiracParams:
    """c = sec(theta), mc^2 = tan(theta), m = sin(theta) cos(theta), alpha and beta in the walk basis."""
    cos, sin = math.cos(theta), math.sin(theta)
    if abs(cos) < COS_ZERO_TOLERANCE:
        raise ValueError(
            f"Dirac mapping requires cos(theta) != 0 (got theta={theta})."
        )
    alpha = -cos * SIGMA_3 + sin * SIGMA_1
    alpha.flags.writeable = False
    beta = SIGMA_2.copy()
    beta.flags.writeable = False
    return DiracParams(
        theta=theta,
        c=1.0 / cos,
        mass_energy=sin / cos,
        mass=sin * cos,
        alpha=alpha,
        beta=beta,
    )
