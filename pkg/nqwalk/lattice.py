import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, NamedTuple, Optional

import numpy

from nqwalk.exceptions import BoundaryViolation, NumericFailure

logger = logging.getLogger(__name__)

# Edge charge fraction tolerated by the boundary guard
DEFAULT_GUARD_EPS = 1e-12


class Spinor(NamedTuple):
    """Two-component amplitude (u, v) at one lattice site."""

    u: complex
    v: complex

    @property
    def density(self) -> float:
        return abs(self.u) ** 2 + abs(self.v) ** 2

    def as_array(self) -> numpy.ndarray:
        return numpy.array([self.u, self.v], dtype=numpy.complex128)


@dataclass(frozen=True)
class LatticeConfig:
    """Finite 1-D lattice. Site index i sits at physical position x = i - origin_index."""

    n_sites: int
    origin_index: Optional[int] = None
    boundary_guard_eps: float = DEFAULT_GUARD_EPS

    def __post_init__(self):
        if isinstance(self.n_sites, bool) or not isinstance(self.n_sites, int):
            raise TypeError("Type of n_sites must be int.")
        if self.n_sites < 3:
            raise ValueError("Lattice must have at least 3 sites.")
        if self.origin_index is None:
            object.__setattr__(self, "origin_index", self.n_sites // 2)
        if isinstance(self.origin_index, bool) or not isinstance(
            self.origin_index, int
        ):
            raise TypeError("Type of origin_index must be int or None.")
        if not 0 <= self.origin_index < self.n_sites:
            raise ValueError(
                f"Origin index must be in [0, {self.n_sites}) (got {self.origin_index})."
            )
        if not isinstance(self.boundary_guard_eps, (int, float)) or isinstance(
            self.boundary_guard_eps, bool
        ):
            raise TypeError("Type of boundary_guard_eps must be float.")
        if not math.isfinite(self.boundary_guard_eps) or self.boundary_guard_eps < 0:
            raise ValueError("Boundary guard epsilon must be a nonnegative number.")
        object.__setattr__(self, "boundary_guard_eps", float(self.boundary_guard_eps))

    @classmethod
    def for_run(
        cls,
        steps: int,
        profile_halfwidth: int,
        boundary_guard_eps: float = DEFAULT_GUARD_EPS,
    ) -> "LatticeConfig":
        """Centered lattice holding a `steps`-step light cone around data of half-width `profile_halfwidth`."""
        n_sites = 2 * (int(steps) + int(profile_halfwidth)) + 3
        return cls(n_sites=n_sites, boundary_guard_eps=boundary_guard_eps)

    @property
    def positions(self) -> numpy.ndarray:
        return numpy.arange(self.n_sites) - self.origin_index

    @property
    def half_width(self) -> int:
        return max(self.origin_index, self.n_sites - 1 - self.origin_index)

    def index_of(self, x: int) -> int:
        index = int(x) + self.origin_index
        if not 0 <= index < self.n_sites:
            raise ValueError(f"Position {x} is outside of the lattice.")
        return index

    def to_dict(self) -> Dict:
        return {
            "n_sites": self.n_sites,
            "origin_index": self.origin_index,
            "boundary_guard_eps": self.boundary_guard_eps,
        }


@dataclass(frozen=True)
class GuardReport:
    """Outcome of the edge-charge check at step ``t``."""

    ok: bool
    t: int
    left_fraction: float
    right_fraction: float
    eps: float
    batch_index: Optional[int] = None

    def __bool__(self):
        return self.ok

    @property
    def edge_fraction(self) -> float:
        return max(self.left_fraction, self.right_fraction)

    @property
    def message(self) -> str:
        if self.ok:
            return f"Boundary guard ok at step {self.t}."
        where = "" if self.batch_index is None else f" (batch element {self.batch_index})"
        return (
            f"Boundary guard violated at step {self.t}{where}: edge charge fraction "
            f"{self.edge_fraction:.3e} exceeds {self.eps:.1e}."
        )

    def to_dict(self) -> Dict:
        return {
            "ok": self.ok,
            "t": self.t,
            "left_fraction": self.left_fraction,
            "right_fraction": self.right_fraction,
            "eps": self.eps,
        }


def site_densities(amps: numpy.ndarray) -> numpy.ndarray:
    """|u|^2 + |v|^2 for amplitudes of shape (..., 2, n_sites)."""
    squared = amps.real**2 + amps.imag**2
    return squared[..., 0, :] + squared[..., 1, :]


class WalkerState:
    """Walker amplitudes on a finite lattice at step ``t``.

    States are values: the amplitude array is read-only and every operation
    returns a new state.
    """

    def __init__(
        self, config: LatticeConfig, amps: Iterable, t: int = 0
    ) -> None:
        """Create a state.

        Parameters:
            config: The lattice the amplitudes live on.
            amps: Array-like of shape (2, n_sites); row 0 holds u, row 1 holds v.
            t: Step count.
        """
        if not isinstance(config, LatticeConfig):
            raise TypeError("Type of config must be LatticeConfig.")
        if isinstance(t, bool) or not isinstance(t, (int, numpy.integer)):
            raise TypeError("Type of t must be int.")
        if t < 0:
            raise ValueError("Step count must be a nonnegative integer.")
        amps = numpy.array(amps, dtype=numpy.complex128)
        if amps.shape != (2, config.n_sites):
            raise ValueError(
                f"Amplitudes must have shape (2, {config.n_sites}) (got {amps.shape})."
            )
        if not numpy.isfinite(amps).all():
            raise NumericFailure(f"Non-finite amplitudes at step {t}.")
        if not numpy.any(amps):
            raise ValueError("Total charge must be strictly positive.")
        amps.flags.writeable = False
        self._config = config
        self._amps = amps
        self._t = int(t)

    @classmethod
    def from_spinors(
        cls, config: LatticeConfig, spinors: Iterable, t: int = 0
    ) -> "WalkerState":
        """Build a state from one (u, v) pair per site."""
        amps = numpy.array([tuple(s) for s in spinors], dtype=numpy.complex128)
        if amps.ndim != 2 or amps.shape[1] != 2:
            raise ValueError("Spinors must be a sequence of (u, v) pairs.")
        return cls(config, amps.T, t=t)

    @classmethod
    def localized(
        cls, config: LatticeConfig, spinor, x: int = 0, t: int = 0
    ) -> "WalkerState":
        """State with all amplitude on the single site at physical position ``x``."""
        amps = numpy.zeros((2, config.n_sites), dtype=numpy.complex128)
        amps[:, config.index_of(x)] = tuple(spinor)
        return cls(config, amps, t=t)

    @property
    def config(self) -> LatticeConfig:
        return self._config

    @property
    def amps(self) -> numpy.ndarray:
        """Read-only amplitude array of shape (2, n_sites)."""
        return self._amps

    @property
    def t(self) -> int:
        return self._t

    @property
    def u(self) -> numpy.ndarray:
        return self._amps[0]

    @property
    def v(self) -> numpy.ndarray:
        return self._amps[1]

    @property
    def positions(self) -> numpy.ndarray:
        return self._config.positions

    def spinor(self, x: int) -> Spinor:
        """Spinor at physical position ``x``."""
        index = self._config.index_of(x)
        return Spinor(complex(self._amps[0, index]), complex(self._amps[1, index]))

    def spinors(self):
        return [Spinor(complex(u), complex(v)) for u, v in self._amps.T]

    def with_amps(self, amps: numpy.ndarray, t: Optional[int] = None) -> "WalkerState":
        return WalkerState(self._config, amps, self._t if t is None else t)

    def __repr__(self):
        return f"WalkerState(n_sites={self._config.n_sites}, t={self._t})"


def charge_density(state: WalkerState) -> numpy.ndarray:
    """Per-site charge |u|^2 + |v|^2."""
    return site_densities(state.amps)


def total_charge(state: WalkerState) -> float:
    """Discrete charge Q: the sum of the charge density."""
    charge = float(numpy.sum(charge_density(state)))
    if not math.isfinite(charge):
        raise NumericFailure(f"Total charge is not finite at step {state.t}.")
    if charge <= 0:
        raise ValueError("Total charge must be strictly positive.")
    return charge


def guard_fractions(amps: numpy.ndarray, charge) -> numpy.ndarray:
    """Edge charge fractions, shape (..., 2) for left and right edge sites."""
    squared = amps[..., :, [0, -1]].real ** 2 + amps[..., :, [0, -1]].imag ** 2
    edges = squared[..., 0, :] + squared[..., 1, :]
    return edges / numpy.asarray(charge)[..., None]


def guard_boundaries(state: WalkerState, charge: Optional[float] = None) -> GuardReport:
    """Check that both edge sites hold at most ``boundary_guard_eps`` of the charge.

    Parameters:
        state: State to check.
        charge: Reference total charge; defaults to the state's own total charge.
    """
    if charge is None:
        charge = float(numpy.sum(charge_density(state)))
    eps = state.config.boundary_guard_eps
    if charge <= 0 or not math.isfinite(charge):
        return GuardReport(False, state.t, math.nan, math.nan, eps)
    left, right = guard_fractions(state.amps, charge)
    return GuardReport(
        ok=bool(left <= eps and right <= eps),
        t=state.t,
        left_fraction=float(left),
        right_fraction=float(right),
        eps=eps,
    )


def check_guard(state: WalkerState, charge: Optional[float] = None) -> GuardReport:
    """Like :func:`guard_boundaries` but raise :class:`BoundaryViolation` on failure."""
    report = guard_boundaries(state, charge)
    if not report.ok:
        raise BoundaryViolation(report)
    return report
