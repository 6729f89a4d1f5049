import copy
import json
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy

from nqwalk.exceptions import ConfigError
from nqwalk.lattice import DEFAULT_GUARD_EPS, LatticeConfig
from nqwalk.nonlinear import WalkParams
from nqwalk.solitons import SolitonSpec, profile_halfwidth
from nqwalk.utils import (
    COIN_STATES,
    DEFAULT_COLLISION_OFFSET,
    DEFAULT_SCALAR_BILINEAR,
    SCALAR_BILINEAR_DEFAULTS,
    SCENARIOS,
    bloch_spinor,
    default_config,
    named_spinor,
    parse_angle,
)

logger = logging.getLogger(__name__)

# Tolerance when counting grid points that fit in a closed range
GRID_EPSILON = 1e-9


@dataclass(frozen=True)
class BlochGrid:
    """Grid of coin states over theta_b in [0, pi] and phi_b in [0, 2 pi).

    Each axis holds floor(range / spacing) + 1 points starting at 0, so the
    default spacing of 0.04 rad gives 79 x 158 = 12,482 states.
    """

    theta_spacing: float = 0.04
    phi_spacing: float = 0.04

    def __post_init__(self):
        for name in ["theta_spacing", "phi_spacing"]:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeError(f"Type of {name} must be float.")
            if not value > 0:
                raise ValueError(f"Bloch grid {name} must be positive.")

    @property
    def theta_values(self) -> numpy.ndarray:
        count = math.floor(math.pi / self.theta_spacing + GRID_EPSILON) + 1
        return numpy.arange(count) * self.theta_spacing

    @property
    def phi_values(self) -> numpy.ndarray:
        count = math.floor(2 * math.pi / self.phi_spacing + GRID_EPSILON) + 1
        return numpy.arange(count) * self.phi_spacing

    @property
    def shape(self):
        return len(self.theta_values), len(self.phi_values)

    @property
    def size(self) -> int:
        rows, cols = self.shape
        return rows * cols

    def points(self) -> numpy.ndarray:
        """(theta_b, phi_b) pairs in row-major order, shape (size, 2)."""
        theta, phi = numpy.meshgrid(self.theta_values, self.phi_values, indexing="ij")
        return numpy.stack([theta.ravel(), phi.ravel()], axis=-1)

    def to_dict(self):
        return {"theta_spacing": self.theta_spacing, "phi_spacing": self.phi_spacing}


def _check_keys(section: str, value: Dict, allowed) -> None:
    if not isinstance(value, dict):
        raise ConfigError(f"Config section {section} must be an object.")
    unknown = sorted(set(value) - set(allowed))
    if unknown:
        raise ConfigError(f"Unknown keys in {section}: {unknown}.")


def _grid_values(name: str, grid: Dict, angles: bool = False) -> numpy.ndarray:
    parse = (lambda v: parse_angle(v, name)) if angles else float
    if "values" in grid:
        if set(grid) != {"values"}:
            raise ConfigError(f"{name} takes either values or start, stop and num.")
        return numpy.array([parse(v) for v in grid["values"]], dtype=float)
    _check_keys(name, grid, ["start", "stop", "num"])
    if set(grid) != {"start", "stop", "num"}:
        raise ConfigError(f"{name} requires start, stop and num.")
    num = grid["num"]
    if isinstance(num, bool) or not isinstance(num, int) or num < 1:
        raise ConfigError(f"{name} num must be a positive integer.")
    start, stop = parse(grid["start"]), parse(grid["stop"])
    values = numpy.linspace(start, stop, num)
    if angles and math.isclose(start + stop, math.pi, abs_tol=GRID_EPSILON):
        values = _reflect_lower_half(values)
    return values


def _reflect_lower_half(values: numpy.ndarray) -> numpy.ndarray:
    """Rebuild a grid symmetric about pi/2 so that theta[n-1-i] + theta[i] == pi exactly.

    The upper half is kept; pi - theta is exact for theta in [pi/2, pi].
    """
    values = values.copy()
    count = len(values)
    for i in range(count // 2):
        values[i] = math.pi - values[count - 1 - i]
    if count % 2:
        values[count // 2] = math.pi / 2
    return values


def default_solitons(scenario: str, offset: float = DEFAULT_COLLISION_OFFSET) -> List[Dict]:
    """Soliton entries used when a configuration gives none."""
    if scenario == "collision":
        return [
            {"coefficient": math.sqrt(2), "velocity_ratio": 0.3, "center": -offset},
            {"coefficient": 1.0, "velocity_ratio": -0.3, "center": offset},
        ]
    return [{"omega_ratio": 0.99}]


class ExperimentConfig:
    """Validated settings of one scenario run, imported from and exported to JSON."""

    def __init__(self, scenario: str = "stationary", **kwargs) -> None:
        """Create an experiment configuration.

        Parameters:
            scenario: Name of the scenario to run (see ``nqwalk.utils.SCENARIOS``).
            kwargs: Any top-level configuration key, e.g. ``steps=100``.
        """
        defaults = copy.deepcopy(default_config)
        self._scenario = None
        self._walk = WalkParams(**defaults["walk"])
        self._scalar_bilinear = None
        self._lattice = None
        self._steps = defaults["steps"]
        self._solitons = None
        self._coin_state = defaults["coin_state"]
        self._bloch_grid = BlochGrid(**defaults["bloch_grid"])
        self._g_grid = defaults["g_grid"]
        self._theta_grid = defaults["theta_grid"]
        self._dispersion_grid = defaults["dispersion_grid"]
        self._observables = defaults["observables"]
        self._snapshot_stride = None
        self._output = None
        self._workers = defaults["workers"]
        self._chunk_size = defaults["chunk_size"]

        self.scenario = scenario
        for key, value in kwargs.items():
            if key not in default_config:
                raise ConfigError(f"Unknown config key {key}.")
            setattr(self, key, value)

    # -----------------------------------------------------
    # Properties
    # -----------------------------------------------------

    @property
    def scenario(self) -> str:
        return self._scenario

    @scenario.setter
    def scenario(self, scenario: str) -> None:
        if not isinstance(scenario, str):
            raise TypeError("Type of scenario must be str.")
        if scenario not in SCENARIOS:
            raise ConfigError(
                f"Invalid scenario {scenario}. Must be one of [{', '.join(SCENARIOS)}]."
            )
        self._scenario = scenario

    @property
    def walk(self) -> WalkParams:
        """Walk parameters; the scalar bilinear defaults per scenario when not set."""
        if self._scalar_bilinear is None:
            default = SCALAR_BILINEAR_DEFAULTS.get(self._scenario, DEFAULT_SCALAR_BILINEAR)
            return replace(self._walk, scalar_bilinear=default)
        return self._walk

    @walk.setter
    def walk(self, walk: Union[Dict, WalkParams]) -> None:
        scalar_bilinear = None
        if isinstance(walk, dict):
            _check_keys("walk", walk, ["theta", "kind", "g", "scalar_bilinear"])
            merged = {**default_config["walk"], **walk}
            scalar_bilinear = merged.get("scalar_bilinear")
            try:
                walk = WalkParams(**merged)
            except ValueError as e:
                raise ConfigError(str(e))
        elif isinstance(walk, WalkParams):
            scalar_bilinear = walk.scalar_bilinear.value
        if not isinstance(walk, WalkParams):
            raise TypeError("Type of walk must be Dict or WalkParams.")
        self._walk = walk
        self._scalar_bilinear = scalar_bilinear

    @property
    def lattice(self) -> LatticeConfig:
        """Explicit lattice, or one sized for the light cone of the run."""
        if self._lattice is not None:
            return self._lattice
        return LatticeConfig.for_run(self._steps, self.profile_halfwidth)

    @lattice.setter
    def lattice(self, lattice: Union[Dict, LatticeConfig, None]) -> None:
        if isinstance(lattice, dict):
            _check_keys("lattice", lattice, ["n_sites", "origin_index", "boundary_guard_eps"])
            if "n_sites" not in lattice:
                eps = lattice.get("boundary_guard_eps", DEFAULT_GUARD_EPS)
                lattice = LatticeConfig.for_run(
                    self._steps, self.halfwidth_for(eps), eps
                )
            else:
                try:
                    lattice = LatticeConfig(**lattice)
                except ValueError as e:
                    raise ConfigError(str(e))
        if lattice is not None and not isinstance(lattice, LatticeConfig):
            raise TypeError("Type of lattice must be Dict, LatticeConfig or None.")
        self._lattice = lattice

    @property
    def profile_halfwidth(self) -> int:
        return self.halfwidth_for(DEFAULT_GUARD_EPS)

    def halfwidth_for(self, eps: float) -> int:
        """Half-width of the initial data for a lattice guarded at ``eps``."""
        if self._scenario in ["stationary", "collision"]:
            return profile_halfwidth(self.soliton_specs, eps)
        return 1

    @property
    def steps(self) -> int:
        return self._steps

    @steps.setter
    def steps(self, steps: int) -> None:
        if isinstance(steps, bool) or not isinstance(steps, int):
            raise TypeError("Type of steps must be int.")
        if steps < 1:
            raise ConfigError("Number of steps must be a positive integer.")
        self._steps = steps

    @property
    def solitons(self) -> List[Dict]:
        """Soliton entries as configured, or the scenario defaults."""
        if self._solitons is None:
            return default_solitons(self._scenario)
        return copy.deepcopy(self._solitons)

    @solitons.setter
    def solitons(self, solitons: Optional[List]) -> None:
        if solitons is not None:
            if not isinstance(solitons, list):
                raise TypeError("Type of solitons must be List or None.")
            entries = []
            for entry in solitons:
                if isinstance(entry, SolitonSpec):
                    entry = entry.to_dict()
                try:
                    SolitonSpec.from_dict(entry, self._walk)
                except ValueError as e:
                    raise ConfigError(str(e))
                entries.append(dict(entry))
            solitons = entries
        self._solitons = solitons

    @property
    def soliton_specs(self) -> List[SolitonSpec]:
        try:
            return [SolitonSpec.from_dict(e, self._walk) for e in self.solitons]
        except ValueError as e:
            raise ConfigError(str(e))

    @property
    def coin_state(self) -> Dict:
        return dict(self._coin_state)

    @coin_state.setter
    def coin_state(self, coin_state: Union[Dict, str]) -> None:
        if isinstance(coin_state, str):
            if coin_state not in COIN_STATES:
                raise ConfigError(
                    f"Invalid coin state {coin_state}. Must be one of [{', '.join(COIN_STATES)}]."
                )
            theta_b, phi_b = COIN_STATES[coin_state]
            coin_state = {"theta_b": theta_b, "phi_b": phi_b}
        if not isinstance(coin_state, dict):
            raise TypeError("Type of coin_state must be Dict or str.")
        _check_keys("coin_state", coin_state, ["theta_b", "phi_b", "charge"])
        theta_b = parse_angle(coin_state.get("theta_b", math.pi / 2), "theta_b")
        phi_b = parse_angle(coin_state.get("phi_b", math.pi / 2), "phi_b")
        charge = coin_state.get("charge", 1.0)
        if not 0 <= theta_b <= math.pi:
            raise ConfigError("Bloch angle theta_b must be in [0, pi].")
        if not 0 <= phi_b < 2 * math.pi:
            raise ConfigError("Bloch angle phi_b must be in [0, 2 pi).")
        if isinstance(charge, bool) or not isinstance(charge, (int, float)):
            raise TypeError("Type of charge must be float.")
        if not charge > 0:
            raise ConfigError("Coin state charge must be positive.")
        self._coin_state = {"theta_b": theta_b, "phi_b": phi_b, "charge": float(charge)}

    @property
    def coin_spinor(self):
        return bloch_spinor(**self._coin_state)

    def named_coin_spinors(self) -> Dict[str, tuple]:
        """The phi_plus and phi_minus states scaled by the configured charge."""
        charge = self._coin_state["charge"]
        return {name: named_spinor(name, charge) for name in COIN_STATES}

    @property
    def bloch_grid(self) -> BlochGrid:
        return self._bloch_grid

    @bloch_grid.setter
    def bloch_grid(self, bloch_grid: Union[Dict, BlochGrid]) -> None:
        if isinstance(bloch_grid, dict):
            _check_keys("bloch_grid", bloch_grid, ["theta_spacing", "phi_spacing"])
            try:
                bloch_grid = BlochGrid(**{**default_config["bloch_grid"], **bloch_grid})
            except ValueError as e:
                raise ConfigError(str(e))
        if not isinstance(bloch_grid, BlochGrid):
            raise TypeError("Type of bloch_grid must be Dict or BlochGrid.")
        self._bloch_grid = bloch_grid

    @property
    def g_grid(self) -> Dict:
        return dict(self._g_grid)

    @g_grid.setter
    def g_grid(self, g_grid: Dict) -> None:
        if not isinstance(g_grid, dict):
            raise TypeError("Type of g_grid must be Dict.")
        values = _grid_values("g_grid", g_grid)
        if numpy.any(values < 0):
            raise ConfigError("Coupling values in g_grid must be nonnegative.")
        self._g_grid = dict(g_grid)

    @property
    def g_values(self) -> numpy.ndarray:
        return _grid_values("g_grid", self._g_grid)

    @property
    def theta_grid(self) -> Dict:
        return dict(self._theta_grid)

    @theta_grid.setter
    def theta_grid(self, theta_grid: Dict) -> None:
        if not isinstance(theta_grid, dict):
            raise TypeError("Type of theta_grid must be Dict.")
        _grid_values("theta_grid", theta_grid, angles=True)
        self._theta_grid = dict(theta_grid)

    @property
    def theta_values(self) -> numpy.ndarray:
        return _grid_values("theta_grid", self._theta_grid, angles=True)

    @property
    def dispersion_grid(self) -> Dict:
        return dict(self._dispersion_grid)

    @dispersion_grid.setter
    def dispersion_grid(self, dispersion_grid: Dict) -> None:
        _check_keys("dispersion_grid", dispersion_grid, ["p_points", "theta_points"])
        merged = {**default_config["dispersion_grid"], **dispersion_grid}
        for key, value in merged.items():
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeError(f"Type of {key} must be int.")
            if value < 2:
                raise ConfigError(f"Dispersion grid {key} must be at least 2.")
        self._dispersion_grid = merged

    @property
    def observables(self) -> Dict:
        return dict(self._observables)

    @observables.setter
    def observables(self, observables: Dict) -> None:
        _check_keys(
            "observables",
            observables,
            ["localization_radius", "peak_min_separation", "peak_threshold"],
        )
        merged = {**default_config["observables"], **observables}
        radius = merged["localization_radius"]
        if radius is not None and (
            isinstance(radius, bool) or not isinstance(radius, int) or radius < 0
        ):
            raise ConfigError("Localization radius must be a nonnegative integer or null.")
        separation = merged["peak_min_separation"]
        if isinstance(separation, bool) or not isinstance(separation, int) or separation < 1:
            raise ConfigError("Peak separation must be a positive integer.")
        if not 0 < merged["peak_threshold"] < 1:
            raise ConfigError("Peak threshold must be in (0, 1).")
        self._observables = merged

    @property
    def localization_radius(self) -> int:
        """Configured radius, or ceil(5/b) of the first soliton."""
        radius = self._observables["localization_radius"]
        if radius is None:
            return math.ceil(5 * self.soliton_specs[0].width)
        return radius

    @property
    def snapshot_stride(self) -> Optional[int]:
        return self._snapshot_stride

    @snapshot_stride.setter
    def snapshot_stride(self, snapshot_stride: Optional[int]) -> None:
        if snapshot_stride is not None:
            if isinstance(snapshot_stride, bool) or not isinstance(snapshot_stride, int):
                raise TypeError("Type of snapshot_stride must be int or None.")
            if snapshot_stride < 1:
                raise ConfigError("Snapshot stride must be a positive integer.")
        self._snapshot_stride = snapshot_stride

    @property
    def output(self) -> Optional[str]:
        return self._output

    @output.setter
    def output(self, output: Union[str, Path, None]) -> None:
        if output is not None and not isinstance(output, (str, Path)):
            raise TypeError("Type of output must be str or None.")
        self._output = None if output is None else str(output)

    @property
    def workers(self) -> int:
        return self._workers

    @workers.setter
    def workers(self, workers: int) -> None:
        if isinstance(workers, bool) or not isinstance(workers, int):
            raise TypeError("Type of workers must be int.")
        if workers < 1:
            raise ConfigError("Number of workers must be a positive integer.")
        self._workers = workers

    @property
    def chunk_size(self) -> int:
        return self._chunk_size

    @chunk_size.setter
    def chunk_size(self, chunk_size: int) -> None:
        if isinstance(chunk_size, bool) or not isinstance(chunk_size, int):
            raise TypeError("Type of chunk_size must be int.")
        if chunk_size < 1:
            raise ConfigError("Chunk size must be a positive integer.")
        self._chunk_size = chunk_size

    # -----------------------------------------------------
    # Validation
    # -----------------------------------------------------

    def validate(self) -> None:
        """Check the fields the selected scenario requires."""
        if self._scenario == "stationary":
            specs = self.soliton_specs
            if len(specs) != 1:
                raise ConfigError("Scenario stationary requires exactly one soliton.")
            if specs[0].velocity != 0:
                raise ConfigError("Scenario stationary requires a soliton at rest.")
        elif self._scenario == "collision":
            specs = self.soliton_specs
            if len(specs) != 2:
                raise ConfigError("Scenario collision requires exactly two solitons.")
            if specs[0].velocity * specs[1].velocity > 0:
                raise ConfigError(
                    "Scenario collision requires solitons with opposite velocities."
                )
        if self._lattice is None:
            return
        if self._scenario in ["stationary", "collision"]:
            needed = self.profile_halfwidth
        else:
            needed = self._steps + 1
        if self._lattice.half_width < needed:
            logger.warning(
                "Lattice half-width %d is below the %d sites the run may reach",
                self._lattice.half_width,
                needed,
            )

    # -----------------------------------------------------
    # Import / Export
    # -----------------------------------------------------

    def import_config(self, config_file: Union[Dict, str, Path]) -> None:
        """Import settings from a JSON configuration.

        Parameters:
            config_file: A dictionary, a string or Path referring to a JSON
                file, or a JSON document as a string. Keys missing from the
                configuration keep their current values.
        """
        if isinstance(config_file, dict):
            config = copy.deepcopy(config_file)
        elif isinstance(config_file, (str, Path)):
            try:
                if isinstance(config_file, str) and config_file.lstrip()[:1] in "{[":
                    config = json.loads(config_file)
                else:
                    config = json.loads(Path(config_file).read_text())
            except OSError as e:
                raise ConfigError(f"Could not read configuration file: {e}")
            except json.JSONDecodeError as e:
                raise ConfigError(f"Invalid JSON configuration: {e}")
        else:
            raise TypeError("Type of config_file must be Dict, str or Path.")
        if not isinstance(config, dict):
            raise ConfigError("Invalid format of configuration file.")
        unknown = sorted(set(config) - set(default_config) - {"scenario"})
        if unknown:
            raise ConfigError(f"Unknown config keys {unknown}.")

        if "scenario" in config:
            self.scenario = config.pop("scenario")
        # walk first: solitons and the lattice size depend on it
        for key in ["walk", "steps", "solitons"]:
            if key in config:
                setattr(self, key, config.pop(key))
        for key, value in config.items():
            setattr(self, key, value)

    def export_config(self, config_file: Union[str, Path, None] = None) -> Dict:
        """Export the current settings.

        Parameters:
            config_file: Destination of the JSON file. The configuration
                dictionary is returned in every case.
        """
        config = {
            "scenario": self._scenario,
            "walk": self.walk.to_dict(),
            "lattice": None if self._lattice is None else self._lattice.to_dict(),
            "steps": self._steps,
            "solitons": copy.deepcopy(self._solitons),
            "coin_state": self.coin_state,
            "bloch_grid": self._bloch_grid.to_dict(),
            "g_grid": self.g_grid,
            "theta_grid": self.theta_grid,
            "dispersion_grid": self.dispersion_grid,
            "observables": self.observables,
            "snapshot_stride": self._snapshot_stride,
            "output": self._output,
            "workers": self._workers,
            "chunk_size": self._chunk_size,
        }
        if config_file:
            Path(config_file).write_text(json.dumps(config, indent=2))
        return config

    def __repr__(self):
        return f"ExperimentConfig(scenario={self._scenario}, steps={self._steps})"


def load_config(
    scenario: str, config_file: Union[Dict, str, Path, None] = None, **overrides: Any
) -> ExperimentConfig:
    """Build a configuration for ``scenario``, then apply a file and overrides."""
    config = ExperimentConfig(scenario)
    if config_file is not None:
        config.import_config(config_file)
        if config.scenario != scenario:
            logger.info(
                "Configuration names scenario %s, running %s", config.scenario, scenario
            )
            config.scenario = scenario
    for key, value in overrides.items():
        if value is not None:
            setattr(config, key, value)
    return config
