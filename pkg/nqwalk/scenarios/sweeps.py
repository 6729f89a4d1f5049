"""Ballistic speed sweeps over coin states, couplings and coin angles.

Grid points are grouped into tasks that evolve a batch of localized starts
with :func:`nqwalk.nonlinear.evolve_batch`. Tasks run through dask; the
rows come back in task order, so tables are identical for any number of
workers.
"""

import logging
from dataclasses import replace
from typing import List

import dask
import numpy
import pandas

from nqwalk.exceptions import BoundaryViolation, NumericFailure
from nqwalk.lattice import LatticeConfig, site_densities
from nqwalk.nonlinear import WalkParams, evolve_batch
from nqwalk.observables import position_moments
from nqwalk.scenarios import ScenarioResult
from nqwalk.scenarios.diffusion import EVOLUTIONS, evolution_params
from nqwalk.utils import bloch_spinor

logger = logging.getLogger(__name__)

SPEED_COLUMNS = [f"speed_{name}" for name in EVOLUTIONS]


def localized_batch(spinors, config: LatticeConfig) -> numpy.ndarray:
    """Batch of states with each spinor on the origin site, shape (B, 2, n_sites)."""
    spinors = numpy.asarray(spinors, dtype=numpy.complex128).reshape(-1, 2)
    amps = numpy.zeros((len(spinors), 2, config.n_sites), dtype=numpy.complex128)
    amps[:, :, config.origin_index] = spinors
    return amps


def batch_speeds(
    spinors, walk: WalkParams, steps: int, config: LatticeConfig, coordinates=None
) -> numpy.ndarray:
    """sigma(steps)/steps for each start under the linear, scalar and vector walks.

    Returns an array of shape (B, 3). ``coordinates`` names the grid point of
    every start and is only used to report failures.
    """
    start = localized_batch(spinors, config)
    positions = config.positions.astype(float)
    speeds = numpy.empty((len(start), len(EVOLUTIONS)))
    for column, params in enumerate(evolution_params(walk).values()):
        try:
            final = evolve_batch(start, params, steps, config)
        except BoundaryViolation as e:
            where = _coordinates(coordinates, e.report.batch_index)
            raise BoundaryViolation(e.report, f"{e} Grid point: {where}.")
        except NumericFailure as e:
            raise NumericFailure(f"{e} Grid points: {_coordinates(coordinates, None)}.")
        _, sigma = position_moments(site_densities(final), positions)
        speeds[:, column] = sigma / steps
    return speeds


def _coordinates(coordinates, index):
    if coordinates is None:
        return "unknown"
    if index is None:
        return f"{coordinates[0]} to {coordinates[-1]}"
    return coordinates[index]


def _compute(tasks: List, workers: int) -> List:
    if workers == 1:
        return list(dask.compute(*tasks, scheduler="synchronous"))
    return list(dask.compute(*tasks, scheduler="processes", num_workers=workers))


def run_bloch_sweep(config) -> ScenarioResult:
    """Speeds of every coin state on the Bloch grid after ``steps`` steps."""
    grid = config.bloch_grid
    points = grid.points()
    charge = config.coin_state["charge"]
    lattice = config.lattice
    spinors = numpy.array(
        [bloch_spinor(theta_b, phi_b, charge) for theta_b, phi_b in points]
    )
    size = config.chunk_size
    chunks = range(0, len(points), size)
    logger.info(
        "Bloch sweep: %d points (%d x %d) in %d chunks",
        len(points),
        *grid.shape,
        len(chunks),
    )
    tasks = [
        dask.delayed(batch_speeds)(
            spinors[i : i + size],
            config.walk,
            config.steps,
            lattice,
            [tuple(p) for p in points[i : i + size].tolist()],
        )
        for i in chunks
    ]
    speeds = numpy.concatenate(_compute(tasks, config.workers))
    table = pandas.DataFrame(
        {
            "theta_b": points[:, 0],
            "phi_b": points[:, 1],
            **{name: speeds[:, i] for i, name in enumerate(SPEED_COLUMNS)},
        }
    )
    sorted_table = table.sort_values("speed_linear", kind="stable").reset_index(drop=True)
    report = {
        "points": len(table),
        "grid_shape": list(grid.shape),
        **{f"max_{name}": float(table[name].max()) for name in SPEED_COLUMNS},
    }
    return ScenarioResult(
        config.scenario,
        tables={"sweep.csv": table, "sweep_sorted.csv": sorted_table},
        report=report,
    )


def _coin_state_sweep(config, walks, columns):
    """One task per walk; each evolves the phi_plus and phi_minus starts."""
    named = config.named_coin_spinors()
    names = list(named)
    spinors = numpy.array([named[name] for name in names])
    lattice = config.lattice
    tasks = [
        dask.delayed(batch_speeds)(
            spinors,
            walk,
            config.steps,
            lattice,
            [(name, *values) for name in names],
        )
        for values, walk in walks
    ]
    logger.info("%s: %d grid points", config.scenario, len(tasks))
    results = _compute(tasks, config.workers)
    rows = []
    for name_index, name in enumerate(names):
        for (values, _), speeds in zip(walks, results):
            rows.append(
                [name, *values, *speeds[name_index].tolist()]
            )
    table = pandas.DataFrame(rows, columns=["coin_state", *columns, *SPEED_COLUMNS])
    return table


def _report(table):
    report = {"points": len(table)}
    for name, group in table.groupby("coin_state", sort=False):
        for column in SPEED_COLUMNS:
            report[f"max_{column}_{name}"] = float(group[column].max())
    return report


def run_g_sweep(config) -> ScenarioResult:
    """Speeds of the phi_plus and phi_minus starts as functions of g."""
    walk = config.walk
    walks = [((float(g),), replace(walk, g=float(g))) for g in config.g_values]
    table = _coin_state_sweep(config, walks, ["g"])
    return ScenarioResult(config.scenario, tables={"sweep.csv": table}, report=_report(table))


def run_theta_sweep(config) -> ScenarioResult:
    """Speeds of the phi_plus and phi_minus starts as functions of the coin angle."""
    walk = config.walk
    walks = [
        ((float(theta),), replace(walk, theta=float(theta)))
        for theta in config.theta_values
    ]
    table = _coin_state_sweep(config, walks, ["theta"])
    return ScenarioResult(config.scenario, tables={"sweep.csv": table}, report=_report(table))


def run_g_theta_surface(config) -> ScenarioResult:
    """Speeds over the product of the g and theta grids, g varying slowest."""
    walk = config.walk
    walks = [
        ((float(g), float(theta)), replace(walk, theta=float(theta), g=float(g)))
        for g in config.g_values
        for theta in config.theta_values
    ]
    table = _coin_state_sweep(config, walks, ["g", "theta"])
    return ScenarioResult(config.scenario, tables={"sweep.csv": table}, report=_report(table))
