import logging
import math

import numpy
import pandas

from nqwalk.linear_walk import (
    dirac_params,
    dispersion_omega,
    effective_hamiltonian_scale,
    walk_eigenphases,
)
from nqwalk.scenarios import ScenarioResult

logger = logging.getLogger(__name__)

# Largest eigenphase error accepted by the check
DISPERSION_TOLERANCE = 1e-12


def dispersion_grid(p_points: int, theta_points: int):
    """Momenta on [-pi, pi] and coin angles on [0, pi/2)."""
    p_values = numpy.linspace(-math.pi, math.pi, p_points)
    theta_values = numpy.linspace(0.0, math.pi / 2, theta_points, endpoint=False)
    return p_values, theta_values


def run_dispersion_check(config) -> ScenarioResult:
    """Compare numerical eigenphases of the step operator with omega(p, theta).

    One row per coin angle with the Dirac parameters, the largest eigenphase
    error over all momenta and the effective Hamiltonian scale at p = 0.
    """
    grid = config.dispersion_grid
    p_values, theta_values = dispersion_grid(grid["p_points"], grid["theta_points"])
    rows = []
    for theta in theta_values:
        exact = dispersion_omega(p_values, theta)
        numerical = numpy.array([walk_eigenphases(p, theta)[0] for p in p_values])
        dirac = dirac_params(theta)
        scale_exact, scale_unit, scale_secant = effective_hamiltonian_scale(0.0, theta)
        rows.append(
            {
                "theta": float(theta),
                "c": dirac.c,
                "mc2": dirac.mass_energy,
                "m": dirac.mass,
                "max_error": float(numpy.max(numpy.abs(numerical - exact))),
                "scale_exact": scale_exact,
                "scale_unit": scale_unit,
                "scale_secant": scale_secant,
            }
        )
    table = pandas.DataFrame(rows)
    max_error = float(table["max_error"].max())
    report = {
        "p_points": len(p_values),
        "theta_points": len(theta_values),
        "max_error": max_error,
        "tolerance": DISPERSION_TOLERANCE,
        "passed": max_error < DISPERSION_TOLERANCE,
    }
    if not report["passed"]:
        logger.warning("Dispersion check failed: max error %.3e", max_error)
    return ScenarioResult(
        config.scenario, tables={"dispersion.csv": table}, report=report
    )
