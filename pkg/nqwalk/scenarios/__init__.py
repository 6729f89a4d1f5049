import importlib
import logging
from dataclasses import dataclass, field
from typing import Dict

import pandas

from nqwalk.observables import RunRecord

logger = logging.getLogger(__name__)

# scenario name -> (module under nqwalk.scenarios, function name)
SCENARIO_FUNCTIONS = {
    "stationary": ("solitons", "run_stationary"),
    "collision": ("solitons", "run_collision"),
    "diffusion": ("diffusion", "run_diffusion"),
    "bloch-sweep": ("sweeps", "run_bloch_sweep"),
    "g-sweep": ("sweeps", "run_g_sweep"),
    "theta-sweep": ("sweeps", "run_theta_sweep"),
    "g-theta-surface": ("sweeps", "run_g_theta_surface"),
    "dispersion-check": ("dispersion", "run_dispersion_check"),
}


@dataclass
class ScenarioResult:
    """Everything a scenario produced.

    ``records`` maps a sub-directory name ("" for the output root) to a
    RunRecord; ``tables`` maps a CSV file name to its rows; ``report`` holds
    scalar results echoed into meta.json.
    """

    scenario: str
    records: Dict[str, RunRecord] = field(default_factory=dict)
    tables: Dict[str, pandas.DataFrame] = field(default_factory=dict)
    report: Dict = field(default_factory=dict)


def _call_scenario_function(scenario, **kwargs):
    if scenario not in SCENARIO_FUNCTIONS:
        raise ValueError(f"{scenario} is not a valid scenario.")
    module_name, function_name = SCENARIO_FUNCTIONS[scenario]
    module = importlib.import_module(f"nqwalk.scenarios.{module_name}")
    return getattr(module, function_name)(**kwargs)


def run(config) -> ScenarioResult:
    """Validate ``config`` and run its scenario."""
    config.validate()
    logger.info(
        "Running %s on %d sites for %d steps",
        config.scenario,
        config.lattice.n_sites,
        config.steps,
    )
    result = _call_scenario_function(config.scenario, config=config)
    logger.info("Finished %s", config.scenario)
    return result


__all__ = [
    "run",
    "ScenarioResult",
]
