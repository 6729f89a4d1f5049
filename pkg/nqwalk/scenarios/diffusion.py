import logging
from typing import Dict

from nqwalk.lattice import WalkerState
from nqwalk.nonlinear import WalkParams, evolve
from nqwalk.observables import RunRecorder
from nqwalk.scenarios import ScenarioResult

logger = logging.getLogger(__name__)

EVOLUTIONS = ["linear", "scalar", "vector"]


def evolution_params(walk: WalkParams) -> Dict[str, WalkParams]:
    """Linear, scalar and vector walks sharing the coin angle and coupling of ``walk``."""
    return {
        "linear": walk.linear(),
        "scalar": walk.with_kind("scalar"),
        "vector": walk.with_kind("vector"),
    }


def run_diffusion(config) -> ScenarioResult:
    """Spread a localized coin state under the linear, scalar and vector walks."""
    lattice = config.lattice
    start = WalkerState.localized(lattice, config.coin_spinor)
    records = {}
    report = {"coin_state": config.coin_state}
    for name, params in evolution_params(config.walk).items():
        recorder = RunRecorder(lattice, params, snapshot_stride=config.snapshot_stride)
        recorder(start)
        evolve(start, params, config.steps, observer=recorder)
        record = recorder.record({"lattice": lattice.to_dict(), "guard": "ok"})
        records[name] = record
        report[f"speed_{name}"] = record.final_speed()
        logger.info("%s walk: sigma(t)/t = %.6f", name, report[f"speed_{name}"])
    return ScenarioResult(config.scenario, records=records, report=report)
