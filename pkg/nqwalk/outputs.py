"""Writers for scenario results: CSV tables, density snapshots, meta.json and netCDF."""

import json
import logging
from pathlib import Path
from typing import Dict, Optional

import dask
import numpy
import pandas
import scipy
import xarray

from nqwalk.observables import RunRecord

logger = logging.getLogger(__name__)


def library_versions() -> Dict[str, str]:
    from nqwalk import __version__

    return {
        "nqwalk": __version__,
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "pandas": pandas.__version__,
        "xarray": xarray.__version__,
        "dask": dask.__version__,
    }


def write_table(table: pandas.DataFrame, path) -> Path:
    """Write ``table`` as CSV with a header row and shortest round-trip floats."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, index=False, lineterminator="\n")
    logger.info("Wrote %s", path)
    return path


def write_record(record: RunRecord, directory, netcdf: bool = False) -> None:
    """Write stats.csv, one density_t<k>.csv per snapshot and, optionally, record.nc."""
    directory = Path(directory)
    write_table(record.stats_frame(), directory / "stats.csv")
    positions = record.dataset["x"].values
    for t, density in record.snapshots.items():
        write_table(
            pandas.DataFrame({"x": positions, "density": density}),
            directory / f"density_t{t}.csv",
        )
    if netcdf:
        path = directory / "record.nc"
        record.to_netcdf(path)
        logger.info("Wrote %s", path)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, numpy.generic):
        return value.item()
    if isinstance(value, numpy.ndarray):
        return value.tolist()
    return value


def write_meta(
    directory, config: Dict, status: str = "ok", report: Optional[Dict] = None,
    guard: Optional[Dict] = None,
) -> Path:
    """Write meta.json: config echo, versions, run status, guard state and report values."""
    meta = {
        "config": config,
        "versions": library_versions(),
        "status": status,
        "guard": guard or {"ok": status == "ok"},
        "guard_policy": (
            "Edge charge above boundary_guard_eps of the total charge aborts the run; "
            "departing amplitude below that bound is discarded."
        ),
        "report": report or {},
    }
    path = Path(directory) / "meta.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(meta), indent=2, sort_keys=True) + "\n")
    logger.info("Wrote %s", path)
    return path


def write_result(result, config, directory, netcdf: bool = False) -> Path:
    """Write every record and table of a :class:`nqwalk.scenarios.ScenarioResult`."""
    directory = Path(directory)
    for name, record in result.records.items():
        write_record(record, directory / name, netcdf=netcdf)
    for name, table in result.tables.items():
        write_table(table, directory / name)
    write_meta(directory, config.export_config(), report=result.report)
    return directory
