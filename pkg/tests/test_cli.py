import json

import pytest

from nqwalk import run_experiment
from nqwalk.exceptions import NumericFailure
from nqwalk.run_experiment import (
    EXIT_BOUNDARY,
    EXIT_CONFIG,
    EXIT_NUMERIC,
    EXIT_OK,
    build_parser,
    main,
)


def write_config(tmp_path, config):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return str(path)


def test_help_lists_outputs(capsys):
    with pytest.raises(SystemExit) as e:
        build_parser().parse_args(["--help"])
    assert e.value.code == 0
    out = capsys.readouterr().out
    assert "sweep.csv" in out
    assert "dispersion-check" in out
    assert "exit codes" in out


def test_unknown_scenario(capsys):
    with pytest.raises(SystemExit) as e:
        main(["teleport"])
    assert e.value.code == 2


def test_dispersion_check(tmp_path):
    out = tmp_path / "dispersion"
    config = write_config(tmp_path, {"dispersion_grid": {"p_points": 20, "theta_points": 10}})
    assert main(["dispersion-check", "--config", config, "--out", str(out)]) == EXIT_OK
    assert (out / "dispersion.csv").read_text().startswith(
        "theta,c,mc2,m,max_error,scale_exact,scale_unit,scale_secant\n"
    )
    meta = json.loads((out / "meta.json").read_text())
    assert meta["status"] == "ok"
    assert meta["report"]["passed"] is True
    assert meta["config"]["output"] == str(out)


def test_stationary_with_snapshots(tmp_path):
    out = tmp_path / "stationary"
    config = write_config(tmp_path, {"steps": 4})
    code = main(
        ["stationary", "--config", config, "--out", str(out), "--snapshots", "2", "--seedless", "--netcdf"]
    )
    assert code == EXIT_OK
    assert sorted(p.name for p in out.iterdir()) == [
        "density_t0.csv",
        "density_t2.csv",
        "density_t4.csv",
        "meta.json",
        "record.nc",
        "stats.csv",
    ]
    meta = json.loads((out / "meta.json").read_text())
    assert meta["config"]["walk"]["scalar_bilinear"] == "dirac"


def test_unknown_config_key(tmp_path):
    config = write_config(tmp_path, {"steps": 10, "seed": 3})
    assert main(["diffusion", "--config", config, "--out", str(tmp_path / "out")]) == EXIT_CONFIG
    assert not (tmp_path / "out").exists()


def test_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{steps: 10")
    assert main(["diffusion", "--config", str(path)]) == EXIT_CONFIG


def test_zero_charge_superposition(tmp_path):
    config = write_config(tmp_path, {"steps": 5, "solitons": [{"coefficient": 0.0}]})
    assert main(["stationary", "--config", config, "--out", str(tmp_path / "out")]) == EXIT_CONFIG


def test_boundary_violation(tmp_path):
    out = tmp_path / "out"
    config = write_config(tmp_path, {"steps": 20, "lattice": {"n_sites": 21}})
    assert main(["diffusion", "--config", config, "--out", str(out)]) == EXIT_BOUNDARY
    meta = json.loads((out / "meta.json").read_text())
    assert meta["status"] == "failed"
    assert meta["guard"]["ok"] is False
    assert meta["guard"]["t"] == 10
    assert not (out / "stats.csv").exists()


def test_numeric_failure(tmp_path, monkeypatch):
    def fail(config):
        raise NumericFailure("Non-finite amplitudes at step 3.")

    monkeypatch.setattr(run_experiment.scenarios, "run", fail)
    out = tmp_path / "out"
    assert main(["diffusion", "--out", str(out)]) == EXIT_NUMERIC
    assert json.loads((out / "meta.json").read_text())["status"] == "failed"


def test_workers_override(tmp_path, monkeypatch):
    seen = {}

    def record(config):
        seen["workers"] = config.workers
        seen["stride"] = config.snapshot_stride
        raise NumericFailure("stop")

    monkeypatch.setattr(run_experiment.scenarios, "run", record)
    main(["g-sweep", "--workers", "3", "--snapshots", "7", "--out", str(tmp_path / "out")])
    assert seen == {"workers": 3, "stride": 7}
