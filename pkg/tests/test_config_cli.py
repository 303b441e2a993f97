import json
import subprocess
import sys
from pathlib import Path

import pytest

from weakhyp.config import (config_echo, config_hash, load_config,
                            validate_config)
from weakhyp.errors import ConfigurationError


def _base_config():
    return {
        "problem": {"order": 2, "dimension": 1, "horizon": 1.0,
                    "gevrey_s": 2.0},
        "roots": {"preset": "constant", "values": [-1.0, 1.0]},
        "data": [{"preset": "bump", "center": 0.0, "radius": 1.0},
                 {"preset": "zero"}],
        "regularisation": {"scale": "linear",
                           "epsilon_sweep": [0.5, 0.25, 0.125]},
        "grid": {"points": 64, "time_steps": 256,
                 "output_times": [0.0, 1.0]},
        "run": {"seed": 3},
    }


def test_validate_accepts_base_config():
    cfg = validate_config(_base_config())
    assert cfg.order == 2
    assert cfg.epsilon_sweep == (0.5, 0.25, 0.125)


def test_empty_sweep_names_field():
    raw = _base_config()
    raw["regularisation"]["epsilon_sweep"] = []
    with pytest.raises(ConfigurationError) as info:
        validate_config(raw)
    assert "epsilon_sweep" in str(info.value)


def test_unknown_preset_names_field():
    raw = _base_config()
    raw["data"][0] = {"preset": "mystery"}
    with pytest.raises(ConfigurationError) as info:
        validate_config(raw)
    assert "data[0]" in (info.value.field or "")


def test_grid_points_power_of_two():
    raw = _base_config()
    raw["grid"]["points"] = 100
    with pytest.raises(ConfigurationError) as info:
        validate_config(raw)
    assert info.value.field == "grid.points"


def test_data_cardinality_checked():
    raw = _base_config()
    raw["data"] = [{"preset": "zero"}]
    with pytest.raises(ConfigurationError):
        validate_config(raw)


def test_config_round_trip_equality(tmp_path):
    raw = _base_config()
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(raw))
    cfg = load_config(path)
    redumped = json.loads(json.dumps(cfg.raw))
    assert redumped == cfg.raw
    assert config_hash(validate_config(redumped)) == config_hash(cfg)


def test_config_echo_is_flat_and_sorted():
    cfg = validate_config(_base_config())
    echo = config_echo(cfg)
    lines = [line for line in echo.splitlines() if line]
    assert lines == sorted(lines)
    assert "problem.order = 2" in lines
    assert "regularisation.epsilon_sweep[0] = 0.5" in lines


def _run_cli(args):
    return subprocess.run(
        [sys.executable, "-m", "weakhyp.cli", *args],
        capture_output=True, text=True)


@pytest.fixture(scope="module")
def cli_config(tmp_path_factory):
    raw = _base_config()
    raw["regularisation"]["epsilon_sweep"] = [2.0 ** -10, 2.0 ** -12,
                                              2.0 ** -14]
    raw["reference"] = {"kind": "dalembert", "speed": 1.0}
    raw["checks"] = {"dalembert_linf_error": 1e-3}
    path = tmp_path_factory.mktemp("cfg") / "wave.json"
    path.write_text(json.dumps(raw))
    return path


def test_cli_solve_passes_and_is_deterministic(cli_config, tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    first = _run_cli(["solve", "--config", str(cli_config),
                      "--out", str(out1), "--jobs", "1"])
    assert first.returncode == 0, first.stderr
    second = _run_cli(["solve", "--config", str(cli_config),
                       "--out", str(out2), "--jobs", "3"])
    assert second.returncode == 0, second.stderr
    for name in ("solution.csv", "spectrum.csv", "energy.csv",
                 "reference.csv", "config.echo"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_cli_validation_error_exit_two(tmp_path):
    bad = tmp_path / "bad.json"
    raw = _base_config()
    raw["regularisation"]["epsilon_sweep"] = []
    bad.write_text(json.dumps(raw))
    result = _run_cli(["solve", "--config", str(bad), "--out",
                       str(tmp_path / "out")])
    assert result.returncode == 2
    assert "epsilon_sweep" in result.stderr


def test_cli_failed_check_exit_one(cli_config, tmp_path):
    raw = json.loads(Path(cli_config).read_text())
    raw["checks"] = {"dalembert_linf_error": 1e-12}
    impossible = tmp_path / "impossible.json"
    impossible.write_text(json.dumps(raw))
    result = _run_cli(["solve", "--config", str(impossible),
                       "--out", str(tmp_path / "out")])
    assert result.returncode == 1
    assert "FAIL" in result.stdout


def test_cli_roundtrip_subcommand(tmp_path):
    raw = {
        "problem": {"order": 2},
        "regularisation": {"epsilon_sweep": [0.5]},
        "roundtrip": {"families": 6, "trials_per_family": 1,
                      "max_order": 3, "max_dimension": 2, "omega": 0.05},
        "checks": {"roundtrip_max_rel_error": 1e-8},
        "run": {"seed": 9},
    }
    path = tmp_path / "rt.json"
    path.write_text(json.dumps(raw))
    result = _run_cli(["roundtrip", "--config", str(path),
                       "--out", str(tmp_path / "out")])
    assert result.returncode == 0, result.stderr
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["checks_passed"] is True
    assert (tmp_path / "out" / "roundtrip.csv").exists()


def test_cli_sweep_subcommand(tmp_path):
    raw = _base_config()
    raw["regularisation"]["epsilon_sweep"] = [0.25, 0.125, 0.0625, 0.03125]
    raw["grid"] = {"points": 128, "time_steps": 512,
                   "output_times": [0.5, 1.0]}
    raw["roots"] = {"preset": "heaviside", "jump": 0.5, "low": 1.0,
                    "high": 4.0}
    raw["reference"] = {"kind": "fine_epsilon", "divisor": 8.0}
    raw["analysis"] = {"seminorm": "fourier_proxy", "nu": 1.0}
    raw["checks"] = {"moderateness_r_squared_deficit": 0.2,
                     "convergence_mean_ratio": 0.9}
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(raw))
    result = _run_cli(["sweep", "--config", str(path),
                       "--out", str(tmp_path / "out")])
    assert result.returncode == 0, result.stderr
    out = tmp_path / "out"
    for name in ("moderateness.csv", "convergence.csv", "reference.csv",
                 "summary.json", "config.echo"):
        assert (out / name).exists()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["reference"]["strictly_decreasing"] is True
    assert summary["convergence"]["non_cauchy"] is False


def test_cli_symmetriser_and_reduce_subcommands(tmp_path):
    raw = {
        "problem": {"order": 2},
        "regularisation": {"epsilon_sweep": [0.5]},
        "symmetriser": {"count": 50, "max_order": 2, "spacing": 0.1},
        "reduce": {"count": 6, "sizes": [2, 3], "frequencies": [1.0, 5.0]},
        "checks": {},
        "run": {"seed": 2},
    }
    path = tmp_path / "audits.json"
    path.write_text(json.dumps(raw))
    res_sym = _run_cli(["symmetriser", "--config", str(path),
                        "--out", str(tmp_path / "sym")])
    assert res_sym.returncode == 0, res_sym.stderr
    sym_summary = json.loads((tmp_path / "sym" / "summary.json").read_text())
    assert sym_summary["worst_intertwining"] <= 1e-10
    res_red = _run_cli(["reduce", "--config", str(path),
                        "--out", str(tmp_path / "red")])
    assert res_red.returncode == 0, res_red.stderr
    red_summary = json.loads((tmp_path / "red" / "summary.json").read_text())
    assert red_summary["worst_cofactor_residual"] <= 1e-9
    assert red_summary["worst_block_eigen_error"] <= 1e-9
