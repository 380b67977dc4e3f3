import csv
import json

import pytest

from entsync import cli, config, geometry
from entsync.errors import ConfigError
from entsync.geometry import RotationMatrix, Vec3
from entsync.sim_harness import FixedPlacement, SweepSpec, UniformPlacement
from entsync.sync_estimator import ShiftWindow

import numpy as np


def test_empty_document_yields_nominal_defaults():
    scenario = config.scenario_from_document(config.validate_document({}))
    assert scenario.mu_t == 0.5
    assert scenario.eta_d == 0.6
    assert scenario.eta_r == 1.0
    assert scenario.sigma_t == pytest.approx(50e-12, rel=1e-12)
    assert scenario.sigma_d == pytest.approx(200e-12, rel=1e-12)
    assert scenario.aperture.radius == 0.02
    assert scenario.slot_duration == pytest.approx(10e-9, rel=1e-12)
    assert scenario.beam.wavelength == pytest.approx(1550e-9, rel=1e-12)
    assert scenario.sigma_p == 0.06
    assert scenario.mu_b == 5e-6
    assert scenario.layout.nx == 15 and scenario.layout.ny == 15
    assert scenario.window == ShiftWindow(-50, 50)
    assert scenario.seq_duration == pytest.approx(1e-3, rel=1e-12)
    assert scenario.placement == UniformPlacement()
    assert scenario.beam.width is None  # tracks the grid: 6/15 = 0.4
    assert scenario.beam.resolve(scenario.layout).width == pytest.approx(0.4)


def test_negative_rate_names_key_path():
    with pytest.raises(ConfigError, match="source.mu_t"):
        config.validate_document({"source": {"mu_t": -1}})


def test_unknown_keys_rejected_with_path():
    with pytest.raises(ConfigError, match="config: unknown key"):
        config.validate_document({"bogus": 1})
    with pytest.raises(ConfigError, match="detector: unknown key"):
        config.validate_document({"detector": {"eta_x": 0.5}})


def test_unit_suffix_violations_are_caught():
    with pytest.raises(ConfigError, match="seq_duration_us"):
        config.validate_document({"seq_duration_us": -5})
    with pytest.raises(ConfigError, match="detector.eta_d"):
        config.validate_document({"detector": {"eta_d": 1.5}})
    with pytest.raises(ConfigError, match="shift_window"):
        config.validate_document({"shift_window": {"l_min": 5, "l_max": -5}})


def test_scenario_round_trip(tmp_path):
    doc = config.default_document()
    doc["placement"] = {"policy": "fixed", "point_m": [0.5, -1.0, -2.0]}
    doc["source"]["mu_t"] = 0.8
    scenario = config.scenario_from_document(config.validate_document(doc))
    path = tmp_path / "scenario.json"
    config.save_config(scenario, path)
    loaded = config.load_config(path)
    assert loaded == scenario
    assert loaded.placement == FixedPlacement(Vec3(0.5, -1.0, -2.0))


def test_sweep_round_trip(tmp_path):
    doc = config.default_document()
    doc["seed"] = 9
    doc["sweep"] = {"axis": "grid_size", "values": [5, 10, 15], "trials_per_point": 50}
    spec = config.sweep_from_document(config.validate_document(doc))
    assert isinstance(spec, SweepSpec)
    assert spec.values == (5, 10, 15)
    assert spec.master_seed == 9
    path = tmp_path / "sweep.json"
    config.save_config(spec, path)
    assert config.load_config(path) == spec


def test_sweep_value_key_must_match_axis():
    with pytest.raises(ConfigError, match="values_us"):
        config.validate_document({"sweep": {"axis": "seq_duration", "values": [1, 2]}})
    with pytest.raises(ConfigError, match=r"sweep.values\[1\]"):
        config.validate_document({"sweep": {"axis": "grid_size", "values": [5, 7.5]}})
    with pytest.raises(ConfigError, match="sweep.axis"):
        config.validate_document({"sweep": {"axis": "voltage", "values": [1]}})


def test_grid_center_placement_parsing():
    doc = {"placement": {"policy": "grid_center", "cell": [3, 4]}}
    scenario = config.scenario_from_document(config.validate_document(doc))
    assert scenario.placement.i == 3 and scenario.placement.j == 4
    with pytest.raises(ConfigError, match="placement.cell"):
        config.validate_document({"placement": {"policy": "grid_center"}})
    with pytest.raises(ConfigError, match="placement.point_m"):
        config.validate_document({"placement": {"policy": "fixed"}})


def test_defaults_command_output_reloads(capsys):
    assert cli.main(["defaults"]) == 0
    out = capsys.readouterr().out
    doc = config.validate_document(json.loads(out))
    scenario = config.scenario_from_document(doc)
    assert scenario.mu_t == 0.5


def _small_config(tmp_path, name="cfg.json", **extra):
    doc = {
        "seq_duration_us": 10.0,
        "trials": 12,
        "seed": 5,
    }
    doc.update(extra)
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def test_run_command_writes_csv_and_sidecar(tmp_path):
    cfg = _small_config(tmp_path)
    out = tmp_path / "out.csv"
    assert cli.main(["run", "--config", str(cfg), "--out", str(out)]) == 0

    with open(out, newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == cli.CSV_HEADER
    assert len(rows) == 2
    assert rows[1][0] == "seq_duration"
    assert rows[1][1] == "10.0"
    assert rows[1][7] == "12"
    assert rows[1][8] == "5"
    float(rows[1][2])  # failure_prob parses

    sidecar = json.loads((tmp_path / "out.csv.json").read_text())
    assert sidecar["seed"] == 5
    assert sidecar["config"]["seq_duration_us"] == 10.0
    assert len(sidecar["results"]) == 1
    # the sidecar config reloads into the same scenario
    config.scenario_from_document(config.validate_document(sidecar["config"]))


def test_sweep_command_deterministic_bytes(tmp_path):
    cfg = _small_config(
        tmp_path,
        sweep={"axis": "seq_duration", "values_us": [5.0, 10.0], "trials_per_point": 10},
    )
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    before = cfg.read_bytes()
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(out1), "--seed", "42"]) == 0
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(out2), "--seed", "42"]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert (tmp_path / "a.csv.json").read_bytes() == (tmp_path / "b.csv.json").read_bytes()
    assert cfg.read_bytes() == before  # inputs never mutated

    out3 = tmp_path / "c.csv"
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(out3), "--seed", "43"]) == 0
    assert out1.read_bytes() != out3.read_bytes()


def test_sweep_command_requires_sweep_block(tmp_path):
    cfg = _small_config(tmp_path)
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "x.csv")]) == cli.EXIT_CONFIG


def test_run_rejects_malformed_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"source": {"mu_t": -2}}', encoding="utf-8")
    code = cli.main(["run", "--config", str(bad), "--out", str(tmp_path / "x.csv")])
    assert code == cli.EXIT_CONFIG
    assert "source.mu_t" in capsys.readouterr().err


def test_missing_config_file_is_io_error(tmp_path):
    code = cli.main(["run", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "x.csv")])
    assert code == cli.EXIT_IO


def test_unwritable_output_is_io_error(tmp_path):
    cfg = _small_config(tmp_path)
    out = tmp_path / "no" / "such" / "dir" / "x.csv"
    assert cli.main(["run", "--config", str(cfg), "--out", str(out)]) == cli.EXIT_IO


def test_bad_flags_exit_with_usage_error():
    with pytest.raises(SystemExit) as info:
        cli.main(["sweep", "--no-such-flag"])
    assert info.value.code == 2


def test_validate_command_passes(capsys):
    assert cli.main(["validate"]) == 0
    out = capsys.readouterr().out
    assert "PASS rotation_orthonormality" in out
    assert "FAIL" not in out


def test_validate_detects_injected_rotation_fault(monkeypatch, capsys):
    identity = RotationMatrix(np.eye(3))
    monkeypatch.setattr(geometry, "rotation_to_beam_frame", lambda direction: identity)
    code = cli.main(["validate"])
    captured = capsys.readouterr()
    assert code == cli.EXIT_VALIDATION
    assert "FAIL rotation_maps_beam_axis_to_z" in captured.out
    assert "rotation_maps_beam_axis_to_z" in captured.err
