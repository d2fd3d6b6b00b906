"""Sweep harness, artifact format, and CLI tests.

Small grids keep these fast; the full-size acceptance run lives in
test_acceptance.py. CSV conventions under test: fixed header order, lowercase
booleans, repr() floats, empty string for missing values, LF line endings.
"""

import csv
import json

import pytest

from skyshield.cli import SEED_ENV_VAR, main
from skyshield.experiments import (CELL_COLUMNS, DEFAULT_SEED_BASE,
                                   SESSION_COLUMNS, SweepSpec, grover_table_text,
                                   run_scenario, run_sweep, scenario_report,
                                   session_config_from_dict,
                                   sweep_spec_from_dict, weather_from_name,
                                   write_sweep_outputs)
from skyshield.fso_channel import WeatherCondition, clear_weather, fog_weather
from skyshield.session import SessionConfig, derive_session_seed


def small_spec(**kw):
    defaults = dict(distances_km=(2.0, 1.0),
                    weathers=(fog_weather(), clear_weather()),
                    sessions_per_cell=3,
                    seed_base=911,
                    base_config=SessionConfig(n_photons=256))
    defaults.update(kw)
    return SweepSpec(**defaults)


# ---------------------------------------------------------------------- sweep

def test_sweep_size_and_order():
    result = run_sweep(small_spec())
    assert len(result.rows) == 2 * 2 * 3
    assert len(result.cells) == 4
    keys = [(r["weather"], r["distance_km"], r["session_id"])
            for r in result.rows]
    assert keys == sorted(keys)
    assert [c.weather for c in result.cells] == ["clear", "clear", "fog", "fog"]
    assert [c.distance_km for c in result.cells] == [1.0, 2.0, 1.0, 2.0]


def test_sweep_seeds_follow_global_index():
    result = run_sweep(small_spec())
    # cell order is sorted (weather, distance); ids count within each cell
    for row in result.rows:
        cell = (["clear", "fog"].index(row["weather"]) * 2
                + [1.0, 2.0].index(row["distance_km"]))
        global_index = cell * 3 + row["session_id"]
        assert row["seed"] == derive_session_seed(911, global_index)


def test_sweep_deterministic():
    a = run_sweep(small_spec())
    b = run_sweep(small_spec())
    assert a.rows == b.rows
    assert a.cells == b.cells
    assert a.summary == b.summary


def test_cell_aggregates_recomputed():
    result = run_sweep(small_spec())
    for cell in result.cells:
        rows = [r for r in result.rows
                if r["weather"] == cell.weather
                and r["distance_km"] == cell.distance_km]
        assert len(rows) == 3
        assert cell.mean_sifted_len == pytest.approx(
            sum(r["sifted_len"] for r in rows) / 3)
        assert cell.abort_rate == sum(r["qkd_aborted"] for r in rows) / 3
        assert cell.auth_success_rate == sum(bool(r["accepted"])
                                             for r in rows) / 3
        qbers = [r["qber"] for r in rows if r["qber"] is not None]
        if qbers:
            assert cell.mean_qber == pytest.approx(sum(qbers) / len(qbers))
        else:
            assert cell.mean_qber is None


def test_summary_totals_match_rows():
    result = run_sweep(small_spec())
    totals = result.summary["totals"]
    assert totals["sessions"] == len(result.rows)
    assert totals["aborted"] == sum(r["qkd_aborted"] for r in result.rows)
    assert totals["accepted"] == sum(bool(r["accepted"]) for r in result.rows)
    sweep = result.summary["sweep"]
    assert sweep["seed_base"] == 911
    assert sweep["distances_km"] == [1.0, 2.0]
    assert sweep["weathers"] == ["clear", "fog"]


def test_sweep_rejects_degenerate_grid():
    with pytest.raises(ValueError):
        SweepSpec(distances_km=())
    with pytest.raises(ValueError):
        SweepSpec(sessions_per_cell=0)


# ------------------------------------------------------------------ artifacts

def test_artifact_files_and_headers(tmp_path):
    result = run_sweep(small_spec())
    paths = write_sweep_outputs(result, tmp_path)
    sessions_text = paths["sessions.csv"].read_text()
    cells_text = paths["cells.csv"].read_text()
    assert sessions_text.splitlines()[0] == ",".join(SESSION_COLUMNS)
    assert cells_text.splitlines()[0] == ",".join(CELL_COLUMNS)
    assert len(sessions_text.splitlines()) == 1 + len(result.rows)
    assert len(cells_text.splitlines()) == 1 + len(result.cells)
    assert "\r" not in sessions_text and sessions_text.endswith("\n")
    summary = json.loads(paths["summary.json"].read_text())
    assert summary == result.summary


def test_csv_value_conventions(tmp_path):
    # all-abort spec: 40 lossless photons sift to fewer than 32 bits
    spec = small_spec(base_config=SessionConfig(n_photons=40,
                                                lossless_channel=True))
    paths = write_sweep_outputs(run_sweep(spec), tmp_path)
    with open(paths["sessions.csv"], newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        assert row["qkd_aborted"] == "true"
        assert row["qber"] == ""                  # no estimate before abort
        assert row["sig_ok"] == "" and row["accepted"] == ""
        assert row["within_window"] == "false"    # 2 ms, below window
        assert row["distance_km"] in ("1.0", "2.0")
    with open(paths["cells.csv"], newline="") as fh:
        cells = list(csv.DictReader(fh))
    for cell in cells:
        assert cell["mean_qber"] == "" and cell["mean_grover_p1"] == ""
        assert cell["abort_rate"] == "1.0"


def test_csv_floats_roundtrip(tmp_path):
    result = run_sweep(small_spec())
    paths = write_sweep_outputs(result, tmp_path)
    with open(paths["sessions.csv"], newline="") as fh:
        rows = list(csv.DictReader(fh))
    for parsed, raw in zip(rows, result.rows):
        if raw["qber"] is not None:
            assert float(parsed["qber"]) == raw["qber"]  # repr() is lossless
        assert int(parsed["seed"]) == raw["seed"]
        assert parsed["verdict"] == raw["verdict"]


def test_artifacts_byte_identical_across_runs(tmp_path):
    paths_a = write_sweep_outputs(run_sweep(small_spec()), tmp_path / "a")
    paths_b = write_sweep_outputs(run_sweep(small_spec()), tmp_path / "b")
    for name in paths_a:
        assert paths_a[name].read_bytes() == paths_b[name].read_bytes()


# ------------------------------------------------------------------ scenarios

def test_run_scenario_writes_json(tmp_path):
    outcome, path = run_scenario("b", seed=7, out_dir=tmp_path)
    assert path == tmp_path / "scenario_B.json"
    doc = json.loads(path.read_text())
    assert doc["scenario"] == "B"
    assert doc["verdict"] == outcome.verdict == "abort_quantum"
    assert doc["seed"] == 7


def test_run_scenario_seed_resolution():
    assert run_scenario("A", seed=0)[0].seed == 0       # zero is a real seed
    base = SessionConfig(seed=42, n_photons=256)
    out, _ = run_scenario("A", base_config=base)
    assert out.seed == 42 and out.n_photons == 256
    out2, _ = run_scenario("A", seed=5, base_config=base)
    assert out2.seed == 5                               # flag beats config


def test_scenario_report_text():
    outcome, _ = run_scenario("B", seed=7)
    text = scenario_report("B", outcome)
    assert "scenario B" in text
    assert "eve=on" in text and "tamper=off" in text
    assert "ABORT (qber above threshold)" in text
    assert "verdict            abort_quantum" in text
    secure, _ = run_scenario("A", seed=7)
    report = scenario_report("A", secure)
    assert "signature          ok" in report
    assert "trust              trusted" in report


def test_grover_table_text_format():
    text = grover_table_text(100, 15)
    lines = text.splitlines()
    assert lines[0].startswith("N=100  M=15")
    assert lines[1] == " k   P(success)"
    assert lines[2] == " 0   0.150000"
    assert lines[3] == " 1   0.864000"
    assert lines[8] == " 6   0.804734"
    assert lines[-1] == ("k_star=1  p_max=0.864000"
                         "  expected_queries=2.027889")
    empty = grover_table_text(50, 0)
    assert empty.splitlines()[-1] == ("k_star=-  p_max=0.000000"
                                      "  expected_queries=-")


# ------------------------------------------------------------- config parsing

def test_session_config_from_dict():
    cfg = session_config_from_dict({
        "channel": {"distance_m": 2500.0},
        "weather": "fog",
        "payload": "hello",
        "window_ms": [100, 400],
        "n_photons": 512,
        "seed": 3,
    })
    assert cfg.channel.distance_m == 2500.0
    assert cfg.weather == fog_weather()
    assert cfg.payload == b"hello"
    assert cfg.window_ms == (100, 400)
    assert cfg.n_photons == 512 and cfg.seed == 3


def test_weather_config_forms():
    assert weather_from_name("rain").kind == "rain"
    with pytest.raises(ValueError):
        weather_from_name("hurricane")
    custom = session_config_from_dict(
        {"weather": {"kind": "fog", "visibility_km": 1.5}}).weather
    assert custom == WeatherCondition("fog", visibility_km=1.5)


def test_config_rejects_unknown_fields():
    with pytest.raises(ValueError, match="unknown session fields"):
        session_config_from_dict({"photons": 100})
    with pytest.raises(ValueError, match="unknown channel fields"):
        session_config_from_dict({"channel": {"range_m": 100}})


def test_sweep_spec_from_dict():
    spec = sweep_spec_from_dict({
        "distances_km": [3, 1],
        "weathers": ["clear", {"kind": "fog", "visibility_km": 2.0}],
        "sessions_per_cell": 5,
        "seed_base": 77,
        "n_photons": 128,
    })
    assert spec.distances_km == (3.0, 1.0)
    assert spec.weathers[1].visibility_km == 2.0
    assert spec.sessions_per_cell == 5 and spec.seed_base == 77
    assert spec.base_config.n_photons == 128
    assert sweep_spec_from_dict({}).seed_base == DEFAULT_SEED_BASE


# ------------------------------------------------------------------------ cli

def test_cli_grover_table(capsys):
    assert main(["grover-table", "100", "15"]) == 0
    out = capsys.readouterr().out
    assert " 1   0.864000" in out


def test_cli_run_scenario(capsys, tmp_path):
    code = main(["run-scenario", "a", "--seed", "7",
                 "--out-dir", str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "verdict            secure" in out
    assert f"wrote {tmp_path}/scenario_A.json" in out
    assert (tmp_path / "scenario_A.json").exists()


def test_cli_run_sweep(capsys, tmp_path):
    code = main(["run-sweep", "--seed", "123", "--out-dir", str(tmp_path),
                 "--distances", "1", "--weathers", "clear",
                 "--sessions-per-cell", "2"])
    assert code == 0
    out = capsys.readouterr().out
    assert "sweep: 2 sessions" in out
    with open(tmp_path / "sessions.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    assert int(rows[0]["seed"]) == derive_session_seed(123, 0)
    assert (tmp_path / "cells.csv").exists()
    assert (tmp_path / "summary.json").exists()


def test_cli_config_file(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_photons": 256, "seed": 11}))
    assert main(["run-scenario", "A", "--config", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "photons sent       256" in out
    assert "seed=11" in out
    # flag wins over config
    assert main(["run-scenario", "A", "--config", str(cfg),
                 "--seed", "12"]) == 0
    assert "seed=12" in capsys.readouterr().out


def test_cli_env_seed(capsys, monkeypatch):
    monkeypatch.setenv(SEED_ENV_VAR, "321")
    assert main(["run-scenario", "A"]) == 0
    assert "seed=321" in capsys.readouterr().out
    assert main(["run-scenario", "A", "--seed", "5"]) == 0
    assert "seed=5" in capsys.readouterr().out      # flag wins over env
    monkeypatch.setenv(SEED_ENV_VAR, "abc")
    assert main(["run-scenario", "A"]) == 2
    assert SEED_ENV_VAR in capsys.readouterr().err


def test_cli_error_exits(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run-scenario", "A", "--config", str(bad)]) == 2
    assert "error:" in capsys.readouterr().err
    listed = tmp_path / "list.json"
    listed.write_text("[1, 2]")
    assert main(["run-scenario", "A", "--config", str(listed)]) == 2
    capsys.readouterr()
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"bogus_field": 1}))
    assert main(["run-scenario", "A", "--config", str(unknown)]) == 2
    capsys.readouterr()
    assert main(["run-scenario", "A",
                 "--config", str(tmp_path / "missing.json")]) == 1
    assert "i/o error" in capsys.readouterr().err


def test_cli_usage_error_is_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run-scenario", "E"])
    assert exc.value.code == 2
    capsys.readouterr()
