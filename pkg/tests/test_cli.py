# -*- coding: utf-8 -*-
import json

import pandas as pd
import pytest

from conftest import fixture_path
from wholegrid import cli


def run(*argv):
    return cli.main([str(arg) for arg in argv])


def last_error(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_fixtures_are_listed(capsys):
    assert run("fixtures") == 0
    assert capsys.readouterr().out.split() == list(cli.FIXTURES)


def test_fixture_copy_loads_back(tmp_path):
    target = tmp_path / "grid.json"
    assert run("fixtures", "composite_3bus", "-o", target) == 0
    assert json.loads(target.read_text()) == json.loads(fixture_path("composite_3bus").read_text())


def test_unknown_fixture_is_a_usage_error(capsys):
    assert run("fixtures", "ieee39") == 1
    assert "unknown fixture" in capsys.readouterr().err


def test_poles_table(tmp_path):
    out = tmp_path / "poles.csv"
    assert run("poles", "-c", fixture_path("composite_3bus"), "-o", out) == 0
    table = pd.read_csv(out)
    assert list(table.columns) == ["re", "im", "f_hz", "damping", "group"]
    assert set(table["group"]) <= {"swing", "pll", "flux", "current"}
    assert len(table) > 10


def test_poles_are_deterministic(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    run("poles", "-c", fixture_path("sg_infinite_bus"), "-o", first)
    run("poles", "-c", fixture_path("sg_infinite_bus"), "-o", second, "--formulation", "primal")
    assert first.read_bytes() == second.read_bytes()


def test_missing_argument_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        run("poles", "-c", fixture_path("sg_infinite_bus"))
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        run("spectrum", "-c", "grid.json", "-o", "out.csv", "--bus", "two", "--fmin", 1, "--fmax", 2, "--points", 3)
    assert info.value.code == 1


def test_model_errors_exit_with_json(tmp_path, capsys):
    data = json.loads(fixture_path("sg_infinite_bus").read_text())
    data["machines"][1]["bus"] = 99
    config = tmp_path / "bad.json"
    config.write_text(json.dumps(data))
    assert run("poles", "-c", config, "-o", tmp_path / "poles.csv") == 2
    error = last_error(capsys)
    assert error["code"] == "schema_error"
    assert error["path"] == "/machines/1/bus"
    assert not (tmp_path / "poles.csv").exists()


def test_missing_config_file(tmp_path, capsys):
    assert run("powerflow", "-c", tmp_path / "nothing.json", "-o", tmp_path / "pf.json") == 2
    assert last_error(capsys)["code"] == "schema_error"


def test_powerflow_report(tmp_path):
    out = tmp_path / "pf.json"
    assert run("powerflow", "-c", fixture_path("composite_3bus"), "-o", out) == 0
    result = json.loads(out.read_text())
    assert [bus["bus"] for bus in result["buses"]] == [1, 2, 3]
    assert result["buses"][0]["V_abs"] == pytest.approx(1.0)
    assert result["buses"][1]["P"] == pytest.approx(0.3, abs=1e-9)
    assert result["iterations"] >= 1


def test_spectrum_rows(tmp_path):
    out = tmp_path / "spectrum.csv"
    args = ("spectrum", "-c", fixture_path("gfl_infinite_bus"), "-o", out,
            "--bus", 2, "--fmin", -100, "--fmax", 100, "--points", 9)
    assert run(*args) == 0
    table = pd.read_csv(out)
    assert len(table) == 9
    assert list(table.columns)[:3] == ["f_hz", "y_pp_re", "y_pp_im"]
    assert table["f_hz"].iloc[0] == pytest.approx(-100.0)


def test_spectrum_needs_points(tmp_path, capsys):
    args = ("spectrum", "-c", fixture_path("gfl_infinite_bus"), "-o", tmp_path / "s.csv",
            "--bus", 2, "--fmin", 1, "--fmax", 2, "--points", 0)
    assert run(*args) == 1
    assert "--points" in capsys.readouterr().err


def test_participation_table(tmp_path):
    out = tmp_path / "participation.csv"
    assert run("participation", "-c", fixture_path("composite_3bus"), "-o", out, "--freq-hz", 1.5) == 0
    table = pd.read_csv(out)
    assert list(table["bus"]) == [1, 2, 3]
    assert table["participation"].max() == pytest.approx(1.0)


def test_sweep_table(tmp_path):
    out = tmp_path / "sweep.csv"
    args = ("sweep", "-c", fixture_path("sg_infinite_bus"), "-o", out,
            "--param", "machines[1].J", "--from", -1e-5, "--to", 8e-5, "--points", 3)
    assert run(*args) == 0
    table = pd.read_csv(out, keep_default_na=False)
    assert list(table.columns) == ["value", "index", "re", "im", "group", "error"]
    failed = table[table["value"] < 0]
    assert list(failed["error"]) == ["schema_error"]
    assert (table[table["value"] > 0]["error"] == "").all()
    assert table["value"].nunique() == 3


def test_simulate_writes_probes(tmp_path):
    scenario = tmp_path / "scenario.json"
    scenario.write_text(json.dumps({"t_end": 0.002, "dt": 1e-4, "probes": ["v:2", "omega:2"]}))
    out = tmp_path / "sim.csv"
    assert run("simulate", "-c", fixture_path("sg_infinite_bus"), "-s", scenario, "-o", out) == 0
    table = pd.read_csv(out)
    assert list(table.columns) == ["t", "v:2_re", "v:2_im", "omega:2"]
    assert len(table) == 21


def test_simulate_with_a_broken_scenario(tmp_path, capsys):
    scenario = tmp_path / "scenario.json"
    scenario.write_text("{")
    assert run("simulate", "-c", fixture_path("sg_infinite_bus"), "-s", scenario, "-o", tmp_path / "x.csv") == 2
    assert last_error(capsys)["code"] == "schema_error"


def test_measure_rejects_bad_frequencies(tmp_path):
    args = ("measure", "-c", fixture_path("gfl_infinite_bus"), "-o", tmp_path / "m.csv", "--bus", 2, "--freqs", "10,0")
    assert run(*args) == 1


@pytest.mark.slow
def test_measure_writes_admittances(tmp_path):
    out = tmp_path / "measured.csv"
    args = ("measure", "-c", fixture_path("gfl_infinite_bus"), "-o", out, "--bus", 2,
            "--freqs", "25,-25", "--settle-cycles", 10, "--compensate-delay")
    assert run(*args) == 0
    table = pd.read_csv(out)
    assert list(table["f_hz"]) == [25.0, -25.0]
    assert table.notna().all().all()


@pytest.mark.parametrize("command", [
    ("spectrum", "--fmin", 1, "--fmax", 2, "--points", 3),
    ("measure", "--freqs", "10"),
])
def test_missing_bus_exits_with_json(tmp_path, capsys, command):
    name, *options = command
    args = (name, "-c", fixture_path("composite_3bus"), "-o", tmp_path / "out.csv", "--bus", 9, *options)
    assert run(*args) == 2
    error = last_error(capsys)
    assert error["code"] == "schema_error"
    assert error["path"] == "/bus"
    assert not (tmp_path / "out.csv").exists()


def test_config_that_is_not_utf8(tmp_path, capsys):
    config = tmp_path / "grid.json"
    config.write_bytes(b"\xff\xfe{")
    assert run("poles", "-c", config, "-o", tmp_path / "poles.csv") == 2
    assert last_error(capsys)["code"] == "schema_error"


def test_config_that_is_a_directory(tmp_path, capsys):
    assert run("poles", "-c", tmp_path, "-o", tmp_path / "poles.csv") == 2
    assert last_error(capsys)["code"] == "schema_error"
