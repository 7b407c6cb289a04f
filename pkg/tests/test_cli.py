import csv
import json
from unittest import mock

import pytest

from dronecell import analytic, cli
from dronecell.engine import ConfigError, ScenarioConfig
from dronecell.mac import Mac
from dronecell.repositioning import Policy

FAST = ["--grid", "3", "--duration", "5", "--runs", "2"]


def test_empty_config_is_default():
    assert cli.parse_config("") == ScenarioConfig()
    assert cli.parse_config("# only a comment\n\n") == ScenarioConfig()


def test_single_override():
    cfg = cli.parse_config("drone_speed_mps=15  # faster\n")
    assert cfg == ScenarioConfig(drone_speed=15.0)


def test_enum_and_units():
    cfg = cli.parse_config("mac = TDMA\npolicy=max_slr\nslot_s=0.05\nedge_length_m=100\n")
    assert (cfg.mac, cfg.policy, cfg.slot, cfg.edge_length) == (Mac.TDMA, Policy.MAX_SLR, 0.05, 100.0)


def test_bad_mac_names_key_and_choices():
    with pytest.raises(ConfigError) as err:
        cli.parse_config("runs=3\nmac=cdma\n")
    assert err.value.field == "mac" and err.value.line == 2
    assert "fdma" in str(err.value) and "tdma" in str(err.value)


@pytest.mark.parametrize("text, key, line", [
    ("speed=3", "speed", 1),
    ("runs=2\nruns=3", "runs", 2),
    ("\nruns=two", "runs", 2),
    ("duration_s=-1", "duration_s", 1),
    ("just words", "just words", 1),
])
def test_config_errors(text, key, line):
    with pytest.raises(ConfigError) as err:
        cli.parse_config(text)
    assert err.value.field == key and err.value.line == line


def test_format_round_trip():
    cfg = ScenarioConfig(drone_speed=12.5, mac=Mac.TDMA, runs=3, mbyte_convention="decimal")
    text = cli.format_config(cfg)
    assert len(text.splitlines()) == len(cli.CONFIG_KEYS)
    assert cli.parse_config(text) == cfg


def _read_csv(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


def test_three_policy_summary(tmp_path, capsys):
    code = cli.main(["--policy", "hover,max_snr,max_slr", "--mac", "fdma", "--seed", "42",
                     "--out", str(tmp_path), *FAST])
    assert code == 0
    summary = json.loads((tmp_path / "summary.txt").read_text())
    assert summary["schema"] == cli.SUMMARY_SCHEMA
    assert [(s["policy"], s["mac"]) for s in summary["scenarios"]] == [
        ("hover", "fdma"), ("max_snr", "fdma"), ("max_slr", "fdma")]
    assert summary["config"]["base_seed"] == 42 and summary["config"]["side_count"] == 3
    assert set(summary["config"]) == {f for f in cli.CONFIG_KEYS.values()}
    assert summary["scenarios"][0]["se_ratio_vs_hover"] == pytest.approx(1.0)
    assert summary["scenarios"][0]["mean_turning_angle_deg"] is None
    assert [r["seed"] for r in summary["scenarios"][1]["per_run"]] == [42, 43]
    slots = _read_csv(tmp_path / "slots.csv")
    assert slots[0][0] == cli.SLOTS_SCHEMA
    assert len(slots) == 1 + 3 * 2 * 50 * 9
    reqs = _read_csv(tmp_path / "requests.csv")
    assert reqs[0][0] == cli.REQUESTS_SCHEMA
    assert all(row[0] == cli.REQUESTS_SCHEMA for row in reqs[1:])
    assert not (tmp_path / "analytic.csv").exists()
    assert not list(tmp_path.glob(".partial-*"))
    assert "max_slr fdma" in capsys.readouterr().out


def test_identical_invocations_give_identical_files(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert cli.main(["--policy", "max_snr", "--mac", "tdma", "--out", str(out), *FAST]) == 0
    for name in ("summary.txt", "slots.csv", "requests.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_parallel_runs_match_serial(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["--policy", "max_slr", "--out", str(a), *FAST]) == 0
    assert cli.main(["--policy", "max_slr", "--out", str(b), "--jobs", "2", *FAST]) == 0
    for name in ("summary.txt", "slots.csv", "requests.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_analytic_sweep_only(tmp_path):
    code = cli.main(["--analytic-sweep", "tau=0.5:6:0.5 v=10,15,20", "--out", str(tmp_path)])
    assert code == 0
    rows = _read_csv(tmp_path / "analytic.csv")
    assert rows[0][:3] == [cli.ANALYTIC_SCHEMA, "tau", "v"]
    assert len(rows) == 1 + 12 * 3
    assert [float(x) for x in rows[1][1:3]] == [0.5, 10.0]
    assert float(rows[1][5]) == pytest.approx(12.7730316771273735, rel=1e-8)
    assert not (tmp_path / "slots.csv").exists()
    summary = json.loads((tmp_path / "summary.txt").read_text())
    assert summary["scenarios"] == [] and summary["analytic"]["speeds"] == [10.0, 15.0, 20.0]


def test_config_file_and_figures(tmp_path):
    conf = tmp_path / "scenario.conf"
    conf.write_text("side_count=3\nduration_s=3\nruns=1\nmac=tdma\n")
    out = tmp_path / "out"
    code = cli.main(["--config", str(conf), "--policy", "hover,max_snr", "--analytic-sweep", "tau=1,2 v=10",
                     "--figures", "--out", str(out)])
    assert code == 0
    for name in ("scenarios.png", "analytic.png", "analytic.csv", "slots.csv"):
        assert (out / name).stat().st_size > 0
    summary = json.loads((out / "summary.txt").read_text())
    assert summary["macs"] == ["tdma"]


@pytest.mark.parametrize("argv", [
    ["--policy", "random"],
    ["--mac", "cdma"],
    ["--grid", "4"],
    ["--jobs", "0"],
    ["--analytic-sweep", "h=3"],
])
def test_errors_exit_nonzero(tmp_path, capsys, argv):
    assert cli.main([*argv, "--out", str(tmp_path), "--duration", "1"]) == 2
    assert "dronecell: error" in capsys.readouterr().err
    assert not (tmp_path / "summary.txt").exists()


def test_bad_config_file_reports_line(tmp_path, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text("runs=1\nmac=cdma\n")
    assert cli.main(["--config", str(conf), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "mac" in err and "line 2" in err


def test_failure_leaves_no_partial_output(tmp_path):
    def broken(*args, **kwargs):
        raise analytic.QuadratureError("simulated failure")

    with mock.patch.object(analytic, "sweep", broken):
        code = cli.main(["--policy", "hover", "--analytic-sweep", "tau=1", "--out", str(tmp_path), *FAST])
    assert code == 2
    assert list(tmp_path.iterdir()) == []
