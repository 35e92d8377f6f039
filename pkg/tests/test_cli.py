import csv
import io
import json
from pathlib import Path

import pytest

from qds import cli

GOLDEN = Path(__file__).with_name("golden")


@pytest.fixture
def reference_text(reference_cfg):
    return reference_cfg.read_text()


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run(args, capsys):
    code = cli.main(args)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def header(text):
    return text.splitlines()[0] + "\n"


def test_analyze_report(reference_cfg, capsys):
    code, out, _ = run(["analyze", "--config", str(reference_cfg)], capsys)
    assert code == cli.EXIT_OK
    document = json.loads(out)
    golden = json.loads((GOLDEN / "analyze_keys.json").read_text())
    assert sorted(document) == golden["top"]
    assert sorted(document["report"]) == golden["report"]
    assert document["report"]["feasible"] is True
    assert document["provenance"]["estimation_convention"] == "key_block"


def test_report_round_trip(reference_cfg, tmp_path, capsys):
    first = tmp_path / "first.json"
    second = tmp_path / "second.json"
    assert cli.main(["analyze", "--config", str(reference_cfg), "--out", str(first)]) == 0
    assert cli.main(["analyze", "--config", str(first), "--out", str(second)]) == 0
    assert json.loads(first.read_text())["report"] == json.loads(second.read_text())["report"]
    assert first.read_bytes() == second.read_bytes()


def test_infeasible_exit_code(tmp_path, reference_text, capsys):
    path = write_cfg(tmp_path, reference_text.replace("optical_error_x = 0.0138", "optical_error_x = 0.25"))
    code, out, _ = run(["analyze", "--config", path], capsys)
    assert code == cli.EXIT_INFEASIBLE
    assert json.loads(out)["report"]["feasible"] is False


def test_malformed_config_exit_code(tmp_path, capsys):
    path = write_cfg(tmp_path, "channel.distance_km 50\n")
    code, _, err = run(["analyze", "--config", path], capsys)
    assert code == cli.EXIT_CONFIG
    assert f"{path}:1:" in err


@pytest.mark.parametrize(
    "args",
    [
        ["sweep", "--param", "colour", "--from", "0", "--to", "1", "--step", "1"],
        ["sweep", "--param", "qx", "--from", "0", "--to", "1", "--step", "0"],
        ["simulate", "--scenario", "honest"],
        ["simulate", "--scenario", "bribery", "--seed", "1"],
        ["analyze", "--workers", "0"],
    ],
)
def test_usage_errors(args, reference_cfg, capsys):
    code, _, _ = run(args + ["--config", str(reference_cfg)], capsys)
    assert code == cli.EXIT_CONFIG


def test_insufficient_counts_exit_code(tmp_path, reference_text, capsys):
    text = reference_text.replace("sim.L = 2000", "sim.L = 200000") + "sim.n_pulses = 10000\n"
    code, _, err = run(["simulate", "--config", write_cfg(tmp_path, text), "--scenario", "honest", "--seed", "1", "--trials", "1"], capsys)
    assert code == cli.EXIT_NUMERICAL
    assert "numerical" in err


def test_empty_range_gives_header_only(reference_cfg, capsys):
    code, out, _ = run(["sweep", "--config", str(reference_cfg), "--param", "qx", "--from", "0.1", "--to", "0.05", "--step", "0.01"], capsys)
    assert code == 0
    assert out == (GOLDEN / "sweep_header.csv").read_text()


@pytest.mark.parametrize(
    "args, golden",
    [
        (["sweep", "--param", "f_ec", "--from", "1.1", "--to", "1.1", "--step", "1"], "sweep_header.csv"),
        (["compare-qkd", "--param", "f_ec", "--from", "1.1", "--to", "1.1", "--step", "1"], "compare_qkd_header.csv"),
        (["simulate", "--scenario", "forgery", "--seed", "3", "--trials", "10"], "simulate_header.csv"),
    ],
)
def test_csv_headers_are_stable(args, golden, reference_cfg, capsys):
    code, out, _ = run(args + ["--config", str(reference_cfg)], capsys)
    assert code == 0
    assert header(out) == (GOLDEN / golden).read_text()
    assert "\r" not in out


def test_p_e_non_increasing_with_distance(reference_cfg, capsys):
    code, out, _ = run(["sweep", "--config", str(reference_cfg), "--param", "distance_km", "--from", "0", "--to", "80", "--step", "5"], capsys)
    assert code == 0
    p_e = [float(r["p_e"]) for r in rows(out)]
    assert len(p_e) == 17
    assert all(a >= b for a, b in zip(p_e, p_e[1:]))


def test_sweep_rows_match_single_analysis(reference_cfg, capsys):
    _, out, _ = run(["sweep", "--config", str(reference_cfg), "--param", "n_pulses", "--from", "6.3e8", "--to", "6.3e8", "--step", "1"], capsys)
    _, report, _ = run(["analyze", "--config", str(reference_cfg)], capsys)
    assert float(rows(out)[0]["p_e"]) == json.loads(report)["report"]["p_e"]


def compare(reference_cfg, capsys, *extra, text=None, tmp_path=None):
    config = str(reference_cfg) if text is None else write_cfg(tmp_path, text)
    code, out, _ = run(["compare-qkd", "--config", config, *extra], capsys)
    assert code == 0
    return rows(out)


def test_qds_only_band(reference_cfg, capsys):
    table = compare(reference_cfg, capsys, "--param", "qx", "--from", "0.01", "--to", "0.045", "--step", "0.005")
    band = [r for r in table if r["classification"] == "qds_only"]
    assert band
    assert all(r["feasible_qds"] == "true" and float(r["qkd_key_length"]) <= 0 for r in band)


def test_containment_at_ideal_error_correction(reference_text, tmp_path, capsys):
    text = reference_text.replace("analysis.f_ec = 1.2", "analysis.f_ec = 1.0")
    table = compare(None, capsys, "--param", "qx", "--from", "0.0", "--to", "0.06", "--step", "0.01", text=text, tmp_path=tmp_path)
    for r in table:
        if float(r["qkd_key_length"]) > 0:
            assert r["feasible_qds"] == "true"


def test_extreme_noise_is_neither(reference_cfg, capsys):
    table = compare(reference_cfg, capsys, "--param", "qx", "--from", "0.3", "--to", "0.3", "--step", "1")
    assert table[0]["classification"] == "neither"


def test_honest_noiseless_simulation(tmp_path, capsys):
    text = "\n".join(
        [
            "analysis.n_pulses = 1e6",
            "channel.distance_km = 0",
            "channel.receiver_loss_db = 0",
            "channel.detector_efficiency = 1",
            "channel.dark_count_prob = 0",
            "channel.optical_error_x = 0",
            "channel.optical_error_z = 0",
            "sim.L = 200",
            "sim.s_a = 0.05",
            "sim.s_v = 0.1",
            "sim.n_pulses = 20000",
            "",
        ]
    )
    code, out, _ = run(["simulate", "--config", write_cfg(tmp_path, text), "--scenario", "honest", "--seed", "5", "--trials", "100"], capsys)
    assert code == 0
    accepted = next(r for r in rows(out) if r["event"] == "accepted")
    assert float(accepted["frequency"]) == 1.0


def test_simulation_reports_bound_beside_frequency(reference_cfg, capsys):
    _, out, _ = run(["simulate", "--config", str(reference_cfg), "--scenario", "repudiation", "--seed", "2", "--trials", "2000"], capsys)
    (row,) = rows(out)
    assert float(row["ci_low"]) <= float(row["frequency"]) <= float(row["ci_high"])
    assert float(row["frequency"]) <= float(row["analytic_bound"])
    assert row["seed"] == "2"


def test_simulation_is_byte_identical(reference_cfg, tmp_path):
    outputs = []
    for i in range(2):
        path = tmp_path / f"sim{i}.csv"
        assert cli.main(["simulate", "--config", str(reference_cfg), "--scenario", "forgery", "--seed", "11", "--trials", "1500", "--out", str(path)]) == 0
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]


def test_json_nonfinite_values_become_null():
    assert cli._json_safe({"a": [float("inf"), 1.0], "b": float("nan")}) == {"a": [None, 1.0], "b": None}


def test_grid():
    assert cli.grid(0, 1, 0.25) == [0, 0.25, 0.5, 0.75, 1.0]
    assert cli.grid(0, 0.3, 0.1)[-1] == pytest.approx(0.3)
    assert cli.grid(1, 0, 1) == []
