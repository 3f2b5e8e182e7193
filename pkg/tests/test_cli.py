"""Command line behavior: outputs, files, and exit codes."""

import json
import subprocess
import sys

from vanet_sybil.cli import main
from vanet_sybil.sweep import read_csv

FAST = ["--vehicles", "12", "--attackers", "2", "--sim-time", "180"]


def test_simulate_prints_summary(capsys, tmp_path):
    trace_path = tmp_path / "run.jsonl"
    code = main(["simulate", *FAST, "--seed", "4", "--trace", str(trace_path)])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["seed"] == 4
    assert summary["attackers_total"] == 2
    assert trace_path.exists()


def test_simulate_with_config_file(capsys, tmp_path):
    config_path = tmp_path / "scenario.json"
    config_path.write_text(json.dumps({"vehicles": 10, "attackers": 1, "sim_time_s": 120}))
    code = main(["simulate", "--config", str(config_path), "--seed", "1"])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["attackers_total"] == 1


def test_missing_config_exits_2(capsys, tmp_path):
    code = main(["simulate", "--config", str(tmp_path / "absent.json")])
    assert code == 2
    assert "configuration error" in capsys.readouterr().err


def test_invalid_config_value_exits_2(capsys, tmp_path):
    config_path = tmp_path / "bad.json"
    config_path.write_text(json.dumps({"vehicles": -2}))
    assert main(["simulate", "--config", str(config_path)]) == 2


def test_unworkable_pool_widths_exit_3(capsys, tmp_path):
    config_path = tmp_path / "wide.json"
    config_path.write_text(
        json.dumps({"vehicles": 10, "pool": {"coarse_bits": 8, "fine_bits": 16}})
    )
    code = main(["simulate", "--config", str(config_path), "--sim-time", "60"])
    assert code == 3
    assert "error" in capsys.readouterr().err


def test_sweep_writes_csv(capsys, tmp_path):
    out = tmp_path / "sweep.csv"
    code = main(
        [
            "sweep",
            *FAST,
            "--speeds",
            "20,60",
            "--modes",
            "p2dap",
            "--seeds",
            "1,2",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 6  # 4 runs + 2 mean rows
    assert "mean rate" in capsys.readouterr().out


def test_gen_pool_and_verify_round_trip(capsys, tmp_path):
    trace_path = tmp_path / "run.jsonl"
    pool_path = tmp_path / "pool.json"
    assert (
        main(
            [
                "simulate",
                *FAST,
                "--seed",
                "9",
                "--trace",
                str(trace_path),
                "--pool",
                str(pool_path),
            ]
        )
        == 0
    )
    capsys.readouterr()
    code = main(["verify-trace", "--trace", str(trace_path), "--pool", str(pool_path)])
    assert code == 0
    assert "verified, 0 divergences" in capsys.readouterr().out


def test_verify_divergence_exits_4(capsys, tmp_path):
    trace_path = tmp_path / "run.jsonl"
    pool_path = tmp_path / "pool.json"
    main(
        [
            "simulate",
            *FAST,
            "--seed",
            "9",
            "--trace",
            str(trace_path),
            "--pool",
            str(pool_path),
        ]
    )
    lines = trace_path.read_text().splitlines()
    doctored = []
    for line in lines:
        event = json.loads(line)
        if event["type"] == "run_summary":
            event["attackers_detected"] = event["attackers_detected"] + 1
        doctored.append(json.dumps(event, sort_keys=True))
    trace_path.write_text("\n".join(doctored) + "\n")
    capsys.readouterr()
    code = main(["verify-trace", "--trace", str(trace_path), "--pool", str(pool_path)])
    assert code == 4
    assert "divergence" in capsys.readouterr().err


def test_corrupt_trace_exits_3(capsys, tmp_path):
    trace_path = tmp_path / "broken.jsonl"
    trace_path.write_text("{oops\n")
    pool_path = tmp_path / "pool.json"
    main(["gen-pool", "--vehicles", "5", "--out", str(pool_path)])
    capsys.readouterr()
    assert main(["verify-trace", "--trace", str(trace_path), "--pool", str(pool_path)]) == 3


def test_show_config_round_trips(capsys, tmp_path):
    out = tmp_path / "effective.json"
    code = main(["show-config", "--speed", "70", "--out", str(out)])
    assert code == 0
    shown = json.loads(capsys.readouterr().out)
    assert shown["speed_kmh"] == 70.0
    assert json.loads(out.read_text())["speed_kmh"] == 70.0


def test_installed_script_smoke():
    result = subprocess.run(
        [sys.executable, "-m", "vanet_sybil.cli", "simulate", *FAST, "--seed", "2"],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert json.loads(result.stdout)["seed"] == 2
