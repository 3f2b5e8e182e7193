"""Sweep orchestration: grid order, aggregation, CSV round trips, threading."""

import pytest

from vanet_sybil.config import ScenarioConfig
from vanet_sybil.errors import ConfigInvariantError
from vanet_sybil.sweep import (
    MEAN_ID,
    aggregate_rows,
    read_csv,
    run_sweep,
    sweep_grid,
    write_csv,
)

BASE = ScenarioConfig(vehicles=12, attackers=2, sim_time_s=240.0)
SPEEDS = (20.0, 60.0)
MODES = ("p2dap", "footprint")
SEEDS = (1, 2)


@pytest.fixture(scope="module")
def rows():
    return run_sweep(BASE, SPEEDS, MODES, SEEDS)


def test_grid_order_and_size():
    grid = sweep_grid(SPEEDS, MODES, SEEDS)
    assert len(grid) == 8
    assert grid[0] == (20.0, "p2dap", 1)
    assert grid[1] == (20.0, "p2dap", 2)
    assert grid[-1] == (60.0, "footprint", 2)


def test_empty_axes_are_rejected():
    with pytest.raises(ConfigInvariantError):
        sweep_grid((), MODES, SEEDS)


def test_row_counts_and_ids(rows):
    runs = [r for r in rows if r["scenario_id"] != MEAN_ID]
    means = [r for r in rows if r["scenario_id"] == MEAN_ID]
    assert len(runs) == 8
    assert [r["scenario_id"] for r in runs] == list(range(8))
    assert len(means) == 4
    assert all(r["total"] == BASE.attackers for r in runs)


def test_mean_rows_match_hand_average(rows):
    runs = [r for r in rows if r["scenario_id"] != MEAN_ID]
    for mean in aggregate_rows(runs):
        members = [
            r
            for r in runs
            if (r["speed_kmh"], r["mode"]) == (mean["speed_kmh"], mean["mode"])
        ]
        expected = sum(r["rate_pct"] for r in members) / len(members)
        assert mean["rate_pct"] == pytest.approx(expected)
        assert mean["seed"] == ""


def test_threaded_sweep_matches_serial(rows):
    threaded = run_sweep(BASE, SPEEDS, MODES, SEEDS, jobs=3)
    assert threaded == rows


def test_csv_round_trip(tmp_path, rows):
    path = tmp_path / "sweep.csv"
    write_csv(rows, path)
    header = path.read_text().splitlines()[0]
    assert header == "speed_kmh,mode,scenario_id,seed,detected,total,rate_pct"
    assert read_csv(path) == rows


def test_trace_dir_gets_runs_and_pools(tmp_path, rows):
    out = tmp_path / "traces"
    run_sweep(BASE, (20.0,), ("p2dap",), SEEDS, trace_dir=out)
    assert sorted(p.name for p in out.glob("run*.jsonl")) == ["run0000.jsonl", "run0001.jsonl"]
    assert sorted(p.name for p in out.glob("pool_seed*.json")) == [
        "pool_seed1.json",
        "pool_seed2.json",
    ]
