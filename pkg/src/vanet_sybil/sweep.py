"""Parameter sweeps over speed, detector mode, and seeds.

A sweep crosses the requested nominal speeds with the requested modes and
seeds, runs one scenario per cell, and collects flat result rows plus one
mean row per (speed, mode) cell.  Rows come back in grid order no matter
how many worker threads run the cells, so sweep output is reproducible
byte for byte.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Iterable, Sequence

from .config import ScenarioConfig
from .engine import run_scenario, scenario_pool
from .errors import ConfigInvariantError
from .p2dap import save_pool

CSV_COLUMNS = ("speed_kmh", "mode", "scenario_id", "seed", "detected", "total", "rate_pct")
MEAN_ID = "mean"


def sweep_grid(
    speeds: Sequence[float], modes: Sequence[str], seeds: Sequence[int]
) -> list[tuple[float, str, int]]:
    """All (speed, mode, seed) cells, slowest-varying speed first."""
    if not speeds or not modes or not seeds:
        raise ConfigInvariantError("a sweep needs at least one speed, mode, and seed")
    return [(speed, mode, seed) for speed in speeds for mode in modes for seed in seeds]


def _run_cell(
    base: ScenarioConfig, cell: tuple[float, str, int], scenario_id: int, trace_dir: Path | None
) -> dict:
    speed, mode, seed = cell
    config = base.with_overrides(speed_kmh=speed, mode=mode)
    trace, metrics = run_scenario(config, seed, scenario_id=scenario_id)
    if trace_dir is not None:
        trace.save(trace_dir / f"run{scenario_id:04d}.jsonl")
    return {
        "speed_kmh": speed,
        "mode": mode,
        "scenario_id": scenario_id,
        "seed": seed,
        "detected": metrics.attackers_detected,
        "total": metrics.attackers_total,
        "rate_pct": metrics.rate_pct,
    }


def run_sweep(
    base: ScenarioConfig,
    speeds: Sequence[float],
    modes: Sequence[str],
    seeds: Sequence[int],
    *,
    jobs: int = 1,
    trace_dir: str | Path | None = None,
) -> list[dict]:
    """Run every grid cell and append per-(speed, mode) mean rows.

    ``jobs`` > 1 runs cells on a thread pool; results are collected in grid
    order either way.  With ``trace_dir`` set, each run's trace lands there
    as ``runNNNN.jsonl`` and each seed's pool as ``pool_seedN.json``.
    """
    if jobs < 1:
        raise ConfigInvariantError("jobs must be at least 1")
    grid = sweep_grid(speeds, modes, seeds)
    directory = Path(trace_dir) if trace_dir is not None else None
    if directory is not None:
        directory.mkdir(parents=True, exist_ok=True)
        for seed in dict.fromkeys(seeds):
            save_pool(scenario_pool(base, seed), directory / f"pool_seed{seed}.json")

    if jobs == 1:
        rows = [_run_cell(base, cell, i, directory) for i, cell in enumerate(grid)]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(
                pool.map(
                    lambda pair: _run_cell(base, pair[1], pair[0], directory),
                    enumerate(grid),
                )
            )

    rows.extend(aggregate_rows(rows))
    return rows


def aggregate_rows(rows: Iterable[dict]) -> list[dict]:
    """One mean row per (speed, mode) cell, in first-seen order."""
    cells: dict[tuple[float, str], list[dict]] = {}
    for row in rows:
        if row["scenario_id"] == MEAN_ID:
            continue
        cells.setdefault((row["speed_kmh"], row["mode"]), []).append(row)
    means = []
    for (speed, mode), members in cells.items():
        count = len(members)
        means.append(
            {
                "speed_kmh": speed,
                "mode": mode,
                "scenario_id": MEAN_ID,
                "seed": "",
                "detected": sum(r["detected"] for r in members) / count,
                "total": members[0]["total"],
                "rate_pct": sum(r["rate_pct"] for r in members) / count,
            }
        )
    return means


def write_csv(rows: Iterable[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def read_csv(path: str | Path) -> list[dict]:
    """Read sweep rows back with numeric fields restored."""
    rows = []
    with open(path, newline="") as handle:
        for record in csv.DictReader(handle):
            mean = record["scenario_id"] == MEAN_ID
            rows.append(
                {
                    "speed_kmh": float(record["speed_kmh"]),
                    "mode": record["mode"],
                    "scenario_id": MEAN_ID if mean else int(record["scenario_id"]),
                    "seed": "" if mean else int(record["seed"]),
                    "detected": float(record["detected"]) if mean else int(record["detected"]),
                    "total": int(record["total"]),
                    "rate_pct": float(record["rate_pct"]),
                }
            )
    return rows
