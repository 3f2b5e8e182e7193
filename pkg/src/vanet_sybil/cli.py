"""Command line front end.

Four subcommands: ``simulate`` runs one scenario, ``sweep`` crosses
speeds, modes, and seeds into a CSV, ``gen-pool`` writes a pseudonym pool
record, and ``verify-trace`` replays a saved trace against a pool record.

Exit codes: 0 on success, 2 for configuration problems, 3 for runtime
failures, 4 when trace verification finds a divergence.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import (
    MODES,
    PoolSettings,
    ScenarioConfig,
    config_to_dict,
    parse_config,
    save_config,
)
from .engine import run_scenario, scenario_pool
from .errors import ConfigError, SimulationError
from .p2dap import save_pool
from .sweep import MEAN_ID, run_sweep, write_csv
from .verify import verify_trace

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_DIVERGENCE = 4


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def _mode_list(text: str) -> list[str]:
    modes = [part.strip() for part in text.split(",") if part.strip()]
    for mode in modes:
        if mode not in MODES:
            raise argparse.ArgumentTypeError(f"unknown mode {mode!r}")
    return modes


def _load_config(args: argparse.Namespace) -> ScenarioConfig:
    config = parse_config(args.config) if args.config else ScenarioConfig()
    overrides = {
        name: getattr(args, attr)
        for name, attr in (
            ("mode", "mode"),
            ("speed_kmh", "speed"),
            ("vehicles", "vehicles"),
            ("attackers", "attackers"),
            ("sim_time_s", "sim_time"),
            ("packet_loss", "packet_loss"),
        )
        if getattr(args, attr, None) is not None
    }
    return config.with_overrides(**overrides) if overrides else config


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_config(args)
    trace, metrics = run_scenario(config, args.seed, scenario_id=args.scenario_id)
    if args.trace:
        trace.save(args.trace)
    if args.pool:
        save_pool(scenario_pool(config, args.seed), args.pool)
    summary = metrics.to_dict()
    if args.summary:
        with open(args.summary, "w") as handle:
            json.dump(summary, handle, sort_keys=True, indent=1)
            handle.write("\n")
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_config(args)
    if args.seeds is not None:
        seeds = args.seeds
    else:
        seeds = list(range(args.master_seed, args.master_seed + args.scenarios))
    rows = run_sweep(
        config,
        args.speeds,
        args.modes,
        seeds,
        jobs=args.jobs,
        trace_dir=args.trace_dir,
    )
    write_csv(rows, args.out)
    for row in rows:
        if row["scenario_id"] == MEAN_ID:
            print(
                f"speed {row['speed_kmh']:6.1f} km/h  mode {row['mode']:<9}  "
                f"mean rate {row['rate_pct']:6.2f} %"
            )
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_gen_pool(args: argparse.Namespace) -> int:
    config = ScenarioConfig(
        vehicles=args.vehicles,
        attackers=0,
        pool=PoolSettings(
            per_vehicle=args.per_vehicle,
            coarse_bits=args.coarse_bits,
            fine_bits=args.fine_bits,
        ),
    )
    pool = scenario_pool(config, args.seed)
    save_pool(pool, args.out, tier=args.tier)
    print(f"wrote {args.out} ({args.vehicles} vehicles, tier {args.tier})")
    return EXIT_OK


def _cmd_verify_trace(args: argparse.Namespace) -> int:
    divergences = verify_trace(args.trace, args.pool)
    if not divergences:
        print("verified, 0 divergences")
        return EXIT_OK
    for divergence in divergences:
        print(f"divergence: {divergence}", file=sys.stderr)
    print(f"verification failed, {len(divergences)} divergence(s)", file=sys.stderr)
    return EXIT_DIVERGENCE


def _cmd_show_config(args: argparse.Namespace) -> int:
    config = _load_config(args)
    if args.out:
        save_config(config, args.out)
    print(json.dumps(config_to_dict(config), sort_keys=True, indent=1))
    return EXIT_OK


def _add_config_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="scenario config JSON file (defaults when omitted)")
    parser.add_argument("--mode", choices=MODES, help="override detector mode")
    parser.add_argument("--speed", type=float, help="override nominal speed in km/h")
    parser.add_argument("--vehicles", type=int, help="override vehicle count")
    parser.add_argument("--attackers", type=int, help="override attacker count")
    parser.add_argument("--sim-time", type=float, help="override horizon in seconds")
    parser.add_argument("--packet-loss", type=float, help="override beacon loss probability")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vanet-sybil",
        description="Road-segment simulator for multi-identity attack detection.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="run one scenario")
    _add_config_options(simulate)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--scenario-id", type=int, default=0)
    simulate.add_argument("--trace", help="write the event trace to this JSON-lines file")
    simulate.add_argument("--summary", help="write the metrics summary to this JSON file")
    simulate.add_argument("--pool", help="write the run's pool record to this JSON file")
    simulate.set_defaults(func=_cmd_simulate)

    sweep = commands.add_parser("sweep", help="cross speeds, modes, and seeds into a CSV")
    _add_config_options(sweep)
    sweep.add_argument("--speeds", type=_float_list, required=True, help="comma separated km/h values")
    sweep.add_argument("--modes", type=_mode_list, default=list(MODES), help="comma separated modes")
    sweep.add_argument("--seeds", type=_int_list, help="comma separated seeds (overrides --scenarios)")
    sweep.add_argument("--scenarios", type=int, default=10, help="seeded scenarios per cell")
    sweep.add_argument("--master-seed", type=int, default=0, help="first scenario seed")
    sweep.add_argument("--jobs", type=int, default=1, help="worker threads")
    sweep.add_argument("--trace-dir", help="also write per-run traces and per-seed pools here")
    sweep.add_argument("--out", required=True, help="CSV output path")
    sweep.set_defaults(func=_cmd_sweep)

    gen_pool = commands.add_parser("gen-pool", help="write a pseudonym pool record")
    gen_pool.add_argument("--vehicles", type=int, required=True)
    gen_pool.add_argument("--per-vehicle", type=int, default=8)
    gen_pool.add_argument("--coarse-bits", type=int, default=8)
    gen_pool.add_argument("--fine-bits", type=int, default=4)
    gen_pool.add_argument("--seed", type=int, default=0)
    gen_pool.add_argument("--tier", choices=("dmv", "rsb"), default="dmv")
    gen_pool.add_argument("--out", required=True)
    gen_pool.set_defaults(func=_cmd_gen_pool)

    verify = commands.add_parser("verify-trace", help="replay a trace against a pool record")
    verify.add_argument("--trace", required=True)
    verify.add_argument("--pool", required=True)
    verify.set_defaults(func=_cmd_verify_trace)

    show = commands.add_parser("show-config", help="print the effective configuration")
    _add_config_options(show)
    show.add_argument("--out", help="also save the configuration to this file")
    show.set_defaults(func=_cmd_show_config)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
