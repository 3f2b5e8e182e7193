"""Scenario configuration: strict JSON schema with simulation defaults.

Unknown keys are rejected rather than ignored, so typos in experiment
configs fail loudly instead of silently running the defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .errors import (
    ConfigFileMissingError,
    ConfigInvariantError,
    ConfigSyntaxError,
)
from .road import RoadModel

MODE_HYBRID = "hybrid"
MODE_P2DAP = "p2dap"
MODE_FOOTPRINT = "footprint"
MODES = (MODE_HYBRID, MODE_P2DAP, MODE_FOOTPRINT)


@dataclass(frozen=True)
class PoolSettings:
    """Pseudonym pool shape. The joint bit width must stay buildable:
    filling blocks costs about per_vehicle * 2^(coarse_bits + fine_bits)
    random draws across the whole pool."""

    per_vehicle: int = 8
    coarse_bits: int = 8
    fine_bits: int = 4


@dataclass(frozen=True)
class ScenarioConfig:
    road: RoadModel = field(default_factory=RoadModel)
    pool: PoolSettings = field(default_factory=PoolSettings)
    sim_time_s: float = 900.0
    vehicles: int = 50
    attackers: int = 5
    forged_count: int = 2
    speed_kmh: float = 40.0
    speed_threshold_kmh: float = 40.0
    mode: str = MODE_HYBRID
    pair_window_s: float = 5.0
    match_length: int = 2
    beacon_period_s: float = 1.0
    packet_loss: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        self.road.validate()
        checks: list[tuple[bool, str]] = [
            (self.sim_time_s > 0, "sim_time_s must be positive"),
            (self.vehicles >= 0, "vehicles must be nonnegative"),
            (self.attackers >= 0, "attackers must be nonnegative"),
            (self.attackers <= self.vehicles, "attackers cannot exceed vehicles"),
            (self.forged_count >= 1, "forged_count must be at least 1"),
            (self.speed_kmh > 0, "speed_kmh must be positive"),
            (self.speed_threshold_kmh > 0, "speed_threshold_kmh must be positive"),
            (self.mode in MODES, f"mode must be one of {MODES}, got {self.mode!r}"),
            (self.pair_window_s > 0, "pair_window_s must be positive"),
            (self.match_length >= 1, "match_length must be at least 1"),
            (self.beacon_period_s > 0, "beacon_period_s must be positive"),
            (0.0 <= self.packet_loss < 1.0, "packet_loss must be in [0, 1)"),
            (self.pool.per_vehicle >= 1, "pool.per_vehicle must be at least 1"),
            (self.pool.coarse_bits >= 1, "pool.coarse_bits must be at least 1"),
            (self.pool.fine_bits >= 1, "pool.fine_bits must be at least 1"),
            (
                self.pool.coarse_bits + self.pool.fine_bits <= 160,
                "pool bit widths exceed the digest",
            ),
            (
                2 ** (self.pool.coarse_bits + self.pool.fine_bits) >= max(self.vehicles, 1),
                "not enough (coarse, fine) groups for the vehicle count",
            ),
            (
                self.pool.per_vehicle >= 1 + self.forged_count,
                "pool.per_vehicle must cover the real identity plus forged ones",
            ),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigInvariantError(message)

    def with_overrides(self, **kwargs: Any) -> "ScenarioConfig":
        updated = replace(self, **kwargs)
        updated.validate()
        return updated


_ROAD_KEYS = {"length_m", "lanes", "rsu_positions_m", "coverage_radius_m"}
_POOL_KEYS = {"per_vehicle", "coarse_bits", "fine_bits"}
_TOP_KEYS = {
    "road",
    "pool",
    "sim_time_s",
    "vehicles",
    "attackers",
    "forged_count",
    "speed_kmh",
    "speed_threshold_kmh",
    "mode",
    "pair_window_s",
    "match_length",
    "beacon_period_s",
    "packet_loss",
    "seed",
}


def _reject_unknown(data: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigInvariantError(f"unknown {where} keys: {', '.join(unknown)}")


def config_from_dict(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigInvariantError("configuration must be a JSON object")
    _reject_unknown(data, _TOP_KEYS, "configuration")

    road_data = data.get("road", {})
    if not isinstance(road_data, dict):
        raise ConfigInvariantError("road must be a JSON object")
    _reject_unknown(road_data, _ROAD_KEYS, "road")
    road_defaults = RoadModel()
    road = RoadModel(
        length_m=float(road_data.get("length_m", road_defaults.length_m)),
        lanes=int(road_data.get("lanes", road_defaults.lanes)),
        rsu_positions_m=tuple(
            float(p) for p in road_data.get("rsu_positions_m", road_defaults.rsu_positions_m)
        ),
        coverage_radius_m=float(
            road_data.get("coverage_radius_m", road_defaults.coverage_radius_m)
        ),
    )

    pool_data = data.get("pool", {})
    if not isinstance(pool_data, dict):
        raise ConfigInvariantError("pool must be a JSON object")
    _reject_unknown(pool_data, _POOL_KEYS, "pool")
    pool_defaults = PoolSettings()
    pool = PoolSettings(
        per_vehicle=int(pool_data.get("per_vehicle", pool_defaults.per_vehicle)),
        coarse_bits=int(pool_data.get("coarse_bits", pool_defaults.coarse_bits)),
        fine_bits=int(pool_data.get("fine_bits", pool_defaults.fine_bits)),
    )

    defaults = ScenarioConfig()
    try:
        config = ScenarioConfig(
            road=road,
            pool=pool,
            sim_time_s=float(data.get("sim_time_s", defaults.sim_time_s)),
            vehicles=int(data.get("vehicles", defaults.vehicles)),
            attackers=int(data.get("attackers", defaults.attackers)),
            forged_count=int(data.get("forged_count", defaults.forged_count)),
            speed_kmh=float(data.get("speed_kmh", defaults.speed_kmh)),
            speed_threshold_kmh=float(
                data.get("speed_threshold_kmh", defaults.speed_threshold_kmh)
            ),
            mode=str(data.get("mode", defaults.mode)),
            pair_window_s=float(data.get("pair_window_s", defaults.pair_window_s)),
            match_length=int(data.get("match_length", defaults.match_length)),
            beacon_period_s=float(data.get("beacon_period_s", defaults.beacon_period_s)),
            packet_loss=float(data.get("packet_loss", defaults.packet_loss)),
            seed=int(data.get("seed", defaults.seed)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigInvariantError(f"bad configuration value: {exc}") from exc
    config.validate()
    return config


def config_to_dict(config: ScenarioConfig) -> dict:
    return {
        "road": {
            "length_m": config.road.length_m,
            "lanes": config.road.lanes,
            "rsu_positions_m": list(config.road.rsu_positions_m),
            "coverage_radius_m": config.road.coverage_radius_m,
        },
        "pool": {
            "per_vehicle": config.pool.per_vehicle,
            "coarse_bits": config.pool.coarse_bits,
            "fine_bits": config.pool.fine_bits,
        },
        "sim_time_s": config.sim_time_s,
        "vehicles": config.vehicles,
        "attackers": config.attackers,
        "forged_count": config.forged_count,
        "speed_kmh": config.speed_kmh,
        "speed_threshold_kmh": config.speed_threshold_kmh,
        "mode": config.mode,
        "pair_window_s": config.pair_window_s,
        "match_length": config.match_length,
        "beacon_period_s": config.beacon_period_s,
        "packet_loss": config.packet_loss,
        "seed": config.seed,
    }


def parse_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigFileMissingError(f"no configuration file at {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigSyntaxError(f"{path}: {exc}") from exc
    return config_from_dict(data)


def save_config(config: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(config), sort_keys=True, indent=1) + "\n")
