"""Straight-road geometry, vehicle mobility, and arrival plans.

Vehicles enter at position zero, hold a constant per-vehicle speed, and
leave at the far end.  Roadside units sit at fixed positions with circular
coverage; under the default layout the coverage disks tile the whole
segment, so a moving vehicle is always heard by at least one unit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import ConfigInvariantError

if TYPE_CHECKING:  # pragma: no cover - typing only
    from .config import ScenarioConfig

KMH_TO_MS = 1.0 / 3.6

DEFAULT_LENGTH_M = 300.0
DEFAULT_LANES = 2
DEFAULT_RSU_POSITIONS_M = (37.5, 112.5, 187.5, 262.5)
DEFAULT_COVERAGE_RADIUS_M = 75.0

HONEST = "honest"
SYBIL = "sybil"

# Per-vehicle speeds scatter around the scenario speed with this relative
# deviation, truncated at +-25% so nobody crawls or teleports.
SPEED_REL_STD = 0.10
SPEED_REL_BOUND = 0.25


@dataclass(frozen=True)
class RoadModel:
    length_m: float = DEFAULT_LENGTH_M
    lanes: int = DEFAULT_LANES
    rsu_positions_m: tuple[float, ...] = DEFAULT_RSU_POSITIONS_M
    coverage_radius_m: float = DEFAULT_COVERAGE_RADIUS_M

    def validate(self) -> None:
        if self.length_m <= 0:
            raise ConfigInvariantError("road length must be positive")
        if self.lanes < 1:
            raise ConfigInvariantError("a road needs at least one lane")
        if self.coverage_radius_m <= 0:
            raise ConfigInvariantError("coverage radius must be positive")
        for pos in self.rsu_positions_m:
            if not 0.0 <= pos <= self.length_m:
                raise ConfigInvariantError(f"RSU at {pos} m is off the {self.length_m} m road")

    def covering_rsus(self, position_m: float) -> list[int]:
        """Indices of units whose coverage disk contains the position."""
        return [
            index
            for index, rsu in enumerate(self.rsu_positions_m)
            if abs(position_m - rsu) <= self.coverage_radius_m
        ]


@dataclass
class VehicleAgent:
    """One physical vehicle: mobility state plus its claimed identities."""

    physical_id: str
    kind: str
    lane: int
    entry_time: float
    speed_kmh: float
    identities: tuple[str, ...]
    pseudonym_block: tuple = ()

    @property
    def speed_ms(self) -> float:
        return self.speed_kmh * KMH_TO_MS

    def exit_time(self, road: RoadModel) -> float:
        if self.speed_ms == 0:
            return float("inf")
        return self.entry_time + road.length_m / self.speed_ms

    def position(self, t: float, road: RoadModel) -> float:
        travelled = max(0.0, t - self.entry_time) * self.speed_ms
        return min(travelled, road.length_m)

    def on_road(self, t: float, road: RoadModel) -> bool:
        return self.entry_time <= t <= self.exit_time(road)


def coverage_contacts(road: RoadModel, agent: VehicleAgent) -> list[tuple[int, float]]:
    """(rsu index, first entry time) per unit the vehicle will reach.

    Movement is monotone, so each coverage disk is entered at most once.
    A stationary vehicle only contacts units already covering the entry
    position.
    """
    contacts: list[tuple[int, float]] = []
    speed = agent.speed_ms
    for index, rsu in enumerate(road.rsu_positions_m):
        if speed == 0:
            if abs(rsu) <= road.coverage_radius_m:
                contacts.append((index, agent.entry_time))
            continue
        first_in = max(0.0, rsu - road.coverage_radius_m)
        if first_in > road.length_m:
            continue
        contacts.append((index, agent.entry_time + first_in / speed))
    contacts.sort(key=lambda c: (c[1], c[0]))
    return contacts


def coverage_interval(road: RoadModel, agent: VehicleAgent, rsu_index: int) -> tuple[float, float] | None:
    """Time span the vehicle spends inside one unit's coverage, if any."""
    rsu = road.rsu_positions_m[rsu_index]
    speed = agent.speed_ms
    if speed == 0:
        if abs(rsu) <= road.coverage_radius_m:
            return (agent.entry_time, float("inf"))
        return None
    enter_pos = max(0.0, rsu - road.coverage_radius_m)
    leave_pos = min(road.length_m, rsu + road.coverage_radius_m)
    if enter_pos > road.length_m or leave_pos < 0:
        return None
    return (agent.entry_time + enter_pos / speed, agent.entry_time + leave_pos / speed)


def _draw_speed(rng: np.random.Generator, nominal_kmh: float) -> float:
    low = nominal_kmh * (1.0 - SPEED_REL_BOUND)
    high = nominal_kmh * (1.0 + SPEED_REL_BOUND)
    while True:
        value = rng.normal(nominal_kmh, SPEED_REL_STD * nominal_kmh)
        if low <= value <= high:
            return float(value)


def arrival_window_s(config: "ScenarioConfig") -> float:
    """Entry times stop early enough for the slowest vehicle to finish."""
    slowest_ms = config.speed_kmh * (1.0 - SPEED_REL_BOUND) * KMH_TO_MS
    margin = config.road.length_m / slowest_ms
    return max(0.0, config.sim_time_s - margin)


def generate_arrivals(config: "ScenarioConfig", seed: int) -> list[VehicleAgent]:
    """Seeded arrival plan: entry times, lanes, speeds, and attacker subset.

    Entry times are uniform order statistics over the arrival window (a
    fixed-count stand-in for a Poisson stream).  Attackers are a seeded
    random subset; each claims ``forged_count`` identities beyond its real
    one.  Identity labels are opaque sequential tokens.
    """
    rng = np.random.default_rng(seed)
    n = config.vehicles
    entries = np.sort(rng.uniform(0.0, arrival_window_s(config), n))
    speeds = [_draw_speed(rng, config.speed_kmh) for _ in range(n)]
    lanes = rng.integers(0, config.road.lanes, n)
    attacker_indices = set(
        rng.choice(n, size=config.attackers, replace=False).tolist()
    ) if config.attackers else set()

    agents: list[VehicleAgent] = []
    label = 0
    for i in range(n):
        kind = SYBIL if i in attacker_indices else HONEST
        claimed = 1 + (config.forged_count if kind == SYBIL else 0)
        identities = tuple(f"n{label + k:04d}" for k in range(claimed))
        label += claimed
        agents.append(
            VehicleAgent(
                physical_id=f"veh{i:04d}",
                kind=kind,
                lane=int(lanes[i]),
                entry_time=float(entries[i]),
                speed_kmh=speeds[i],
                identities=identities,
            )
        )
    return agents
