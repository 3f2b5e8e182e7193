"""Pseudonym pool generation, roadside observation, and adjudication.

The issuing authority hands every vehicle a block of pseudonyms that all
project to one (coarse, fine) value pair.  Roadside boxes hold only the
global coarse key: they buffer overheard beacons and report pseudonym
pairs that land in the same coarse group close together in time.  The
authority alone can recompute fine values and decide whether a report is
an actual multi-identity vehicle or two honest vehicles colliding in the
coarse projection.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from .crypto import (
    HashKey,
    KeyRole,
    Pseudonym,
    extract_coarse,
    extract_fine,
    keyed_hash,
)
from .errors import (
    ConfigInvariantError,
    GenerationExhaustedError,
    InvalidKeyError,
    MalformedReportError,
)

# Pool-level width defaults.  The joint (coarse, fine) space must stay small
# enough that random candidates actually collide into per-vehicle blocks;
# 12 joint bits keeps generation around twenty thousand draws for a
# hundred-vehicle pool while still giving observable coarse collisions.
POOL_COARSE_BITS = 8
POOL_FINE_BITS = 4
PSEUDONYM_WIDTH = 16
PAIR_WINDOW_S = 5.0


@dataclass(frozen=True)
class Beacon:
    """One broadcast heard on the road: an identity claim plus its pseudonym."""

    identity: str
    pseudonym: Pseudonym
    timestamp: float
    position_m: float
    speed_kmh: float


@dataclass(frozen=True)
class SuspiciousReport:
    """A same-coarse pseudonym pair one roadside box saw within the window."""

    rsb_id: str
    window_start: float
    window_end: float
    coarse: int
    pseudonyms: tuple[Pseudonym, Pseudonym]


@dataclass(frozen=True)
class Adjudication:
    verdict: Literal["sybil", "false_alarm"]
    fine: int | None
    pseudonyms: tuple[Pseudonym, ...]

    @property
    def is_sybil(self) -> bool:
        return self.verdict == "sybil"


@dataclass
class PseudonymPool:
    """Yearly issued pseudonym blocks plus the authority's value maps."""

    year: int
    coarse_bits: int
    fine_bits: int
    pseudonym_width: int
    assignments: dict[str, tuple[Pseudonym, ...]]
    coarse_of: dict[Pseudonym, int]
    fine_of: dict[Pseudonym, int] = field(default_factory=dict)

    def vehicles(self) -> list[str]:
        return list(self.assignments)

    def owner_of(self, pseudonym: Pseudonym) -> str:
        owners = getattr(self, "_owners", None)
        if owners is None:
            owners = {p: v for v, ps in self.assignments.items() for p in ps}
            object.__setattr__(self, "_owners", owners)
        return owners[pseudonym]

    def __contains__(self, pseudonym: Pseudonym) -> bool:
        return pseudonym in self.coarse_of


def generate_pool(
    coarse_key: HashKey,
    fine_key: HashKey,
    n_vehicles: int,
    per_vehicle: int,
    *,
    coarse_bits: int = POOL_COARSE_BITS,
    fine_bits: int = POOL_FINE_BITS,
    rng_seed: int = 0,
    pseudonym_width: int = PSEUDONYM_WIDTH,
    year: int = 1,
    draw_budget: int | None = None,
) -> PseudonymPool:
    """Draw random pseudonyms and bucket them by (coarse, fine) value.

    A bucket that accumulates ``per_vehicle`` members becomes the block of
    the next vehicle; generation stops once ``n_vehicles`` blocks exist.
    Raises GenerationExhaustedError when the draw budget (default
    1000 * n_vehicles * per_vehicle) runs out first, which happens whenever
    2^(coarse_bits + fine_bits) is large relative to the budget.
    """
    if coarse_key.role is not KeyRole.GLOBAL_COARSE:
        raise InvalidKeyError("pool generation needs the global coarse key first")
    if fine_key.role is not KeyRole.DMV_FINE:
        raise InvalidKeyError("pool generation needs the authority fine key second")
    if n_vehicles < 1 or per_vehicle < 1:
        raise ConfigInvariantError("n_vehicles and per_vehicle must be positive")
    if 2 ** (coarse_bits + fine_bits) < n_vehicles:
        raise ConfigInvariantError(
            f"only {2 ** (coarse_bits + fine_bits)} (coarse, fine) groups exist "
            f"for {n_vehicles} vehicles"
        )

    budget = draw_budget if draw_budget is not None else 1000 * n_vehicles * per_vehicle
    rng = np.random.default_rng(rng_seed)
    open_buckets: dict[tuple[int, int], list[Pseudonym]] = {}
    closed: list[tuple[tuple[int, int], list[Pseudonym]]] = []
    closed_keys: set[tuple[int, int]] = set()
    seen: set[bytes] = set()

    draws = 0
    while len(closed) < n_vehicles:
        if draws >= budget:
            raise GenerationExhaustedError(
                f"{len(closed)}/{n_vehicles} blocks of {per_vehicle} filled after "
                f"{draws} draws over a {2 ** (coarse_bits + fine_bits)}-group space; "
                "widen the budget or shrink coarse_bits + fine_bits"
            )
        raw = rng.bytes(pseudonym_width)
        draws += 1
        if raw in seen:
            continue
        seen.add(raw)
        first = keyed_hash(coarse_key, raw)
        coarse = extract_coarse(first, coarse_bits)
        fine = extract_fine(keyed_hash(fine_key, first), fine_bits, coarse_bits)
        key = (coarse, fine)
        if key in closed_keys:
            continue  # block already assigned, later hits are discarded
        bucket = open_buckets.setdefault(key, [])
        bucket.append(Pseudonym(raw))
        if len(bucket) == per_vehicle:
            closed_keys.add(key)
            closed.append((key, bucket))
            del open_buckets[key]

    assignments: dict[str, tuple[Pseudonym, ...]] = {}
    coarse_of: dict[Pseudonym, int] = {}
    fine_of: dict[Pseudonym, int] = {}
    for index, ((coarse, fine), members) in enumerate(closed):
        vehicle_id = f"veh{index:04d}"
        assignments[vehicle_id] = tuple(members)
        for p in members:
            coarse_of[p] = coarse
            fine_of[p] = fine

    return PseudonymPool(
        year=year,
        coarse_bits=coarse_bits,
        fine_bits=fine_bits,
        pseudonym_width=pseudonym_width,
        assignments=assignments,
        coarse_of=coarse_of,
        fine_of=fine_of,
    )


# ---------------------------------------------------------------------------
# pool serialization (authority tier includes fine values, roadside tier not)
# ---------------------------------------------------------------------------

def pool_to_dict(pool: PseudonymPool, tier: Literal["dmv", "rsb"] = "dmv") -> dict:
    vehicles = []
    for vehicle_id, pseudonyms in pool.assignments.items():
        entry: dict = {
            "vehicle_id": vehicle_id,
            "pseudonyms": [p.hex() for p in pseudonyms],
            "coarse": pool.coarse_of[pseudonyms[0]],
        }
        if tier == "dmv":
            entry["fine"] = pool.fine_of[pseudonyms[0]]
        vehicles.append(entry)
    return {
        "year": pool.year,
        "w_c": pool.coarse_bits,
        "w_f": pool.fine_bits,
        "vehicles": vehicles,
    }


def pool_from_dict(data: dict) -> PseudonymPool:
    try:
        vehicles = data["vehicles"]
        assignments: dict[str, tuple[Pseudonym, ...]] = {}
        coarse_of: dict[Pseudonym, int] = {}
        fine_of: dict[Pseudonym, int] = {}
        width = None
        for entry in vehicles:
            ps = tuple(Pseudonym.from_hex(h) for h in entry["pseudonyms"])
            assignments[entry["vehicle_id"]] = ps
            for p in ps:
                width = p.width if width is None else width
                coarse_of[p] = entry["coarse"]
                if "fine" in entry:
                    fine_of[p] = entry["fine"]
        return PseudonymPool(
            year=data["year"],
            coarse_bits=data["w_c"],
            fine_bits=data["w_f"],
            pseudonym_width=width or PSEUDONYM_WIDTH,
            assignments=assignments,
            coarse_of=coarse_of,
            fine_of=fine_of,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedReportError(f"unusable pool record: {exc}") from exc


def save_pool(pool: PseudonymPool, path: str | Path, tier: Literal["dmv", "rsb"] = "dmv") -> None:
    Path(path).write_text(json.dumps(pool_to_dict(pool, tier), sort_keys=True, indent=1) + "\n")


def load_pool(path: str | Path) -> PseudonymPool:
    return pool_from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# roadside observation
# ---------------------------------------------------------------------------

class RsbObserver:
    """Per-roadside-box beacon buffer that flags same-coarse pseudonym pairs.

    Holds either the global coarse key (live operation) or a precomputed
    pseudonym -> coarse map (trace replay); it can never hold the fine key.
    Beacons must arrive in nondecreasing timestamp order.  Each unordered
    pseudonym pair is reported at most once per observer lifetime, on the
    first beacon that lands within the pairing window of the other
    pseudonym's latest sighting.
    """

    def __init__(
        self,
        rsb_id: str,
        *,
        coarse_key: HashKey | None = None,
        coarse_map: dict[Pseudonym, int] | None = None,
        window_s: float = PAIR_WINDOW_S,
        coarse_bits: int = POOL_COARSE_BITS,
    ) -> None:
        if (coarse_key is None) == (coarse_map is None):
            raise InvalidKeyError("observer needs exactly one of coarse_key / coarse_map")
        if coarse_key is not None and coarse_key.role is not KeyRole.GLOBAL_COARSE:
            raise InvalidKeyError("roadside boxes may only hold the global coarse key")
        if window_s <= 0:
            raise ConfigInvariantError("pairing window must be positive")
        self.rsb_id = rsb_id
        self.window_s = window_s
        self.coarse_bits = coarse_bits
        self._coarse_key = coarse_key
        self._coarse_map = coarse_map
        self._cache: dict[Pseudonym, int] = {}
        self._last_seen: dict[int, dict[Pseudonym, float]] = {}
        self._reported: set[frozenset[Pseudonym]] = set()

    def coarse(self, pseudonym: Pseudonym) -> int:
        value = self._cache.get(pseudonym)
        if value is None:
            if self._coarse_key is not None:
                value = extract_coarse(keyed_hash(self._coarse_key, pseudonym.data), self.coarse_bits)
            else:
                assert self._coarse_map is not None
                value = self._coarse_map[pseudonym]
            self._cache[pseudonym] = value
        return value

    def observe(self, beacon: Beacon) -> list[SuspiciousReport]:
        """Buffer one beacon; return reports for newly suspicious pairs."""
        coarse = self.coarse(beacon.pseudonym)
        group = self._last_seen.setdefault(coarse, {})
        reports = []
        for other, last in group.items():
            if other == beacon.pseudonym:
                continue
            if beacon.timestamp - last <= self.window_s:
                pair = frozenset((beacon.pseudonym, other))
                if pair in self._reported:
                    continue
                self._reported.add(pair)
                ordered = tuple(sorted((beacon.pseudonym, other)))
                reports.append(
                    SuspiciousReport(
                        rsb_id=self.rsb_id,
                        window_start=last,
                        window_end=beacon.timestamp,
                        coarse=coarse,
                        pseudonyms=(ordered[0], ordered[1]),
                    )
                )
        group[beacon.pseudonym] = beacon.timestamp
        return reports


# ---------------------------------------------------------------------------
# authority adjudication
# ---------------------------------------------------------------------------

def dmv_adjudicate(
    report: SuspiciousReport,
    coarse_key: HashKey,
    fine_key: HashKey,
    *,
    coarse_bits: int = POOL_COARSE_BITS,
    fine_bits: int = POOL_FINE_BITS,
    pseudonym_width: int = PSEUDONYM_WIDTH,
) -> Adjudication:
    """Recompute both hash stages from scratch and rule on the report.

    Nothing the roadside box claims is trusted: every reported pseudonym is
    re-hashed here.  The verdict is sybil exactly when at least two
    pseudonyms fall in the same recomputed (coarse, fine) group, which for a
    well-formed single-coarse report is the same as sharing a fine value.
    """
    if coarse_key.role is not KeyRole.GLOBAL_COARSE:
        raise InvalidKeyError("adjudication needs the global coarse key first")
    if fine_key.role is not KeyRole.DMV_FINE:
        raise InvalidKeyError("adjudication needs the authority fine key second")
    if len(report.pseudonyms) < 2:
        raise MalformedReportError("a report must name at least two pseudonyms")

    groups: dict[tuple[int, int], list[Pseudonym]] = {}
    for p in report.pseudonyms:
        if p.width != pseudonym_width:
            raise MalformedReportError(
                f"pseudonym {p.hex()} has width {p.width}, expected {pseudonym_width}"
            )
        first = keyed_hash(coarse_key, p.data)
        coarse = extract_coarse(first, coarse_bits)
        fine = extract_fine(keyed_hash(fine_key, first), fine_bits, coarse_bits)
        groups.setdefault((coarse, fine), []).append(p)

    for (_, fine), members in groups.items():
        if len(members) >= 2:
            return Adjudication("sybil", fine, tuple(members))
    return Adjudication("false_alarm", None, ())
