"""Deterministic discrete-event simulation of one road scenario.

One run wires the pieces together: a pseudonym pool and arrival plan are
derived from the run seed, roadside units issue link tags at coverage
contacts, roadside boxes observe beacons, the authority adjudicates
reports, and the controller picks which detector's events count.  Every
observable step lands in a JSON-lines trace ordered by (time, seq), and
identical (config, seed) inputs reproduce the trace byte for byte.

Detectors only ever see beacons, tags, and trajectories.  Ground truth
(which vehicle is an attacker, who owns which pseudonym) stays in the
scoring helper at the bottom of the run loop and in the trace header.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import MODE_HYBRID, ScenarioConfig, config_to_dict
from .crypto import HashKey, KeyRole
from .errors import LedgerConsistencyError, TraceParseError
from .footprint import (
    RsuDirectory,
    Trajectory,
    TrustAuthority,
    append_tag,
    broadcast_tags,
    detect_duplicate_series,
)
from .hybrid import (
    FOOTPRINT,
    P2DAP,
    RECHECK_PERIOD_S,
    SPEED_WINDOW_S,
    DetectionEvent,
    DetectionLedger,
    DetectorSelection,
    SpeedMonitor,
    detection_rate,
    select_detector,
)
from .p2dap import (
    PSEUDONYM_WIDTH,
    Beacon,
    PseudonymPool,
    RsbObserver,
    dmv_adjudicate,
    generate_pool,
)
from .road import SYBIL, coverage_contacts, coverage_interval, generate_arrivals

# Sub-stream labels hashed with the run seed; every consumer of randomness
# gets its own generator, so runs that differ only in mode share mobility.
STREAM_POOL = "pool"
STREAM_ARRIVALS = "arrivals"
STREAM_KEYS = "keys"
STREAM_NONCES = "nonces"
STREAM_RECEPTION = "reception"


def derive_seed(master: int, label: str) -> int:
    """Independent sub-seed for one named consumer of a run's randomness."""
    digest = hashlib.sha256(f"{master}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class Metrics:
    scenario_id: int
    seed: int
    mode: str
    speed_kmh: float
    attackers_total: int
    attackers_detected: int
    rate_pct: float
    false_alarms: int
    per_detector_counts: dict

    def to_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "seed": self.seed,
            "mode": self.mode,
            "speed_kmh": self.speed_kmh,
            "attackers_total": self.attackers_total,
            "attackers_detected": self.attackers_detected,
            "rate_pct": self.rate_pct,
            "false_alarms": self.false_alarms,
            "per_detector_counts": self.per_detector_counts,
        }


class RunTrace:
    """Append-only event log with strict (time, seq) ordering."""

    def __init__(self) -> None:
        self.events: list[dict] = []

    def append(self, event_type: str, t: float, **fields) -> dict:
        event = {"type": event_type, "t": t, "seq": len(self.events)}
        event.update(fields)
        self.events.append(event)
        return event

    def of_type(self, event_type: str) -> list[dict]:
        return [e for e in self.events if e["type"] == event_type]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.events)

    def sha256(self) -> str:
        return hashlib.sha256(self.to_jsonl().encode()).hexdigest()

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl())

    @classmethod
    def load(cls, path: str | Path) -> "RunTrace":
        trace = cls()
        with open(path) as handle:
            for number, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    event = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise TraceParseError(str(exc), line=number) from exc
                if not isinstance(event, dict) or "type" not in event:
                    raise TraceParseError(
                        "trace events must be objects with a type", line=number
                    )
                trace.events.append(event)
        return trace


def _pool_keys(seed: int) -> tuple[HashKey, HashKey, np.random.Generator]:
    """Hash keys for a run, plus the generator to draw further secrets from."""
    keys_rng = np.random.default_rng(derive_seed(seed, STREAM_KEYS))
    coarse_key = HashKey(KeyRole.GLOBAL_COARSE, keys_rng.bytes(32))
    fine_key = HashKey(KeyRole.DMV_FINE, keys_rng.bytes(32))
    return coarse_key, fine_key, keys_rng


def _build_pool(
    config: ScenarioConfig, coarse_key: HashKey, fine_key: HashKey, seed: int
) -> PseudonymPool:
    if config.vehicles == 0:
        return PseudonymPool(
            year=1,
            coarse_bits=config.pool.coarse_bits,
            fine_bits=config.pool.fine_bits,
            pseudonym_width=PSEUDONYM_WIDTH,
            assignments={},
            coarse_of={},
        )
    return generate_pool(
        coarse_key,
        fine_key,
        config.vehicles,
        config.pool.per_vehicle,
        coarse_bits=config.pool.coarse_bits,
        fine_bits=config.pool.fine_bits,
        rng_seed=derive_seed(seed, STREAM_POOL),
    )


def scenario_pool(config: ScenarioConfig, seed: int) -> PseudonymPool:
    """The exact pool a run with this (config, seed) operates on."""
    coarse_key, fine_key, _ = _pool_keys(seed)
    return _build_pool(config, coarse_key, fine_key, seed)


def run_scenario(
    config: ScenarioConfig, seed: int, scenario_id: int = 0
) -> tuple[RunTrace, Metrics]:
    config.validate()
    road = config.road
    coarse_key, fine_key, keys_rng = _pool_keys(seed)
    pool = _build_pool(config, coarse_key, fine_key, seed)
    agents = generate_arrivals(config, derive_seed(seed, STREAM_ARRIVALS))

    for agent, vehicle_id in zip(agents, pool.vehicles()):
        assert agent.physical_id == vehicle_id
        agent.pseudonym_block = pool.assignments[vehicle_id]
    by_id = {agent.physical_id: agent for agent in agents}
    identity_map = {
        identity: agent.physical_id for agent in agents for identity in agent.identities
    }
    primary_identities = {agent.physical_id: agent.identities[0] for agent in agents}

    # Deployment: registered units, chained neighbors, announced templates.
    directory = RsuDirectory()
    authority = TrustAuthority(directory, keys_rng.bytes(32))
    nonce_rng = np.random.default_rng(derive_seed(seed, STREAM_NONCES))
    loss_rng = np.random.default_rng(derive_seed(seed, STREAM_RECEPTION))
    rsus = [
        directory.add_rsu(f"rsu{i}", keys_rng.bytes(32), position)
        for i, position in enumerate(road.rsu_positions_m)
    ]
    for left, right in zip(rsus, rsus[1:]):
        directory.link_neighbors(left.rsu_id, right.rsu_id)
    for rsu in rsus:
        rsu.template = authority.authorize(rsu.issue_tag(0.0, nonce_rng))
        broadcast_tags(rsu, directory)

    observers = [
        RsbObserver(
            f"rsb{i}",
            coarse_key=coarse_key,
            window_s=config.pair_window_s,
            coarse_bits=config.pool.coarse_bits,
        )
        for i in range(len(road.rsu_positions_m))
    ]
    trajectories = {identity: Trajectory(identity) for identity in identity_map}
    monitor = SpeedMonitor(SPEED_WINDOW_S)
    ledger = DetectionLedger()
    terminated: set[str] = set()
    # One footprint event per (vehicle, trailing series): a still-forging
    # vehicle re-fires with every fresh contact, a frozen group does not.
    footprint_seen: set[tuple[str, bytes]] = set()
    false_alarms = 0
    forced = None if config.mode == MODE_HYBRID else config.mode
    selection = DetectorSelection(forced or P2DAP, config.speed_threshold_kmh, 0.0)

    trace = RunTrace()
    trace.append(
        "run_config",
        0.0,
        scenario_id=scenario_id,
        seed=seed,
        config=config_to_dict(config),
        identity_map=identity_map,
        primary_identities=primary_identities,
    )

    # Static schedule; the rank slot orders same-instant events so that
    # controller decisions land first, then tag grants, then beacons.
    schedule: list[tuple[float, int, int, int]] = []
    RECHECK, CONTACT, BEACON = 0, 1, 2
    for k in range(int(config.sim_time_s / RECHECK_PERIOD_S) + 1):
        t = k * RECHECK_PERIOD_S
        if t <= config.sim_time_s:
            schedule.append((t, RECHECK, 0, 0))
    for ai, agent in enumerate(agents):
        horizon = min(agent.exit_time(road), config.sim_time_s)
        for rsu_index, t in coverage_contacts(road, agent):
            if t <= horizon:
                schedule.append((t, CONTACT, ai, rsu_index))
        k = 0
        while True:
            t = agent.entry_time + k * config.beacon_period_s
            if t > horizon:
                break
            schedule.append((t, BEACON, ai, k))
            k += 1
    schedule.sort()

    def score_detection(event: DetectionEvent) -> None:
        """Ledger the event; enforce that counted vehicles are real attackers."""
        counted = ledger.record(event, selection)
        trace.append(
            "detection",
            event.time,
            detector=event.detector,
            physical_id=event.physical_id,
            evidence=list(event.evidence),
            counted=counted,
        )
        if counted:
            if by_id[event.physical_id].kind != SYBIL:
                raise LedgerConsistencyError(
                    f"{event.physical_id} counted as attacker but is honest"
                )
            terminated.add(event.physical_id)

    for t, kind, ai, aux in schedule:
        if kind == RECHECK:
            average = monitor.average(t)
            if forced is None:
                selection = select_detector(average, config.speed_threshold_kmh)
            else:
                selection = DetectorSelection(forced, config.speed_threshold_kmh, average)
            trace.append(
                "controller_decision",
                t,
                avg_speed_kmh=average,
                active_detector=selection.active,
            )

        elif kind == CONTACT:
            agent = agents[ai]
            rsu = rsus[aux]
            tag = authority.authorize(rsu.issue_tag(t, nonce_rng))
            active = (
                agent.identities
                if agent.physical_id not in terminated
                else agent.identities[:1]
            )
            interval = coverage_interval(road, agent, aux)
            dwell = min(interval[1], config.sim_time_s) - interval[0] if interval else 0.0
            trace.append(
                "tag_grant",
                t,
                rsu_id=rsu.rsu_id,
                nonce=tag.nonce.hex(),
                rsu_sig=tag.rsu_signature.hex(),
                ta_sig=tag.ta_signature.hex() if tag.ta_signature else None,
                dwell_s=dwell,
                identities=list(active),
            )
            for identity in active:
                append_tag(trajectories[identity], tag, directory)
            for group in detect_duplicate_series(trajectories.values(), config.match_length):
                owners = {identity_map[identity] for identity in group}
                assert len(owners) == 1, "one tag chain can only belong to one vehicle"
                owner = owners.pop()
                suffix = b"".join(
                    member.key_bytes()
                    for member in trajectories[min(group)].tags[-config.match_length:]
                )
                seen_key = (owner, hashlib.sha1(suffix).digest())
                if seen_key in footprint_seen:
                    continue
                footprint_seen.add(seen_key)
                score_detection(DetectionEvent(FOOTPRINT, t, owner, tuple(sorted(group))))

        else:
            agent = agents[ai]
            position = agent.position(t, road)
            covered = road.covering_rsus(position)
            for index, identity in enumerate(agent.identities):
                if index > 0 and agent.physical_id in terminated:
                    break
                pseudonym = agent.pseudonym_block[index]
                heard_by = [
                    rsb_index
                    for rsb_index in covered
                    if not (config.packet_loss and loss_rng.random() < config.packet_loss)
                ]
                trace.append(
                    "beacon",
                    t,
                    identity=identity,
                    pseudonym=pseudonym.hex(),
                    position_m=position,
                    speed_kmh=agent.speed_kmh,
                    heard_by=heard_by,
                )
                beacon = Beacon(identity, pseudonym, t, position, agent.speed_kmh)
                for rsb_index in heard_by:
                    for report in observers[rsb_index].observe(beacon):
                        trace.append(
                            "report",
                            t,
                            rsb_id=report.rsb_id,
                            coarse=report.coarse,
                            pseudonyms=[p.hex() for p in report.pseudonyms],
                            window_start=report.window_start,
                            window_end=report.window_end,
                        )
                        verdict = dmv_adjudicate(
                            report,
                            coarse_key,
                            fine_key,
                            coarse_bits=config.pool.coarse_bits,
                            fine_bits=config.pool.fine_bits,
                            pseudonym_width=pool.pseudonym_width,
                        )
                        trace.append(
                            "adjudication",
                            t,
                            rsb_id=report.rsb_id,
                            verdict=verdict.verdict,
                            fine=verdict.fine,
                            pseudonyms=[p.hex() for p in verdict.pseudonyms],
                        )
                        if verdict.is_sybil:
                            owner = pool.owner_of(verdict.pseudonyms[0])
                            score_detection(
                                DetectionEvent(
                                    P2DAP, t, owner, tuple(p.hex() for p in verdict.pseudonyms)
                                )
                            )
                        else:
                            false_alarms += 1
                if index == 0 and heard_by:
                    monitor.add_sample(t, agent.speed_kmh)

    counted = len(ledger.counted)
    rate = detection_rate(counted, config.attackers) if config.attackers else 0.0
    metrics = Metrics(
        scenario_id=scenario_id,
        seed=seed,
        mode=config.mode,
        speed_kmh=config.speed_kmh,
        attackers_total=config.attackers,
        attackers_detected=counted,
        rate_pct=rate,
        false_alarms=false_alarms,
        per_detector_counts=ledger.counted_by_detector(),
    )
    trace.append("run_summary", config.sim_time_s, **metrics.to_dict())
    return trace, metrics
