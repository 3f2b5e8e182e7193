"""Key-less replay verification of run traces.

A verifier holds a trace and the authority-tier pool record, nothing else:
no hash keys, no signing keys, no arrival plan.  Beacons and tag grants
are treated as inputs; every derived event in the trace (reports,
adjudications, controller decisions, detections, the summary) is
recomputed from those inputs through the same detector logic and compared
field by field.  Any mismatch comes back as a divergence pointing at the
offending event.

Adjudication replay uses the pool's stored (coarse, fine) values instead
of recomputing hashes, which is exactly what makes the check key-less:
for pseudonyms that came out of the pool the stored values are the hash
images by construction.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

from .crypto import Pseudonym
from .errors import TraceParseError
from .footprint import LinkTag, Trajectory, detect_duplicate_series
from .hybrid import (
    DETECTORS,
    FOOTPRINT,
    P2DAP,
    RECHECK_PERIOD_S,
    SPEED_WINDOW_S,
    SpeedMonitor,
    select_detector,
)
from .p2dap import Beacon, RsbObserver, SuspiciousReport, load_pool, PseudonymPool

INPUT_TYPES = {"beacon", "tag_grant"}
DERIVED_TYPES = {"controller_decision", "report", "adjudication", "detection", "run_summary"}


@dataclass(frozen=True)
class Divergence:
    seq: int | None
    event_type: str
    field: str
    expected: object
    actual: object

    def __str__(self) -> str:
        where = f"event seq={self.seq}" if self.seq is not None else "trace"
        return (
            f"{where} ({self.event_type}): field {self.field!r} "
            f"expected {self.expected!r}, got {self.actual!r}"
        )


class TraceVerifier:
    """Replays one trace against the pool record and collects divergences."""

    def __init__(self, pool: PseudonymPool) -> None:
        self.pool = pool
        self.divergences: list[Divergence] = []

    # -- public entry -----------------------------------------------------

    def verify(self, trace) -> list[Divergence]:
        self.divergences = []
        events = trace.events
        if not events or events[0].get("type") != "run_config":
            self._flag(None, "run_config", "type", "run_config", "missing header")
            return self.divergences
        header = events[0]
        config = header["config"]
        if config["pool"]["coarse_bits"] != self.pool.coarse_bits:
            self._flag(0, "run_config", "pool.coarse_bits", config["pool"]["coarse_bits"], self.pool.coarse_bits)
        if config["pool"]["fine_bits"] != self.pool.fine_bits:
            self._flag(0, "run_config", "pool.fine_bits", config["pool"]["fine_bits"], self.pool.fine_bits)

        self._setup(header)
        for event in events[1:]:
            kind = event.get("type")
            if kind == "beacon":
                self._consume_pending(event)
                self._replay_beacon(event)
            elif kind == "tag_grant":
                self._consume_pending(event)
                self._replay_tag_grant(event)
            elif kind in DERIVED_TYPES:
                if kind == "controller_decision":
                    self._consume_pending(event)
                    self._check_decision(event)
                elif kind == "run_summary":
                    self._consume_pending(event)
                    self._check_summary(event)
                    self._saw_summary = True
                else:
                    self._match_derived(event)
            else:
                self._flag(event.get("seq"), str(kind), "type", "a known event type", kind)
            if self.divergences:
                break

        if not self.divergences and self._pending:
            nxt = self._pending[0]
            self._flag(None, nxt["type"], "presence", nxt, "event missing from trace")
        if not self.divergences and not self._saw_summary:
            self._flag(None, "run_summary", "presence", "a closing summary", "missing")
        return self.divergences

    # -- replay state -----------------------------------------------------

    def _setup(self, header: dict) -> None:
        config = header["config"]
        self.mode = config["mode"]
        self.threshold = config["speed_threshold_kmh"]
        self.match_length = config["match_length"]
        self.attackers_total = config["attackers"]
        self.identity_map = header["identity_map"]
        self.primary = set(header["primary_identities"].values())
        coarse_map = dict(self.pool.coarse_of)
        self.observers = [
            RsbObserver(
                f"rsb{i}",
                coarse_map=coarse_map,
                window_s=config["pair_window_s"],
                coarse_bits=self.pool.coarse_bits,
            )
            for i in range(len(config["road"]["rsu_positions_m"]))
        ]
        self.trajectories: dict[str, Trajectory] = {}
        self.monitor = SpeedMonitor(SPEED_WINDOW_S)
        self.active = self.mode if self.mode in DETECTORS else P2DAP
        self.next_recheck = 0.0
        self.counted: dict[str, str] = {}
        self.flagged: set[tuple[str, bytes]] = set()
        self.false_alarms = 0
        self._pending: list[dict] = []
        self._saw_summary = False

    def _flag(self, seq, event_type, field, expected, actual) -> None:
        self.divergences.append(Divergence(seq, event_type, field, expected, actual))

    # -- expected-event queue ----------------------------------------------

    def _consume_pending(self, event: dict) -> None:
        if self._pending:
            nxt = self._pending[0]
            self._flag(event.get("seq"), event["type"], "type", nxt["type"], event["type"])

    def _match_derived(self, event: dict) -> None:
        if not self._pending:
            self._flag(event.get("seq"), event["type"], "presence", "no further derived events", event["type"])
            return
        expected = self._pending.pop(0)
        for field, value in expected.items():
            if event.get(field) != value:
                self._flag(event.get("seq"), event["type"], field, value, event.get(field))
                return

    # -- input replay -------------------------------------------------------

    def _replay_beacon(self, event: dict) -> None:
        try:
            pseudonym = Pseudonym.from_hex(event["pseudonym"])
        except ValueError:
            self._flag(event["seq"], "beacon", "pseudonym", "hex pseudonym", event["pseudonym"])
            return
        if pseudonym not in self.pool:
            self._flag(event["seq"], "beacon", "pseudonym", "a pool pseudonym", event["pseudonym"])
            return
        if event["identity"] not in self.identity_map:
            self._flag(event["seq"], "beacon", "identity", "a known identity", event["identity"])
            return
        beacon = Beacon(
            event["identity"], pseudonym, event["t"], event["position_m"], event["speed_kmh"]
        )
        for rsb_index in event["heard_by"]:
            if not 0 <= rsb_index < len(self.observers):
                self._flag(event["seq"], "beacon", "heard_by", "a valid unit index", rsb_index)
                return
            for report in self.observers[rsb_index].observe(beacon):
                self._push_report(report)
        if event["identity"] in self.primary and event["heard_by"]:
            self.monitor.add_sample(event["t"], event["speed_kmh"])

    def _push_report(self, report: SuspiciousReport) -> None:
        self._pending.append(
            {
                "type": "report",
                "t": report.window_end,
                "rsb_id": report.rsb_id,
                "coarse": report.coarse,
                "pseudonyms": [p.hex() for p in report.pseudonyms],
                "window_start": report.window_start,
                "window_end": report.window_end,
            }
        )
        groups: dict[tuple[int, int], list[Pseudonym]] = {}
        for p in report.pseudonyms:
            groups.setdefault((self.pool.coarse_of[p], self.pool.fine_of[p]), []).append(p)
        culprits: list[Pseudonym] = []
        fine = None
        for (_, group_fine), members in groups.items():
            if len(members) >= 2:
                culprits, fine = members, group_fine
                break
        verdict = "sybil" if culprits else "false_alarm"
        self._pending.append(
            {
                "type": "adjudication",
                "t": report.window_end,
                "rsb_id": report.rsb_id,
                "verdict": verdict,
                "fine": fine,
                "pseudonyms": [p.hex() for p in culprits],
            }
        )
        if culprits:
            owner = self.pool.owner_of(culprits[0])
            self._push_detection(P2DAP, report.window_end, owner, [p.hex() for p in culprits])
        else:
            self.false_alarms += 1

    def _push_detection(self, detector: str, t: float, owner: str, evidence: list) -> None:
        counted = detector == self.active and owner not in self.counted
        if counted:
            self.counted[owner] = detector
        self._pending.append(
            {
                "type": "detection",
                "t": t,
                "detector": detector,
                "physical_id": owner,
                "evidence": evidence,
                "counted": counted,
            }
        )

    def _replay_tag_grant(self, event: dict) -> None:
        tag = LinkTag(
            rsu_id=event["rsu_id"],
            issue_time=event["t"],
            nonce=bytes.fromhex(event["nonce"]),
            rsu_signature=bytes.fromhex(event["rsu_sig"]),
            ta_signature=bytes.fromhex(event["ta_sig"]) if event["ta_sig"] else None,
        )
        for identity in event["identities"]:
            if identity not in self.identity_map:
                self._flag(event["seq"], "tag_grant", "identities", "a known identity", identity)
                return
            trajectory = self.trajectories.setdefault(identity, Trajectory(identity))
            if trajectory.tags and tag.issue_time <= trajectory.tags[-1].issue_time:
                self._flag(event["seq"], "tag_grant", "t", "a strictly later grant", tag.issue_time)
                return
            trajectory.tags.append(tag)
        for group in detect_duplicate_series(self.trajectories.values(), self.match_length):
            owners = {self.identity_map[identity] for identity in group}
            if len(owners) != 1:
                self._flag(event["seq"], "tag_grant", "identities", "one owner per tag chain", sorted(owners))
                return
            owner = owners.pop()
            suffix = b"".join(
                member.key_bytes()
                for member in self.trajectories[min(group)].tags[-self.match_length:]
            )
            seen_key = (owner, hashlib.sha1(suffix).digest())
            if seen_key in self.flagged:
                continue
            self.flagged.add(seen_key)
            self._push_detection(FOOTPRINT, event["t"], owner, sorted(group))

    # -- derived-event checks ------------------------------------------------

    def _check_decision(self, event: dict) -> None:
        if event["t"] != self.next_recheck:
            self._flag(event["seq"], "controller_decision", "t", self.next_recheck, event["t"])
            return
        self.next_recheck += RECHECK_PERIOD_S
        average = self.monitor.average(event["t"])
        if self.mode in DETECTORS:
            active = self.mode
        else:
            active = select_detector(average, self.threshold).active
        self.active = active
        if event["avg_speed_kmh"] != average:
            self._flag(event["seq"], "controller_decision", "avg_speed_kmh", average, event["avg_speed_kmh"])
        elif event["active_detector"] != active:
            self._flag(event["seq"], "controller_decision", "active_detector", active, event["active_detector"])

    def _check_summary(self, event: dict) -> None:
        per_detector = {name: 0 for name in DETECTORS}
        for detector in self.counted.values():
            per_detector[detector] += 1
        detected = len(self.counted)
        rate = 100.0 * detected / self.attackers_total if self.attackers_total else 0.0
        checks = {
            "mode": self.mode,
            "attackers_total": self.attackers_total,
            "attackers_detected": detected,
            "rate_pct": rate,
            "false_alarms": self.false_alarms,
            "per_detector_counts": per_detector,
        }
        for field, value in checks.items():
            if event.get(field) != value:
                self._flag(event["seq"], "run_summary", field, value, event.get(field))
                return


def verify_trace(trace_path: str | Path, pool_path: str | Path) -> list[Divergence]:
    """Load a saved trace and pool record, replay, and return divergences."""
    from .engine import RunTrace

    trace = RunTrace.load(trace_path)
    pool = load_pool(pool_path)
    if not pool.fine_of:
        raise TraceParseError(
            "verification needs the authority-tier pool record (fine values included)"
        )
    return TraceVerifier(pool).verify(trace)
