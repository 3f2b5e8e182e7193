"""Speed-adaptive detector selection and detection bookkeeping.

The controller watches the average speed of vehicles currently heard in
coverage and picks the trajectory-based detector on fast roads, the
pseudonym-hash detector otherwise.  The ledger counts each physical
attacker at most once per run no matter how many detectors or reports
fire; events from the detector that is not currently selected stay in the
log but never enter the count.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import ConfigError, LedgerConsistencyError

P2DAP = "p2dap"
FOOTPRINT = "footprint"
DETECTORS = (P2DAP, FOOTPRINT)

SPEED_WINDOW_S = 30.0
RECHECK_PERIOD_S = 10.0
SPEED_THRESHOLD_KMH = 40.0


@dataclass(frozen=True)
class DetectorSelection:
    active: str
    threshold_kmh: float
    average_kmh: float


def select_detector(average_kmh: float, threshold_kmh: float = SPEED_THRESHOLD_KMH) -> DetectorSelection:
    """Strict threshold rule: faster than the threshold means trajectories."""
    if threshold_kmh <= 0:
        raise ConfigError(f"speed threshold must be positive, got {threshold_kmh}")
    active = FOOTPRINT if average_kmh > threshold_kmh else P2DAP
    return DetectorSelection(active, threshold_kmh, average_kmh)


class SpeedMonitor:
    """Sliding-window average over time-stamped speed samples.

    An empty window answers with the previous value (0 before any sample
    ever landed), which keeps the controller on its conservative default
    at the start of a run.  Samples must arrive in nondecreasing time order.
    """

    def __init__(self, window_s: float = SPEED_WINDOW_S) -> None:
        if window_s <= 0:
            raise ConfigError("speed window must be positive")
        self.window_s = window_s
        self._samples: deque[tuple[float, float]] = deque()
        self._previous = 0.0

    def add_sample(self, timestamp: float, speed_kmh: float) -> None:
        self._samples.append((timestamp, speed_kmh))

    def average(self, now: float) -> float:
        cutoff = now - self.window_s
        while self._samples and self._samples[0][0] < cutoff:
            self._samples.popleft()
        if not self._samples:
            return self._previous
        value = sum(speed for _, speed in self._samples) / len(self._samples)
        self._previous = value
        return value


@dataclass(frozen=True)
class DetectionEvent:
    """One detector firing on one physical vehicle, with its evidence."""

    detector: str
    time: float
    physical_id: str
    evidence: tuple[str, ...]


@dataclass
class LedgerEntry:
    event: DetectionEvent
    active_detector: str
    counted: bool


@dataclass
class DetectionLedger:
    """Per-run record of detection events and the deduplicated count."""

    counted: dict[str, DetectionEvent] = field(default_factory=dict)
    log: list[LedgerEntry] = field(default_factory=list)

    def record(self, event: DetectionEvent, selection: DetectorSelection) -> bool:
        """Log the event; return True when it newly enters the counted set."""
        counted = (
            event.detector == selection.active
            and event.physical_id not in self.counted
        )
        self.log.append(LedgerEntry(event, selection.active, counted))
        if counted:
            self.counted[event.physical_id] = event
        return counted

    def counted_by_detector(self) -> dict[str, int]:
        counts = {name: 0 for name in DETECTORS}
        for event in self.counted.values():
            counts[event.detector] += 1
        return counts


def detection_rate(counted: int, total_attackers: int) -> float:
    """Percentage of configured attackers that were counted."""
    if total_attackers < 1:
        raise ConfigError("detection rate needs at least one configured attacker")
    if counted < 0 or counted > total_attackers:
        raise LedgerConsistencyError(
            f"counted {counted} attackers out of {total_attackers} configured"
        )
    return 100.0 * counted / total_attackers
