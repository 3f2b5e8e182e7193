"""Replay verification: clean traces pass, any tampering is located."""

import copy
import json

import pytest

from vanet_sybil.config import ScenarioConfig
from vanet_sybil.engine import RunTrace, run_scenario, scenario_pool
from vanet_sybil.errors import TraceParseError
from vanet_sybil.p2dap import pool_to_dict, save_pool
from vanet_sybil.verify import TraceVerifier, verify_trace

CONFIG = ScenarioConfig(vehicles=15, attackers=3, sim_time_s=240.0)
SEED = 6


@pytest.fixture(scope="module")
def run():
    trace, metrics = run_scenario(CONFIG, SEED)
    return trace, metrics, scenario_pool(CONFIG, SEED)


def _mutated(trace, index, **changes):
    clone = RunTrace()
    clone.events = copy.deepcopy(trace.events)
    clone.events[index].update(changes)
    return clone


def test_clean_trace_verifies(run):
    trace, _, pool = run
    assert TraceVerifier(pool).verify(trace) == []


def test_clean_traces_verify_in_every_mode():
    for mode in ("p2dap", "footprint", "hybrid"):
        config = CONFIG.with_overrides(mode=mode)
        trace, _ = run_scenario(config, SEED)
        assert TraceVerifier(scenario_pool(config, SEED)).verify(trace) == [], mode


def test_lossy_trace_verifies():
    config = CONFIG.with_overrides(packet_loss=0.5)
    trace, _ = run_scenario(config, SEED)
    assert TraceVerifier(scenario_pool(config, SEED)).verify(trace) == []


def test_flipped_verdict_is_located(run):
    trace, _, pool = run
    target = next(
        e["seq"] for e in trace.events if e["type"] == "adjudication" and e["verdict"] == "sybil"
    )
    bad = _mutated(trace, target, verdict="false_alarm", fine=None, pseudonyms=[])
    divergences = TraceVerifier(pool).verify(bad)
    assert divergences
    assert divergences[0].seq == target
    assert divergences[0].field == "verdict"


def test_tampered_detection_count_is_located(run):
    trace, _, pool = run
    target = next(
        e["seq"] for e in trace.events if e["type"] == "detection" and e["counted"]
    )
    bad = _mutated(trace, target, counted=False)
    divergences = TraceVerifier(pool).verify(bad)
    assert divergences and divergences[0].seq == target
    assert divergences[0].field == "counted"


def test_tampered_speed_average_is_located(run):
    trace, _, pool = run
    target = next(
        e["seq"]
        for e in trace.events
        if e["type"] == "controller_decision" and e["avg_speed_kmh"] > 0
    )
    bad = _mutated(trace, target, avg_speed_kmh=1.0)
    divergences = TraceVerifier(pool).verify(bad)
    assert divergences and divergences[0].seq == target
    assert divergences[0].field == "avg_speed_kmh"


def test_deleted_report_is_noticed(run):
    trace, _, pool = run
    bad = RunTrace()
    bad.events = [e for e in copy.deepcopy(trace.events) if e["type"] != "report"]
    assert TraceVerifier(pool).verify(bad)


def test_foreign_pseudonym_is_rejected(run):
    trace, _, pool = run
    target = next(e["seq"] for e in trace.events if e["type"] == "beacon")
    bad = _mutated(trace, target, pseudonym="ff" * 16)
    divergences = TraceVerifier(pool).verify(bad)
    assert divergences and divergences[0].field == "pseudonym"


def test_inflated_summary_is_rejected(run):
    trace, metrics, pool = run
    target = trace.events[-1]["seq"]
    bad = _mutated(
        trace, target, attackers_detected=metrics.attackers_detected + 1, rate_pct=120.0
    )
    divergences = TraceVerifier(pool).verify(bad)
    assert divergences and divergences[0].event_type == "run_summary"


def test_file_level_round_trip(tmp_path, run):
    trace, _, pool = run
    trace_path = tmp_path / "run.jsonl"
    pool_path = tmp_path / "pool.json"
    trace.save(trace_path)
    save_pool(pool, pool_path)
    assert verify_trace(trace_path, pool_path) == []


def test_roadside_tier_pool_is_insufficient(tmp_path, run):
    trace, _, pool = run
    trace_path = tmp_path / "run.jsonl"
    pool_path = tmp_path / "pool_rsb.json"
    trace.save(trace_path)
    save_pool(pool, pool_path, tier="rsb")
    with pytest.raises(TraceParseError):
        verify_trace(trace_path, pool_path)


def test_wrong_pool_fails_verification(tmp_path, run):
    trace, _, _ = run
    other = scenario_pool(CONFIG, SEED + 1)
    assert pool_to_dict(other) != pool_to_dict(scenario_pool(CONFIG, SEED))
    assert TraceVerifier(other).verify(trace)
