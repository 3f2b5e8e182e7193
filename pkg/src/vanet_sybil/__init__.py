"""Deterministic road-segment simulator for multi-identity attack detection.

The package models one instrumented road: vehicles broadcast pseudonymous
beacons, roadside units hand out signed link tags, and three detection
strategies flag vehicles that claim several identities at once.  A
pseudonym-hash detector groups beacons through keyed hash projections, a
trajectory detector matches byte-identical link-tag series, and a hybrid
controller switches between them on measured average speed.  Every run is
reproducible from its (config, seed) pair down to the trace bytes.
"""

from .config import (
    MODE_FOOTPRINT,
    MODE_HYBRID,
    MODE_P2DAP,
    MODES,
    PoolSettings,
    ScenarioConfig,
    config_from_dict,
    config_to_dict,
    parse_config,
    save_config,
)
from .crypto import (
    HashKey,
    KeyRole,
    Pseudonym,
    SignatureKeyPair,
    SignerDirectory,
    coarse_value,
    extract_bits,
    fine_value,
    keyed_hash,
    sign,
)
from .engine import Metrics, RunTrace, derive_seed, run_scenario, scenario_pool
from .errors import (
    AuthorizationRejectedError,
    ConfigError,
    ConfigFileMissingError,
    ConfigInvariantError,
    ConfigSyntaxError,
    GenerationExhaustedError,
    InvalidKeyError,
    InvalidTagError,
    LedgerConsistencyError,
    MalformedReportError,
    SelectorRangeError,
    SerialOrderError,
    SimulationError,
    TraceParseError,
    UnknownSignerError,
)
from .footprint import (
    LinkTag,
    Rsu,
    RsuDirectory,
    Trajectory,
    TrustAuthority,
    append_tag,
    broadcast_tags,
    detect_duplicate_series,
    export_trajectories,
    load_trajectories,
)
from .hybrid import (
    DetectionEvent,
    DetectionLedger,
    DetectorSelection,
    SpeedMonitor,
    detection_rate,
    select_detector,
)
from .p2dap import (
    Adjudication,
    Beacon,
    PseudonymPool,
    RsbObserver,
    SuspiciousReport,
    dmv_adjudicate,
    generate_pool,
    load_pool,
    pool_from_dict,
    pool_to_dict,
    save_pool,
)
from .road import RoadModel, VehicleAgent, coverage_contacts, generate_arrivals
from .sweep import aggregate_rows, read_csv, run_sweep, sweep_grid, write_csv
from .verify import Divergence, TraceVerifier, verify_trace

__version__ = "0.1.0"

__all__ = [
    "Adjudication",
    "AuthorizationRejectedError",
    "Beacon",
    "ConfigError",
    "ConfigFileMissingError",
    "ConfigInvariantError",
    "ConfigSyntaxError",
    "DetectionEvent",
    "DetectionLedger",
    "DetectorSelection",
    "Divergence",
    "GenerationExhaustedError",
    "HashKey",
    "InvalidKeyError",
    "InvalidTagError",
    "KeyRole",
    "LedgerConsistencyError",
    "LinkTag",
    "MalformedReportError",
    "Metrics",
    "MODE_FOOTPRINT",
    "MODE_HYBRID",
    "MODE_P2DAP",
    "MODES",
    "PoolSettings",
    "Pseudonym",
    "PseudonymPool",
    "RoadModel",
    "Rsu",
    "RsuDirectory",
    "RsbObserver",
    "RunTrace",
    "ScenarioConfig",
    "SelectorRangeError",
    "SerialOrderError",
    "SignatureKeyPair",
    "SignerDirectory",
    "SimulationError",
    "SpeedMonitor",
    "SuspiciousReport",
    "TraceParseError",
    "TraceVerifier",
    "Trajectory",
    "TrustAuthority",
    "UnknownSignerError",
    "VehicleAgent",
    "aggregate_rows",
    "append_tag",
    "broadcast_tags",
    "coarse_value",
    "config_from_dict",
    "config_to_dict",
    "coverage_contacts",
    "derive_seed",
    "detect_duplicate_series",
    "detection_rate",
    "dmv_adjudicate",
    "export_trajectories",
    "extract_bits",
    "fine_value",
    "generate_arrivals",
    "generate_pool",
    "keyed_hash",
    "load_pool",
    "load_trajectories",
    "parse_config",
    "pool_from_dict",
    "pool_to_dict",
    "read_csv",
    "run_scenario",
    "run_sweep",
    "save_config",
    "save_pool",
    "scenario_pool",
    "select_detector",
    "sign",
    "sweep_grid",
    "verify_trace",
    "write_csv",
]
