"""Mining WebSocket protocol: frames, dropzone server, miner, relay and detectors."""

from .detect import (
    CLEAN,
    CRYPTOJACKING,
    SUSPICIOUS,
    ContentDetector,
    DetectionVerdict,
    blacklist_detector,
    content_verdict,
    load_blacklist,
)
from .frames import (
    DIRECTION,
    EXPECTED_LENGTH,
    KINDS,
    LogEntry,
    ProtocolFrame,
    SessionLog,
    SessionState,
    check_sequence,
    classify_frame,
    share_credit,
    target_value,
)
from .miner import MinerConfig, MinerResult, mine, run_miner
from .relay import RelayProxy
from .scenario import BUILTIN, Scenario, ScenarioResult, load_scenario, run_scenario
from .server import DropzoneServer, ServerConfig

__all__ = [
    "CLEAN", "CRYPTOJACKING", "SUSPICIOUS", "ContentDetector", "DetectionVerdict",
    "blacklist_detector", "content_verdict", "load_blacklist",
    "DIRECTION", "EXPECTED_LENGTH", "KINDS", "LogEntry", "ProtocolFrame", "SessionLog",
    "SessionState", "check_sequence", "classify_frame", "share_credit", "target_value",
    "MinerConfig", "MinerResult", "mine", "run_miner", "RelayProxy",
    "BUILTIN", "Scenario", "ScenarioResult", "load_scenario", "run_scenario",
    "DropzoneServer", "ServerConfig",
]
