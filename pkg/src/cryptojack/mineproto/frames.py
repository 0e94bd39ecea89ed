"""Frame schemas of the mining WebSocket protocol, session phases and JSONL logs."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Callable

from ..errors import MalformedFrame, ProtocolViolation

C2S = "client->server"
S2C = "server->client"

KINDS = ("auth", "authed", "job", "submit", "hash_accept")

DIRECTION = {
    "auth": C2S,
    "authed": S2C,
    "job": S2C,
    "submit": C2S,
    "hash_accept": S2C,
}

# Observed on-the-wire sizes; checked at +-15% on canonical frames only.
EXPECTED_LENGTH = {"auth": 112, "authed": 50, "job": 234, "submit": 156, "hash_accept": 48}
LENGTH_TOLERANCE = 0.15

_HEX = re.compile(r"[0-9a-f]*\Z")


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _hex(n: int | None) -> Callable[[Any], bool]:
    def check(v) -> bool:
        return isinstance(v, str) and bool(_HEX.match(v)) and (n is None or len(v) == n)
    return check


def _str(v) -> bool:
    return isinstance(v, str)


SCHEMA: dict[str, dict[str, Callable[[Any], bool]]] = {
    "auth": {
        "site_key": _str,
        "type": _str,
        "user": lambda v: v is None or isinstance(v, str),
        "goal": _is_int,
    },
    "authed": {"token": _str, "hashes": lambda v: _is_int(v) and v >= 0},
    "job": {"job_id": _str, "blob": _hex(None), "target": _hex(8)},
    "submit": {"job_id": _str, "nonce": _hex(8), "result": _hex(64)},
    "hash_accept": {"hashes": lambda v: _is_int(v) and v >= 0},
}


@dataclass(frozen=True)
class ProtocolFrame:
    kind: str
    params: dict

    def __post_init__(self):
        validate(self.kind, self.params)

    @property
    def direction(self) -> str:
        return DIRECTION[self.kind]

    def to_dict(self) -> dict:
        return {"type": self.kind, "params": dict(self.params)}

    def serialize(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @property
    def byte_length(self) -> int:
        return len(self.serialize().encode("utf-8"))

    def length_ok(self, tolerance: float = LENGTH_TOLERANCE) -> bool:
        expected = EXPECTED_LENGTH[self.kind]
        return abs(self.byte_length - expected) <= tolerance * expected


def validate(kind: str, params) -> None:
    if kind not in SCHEMA:
        raise MalformedFrame(f"unknown frame type {kind!r}")
    if not isinstance(params, dict):
        raise MalformedFrame(f"{kind}: params must be an object")
    schema = SCHEMA[kind]
    missing = [k for k in schema if k not in params]
    extra = [k for k in params if k not in schema]
    if missing or extra:
        raise MalformedFrame(f"{kind}: missing {missing}, unexpected {extra}")
    bad = [k for k, check in schema.items() if not check(params[k])]
    if bad:
        raise MalformedFrame(f"{kind}: ill-typed params {bad}")


def classify_frame(payload: bytes | str) -> ProtocolFrame | None:
    """Typed frame, or ``None`` when the payload is not a protocol message.

    Raises :class:`MalformedFrame` when the ``type`` is known but the params
    do not fit its schema.
    """
    if isinstance(payload, bytes):
        try:
            payload = payload.decode("utf-8")
        except UnicodeDecodeError:
            return None
    try:
        obj = json.loads(payload)
    except (json.JSONDecodeError, RecursionError):
        return None
    if not isinstance(obj, dict) or obj.get("type") not in SCHEMA:
        return None
    if "params" not in obj:
        raise MalformedFrame(f"{obj['type']}: missing params")
    return ProtocolFrame(obj["type"], obj["params"])


def auth(site_key: str, type: str = "anonymous", user: str | None = None, goal: int = 0) -> ProtocolFrame:
    return ProtocolFrame("auth", {"site_key": site_key, "type": type, "user": user, "goal": goal})


def authed(token: str, hashes: int) -> ProtocolFrame:
    return ProtocolFrame("authed", {"token": token, "hashes": hashes})


def job(job_id: str, blob: str, target: str) -> ProtocolFrame:
    return ProtocolFrame("job", {"job_id": job_id, "blob": blob, "target": target})


def submit(job_id: str, nonce: str, result: str) -> ProtocolFrame:
    return ProtocolFrame("submit", {"job_id": job_id, "nonce": nonce, "result": result})


def hash_accept(hashes: int) -> ProtocolFrame:
    return ProtocolFrame("hash_accept", {"hashes": hashes})


# share arithmetic

def target_value(target: str) -> int:
    """The 8-hex-digit target as an unsigned 32-bit little-endian integer."""
    if not _hex(8)(target):
        raise ValueError(f"target must be 8 lowercase hex digits, got {target!r}")
    return int.from_bytes(bytes.fromhex(target), "little")


def share_credit(target: str) -> int:
    """Hashes credited per accepted share: ``floor(2**32 / target)``."""
    value = target_value(target)
    if value == 0:
        raise ValueError("target 00000000 accepts no share")
    return 2 ** 32 // value


def share_value(digest: bytes) -> int:
    return int.from_bytes(digest[:4], "little")


# session phases

PHASES = ("Idle", "AuthSent", "Authed", "JobIssued", "Mining", "Credited")

TRANSITIONS = {
    ("Idle", "auth"): "AuthSent",
    ("AuthSent", "authed"): "Authed",
    ("Authed", "job"): "JobIssued",
    ("JobIssued", "job"): "JobIssued",
    ("JobIssued", "submit"): "Mining",
    ("Mining", "hash_accept"): "Credited",
    ("Credited", "job"): "JobIssued",
}


@dataclass
class SessionState:
    site_key: str | None = None
    throttle: float | None = None
    phase: str = "Idle"
    accepted_hashes: int = 0

    def advance(self, frame: ProtocolFrame) -> "SessionState":
        nxt = TRANSITIONS.get((self.phase, frame.kind))
        if nxt is None:
            raise ProtocolViolation(f"{frame.kind} not allowed in phase {self.phase}")
        if frame.kind == "auth":
            self.site_key = frame.params["site_key"]
        elif frame.kind == "hash_accept":
            total = frame.params["hashes"]
            if total < self.accepted_hashes:
                raise ProtocolViolation("accepted hashes decreased")
            self.accepted_hashes = total
        self.phase = nxt
        return self


def check_sequence(frames) -> SessionState:
    """Replay frames through the state machine; raises ProtocolViolation on an illegal step."""
    state = SessionState()
    for f in frames:
        state.advance(f)
    return state


# logs

@dataclass(frozen=True)
class LogEntry:
    t: float  # seconds since session start, monotonic
    direction: str
    frame: ProtocolFrame

    def to_json(self) -> str:
        return json.dumps({"t": round(self.t, 6), "direction": self.direction, "frame": self.frame.to_dict()},
                          separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "LogEntry":
        obj = json.loads(line)
        raw = obj.get("frame", obj.get("payload"))
        frame = classify_frame(raw if isinstance(raw, str) else json.dumps(raw))
        if frame is None:
            raise MalformedFrame(f"log line is not a protocol frame: {line[:80]!r}")
        return cls(float(obj.get("t", 0.0)), obj.get("direction", frame.direction), frame)


@dataclass
class SessionLog:
    entries: list = field(default_factory=list)

    def append(self, entry: LogEntry) -> None:
        self.entries.append(entry)

    @property
    def frames(self) -> list[ProtocolFrame]:
        return [e.frame for e in self.entries]

    @property
    def kinds(self) -> list[str]:
        return [e.frame.kind for e in self.entries]

    def to_jsonl(self) -> str:
        return "".join(e.to_json() + "\n" for e in self.entries)

    @classmethod
    def from_jsonl(cls, text: str) -> "SessionLog":
        return cls([LogEntry.from_json(line) for line in text.splitlines() if line.strip()])
