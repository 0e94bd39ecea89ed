"""Content-based and blacklist-based cryptojacking detectors."""

from __future__ import annotations

import fnmatch
import json
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import urlsplit

from ..fixtures import data_path
from .frames import LogEntry, ProtocolFrame

CLEAN, SUSPICIOUS, CRYPTOJACKING = "Clean", "Suspicious", "Cryptojacking"
REQUIRED = frozenset({"auth", "authed", "job"})


@dataclass(frozen=True)
class DetectionVerdict:
    status: str
    evidence: tuple = ()  # (frame kind, timestamp) pairs
    detector: str = "content"
    reason: str = ""

    def to_dict(self) -> dict:
        return {"status": self.status, "detector": self.detector, "reason": self.reason,
                "evidence": [list(e) for e in self.evidence]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass
class ContentDetector:
    """Per-session fold over observed frames.

    The verdict depends on frame content only. A session that never gets past
    ``auth`` (a keyless or stale key) stays Suspicious.
    """

    evidence: list = field(default_factory=list)
    seen: set = field(default_factory=set)

    def step(self, frame: ProtocolFrame, t: float = 0.0) -> DetectionVerdict:
        self.evidence.append((frame.kind, t))
        self.seen.add(frame.kind)
        return self.verdict()

    def verdict(self) -> DetectionVerdict:
        if not self.seen:
            status, reason = CLEAN, "no protocol frames"
        elif REQUIRED <= self.seen:
            status, reason = CRYPTOJACKING, "auth, authed and job observed"
        else:
            status, reason = SUSPICIOUS, "protocol frames without a full handshake: " + ",".join(sorted(self.seen))
        return DetectionVerdict(status, tuple(self.evidence), "content", reason)


def content_verdict(entries) -> DetectionVerdict:
    """Fold a sequence of :class:`LogEntry` or :class:`ProtocolFrame`."""
    det = ContentDetector()
    for e in entries:
        if isinstance(e, LogEntry):
            det.step(e.frame, e.t)
        else:
            det.step(e)
    return det.verdict()


def host_of(endpoint: str) -> str:
    host = urlsplit(endpoint).hostname if "//" in endpoint else endpoint.split("/")[0].split(":")[0]
    return (host or "").lower().rstrip(".")


def host_matches(host: str, pattern: str) -> bool:
    """Exact host, any subdomain of it, or a shell-style wildcard."""
    pattern = pattern.lower().rstrip(".")
    if any(ch in pattern for ch in "*?["):
        return fnmatch.fnmatchcase(host, pattern)
    return host == pattern or host.endswith("." + pattern)


def blacklist_detector(endpoint: str, blacklist) -> DetectionVerdict:
    host = host_of(endpoint)
    for pattern in blacklist:
        if host_matches(host, pattern):
            return DetectionVerdict(CRYPTOJACKING, (), "blacklist", f"{host} matches {pattern}")
    return DetectionVerdict(CLEAN, (), "blacklist", f"{host} not listed")


def parse_blacklist(text: str) -> list[str]:
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out


def load_blacklist(path: str | Path | None = None) -> list[str]:
    """Read a newline-delimited host-pattern file; the bundled list when ``path`` is None."""
    if path is None:
        return parse_blacklist(data_path("blacklist.txt").read_text(encoding="utf-8"))
    return parse_blacklist(Path(path).read_text(encoding="utf-8"))
