"""Declarative simulator topologies: dropzone, optional relay, one miner, two detectors.

Everything binds to loopback; the hostnames below are the logical endpoints a
browser-side detector would see.
"""

from __future__ import annotations

import asyncio
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from . import frames as F
from .detect import blacklist_detector, content_verdict, load_blacklist
from .miner import MinerConfig, MinerResult, run_miner
from .relay import RelayProxy
from .server import DropzoneServer, ServerConfig

DEFAULT_SITE_KEY = "Kq7TzP2mWx9LbR4vNc8YhJ3sDf6GaE1u"


@dataclass
class Scenario:
    name: str = "direct"
    site_key: str = DEFAULT_SITE_KEY
    throttle: float = 0.5
    relay: bool = False
    dropzone_host: str = "ws001.coinhive.com"
    relay_host: str = "cdn-relay.example.org"
    target: str = "ffffff00"
    hash_budget: int | None = 4096
    max_shares: int | None = None
    time_budget: float | None = None
    seed: int = 0
    blacklist: list | None = None  # None: bundled list

    @property
    def endpoint(self) -> str:
        host = self.relay_host if self.relay else self.dropzone_host
        return f"wss://{host}/proxy"

    @classmethod
    def from_dict(cls, obj: dict) -> "Scenario":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        return cls(**obj)


BUILTIN = {
    "direct": Scenario(name="direct"),
    "relay": Scenario(name="relay", relay=True),
    "keyless": Scenario(name="keyless", site_key=""),
}


def load_scenario(name_or_path: str) -> Scenario:
    if name_or_path in BUILTIN:
        return BUILTIN[name_or_path]
    obj = json.loads(Path(name_or_path).read_text(encoding="utf-8"))
    return Scenario.from_dict(obj)


@dataclass
class ScenarioResult:
    scenario: Scenario
    miner: MinerResult
    server_logs: list = field(default_factory=list)  # SessionLog per server session
    relay_logs: list = field(default_factory=list)  # SessionLog per relay session
    ledger: dict = field(default_factory=dict)
    content: object = None
    blacklist: object = None

    def to_dict(self, timing: bool = False) -> dict:
        """Report; wall-clock measurements are left out unless ``timing``."""
        miner = self.miner.summary()
        content = self.content.to_dict()
        if not timing:
            miner.pop("busy_fraction")
            content["evidence"] = [kind for kind, _ in content["evidence"]]
        return {
            "scenario": asdict(self.scenario),
            "endpoint": self.scenario.endpoint,
            "miner": miner,
            "ledger": self.ledger,
            "verdicts": {"content": content, "blacklist": self.blacklist.to_dict()},
        }


async def run_scenario_async(sc: Scenario) -> ScenarioResult:
    server = DropzoneServer(ServerConfig(target=sc.target, seed=sc.seed))
    async with server:
        relay = RelayProxy(server.url) if sc.relay else None
        if relay:
            await relay.start()
        try:
            cfg = MinerConfig(
                endpoint=relay.url if relay else server.url,
                site_key=sc.site_key,
                throttle=sc.throttle,
                hash_budget=sc.hash_budget,
                max_shares=sc.max_shares,
                time_budget=sc.time_budget,
                seed=sc.seed,
            )
            miner = await run_miner(cfg)
            # let the server and relay finish their close handshakes
            await asyncio.sleep(0.05)
        finally:
            if relay:
                await relay.stop()
    blacklist = sc.blacklist if sc.blacklist is not None else load_blacklist()
    return ScenarioResult(
        scenario=sc,
        miner=miner,
        server_logs=[s.log for s in server.sessions],
        relay_logs=[s.log() for s in relay.sessions] if relay else [],
        ledger=dict(server.ledger),
        content=content_verdict(miner.log.entries),
        blacklist=blacklist_detector(sc.endpoint, blacklist),
    )


def run_scenario(sc: Scenario | str) -> ScenarioResult:
    if isinstance(sc, str):
        sc = load_scenario(sc)
    return asyncio.run(run_scenario_async(sc))


def replay_credit(log: F.SessionLog, target: str) -> int:
    """Accepted hashes implied by a log: hash_accept frames times the per-share credit."""
    return sum(1 for k in log.kinds if k == "hash_accept") * F.share_credit(target)
