"""Throttled miner client.

Work is duty-cycled: after each busy slice of ``b`` seconds the client idles
``b * alpha / (1 - alpha)`` seconds, so the busy fraction is ``1 - alpha``.
"""

from __future__ import annotations

import asyncio
import json
import random
import time
from dataclasses import dataclass, field
from typing import Callable

from websockets.asyncio.client import connect
from websockets.exceptions import ConnectionClosed

from ..errors import SessionError
from . import frames as F
from .server import sha256


@dataclass
class MinerConfig:
    endpoint: str
    site_key: str
    throttle: float = 0.5
    hash_budget: int | None = 4096
    time_budget: float | None = None  # seconds of mining (busy + idle)
    max_shares: int | None = None
    slice_seconds: float = 0.01
    seed: int = 0
    digest: Callable[[bytes], bytes] = sha256
    recv_timeout: float = 5.0

    def __post_init__(self):
        if not 0 <= self.throttle <= 1:
            raise ValueError("throttle must be in [0, 1]")
        if self.hash_budget is None and self.time_budget is None and self.max_shares is None:
            raise ValueError("need a hash, time or share budget")


@dataclass
class MinerResult:
    log: F.SessionLog = field(default_factory=F.SessionLog)
    hashes_computed: int = 0
    shares: int = 0
    accepted_hashes: int = 0
    busy_time: float = 0.0
    idle_time: float = 0.0
    close_code: int | None = None
    error: str | None = None

    @property
    def busy_fraction(self) -> float:
        total = self.busy_time + self.idle_time
        return self.busy_time / total if total > 0 else 0.0

    @property
    def hash_rate(self) -> float:
        total = self.busy_time + self.idle_time
        return self.hashes_computed / total if total > 0 else 0.0

    def check(self) -> "MinerResult":
        if self.error:
            raise SessionError(self.error)
        return self

    def summary(self) -> dict:
        return {
            "frames": self.log.kinds,
            "hashes_computed": self.hashes_computed,
            "shares": self.shares,
            "accepted_hashes": self.accepted_hashes,
            "busy_fraction": self.busy_fraction,
            "close_code": self.close_code,
            "error": self.error,
        }


class _Session:
    def __init__(self, ws, cfg: MinerConfig, result: MinerResult):
        self.ws, self.cfg, self.result = ws, cfg, result
        self.t0 = time.monotonic()

    async def send(self, frame: F.ProtocolFrame) -> None:
        self.result.log.append(F.LogEntry(time.monotonic() - self.t0, F.C2S, frame))
        await self.ws.send(frame.serialize())

    async def recv(self, kind: str) -> F.ProtocolFrame:
        while True:
            raw = await asyncio.wait_for(self.ws.recv(), self.cfg.recv_timeout)
            frame = F.classify_frame(raw)
            if frame is None:
                continue
            self.result.log.append(F.LogEntry(time.monotonic() - self.t0, F.S2C, frame))
            if frame.kind != kind:
                raise SessionError(f"expected {kind}, got {frame.kind}")
            return frame


def _budget_left(cfg: MinerConfig, res: MinerResult, started: float) -> bool:
    if cfg.hash_budget is not None and res.hashes_computed >= cfg.hash_budget:
        return False
    if cfg.max_shares is not None and res.shares >= cfg.max_shares:
        return False
    if cfg.time_budget is not None and time.perf_counter() - started >= cfg.time_budget:
        return False
    return True


async def _mine(s: _Session, job: F.ProtocolFrame, rng: random.Random) -> None:
    cfg, res = s.cfg, s.result
    alpha = cfg.throttle
    started = time.perf_counter()
    owed = 0.0  # idle time still due; sleeps overshoot, so the excess is carried over
    while _budget_left(cfg, res, started):
        blob = bytes.fromhex(job.params["blob"])
        limit = F.target_value(job.params["target"])
        nonce = rng.getrandbits(32)
        found = None
        t = time.perf_counter()
        while found is None:
            for _ in range(32):
                nb = nonce.to_bytes(4, "big")
                d = cfg.digest(blob + nb)
                res.hashes_computed += 1
                if F.share_value(d) <= limit:
                    found = (nb.hex(), d.hex())
                    break
                nonce = (nonce + 1) & 0xFFFFFFFF
                if cfg.hash_budget is not None and res.hashes_computed >= cfg.hash_budget:
                    break
            if time.perf_counter() - t >= cfg.slice_seconds or not _budget_left(cfg, res, started):
                break
        busy = time.perf_counter() - t
        res.busy_time += busy
        owed += busy * alpha / (1 - alpha)
        owed = await _idle(owed, res, cfg.slice_seconds)
        if found is not None:
            await s.send(F.submit(job.params["job_id"], *found))
            res.accepted_hashes = (await s.recv("hash_accept")).params["hashes"]
            res.shares += 1
            job = await s.recv("job")
    await _idle(owed, res, 0.0)


async def _idle(owed: float, res: MinerResult, min_sleep: float) -> float:
    if owed <= 0 or owed < min_sleep:
        await asyncio.sleep(0)
        return owed
    t = time.perf_counter()
    await asyncio.sleep(owed)
    slept = time.perf_counter() - t
    res.idle_time += slept
    return owed - slept


async def run_miner(cfg: MinerConfig, log_sink: Callable[[F.LogEntry], None] | None = None) -> MinerResult:
    """One mining session. Rejections by the server are reported in ``MinerResult.error``."""
    res = MinerResult()
    rng = random.Random(cfg.seed)
    try:
        ws = await connect(cfg.endpoint, open_timeout=cfg.recv_timeout)
    except (OSError, asyncio.TimeoutError) as exc:
        raise SessionError(f"cannot reach {cfg.endpoint}: {exc}") from exc
    s = _Session(ws, cfg, res)
    try:
        await s.send(F.auth(cfg.site_key))
        await s.recv("authed")
        job = await s.recv("job")
        if cfg.throttle < 1:
            await _mine(s, job, rng)
        await ws.close()
    except ConnectionClosed as exc:
        rcvd = exc.rcvd
        res.error = f"connection closed by server: {rcvd.code} {rcvd.reason}" if rcvd else "connection lost"
    except (SessionError, asyncio.TimeoutError, json.JSONDecodeError) as exc:
        res.error = str(exc) or type(exc).__name__
        await ws.close()
    finally:
        res.close_code = ws.close_code
    if log_sink:
        for e in res.log.entries:
            log_sink(e)
    return res


def mine(cfg: MinerConfig) -> MinerResult:
    return asyncio.run(run_miner(cfg))
