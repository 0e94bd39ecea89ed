"""Dropzone server: authenticates site keys, hands out jobs and credits shares."""

from __future__ import annotations

import asyncio
import hashlib
import random
import re
import time
from dataclasses import dataclass, field
from typing import Callable

from websockets.asyncio.server import serve
from websockets.exceptions import ConnectionClosed

from ..errors import MalformedFrame
from . import frames as F

CLOSE_BAD_KEY = 4001
CLOSE_BAD_SHARE = 4002
CLOSE_PROTOCOL = 4003

SITE_KEY = re.compile(r"[A-Za-z0-9]{32}\Z")
BLOB_HEX_CHARS = 152


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def share_digest(blob: str, nonce: str, digest: Callable[[bytes], bytes] = sha256) -> bytes:
    return digest(bytes.fromhex(blob) + bytes.fromhex(nonce))


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 0
    target: str = "ffffff00"
    seed: int = 0
    token_length: int = 0  # the observed authed frame carries an empty token
    digest: Callable[[bytes], bytes] = sha256
    accepted_keys: frozenset | None = None  # None: any well-formed key


@dataclass
class ServerSession:
    site_key: str | None = None
    hashes: int = 0
    shares: int = 0
    log: F.SessionLog = field(default_factory=F.SessionLog)
    close_code: int | None = None


class DropzoneServer:
    """Async WebSocket dropzone. Use ``async with DropzoneServer(cfg) as srv``."""

    def __init__(self, config: ServerConfig | None = None):
        self.config = config or ServerConfig()
        self.credit = F.share_credit(self.config.target)
        self.ledger: dict[str, int] = {}
        self.sessions: list[ServerSession] = []
        self._ledger_lock = asyncio.Lock()
        self._rng = random.Random(self.config.seed)
        self._server = None

    # lifecycle

    async def start(self) -> "DropzoneServer":
        self._server = await serve(self._handle, self.config.host, self.config.port)
        return self

    async def stop(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
            self._server = None

    async def __aenter__(self):
        return await self.start()

    async def __aexit__(self, *exc):
        await self.stop()

    @property
    def port(self) -> int:
        return self._server.sockets[0].getsockname()[1]

    @property
    def url(self) -> str:
        return f"ws://{self.config.host}:{self.port}/proxy"

    # protocol

    def _new_job(self) -> F.ProtocolFrame:
        job_id = str(self._rng.randrange(10 ** 14, 10 ** 15))
        blob = "%0*x" % (BLOB_HEX_CHARS, self._rng.getrandbits(4 * BLOB_HEX_CHARS))
        return F.job(job_id, blob, self.config.target)

    def _token(self) -> str:
        n = self.config.token_length
        return "%0*x" % (n, self._rng.getrandbits(4 * n)) if n else ""

    def _key_ok(self, key: str) -> bool:
        if not SITE_KEY.match(key):
            return False
        return self.config.accepted_keys is None or key in self.config.accepted_keys

    def _share_ok(self, job: F.ProtocolFrame, sub: F.ProtocolFrame) -> bool:
        if sub.params["job_id"] != job.params["job_id"]:
            return False
        d = share_digest(job.params["blob"], sub.params["nonce"], self.config.digest)
        if sub.params["result"] != d.hex():
            return False
        return F.share_value(d) <= F.target_value(job.params["target"])

    async def _handle(self, ws) -> None:
        session = ServerSession()
        self.sessions.append(session)
        t0 = time.monotonic()

        async def send(frame: F.ProtocolFrame) -> None:
            session.log.append(F.LogEntry(time.monotonic() - t0, F.S2C, frame))
            await ws.send(frame.serialize())

        async def close(code: int, reason: str) -> None:
            session.close_code = code
            await ws.close(code, reason)

        state = F.SessionState()
        job = None
        try:
            async for raw in ws:
                try:
                    frame = F.classify_frame(raw)
                except MalformedFrame as exc:
                    await close(CLOSE_PROTOCOL, str(exc)[:120])
                    return
                if frame is None:
                    continue
                session.log.append(F.LogEntry(time.monotonic() - t0, F.C2S, frame))
                if frame.direction != F.C2S:
                    await close(CLOSE_PROTOCOL, f"{frame.kind} is server-only")
                    return
                if frame.kind == "auth":
                    if state.phase != "Idle":
                        await close(CLOSE_PROTOCOL, "duplicate auth")
                        return
                    if not self._key_ok(frame.params["site_key"]):
                        await close(CLOSE_BAD_KEY, "invalid site key")
                        return
                    session.site_key = frame.params["site_key"]
                    state.phase = "Authed"
                    await send(F.authed(self._token(), session.hashes))
                    job = self._new_job()
                    state.phase = "JobIssued"
                    await send(job)
                elif frame.kind == "submit":
                    if state.phase != "JobIssued" or not self._share_ok(job, frame):
                        await close(CLOSE_BAD_SHARE, "rejected share")
                        return
                    async with self._ledger_lock:
                        self.ledger[session.site_key] = self.ledger.get(session.site_key, 0) + self.credit
                    session.hashes += self.credit
                    session.shares += 1
                    await send(F.hash_accept(session.hashes))
                    job = self._new_job()
                    await send(job)
        except ConnectionClosed:
            pass
        finally:
            if session.close_code is None:
                session.close_code = ws.close_code
