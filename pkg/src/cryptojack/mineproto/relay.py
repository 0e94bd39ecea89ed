"""Transparent WebSocket relay that forwards every message unchanged and taps a copy."""

from __future__ import annotations

import asyncio
import time
from dataclasses import dataclass, field

from websockets.asyncio.client import connect
from websockets.asyncio.server import serve
from websockets.exceptions import ConnectionClosed, InvalidHandshake

from . import frames as F

CLOSE_UPSTREAM_DOWN = 1014  # bad gateway


@dataclass
class TapEntry:
    t: float
    direction: str
    payload: str | bytes

    def frame(self) -> F.ProtocolFrame | None:
        return F.classify_frame(self.payload)


@dataclass
class RelaySession:
    tap: list = field(default_factory=list)

    def log(self) -> F.SessionLog:
        """Protocol frames seen at the relay (non-protocol payloads skipped)."""
        out = F.SessionLog()
        for e in self.tap:
            frame = e.frame()
            if frame is not None:
                out.append(F.LogEntry(e.t, e.direction, frame))
        return out


class RelayProxy:
    def __init__(self, upstream: str, host: str = "127.0.0.1", port: int = 0):
        self.upstream = upstream
        self.host, self._port = host, port
        self.sessions: list[RelaySession] = []
        self._server = None

    async def start(self) -> "RelayProxy":
        self._server = await serve(self._handle, self.host, self._port)
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
        return f"ws://{self.host}:{self.port}/proxy"

    async def _handle(self, down) -> None:
        session = RelaySession()
        self.sessions.append(session)
        t0 = time.monotonic()
        try:
            up = await connect(self.upstream)
        except (OSError, InvalidHandshake, asyncio.TimeoutError):
            await down.close(CLOSE_UPSTREAM_DOWN, "upstream unreachable")
            return

        async def pump(src, dst, direction):
            try:
                async for msg in src:
                    session.tap.append(TapEntry(time.monotonic() - t0, direction, msg))
                    await dst.send(msg)
            except ConnectionClosed:
                pass
            finally:
                # mirror the close code so the far side sees what the near side saw
                code = src.close_code
                if code is not None and code not in (1005, 1006):
                    await dst.close(code, src.close_reason or "")
                else:
                    await dst.close()

        await asyncio.gather(pump(down, up, F.C2S), pump(up, down, F.S2C))
