"""Newline-delimited TCP classification service.

Protocol: one URL per ``\\n``-terminated request line; one response line per
request, in order, either ``<label>\\t<prob>`` or ``ERROR\\t<reason>``.
All buffered lines of a connection are classified as one batch.
"""

from __future__ import annotations

import asyncio
import logging
import signal
import threading

from urlsift.store import ModelBundle

log = logging.getLogger(__name__)

MAX_LINE_BYTES = 64 * 1024
READ_CHUNK = 64 * 1024


def format_prob(p: float) -> str:
    return f"{p:.4f}"


def respond(bundle: ModelBundle, lines: list[bytes]) -> list[str]:
    """Response line (without newline) for each raw request line."""
    out: list[str | None] = [None] * len(lines)
    urls, slots = [], []
    for i, raw in enumerate(lines):
        if len(raw) > MAX_LINE_BYTES:
            out[i] = "ERROR\tline-too-long"
            continue
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError:
            out[i] = "ERROR\tinvalid-utf8"
            continue
        url = text.strip()
        if not url:
            out[i] = "ERROR\tempty-url"
            continue
        urls.append(url)
        slots.append(i)
    for i, (label, prob) in zip(slots, bundle.classify(urls)):
        out[i] = f"{label}\t{format_prob(prob)}"
    return out


class ClassificationServer:
    def __init__(self, bundle: ModelBundle, host: str = "127.0.0.1", port: int = 0):
        self.bundle = bundle
        self.host = host
        self.port = port
        self._server: asyncio.AbstractServer | None = None

    async def _handle(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        peer = writer.get_extra_info("peername")
        buf = b""
        discarding = False  # inside an over-long line
        try:
            while True:
                chunk = await reader.read(READ_CHUNK)
                if not chunk:
                    break
                buf += chunk
                *complete, buf = buf.split(b"\n")
                batch: list[bytes] = []
                for line in complete:
                    if discarding:
                        discarding = False  # tail of an over-long line, already answered
                    else:
                        batch.append(line)
                replies = respond(self.bundle, batch) if batch else []
                if discarding:
                    buf = b""
                elif len(buf) > MAX_LINE_BYTES:
                    replies.append("ERROR\tline-too-long")
                    discarding, buf = True, b""
                if replies:
                    writer.write(("\n".join(replies) + "\n").encode("utf-8"))
                    await writer.drain()
            if buf and not discarding:
                writer.write((respond(self.bundle, [buf])[0] + "\n").encode("utf-8"))
                await writer.drain()
        except (ConnectionResetError, BrokenPipeError):
            log.debug("connection %s reset", peer)
        finally:
            writer.close()
            try:
                await writer.wait_closed()
            except (ConnectionResetError, BrokenPipeError):
                pass

    async def start(self):
        self._server = await asyncio.start_server(self._handle, self.host, self.port, limit=MAX_LINE_BYTES)
        self.port = self._server.sockets[0].getsockname()[1]
        return self

    async def close(self):
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()


async def run_forever(bundle: ModelBundle, host: str, port: int, ready=None):
    """Serve until SIGINT/SIGTERM; ``ready(port)`` is called once bound."""
    stop = asyncio.Event()
    loop = asyncio.get_running_loop()
    for sig in (signal.SIGINT, signal.SIGTERM):
        try:
            loop.add_signal_handler(sig, stop.set)
        except (NotImplementedError, RuntimeError):
            pass
    server = ClassificationServer(bundle, host, port)
    await server.start()
    if ready is not None:
        ready(server.port)
    try:
        await stop.wait()
    finally:
        await server.close()


class BackgroundServer:
    """Run a :class:`ClassificationServer` on its own event loop thread.

    Used by tests and benchmarks::

        with BackgroundServer(bundle) as srv:
            socket.create_connection(("127.0.0.1", srv.port))
    """

    def __init__(self, bundle: ModelBundle, host: str = "127.0.0.1", port: int = 0):
        self.server = ClassificationServer(bundle, host, port)
        self._loop = asyncio.new_event_loop()
        self._thread = threading.Thread(target=self._loop.run_forever, daemon=True)

    @property
    def port(self) -> int:
        return self.server.port

    def __enter__(self):
        self._thread.start()
        asyncio.run_coroutine_threadsafe(self.server.start(), self._loop).result(timeout=10)
        return self

    def __exit__(self, *exc):
        asyncio.run_coroutine_threadsafe(self.server.close(), self._loop).result(timeout=10)
        self._loop.call_soon_threadsafe(self._loop.stop)
        self._thread.join(timeout=10)
        self._loop.close()
