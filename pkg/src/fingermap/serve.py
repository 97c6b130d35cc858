"""Streaming session endpoint.

One TCP port speaks two encodings of the same line-delimited JSON
protocol: plain sockets send one JSON object per line; browsers connect
with a WebSocket handshake (sniffed from the leading GET) and send one
JSON object per text frame. The port also serves the static explorer
files so the whole tool runs from a single address.

Message kinds:

* hello        client -> server: {version, calibration?, params?};
               server acks with its version and the active params.
* frame        {seq, frame}: one HandFrame; the server answers with
               zero or more event messages then exactly one pose, all
               carrying the same seq.
* set_params   partial params patch; applies from the next frame;
               acked with the merged params.
* pose/event   server -> client replies.
* error        recoverable per-frame failures (frame skipped) or, for
               protocol violations, a farewell before closing.
* metrics_snapshot  sent when the client closes cleanly.

Sessions are independent: each connection owns its MappingSession.
"""

from __future__ import annotations

import asyncio
import base64
import hashlib
import json
import logging
import struct
from pathlib import Path

from . import trace_io
from .core import BodyCalibration
from .errors import FingermapError, ProtocolError
from .mapping import MappingParams, MappingSession, merge_params

log = logging.getLogger("fingermap.serve")

PROTOCOL_VERSION = 1
_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
}


def pose_payload(result, frame) -> dict:
    mapped = trace_io.mapped_from_result(result, frame)
    payload = trace_io.mapped_frame_to_dict(mapped)
    del payload["events"]
    return payload


class _SessionRunner:
    """Protocol logic shared by the raw-TCP and WebSocket transports."""

    def __init__(self, calib: BodyCalibration, params: MappingParams):
        self.default_calib = calib
        self.default_params = params
        self.session: MappingSession | None = None
        self.auto_seq = 0
        self.frames = 0
        self.events = 0
        self.first_t: float | None = None
        self.last_t: float | None = None
        self.pointer_path: dict[str, float] = {}
        self.wrist_path: dict[str, float] = {}
        self._last_pointer: dict = {}
        self._last_wrist: dict = {}

    def handle(self, text: str) -> tuple[list[dict], bool]:
        """Process one message; returns (replies, keep_open)."""
        try:
            msg = json.loads(text)
        except json.JSONDecodeError as e:
            return [_error(None, f"invalid JSON: {e}", fatal=True)], False
        if not isinstance(msg, dict) or "kind" not in msg:
            return [_error(None, "message needs a 'kind'", fatal=True)], False
        kind = msg["kind"]
        try:
            if kind == "hello":
                return self._on_hello(msg), True
            if kind == "set_params":
                return self._on_set_params(msg), True
            if kind == "frame":
                return self._on_frame(msg), True
        except ProtocolError as e:
            return [_error(msg.get("seq"), str(e), fatal=True)], False
        return [_error(msg.get("seq"), f"unknown kind {kind!r}", fatal=True)], False

    def _require_session(self) -> MappingSession:
        if self.session is None:
            raise ProtocolError("hello required before this message")
        return self.session

    def _on_hello(self, msg: dict) -> list[dict]:
        if msg.get("version") != PROTOCOL_VERSION:
            raise ProtocolError(f"unsupported protocol version {msg.get('version')!r}")
        calib = self.default_calib
        params = self.default_params
        try:
            if "calibration" in msg:
                calib = trace_io.calibration_from_dict(msg["calibration"])
            if "params" in msg:
                params = merge_params(params, msg["params"])
            self.session = MappingSession(calib, params)
        except (ValueError, TypeError, AttributeError) as e:
            raise ProtocolError(f"bad hello payload: {e}") from None
        return [
            {
                "kind": "hello",
                "version": PROTOCOL_VERSION,
                "calibration": trace_io.calibration_to_dict(calib),
                "params": params.to_dict(),
            }
        ]

    def _on_set_params(self, msg: dict) -> list[dict]:
        session = self._require_session()
        patch = msg.get("params")
        if not isinstance(patch, dict):
            raise ProtocolError("set_params needs a 'params' object")
        try:
            merged = merge_params(session.params, patch)
            session.request_params(merged)
        except (ValueError, TypeError) as e:
            raise ProtocolError(f"bad params: {e}") from None
        return [{"kind": "set_params", "params": merged.to_dict()}]

    def _on_frame(self, msg: dict) -> list[dict]:
        session = self._require_session()
        seq = msg.get("seq")
        if seq is None:
            seq = self.auto_seq
        self.auto_seq = int(seq) + 1
        if "frame" not in msg:
            raise ProtocolError("frame message needs a 'frame' payload")
        try:
            frame = trace_io.frame_from_dict(msg["frame"], line=0)
            result = session.step(frame)
        except FingermapError as e:
            # the frame is skipped; the session stays usable
            return [_error(seq, str(e), fatal=False)]

        self.frames += 1
        if self.first_t is None:
            self.first_t = frame.t
        self.last_t = frame.t
        for side, pointer in result.pointers.items():
            prev = self._last_pointer.get(side)
            if prev is not None:
                self.pointer_path[side] = self.pointer_path.get(side, 0.0) + prev.distance(pointer)
            self._last_pointer[side] = pointer
        for side, hand in frame.hands.items():
            prev = self._last_wrist.get(side)
            if prev is not None:
                self.wrist_path[side] = self.wrist_path.get(side, 0.0) + prev.distance(
                    hand.wrist.position
                )
            self._last_wrist[side] = hand.wrist.position

        replies: list[dict] = []
        for event in result.events:
            self.events += 1
            replies.append(
                {
                    "kind": "event",
                    "seq": seq,
                    "event": {"side": event.side, "gesture": event.gesture, "kind": event.kind},
                }
            )
        pose = pose_payload(result, frame)
        pose["kind"] = "pose"
        pose["seq"] = seq
        replies.append(pose)
        return replies

    def snapshot(self) -> dict:
        duration = 0.0
        if self.first_t is not None and self.last_t is not None:
            duration = self.last_t - self.first_t
        return {
            "kind": "metrics_snapshot",
            "frames": self.frames,
            "events": self.events,
            "duration": trace_io.round9(duration),
            "pointer_path": {s: trace_io.round9(v) for s, v in sorted(self.pointer_path.items())},
            "physical_wrist_path": {
                s: trace_io.round9(v) for s, v in sorted(self.wrist_path.items())
            },
        }


def _error(seq, message: str, fatal: bool) -> dict:
    payload = {"kind": "error", "message": message, "fatal": fatal}
    if seq is not None:
        payload["seq"] = seq
    return payload


class Server:
    """Accepts plain-socket and WebSocket sessions on one port."""

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 0,
        calib: BodyCalibration | None = None,
        params: MappingParams | None = None,
        ui_dir: Path | None = None,
    ):
        self.host = host
        self.port = port
        self.calib = calib or BodyCalibration()
        self.params = params or MappingParams()
        self.ui_dir = ui_dir
        self._server: asyncio.AbstractServer | None = None

    async def start(self) -> None:
        self._server = await asyncio.start_server(self._accept, self.host, self.port)
        self.port = self._server.sockets[0].getsockname()[1]
        log.info("listening on %s:%d", self.host, self.port)

    async def serve_forever(self) -> None:
        if self._server is None:
            await self.start()
        assert self._server is not None
        async with self._server:
            await self._server.serve_forever()

    async def close(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()

    async def _accept(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        try:
            first = await reader.read(4)
            if first == b"GET ":
                await self._serve_http(first, reader, writer)
            else:
                await self._serve_lines(first, reader, writer)
        except (ConnectionError, asyncio.IncompleteReadError):
            pass
        except Exception:
            log.exception("session crashed")
        finally:
            try:
                writer.close()
                await writer.wait_closed()
            except (ConnectionError, OSError):
                pass

    # --- raw socket transport ------------------------------------------

    async def _serve_lines(
        self, prefix: bytes, reader: asyncio.StreamReader, writer: asyncio.StreamWriter
    ) -> None:
        runner = _SessionRunner(self.calib, self.params)
        buffer = prefix
        graceful = True
        while True:
            chunk = await reader.read(65536)
            if not chunk:
                break
            buffer += chunk
            while b"\n" in buffer:
                line, buffer = buffer.split(b"\n", 1)
                if not line.strip():
                    continue
                replies, keep_open = runner.handle(line.decode("utf-8"))
                for reply in replies:
                    writer.write((trace_io.dumps(reply) + "\n").encode("utf-8"))
                await writer.drain()
                if not keep_open:
                    graceful = False
                    return
        if graceful:
            writer.write((trace_io.dumps(runner.snapshot()) + "\n").encode("utf-8"))
            await writer.drain()

    # --- HTTP: static files and the WebSocket upgrade -------------------

    async def _serve_http(
        self, prefix: bytes, reader: asyncio.StreamReader, writer: asyncio.StreamWriter
    ) -> None:
        raw = prefix
        while b"\r\n\r\n" not in raw:
            chunk = await reader.read(4096)
            if not chunk:
                return
            raw += chunk
            if len(raw) > 65536:
                return
        head, _, _ = raw.partition(b"\r\n\r\n")
        lines = head.decode("latin-1").split("\r\n")
        request = lines[0]
        headers = {}
        for entry in lines[1:]:
            name, _, value = entry.partition(":")
            headers[name.strip().lower()] = value.strip()
        parts = request.split()
        path = parts[1] if len(parts) >= 2 else "/"

        if headers.get("upgrade", "").lower() == "websocket":
            await self._serve_websocket(headers, reader, writer)
            return
        self._serve_static(path, writer)
        await writer.drain()

    def _serve_static(self, path: str, writer: asyncio.StreamWriter) -> None:
        if self.ui_dir is None:
            writer.write(_http_response(404, b"no UI directory configured"))
            return
        name = path.split("?", 1)[0]
        if name in ("", "/"):
            name = "/index.html"
        root = self.ui_dir.resolve()
        target = (root / name.lstrip("/")).resolve()
        if not str(target).startswith(str(root)) or not target.is_file():
            writer.write(_http_response(404, b"not found"))
            return
        body = target.read_bytes()
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        writer.write(_http_response(200, body, ctype))

    async def _serve_websocket(
        self, headers: dict, reader: asyncio.StreamReader, writer: asyncio.StreamWriter
    ) -> None:
        key = headers.get("sec-websocket-key")
        if not key:
            writer.write(_http_response(400, b"missing websocket key"))
            await writer.drain()
            return
        accept = base64.b64encode(
            hashlib.sha1((key + _WS_GUID).encode("ascii")).digest()
        ).decode("ascii")
        writer.write(
            (
                "HTTP/1.1 101 Switching Protocols\r\n"
                "Upgrade: websocket\r\n"
                "Connection: Upgrade\r\n"
                f"Sec-WebSocket-Accept: {accept}\r\n\r\n"
            ).encode("ascii")
        )
        await writer.drain()

        runner = _SessionRunner(self.calib, self.params)
        graceful = True
        while True:
            try:
                opcode, payload = await _read_ws_message(reader)
            except (asyncio.IncompleteReadError, ConnectionError):
                graceful = False
                break
            if opcode == 0x8:  # close
                break
            if opcode == 0x9:  # ping -> pong
                writer.write(_ws_frame(0xA, payload))
                await writer.drain()
                continue
            if opcode != 0x1:
                continue
            replies, keep_open = runner.handle(payload.decode("utf-8"))
            for reply in replies:
                writer.write(_ws_frame(0x1, trace_io.dumps(reply).encode("utf-8")))
            await writer.drain()
            if not keep_open:
                graceful = False
                break
        if graceful:
            writer.write(_ws_frame(0x1, trace_io.dumps(runner.snapshot()).encode("utf-8")))
            writer.write(_ws_frame(0x8, b""))
            await writer.drain()


def _http_response(status: int, body: bytes, content_type: str = "text/plain") -> bytes:
    reason = {200: "OK", 400: "Bad Request", 404: "Not Found"}.get(status, "Error")
    head = (
        f"HTTP/1.1 {status} {reason}\r\n"
        f"Content-Type: {content_type}\r\n"
        f"Content-Length: {len(body)}\r\n"
        "Connection: close\r\n\r\n"
    )
    return head.encode("ascii") + body


async def _read_ws_message(reader: asyncio.StreamReader) -> tuple[int, bytes]:
    """Read one (possibly fragmented) client message; client frames are masked."""
    message = b""
    opcode = None
    while True:
        b1, b2 = await reader.readexactly(2)
        fin = b1 & 0x80
        frame_op = b1 & 0x0F
        masked = b2 & 0x80
        length = b2 & 0x7F
        if length == 126:
            (length,) = struct.unpack(">H", await reader.readexactly(2))
        elif length == 127:
            (length,) = struct.unpack(">Q", await reader.readexactly(8))
        mask = await reader.readexactly(4) if masked else b""
        payload = await reader.readexactly(length)
        if masked:
            payload = bytes(c ^ mask[i % 4] for i, c in enumerate(payload))
        if frame_op in (0x8, 0x9, 0xA):  # control frames are never fragmented
            return frame_op, payload
        if opcode is None:
            opcode = frame_op
        message += payload
        if fin:
            return opcode or 0x1, message


def _ws_frame(opcode: int, payload: bytes) -> bytes:
    head = bytes([0x80 | opcode])
    n = len(payload)
    if n < 126:
        head += bytes([n])
    elif n < 65536:
        head += bytes([126]) + struct.pack(">H", n)
    else:
        head += bytes([127]) + struct.pack(">Q", n)
    return head + payload


def run(
    host: str,
    port: int,
    calib: BodyCalibration,
    params: MappingParams,
    ui_dir: Path | None = None,
) -> None:
    """Blocking entry point for the CLI."""
    server = Server(host=host, port=port, calib=calib, params=params, ui_dir=ui_dir)

    async def main() -> None:
        await server.start()
        print(f"listening on {server.host}:{server.port}", flush=True)
        assert server._server is not None
        async with server._server:
            await server._server.serve_forever()

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        pass
