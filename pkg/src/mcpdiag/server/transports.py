"""Transport bindings for the diagnostics server.

stdio: one envelope per line on stdin/stdout; requests are handled on
worker threads so the reader never blocks on an in-flight call, and
server->host envelopes (call_started, elicitation/create) are written from
an outbox drainer.

http: POST /rpc carries one envelope per body and returns the response
envelope; GET /messages long-polls the session outbox for server->host
envelopes; GET /stream/{call_id} is the SSE data plane. The SSE listener
also runs alongside stdio (non-headless) so the data plane exists for
both bindings; its address is reported in the initialize result.
"""

from __future__ import annotations

import json
import logging
import socket
import sys
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional
from urllib.parse import parse_qs, urlparse

from ..errors import ProtocolParseError, InvalidRequest, RpcError, UnknownCall
from ..wire import (
    MAX_FRAME_BYTES,
    RpcEnvelope,
    decode_envelope,
    encode_envelope,
    sse_serialize,
)
from .service import DiagServer, Session

log = logging.getLogger(__name__)

LONG_POLL_DEFAULT_S = 25.0


def serve_stdio(server: DiagServer, stdin=None, stdout=None) -> None:
    """Run the stdio binding until stdin closes."""
    stdin = stdin if stdin is not None else sys.stdin.buffer
    stdout = stdout if stdout is not None else sys.stdout.buffer
    write_lock = threading.Lock()
    session_box: dict[str, Optional[Session]] = {"session": None}
    stop = threading.Event()

    def send(envelope: RpcEnvelope) -> None:
        frame = encode_envelope(envelope)
        with write_lock:
            stdout.write(frame)
            stdout.flush()

    def drain_outbox() -> None:
        while not stop.is_set():
            session = session_box["session"]
            if session is None:
                stop.wait(0.05)
                continue
            msg = server.drain_outbox(session, timeout=0.2)
            if msg is not None:
                send(msg)

    drainer = threading.Thread(target=drain_outbox, daemon=True)
    drainer.start()

    def handle(envelope: RpcEnvelope) -> None:
        response = server.dispatch(envelope, session_box["session"])
        if envelope.method == "initialize" and response is not None \
                and response.result is not None:
            session_box["session"] = server.get_session(
                response.result["session_id"])
        if response is not None:
            send(response)

    try:
        for raw in stdin:
            raw = raw.rstrip(b"\r\n")
            if not raw:
                continue
            try:
                envelope = decode_envelope(raw)
            except (ProtocolParseError, InvalidRequest) as exc:
                send(RpcEnvelope.failure(None, exc.code, exc.message))
                continue
            if envelope.method == "initialize":
                handle(envelope)  # synchronous so session exists for later frames
            else:
                threading.Thread(target=handle, args=(envelope,),
                                 daemon=True).start()
    finally:
        stop.set()


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "mcpdiag"

    def log_message(self, fmt, *args):  # route through logging, not stderr
        log.debug("http: " + fmt, *args)

    @property
    def diag(self) -> DiagServer:
        return self.server.diag_server

    def _send_json(self, status: int, payload: Optional[bytes]) -> None:
        self.send_response(status)
        if payload is None:
            self.send_header("Content-Length", "0")
            self.end_headers()
            return
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def do_POST(self):
        if urlparse(self.path).path != "/rpc":
            self._send_json(404, b'{"error":"not found"}')
            return
        length = int(self.headers.get("Content-Length", 0))
        if length > MAX_FRAME_BYTES:
            env = RpcEnvelope.failure(None, -32600, "frame exceeds limit")
            self._send_json(200, encode_envelope(env))
            return
        body = self.rfile.read(length)
        try:
            envelope = decode_envelope(body)
        except RpcError as exc:
            env = RpcEnvelope.failure(None, exc.code, exc.message)
            self._send_json(200, encode_envelope(env))
            return
        response = self.diag.dispatch(envelope)
        if response is None:
            self._send_json(202, None)
        else:
            self._send_json(200, encode_envelope(response))

    def do_GET(self):
        parsed = urlparse(self.path)
        if parsed.path == "/messages":
            self._long_poll(parse_qs(parsed.query))
            return
        if parsed.path.startswith("/stream/"):
            self._stream(parsed.path.split("/stream/", 1)[1], parse_qs(parsed.query))
            return
        self._send_json(404, b'{"error":"not found"}')

    def _long_poll(self, query: dict) -> None:
        sid = (query.get("session") or [""])[0]
        timeout = float((query.get("timeout") or [LONG_POLL_DEFAULT_S])[0])
        try:
            session = self.diag.get_session(sid)
        except RpcError:
            self._send_json(404, b'{"error":"unknown session"}')
            return
        msg = self.diag.drain_outbox(session, timeout=timeout)
        if msg is None:
            self._send_json(204, None)
        else:
            self._send_json(200, encode_envelope(msg))

    def _stream(self, call_id: str, query: dict) -> None:
        last_id = self.headers.get("Last-Event-ID")
        if last_id is None:
            last_id = (query.get("last_id") or ["-1"])[0]
        from_id = int(last_id) + 1
        try:
            events = self.diag.streams.subscribe(call_id, from_id)
        except UnknownCall:
            self._send_json(404, b'{"error":"unknown call"}')
            return
        self.send_response(200)
        self.send_header("Content-Type", "text/event-stream")
        self.send_header("Cache-Control", "no-cache")
        self.send_header("Connection", "close")
        self.end_headers()
        try:
            for ev in events:
                self.wfile.write(sse_serialize(ev).encode("utf-8"))
                self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError):
            pass
        self.close_connection = True


class HttpTransport:
    """Owns the HTTP listener; used for the full http binding and for the
    stdio binding's SSE side channel."""

    def __init__(self, server: DiagServer, port: int = 0, host: str = "127.0.0.1"):
        self.diag_server = server
        self.httpd = ThreadingHTTPServer((host, port), _Handler)
        self.httpd.diag_server = server
        self.httpd.daemon_threads = True
        self.address = f"http://{host}:{self.httpd.server_address[1]}"
        server.config.stream_endpoint = f"{self.address}/stream"

    def serve_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        thread.start()
        return thread

    def serve_forever(self) -> None:
        self.httpd.serve_forever()

    def shutdown(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
