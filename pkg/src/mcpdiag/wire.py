"""Control-plane envelopes and data-plane event streams.

The control plane is JSON-RPC 2.0. Stdio bindings frame one envelope per
line (newline-delimited JSON, UTF-8); HTTP bindings carry one envelope per
request/response body. The data plane is a Server-Sent-Events stream of
stdout lines plus lifecycle events, one stream per tool call.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .errors import (
    InvalidEnvelope,
    InvalidRequest,
    ProtocolParseError,
    UnknownCall,
)

JSONRPC_VERSION = "2.0"
MAX_FRAME_BYTES = 1024 * 1024  # oversize input is rejected, never truncated

# Fixed data-plane event vocabulary.
EVENT_STDOUT = "stdout_line"
EVENT_STDERR = "stderr_line"
EVENT_EXIT = "exit"
EVENT_ELICITATION = "elicitation_pending"
EVENT_LOSSY = "lossy"

STREAM_BUFFER_LIMIT = 10_000


@dataclass
class RpcEnvelope:
    """One JSON-RPC 2.0 message (request, notification, or response).

    Exactly one of the three shapes holds: method present (request or
    notification), result present, or error present.
    """

    id: Optional[int | str] = None
    method: Optional[str] = None
    params: Optional[object] = None
    result: Optional[object] = None
    error: Optional[dict] = None
    _has_result: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        if self.result is not None:
            self._has_result = True

    @property
    def is_request(self) -> bool:
        return self.method is not None and self.id is not None

    @property
    def is_notification(self) -> bool:
        return self.method is not None and self.id is None

    @property
    def is_response(self) -> bool:
        return self.method is None and (self._has_result or self.error is not None)

    def check(self) -> None:
        """Raise InvalidEnvelope unless exactly one message shape holds."""
        shapes = sum(
            (self.method is not None, self._has_result, self.error is not None)
        )
        if shapes != 1:
            raise InvalidEnvelope(
                f"envelope must have exactly one of method/result/error, got {shapes}"
            )
        if self.error is not None:
            if not isinstance(self.error, dict) or "code" not in self.error:
                raise InvalidEnvelope("error member must carry an integer code")

    def to_obj(self) -> dict:
        obj: dict = {"jsonrpc": JSONRPC_VERSION}
        if self.id is not None:
            obj["id"] = self.id
        if self.method is not None:
            obj["method"] = self.method
            if self.params is not None:
                obj["params"] = self.params
        elif self._has_result:
            obj["result"] = self.result
        elif self.error is not None:
            obj["error"] = self.error
        return obj

    @classmethod
    def response(cls, id, result) -> "RpcEnvelope":
        env = cls(id=id, result=result)
        env._has_result = True
        return env

    @classmethod
    def failure(cls, id, code: int, message: str, data=None) -> "RpcEnvelope":
        err = {"code": code, "message": message}
        if data is not None:
            err["data"] = data
        return cls(id=id, error=err)

    @classmethod
    def request(cls, id, method: str, params=None) -> "RpcEnvelope":
        return cls(id=id, method=method, params=params)

    @classmethod
    def notification(cls, method: str, params=None) -> "RpcEnvelope":
        return cls(method=method, params=params)


def encode_envelope(msg: RpcEnvelope) -> bytes:
    """Serialize a valid envelope as one newline-terminated frame."""
    msg.check()
    return json.dumps(msg.to_obj(), separators=(",", ":")).encode("utf-8") + b"\n"


def decode_envelope(frame: bytes | str) -> RpcEnvelope:
    """Decode one frame (line or HTTP body) into an envelope.

    Raises ProtocolParseError (-32700) on malformed JSON and InvalidRequest
    (-32600) on oversize or structurally invalid envelopes.
    """
    if isinstance(frame, str):
        frame = frame.encode("utf-8")
    if len(frame) > MAX_FRAME_BYTES:
        raise InvalidRequest(f"frame exceeds {MAX_FRAME_BYTES} bytes")
    try:
        obj = json.loads(frame.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise ProtocolParseError(f"malformed JSON frame: {exc}") from exc
    if not isinstance(obj, dict):
        raise InvalidRequest("envelope must be a JSON object")
    env = RpcEnvelope(
        id=obj.get("id"),
        method=obj.get("method"),
        params=obj.get("params"),
        result=obj.get("result"),
        error=obj.get("error"),
    )
    if "result" in obj:
        env._has_result = True
    if env.method is not None and not isinstance(env.method, str):
        raise InvalidRequest("method must be a string")
    try:
        env.check()
    except InvalidEnvelope as exc:
        raise InvalidRequest(str(exc)) from exc
    return env


@dataclass
class SseEvent:
    """One Server-Sent-Events block."""

    event: str
    data: str
    id: Optional[int] = None


def sse_serialize(ev: SseEvent) -> str:
    """Render the bit-exact SSE wire form; multi-line data becomes one
    `data:` field per line, terminated by a blank line."""
    data = ev.data.replace("\r\n", "\n").replace("\r", "\n")
    out = []
    if ev.id is not None:
        out.append(f"id: {ev.id}\n")
    out.append(f"event: {ev.event}\n")
    for line in data.split("\n"):
        out.append(f"data: {line}\n")
    out.append("\n")
    return "".join(out)


def sse_parse(text: str) -> list[SseEvent]:
    """Conforming reader for streams produced by sse_serialize; used by the
    host client and as the test-side reassembler."""
    events: list[SseEvent] = []
    event_name = ""
    data_lines: list[str] = []
    last_id: Optional[int] = None
    have_field = False
    for raw in text.split("\n"):
        line = raw.rstrip("\r")
        if line == "":
            if have_field:
                events.append(
                    SseEvent(event=event_name or "message",
                             data="\n".join(data_lines), id=last_id)
                )
            event_name = ""
            data_lines = []
            last_id = None
            have_field = False
            continue
        if line.startswith(":"):
            continue
        name, _, value = line.partition(":")
        if value.startswith(" "):
            value = value[1:]
        if name == "event":
            event_name = value
            have_field = True
        elif name == "data":
            data_lines.append(value)
            have_field = True
        elif name == "id":
            try:
                last_id = int(value)
            except ValueError:
                last_id = None
            have_field = True
    return events


class StreamBuffer:
    """Single-producer, multi-subscriber event buffer for one tool call.

    Sequence ids strictly increase. The buffer is bounded: beyond
    STREAM_BUFFER_LIMIT events the oldest are dropped and late readers see
    an explicit lossy marker instead of silently missing data. Subscribers
    never block the producer.
    """

    def __init__(self, call_id: str, limit: int = STREAM_BUFFER_LIMIT):
        self.call_id = call_id
        self._limit = limit
        self._events: list[SseEvent] = []
        self._base = 0  # id of the first retained event
        self._next_id = 0
        self._finished = False
        self._cond = threading.Condition()

    def emit(self, event: str, data: str) -> SseEvent:
        with self._cond:
            if self._finished:
                raise RuntimeError("emit after stream finished")
            ev = SseEvent(event=event, data=data, id=self._next_id)
            self._next_id += 1
            self._events.append(ev)
            if len(self._events) > self._limit:
                drop = len(self._events) - self._limit
                del self._events[:drop]
                self._base += drop
            self._cond.notify_all()
            return ev

    def finish(self, exit_data: str) -> None:
        """Emit the terminal exit event and close the stream."""
        with self._cond:
            if self._finished:
                return
            ev = SseEvent(event=EVENT_EXIT, data=exit_data, id=self._next_id)
            self._next_id += 1
            self._events.append(ev)
            self._finished = True
            self._cond.notify_all()

    @property
    def finished(self) -> bool:
        with self._cond:
            return self._finished

    def subscribe(self, from_id: int = 0) -> Iterator[SseEvent]:
        """Yield buffered events with id >= from_id, then live events, ending
        after the terminal exit event. Dropped ranges yield a lossy marker."""
        next_id = from_id
        while True:
            with self._cond:
                while next_id >= self._base + len(self._events) and not self._finished:
                    self._cond.wait()
                if next_id >= self._base + len(self._events):
                    return  # finished and fully drained
                if next_id < self._base:
                    dropped = self._base - next_id
                    next_id = self._base
                    gap: Optional[SseEvent] = SseEvent(
                        event=EVENT_LOSSY, data=str(dropped), id=None)
                else:
                    gap = None
                ev = self._events[next_id - self._base]
                next_id += 1
            if gap is not None:
                yield gap
            yield ev
            if ev.event == EVENT_EXIT:
                return


class StreamRegistry:
    """Maps in-flight call ids to their stream buffers.

    Finished or unknown call ids raise UnknownCall on subscription; an
    existing subscriber keeps draining its buffer after the call finishes.
    """

    def __init__(self):
        self._streams: dict[str, StreamBuffer] = {}
        self._lock = threading.Lock()

    def open(self, call_id: str) -> StreamBuffer:
        with self._lock:
            if call_id in self._streams:
                raise ValueError(f"stream already open for call {call_id}")
            buf = StreamBuffer(call_id)
            self._streams[call_id] = buf
            return buf

    def subscribe(self, call_id: str, from_id: int = 0) -> Iterator[SseEvent]:
        with self._lock:
            buf = self._streams.get(call_id)
        if buf is None or buf.finished:
            raise UnknownCall(f"no in-flight call {call_id}")
        return buf.subscribe(from_id)

    def finish(self, call_id: str, exit_data: str) -> None:
        with self._lock:
            buf = self._streams.pop(call_id, None)
        if buf is not None:
            buf.finish(exit_data)


def read_frames(stream) -> Iterator[bytes]:
    """Yield newline-delimited frames from a binary stream."""
    for line in stream:
        line = line.rstrip(b"\r\n")
        if line:
            yield line


def write_frame(stream, msg: RpcEnvelope, lock: Optional[threading.Lock] = None) -> None:
    frame = encode_envelope(msg)
    if lock is not None:
        with lock:
            stream.write(frame)
            stream.flush()
    else:
        stream.write(frame)
        stream.flush()
