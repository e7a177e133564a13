"""The diagnostics server: session state, RPC dispatch, and the gated
tool-call procedure.

Method surface: initialize, tools/list, tools/call, notifications/initialized;
the server emits elicitation/create requests and notifications/call_started
back to the host. Every elicitation, decision, argv, exit code, and timing
is appended to the audit log.
"""

from __future__ import annotations

import itertools
import json
import logging
import threading
import time
from dataclasses import dataclass, field
from queue import Empty, Queue
from typing import Callable, Optional

from ..errors import (
    InvalidParams,
    MethodNotFound,
    ParseFailure,
    RpcError,
    SpawnFailure,
    ToolTimeout,
)
from ..wire import EVENT_ELICITATION, RpcEnvelope, StreamRegistry
from .gateway import (
    Action,
    AuthorizationToken,
    ElicitationPayload,
    SecurityGateway,
)
from .pipeline import (
    EXIT_POLICIES,
    TOOL_TIMEOUTS_S,
    ExecutionOutcome,
    check_exit,
    execute_pipeline,
)
from .registry import ToolRequest, list_tools, render_argv, validate_request

log = logging.getLogger(__name__)

PROTOCOL_VERSION = "mcp-diag/1"
MAX_CONCURRENT_PIPELINES = 4


@dataclass
class Session:
    session_id: str
    gateway: SecurityGateway
    outbox: "Queue[RpcEnvelope]" = field(default_factory=Queue)
    # waiters for responses to server->host requests, keyed by request id
    waiters: dict = field(default_factory=dict)
    waiter_lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass
class ServerConfig:
    headless: bool = False
    serializer: str = "native"  # native | external
    jc_path: str = "jc"
    binaries: dict = field(default_factory=dict)  # tool -> path or argv prefix
    timeouts_s: dict = field(default_factory=lambda: dict(TOOL_TIMEOUTS_S))
    elicitation_window_ms: int = 120_000
    audit_log_path: Optional[str] = None
    stream_endpoint: Optional[str] = None  # filled once the SSE listener binds


class AuditLog:
    """Append-only line-JSON log; a no-op when no path is configured."""

    def __init__(self, path: Optional[str]):
        self._path = path
        self._lock = threading.Lock()

    def append(self, event: str, **fields) -> None:
        if self._path is None:
            return
        record = {"ts": time.time(), "event": event, **fields}
        line = json.dumps(record, sort_keys=True)
        with self._lock:
            with open(self._path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")


class DiagServer:
    """Transport-independent server core.

    Transports deliver decoded envelopes to dispatch() on worker threads
    and drain each session's outbox for server->host messages.
    """

    def __init__(self, config: ServerConfig,
                 spawn: Optional[Callable] = None):
        self.config = config
        self.streams = StreamRegistry()
        self.audit = AuditLog(config.audit_log_path)
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._session_counter = itertools.count(1)
        self._call_counter = itertools.count(1)
        self._rpc_id_counter = itertools.count(1)
        self._exec_slots = threading.Semaphore(MAX_CONCURRENT_PIPELINES)
        self._spawn = spawn  # injectable for the process-spawn spy tests

    # -- session plumbing ---------------------------------------------------

    def create_session(self) -> Session:
        with self._lock:
            sid = f"s{next(self._session_counter)}"
            session = Session(
                session_id=sid,
                gateway=SecurityGateway(
                    headless=self.config.headless,
                    auth_window_ms=self.config.elicitation_window_ms),
            )
            self._sessions[sid] = session
            return session

    def get_session(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise InvalidParams(f"unknown session: {session_id}")
        return session

    def next_rpc_id(self) -> int:
        return next(self._rpc_id_counter)

    # -- dispatch -----------------------------------------------------------

    def dispatch(self, envelope: RpcEnvelope,
                 session: Optional[Session] = None) -> Optional[RpcEnvelope]:
        """Handle one host->server envelope; returns the response envelope
        for requests, None for notifications and responses."""
        if envelope.is_response:
            self._route_response(envelope, session)
            return None
        try:
            result = self._invoke(envelope, session)
        except RpcError as exc:
            if envelope.is_notification:
                log.warning("error in notification %s: %s", envelope.method, exc)
                return None
            return RpcEnvelope.failure(envelope.id, exc.code, exc.message,
                                       exc.data)
        except Exception as exc:  # noqa: BLE001 - map to internal error
            log.exception("internal error in %s", envelope.method)
            if envelope.is_notification:
                return None
            return RpcEnvelope.failure(envelope.id, -32603, str(exc))
        if envelope.is_notification:
            return None
        return RpcEnvelope.response(envelope.id, result)

    def _invoke(self, envelope: RpcEnvelope, session: Optional[Session]):
        method = envelope.method
        params = envelope.params or {}
        if method == "initialize":
            new = self.create_session()
            return {
                "protocol_version": PROTOCOL_VERSION,
                "server_info": {"name": "mcpdiag", "version": "0.1.0"},
                "session_id": new.session_id,
                "stream_endpoint": self.config.stream_endpoint,
                "capabilities": {"tools": True, "elicitation": not self.config.headless},
            }
        if method == "notifications/initialized":
            return None
        if session is None:
            session = self.get_session(params.get("session_id", ""))
        if method == "tools/list":
            return {"tools": list_tools()}
        if method == "tools/call":
            return self._tools_call(envelope, params, session)
        raise MethodNotFound(f"method not found: {method}")

    def _route_response(self, envelope: RpcEnvelope,
                        session: Optional[Session]) -> None:
        sessions = [session] if session else list(self._sessions.values())
        for s in sessions:
            with s.waiter_lock:
                waiter = s.waiters.pop(envelope.id, None)
            if waiter is not None:
                waiter(envelope)
                return
        log.warning("orphan response id=%s", envelope.id)

    # -- the gated tool call ------------------------------------------------

    def _tools_call(self, envelope: RpcEnvelope, params: dict,
                    session: Session) -> dict:
        req = validate_request(params.get("name", ""), params.get("arguments", {}))
        call_id = f"c{next(self._call_counter)}"
        # one call at a time per session; later calls queue here
        with session.gateway.session_slot():
            stream = None if self.config.headless else self.streams.open(call_id)
            session.outbox.put(RpcEnvelope.notification(
                "notifications/call_started",
                {"call_id": call_id, "request_id": envelope.id}))
            outcome = self._handle_tool_call(session, req, call_id, stream)
        return {"call_id": call_id, **outcome.to_dict()}

    def _handle_tool_call(self, session: Session, req: ToolRequest,
                          call_id: str, stream) -> ExecutionOutcome:
        argv = render_argv(req, self._resolved_binaries())
        gateway = session.gateway

        if self.config.headless:
            grant = gateway.acquire_headless_grant(call_id)
        else:
            payload = ElicitationPayload.for_command(call_id, argv)
            self.audit.append("elicitation_issued", session=session.session_id,
                              call_id=call_id, argv=argv, nonce=payload.nonce)
            if stream is not None:
                stream.emit(EVENT_ELICITATION, json.dumps(payload.to_params(),
                                                          sort_keys=True))
            token, grant = gateway.request_authorization(
                payload, emit=lambda p: self._emit_elicitation(session, p),
                window_ms=self.config.elicitation_window_ms)
            self.audit.append("decision", session=session.session_id,
                              call_id=call_id, action=token.action.value,
                              nonce=token.nonce)
            if grant is None:
                self.streams.finish(call_id, "-1")
                return ExecutionOutcome.failure(
                    "AuthDenied", f"authorization {token.action.value.lower()}")

        try:
            with self._exec_slots:
                run = execute_pipeline(
                    argv,
                    tool=req.tool,
                    grant=grant,
                    stream=stream,
                    serializer=self.config.serializer,
                    jc_path=self.config.jc_path,
                    timeout_s=self.config.timeouts_s.get(req.tool),
                    **({"spawn": self._spawn} if self._spawn else {}),
                )
        except SpawnFailure as exc:
            self.streams.finish(call_id, "-1")
            self.audit.append("outcome", session=session.session_id,
                              call_id=call_id, error="SpawnFailure")
            return ExecutionOutcome.failure("RuntimeError", str(exc))
        except ToolTimeout as exc:
            self.streams.finish(call_id, "-1")
            self.audit.append("outcome", session=session.session_id,
                              call_id=call_id, error="Timeout")
            return ExecutionOutcome.failure("Timeout", str(exc))
        except ParseFailure as exc:
            self.streams.finish(call_id, "-1")
            self.audit.append("outcome", session=session.session_id,
                              call_id=call_id, error="ParseFailure")
            return ExecutionOutcome.failure("ParseFailure", str(exc))
        finally:
            gateway.release(grant)

        self.streams.finish(call_id, str(run.exit_code))
        self.audit.append("outcome", session=session.session_id,
                          call_id=call_id, argv=argv, exit_code=run.exit_code,
                          timing=run.timing)
        if not check_exit(req.tool, run.exit_code):
            return ExecutionOutcome.failure(
                "RuntimeError", f"exit code {run.exit_code} not in "
                f"{sorted(EXIT_POLICIES[req.tool].success_codes)}",
                stderr_tail=run.stderr_tail, timing=run.timing)
        if run.parsed is None:
            # in the success set but not deserializable (dig exit 9)
            return ExecutionOutcome.failure(
                "RuntimeError", "resolver unreachable",
                stderr_tail=run.stderr_tail, timing=run.timing)
        return ExecutionOutcome(result=run.parsed, timing=run.timing)

    def _emit_elicitation(self, session: Session, payload: ElicitationPayload) -> None:
        """Send elicitation/create as a server->host request; its response
        feeds the gateway."""
        rpc_id = self.next_rpc_id()

        def on_response(envelope: RpcEnvelope) -> None:
            try:
                token = AuthorizationToken.from_params(envelope.result or {})
            except (KeyError, ValueError):
                log.warning("malformed authorization token for %s", payload.call_id)
                return
            if not session.gateway.submit_token(token):
                log.warning("rejected token for call %s (stale/replayed/expired)",
                            payload.call_id)

        with session.waiter_lock:
            session.waiters[f"srv-{rpc_id}"] = on_response
        session.outbox.put(RpcEnvelope.request(
            f"srv-{rpc_id}", "elicitation/create", payload.to_params()))

    def _resolved_binaries(self) -> dict:
        binaries = {"ping": "ping", "traceroute": "traceroute", "dig": "dig"}
        binaries.update(self.config.binaries)
        return binaries

    # -- helpers for transports ----------------------------------------------

    def drain_outbox(self, session: Session, timeout: float = 0.0):
        try:
            return session.outbox.get(timeout=timeout) if timeout else session.outbox.get_nowait()
        except Empty:
            return None

    def sessions(self) -> list[Session]:
        with self._lock:
            return list(self._sessions.values())
