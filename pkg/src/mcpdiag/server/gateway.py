"""Security gateway: BLOCK-by-default state machine around tool execution.

Execution requires an ExecutionGrant, and grants exist on exactly two
paths: a nonce-matched, single-use, unexpired ACCEPT token, or headless
mode. There is no third constructor call site; the pipeline refuses to
run without a grant.
"""

from __future__ import annotations

import secrets
import shlex
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

DEFAULT_AUTH_WINDOW_MS = 120_000
TOKEN_EXPIRY_S = 120.0


class Action(str, Enum):
    ACCEPT = "ACCEPT"
    DECLINE = "DECLINE"
    CANCEL = "CANCEL"


class GatewayState(str, Enum):
    BLOCK = "BLOCK"
    AWAITING_AUTH = "AWAITING_AUTH"
    EXECUTING = "EXECUTING"


@dataclass(frozen=True)
class ElicitationPayload:
    call_id: str
    message: str
    rendered_command: tuple[str, ...]
    nonce: str

    @classmethod
    def for_command(cls, call_id: str, argv: list[str]) -> "ElicitationPayload":
        rendered = shlex.join(argv)
        return cls(
            call_id=call_id,
            message=f"Authorize execution of: {rendered}",
            rendered_command=tuple(argv),
            nonce=secrets.token_hex(16),  # 128-bit single-use nonce
        )

    def to_params(self) -> dict:
        return {
            "call_id": self.call_id,
            "message": self.message,
            "rendered_command": list(self.rendered_command),
            "nonce": self.nonce,
        }


@dataclass(frozen=True)
class AuthorizationToken:
    action: Action
    nonce: str
    issued_at: float

    @classmethod
    def from_params(cls, params: dict) -> "AuthorizationToken":
        return cls(
            action=Action(params["action"]),
            nonce=params["nonce"],
            issued_at=float(params.get("issued_at", time.time())),
        )

    def to_params(self) -> dict:
        return {"action": self.action.value, "nonce": self.nonce,
                "issued_at": self.issued_at}


@dataclass(frozen=True)
class ExecutionGrant:
    """Proof that the gateway authorized exactly one pipeline run."""

    call_id: str
    nonce: Optional[str]
    headless: bool = False


class SecurityGateway:
    """Per-session authorization state machine.

    Transitions are serialized; a second call entering while one is
    awaiting authorization queues on the session lock rather than
    interleaving. Tokens are single-use: a nonce is consumed whether
    accepted or declined, and replays are rejected.
    """

    def __init__(self, headless: bool = False,
                 auth_window_ms: int = DEFAULT_AUTH_WINDOW_MS):
        self.headless = headless
        self.auth_window_ms = auth_window_ms
        self._state = GatewayState.BLOCK
        self._pending: Optional[ElicitationPayload] = None
        self._decision: Optional[AuthorizationToken] = None
        self._consumed_nonces: set[str] = set()
        self._cond = threading.Condition()
        self._session_lock = threading.Lock()  # serializes whole calls

    @property
    def state(self) -> GatewayState:
        with self._cond:
            return self._state

    @property
    def pending(self) -> Optional[ElicitationPayload]:
        with self._cond:
            return self._pending

    def session_slot(self) -> threading.Lock:
        return self._session_lock

    def request_authorization(
        self,
        payload: ElicitationPayload,
        emit: Callable[[ElicitationPayload], None],
        window_ms: Optional[int] = None,
    ) -> tuple[AuthorizationToken, Optional[ExecutionGrant]]:
        """Run the elicitation handshake for one call.

        Emits the payload, suspends until a nonce-matched token arrives or
        the window elapses (treated as CANCEL), and returns the token plus
        a grant iff the token is a first-use, unexpired ACCEPT.
        """
        if self.headless:
            raise RuntimeError("headless gateway does not elicit")
        window = (window_ms if window_ms is not None else self.auth_window_ms) / 1000.0
        with self._cond:
            if self._state != GatewayState.BLOCK:
                raise RuntimeError(f"gateway not in BLOCK state: {self._state}")
            self._state = GatewayState.AWAITING_AUTH
            self._pending = payload
            self._decision = None
        try:
            emit(payload)
        except Exception:
            with self._cond:
                self._state = GatewayState.BLOCK
                self._pending = None
            raise
        deadline = time.monotonic() + window
        with self._cond:
            while self._decision is None:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    break
                self._cond.wait(timeout=remaining)
            token = self._decision or AuthorizationToken(
                action=Action.CANCEL, nonce=payload.nonce, issued_at=time.time())
            self._pending = None
            self._decision = None
            if token.action == Action.ACCEPT:
                self._state = GatewayState.EXECUTING
                grant = ExecutionGrant(call_id=payload.call_id, nonce=token.nonce)
            else:
                self._state = GatewayState.BLOCK
                grant = None
            return token, grant

    def submit_token(self, token: AuthorizationToken) -> bool:
        """Deliver an operator decision. Returns False for stale, replayed,
        expired, or mismatched tokens; the elicitation stays pending."""
        with self._cond:
            if self._pending is None or self._state != GatewayState.AWAITING_AUTH:
                return False
            if token.nonce != self._pending.nonce:
                return False
            if token.nonce in self._consumed_nonces:
                return False
            if time.time() - token.issued_at > TOKEN_EXPIRY_S:
                return False
            self._consumed_nonces.add(token.nonce)
            self._decision = token
            self._cond.notify_all()
            return True

    def acquire_headless_grant(self, call_id: str) -> ExecutionGrant:
        """The single elicitation bypass, legal only in headless mode."""
        if not self.headless:
            raise RuntimeError("headless grant requires headless mode")
        with self._cond:
            if self._state != GatewayState.BLOCK:
                raise RuntimeError(f"gateway not in BLOCK state: {self._state}")
            self._state = GatewayState.EXECUTING
        return ExecutionGrant(call_id=call_id, nonce=None, headless=True)

    def release(self, grant: ExecutionGrant) -> None:
        with self._cond:
            if self._state == GatewayState.EXECUTING:
                self._state = GatewayState.BLOCK
