"""Shared exception types."""

from __future__ import annotations

# JSON-RPC 2.0 reserved error codes
PARSE_ERROR = -32700
INVALID_REQUEST = -32600
METHOD_NOT_FOUND = -32601
INVALID_PARAMS = -32602
INTERNAL_ERROR = -32603


class McpDiagError(Exception):
    """Base class for all package errors."""


class RpcError(McpDiagError):
    """An error that maps onto a JSON-RPC error object."""

    code = INTERNAL_ERROR

    def __init__(self, message: str, data=None):
        super().__init__(message)
        self.message = message
        self.data = data

    def to_error_obj(self) -> dict:
        obj = {"code": self.code, "message": self.message}
        if self.data is not None:
            obj["data"] = self.data
        return obj


class ProtocolParseError(RpcError):
    code = PARSE_ERROR


class InvalidRequest(RpcError):
    code = INVALID_REQUEST


class MethodNotFound(RpcError):
    code = METHOD_NOT_FOUND


class InvalidParams(RpcError):
    code = INVALID_PARAMS


class InvalidEnvelope(McpDiagError):
    """Envelope violates the request/result/error mutual-exclusion rule."""


class UnknownCall(McpDiagError):
    """Stream subscription for a call id that is not in flight."""


class UnknownDialect(McpDiagError):
    """Tool output matches no known platform variant."""


class ParseFailure(McpDiagError):
    """Tool output could not be translated into a structured result."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class SpawnFailure(McpDiagError):
    """The diagnostic tool binary could not be started."""


class ToolTimeout(McpDiagError):
    """The diagnostic tool exceeded its wall-clock budget."""


class StreamUnavailable(McpDiagError):
    """The SSE data plane could not be reached; callers degrade gracefully."""


class ModelError(McpDiagError):
    """The chat-model adapter failed."""


class OperatorTimeout(McpDiagError):
    """No operator decision arrived within the authorization window."""


class CommandRejected(McpDiagError):
    """The baseline command regex found no runnable invocation."""


class InsufficientData(McpDiagError):
    """Benchmark aggregation requires records from both arms."""


class IoFailure(McpDiagError):
    """Report files could not be written."""


class ConfigError(McpDiagError):
    """Startup configuration is unusable (e.g. missing tool binary)."""
