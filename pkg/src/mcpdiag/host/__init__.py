"""Host orchestrator: session lifecycle, model adapters, operator channels."""

from .client import HttpServerConnection, ServerConnection, StdioServerConnection, connect
from .model import (
    HttpModelClient,
    ModelClient,
    ModelTurn,
    ScriptedModelClient,
    TokenUsage,
    estimate_tokens,
)
from .orchestrator import (
    HostSession,
    OperatorChannel,
    QueueOperatorChannel,
    TerminalOperatorChannel,
    TranscriptMessage,
    count_turn_tokens,
)

__all__ = [
    "HostSession",
    "HttpModelClient",
    "HttpServerConnection",
    "ModelClient",
    "ModelTurn",
    "OperatorChannel",
    "QueueOperatorChannel",
    "ScriptedModelClient",
    "ServerConnection",
    "StdioServerConnection",
    "TerminalOperatorChannel",
    "TokenUsage",
    "TranscriptMessage",
    "connect",
    "count_turn_tokens",
    "estimate_tokens",
]
