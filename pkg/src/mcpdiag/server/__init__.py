"""Diagnostics server: tool registry, security gateway, execution pipeline."""

from .registry import TOOL_DESCRIPTORS, ToolRequest, list_tools, render_argv, validate_request
from .gateway import (
    Action,
    AuthorizationToken,
    ElicitationPayload,
    ExecutionGrant,
    GatewayState,
    SecurityGateway,
)
from .pipeline import (
    EXIT_POLICIES,
    TOOL_TIMEOUTS_S,
    ExecutionOutcome,
    ExitPolicy,
    check_exit,
    execute_pipeline,
)
from .service import DiagServer, ServerConfig

__all__ = [
    "Action",
    "AuthorizationToken",
    "DiagServer",
    "ElicitationPayload",
    "EXIT_POLICIES",
    "ExecutionGrant",
    "ExecutionOutcome",
    "ExitPolicy",
    "GatewayState",
    "SecurityGateway",
    "ServerConfig",
    "TOOL_DESCRIPTORS",
    "TOOL_TIMEOUTS_S",
    "ToolRequest",
    "check_exit",
    "execute_pipeline",
    "list_tools",
    "render_argv",
    "validate_request",
]
