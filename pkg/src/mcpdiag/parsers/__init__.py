"""Deterministic translation of ping/traceroute/dig stdout into validated JSON."""

from .types import (
    DigAnswer,
    DigResult,
    ParsedResult,
    PingResponse,
    PingResult,
    TracerouteHop,
    TracerouteProbe,
    TracerouteResult,
)
from .ping import detect_variant, parse_ping
from .traceroute import extract_hop_ip, parse_traceroute
from .dig import parse_dig
from .schema import SCHEMAS, ToolSchema, validate

TOOLS = ("ping", "traceroute", "dig")


def parse_tool_output(tool: str, raw: str, variant: str = "auto") -> ParsedResult:
    """Parse raw stdout of one of the supported tools into a ParsedResult."""
    if tool == "ping":
        v = detect_variant(raw, "ping") if variant == "auto" else variant
        payload = parse_ping(raw, v)
    elif tool == "traceroute":
        payload = parse_traceroute(raw)
    elif tool == "dig":
        payload = parse_dig(raw)
    else:
        raise ValueError(f"unsupported tool: {tool}")
    return ParsedResult(tool=tool, result=payload, raw_stdout=raw)


__all__ = [
    "DigAnswer",
    "DigResult",
    "ParsedResult",
    "PingResponse",
    "PingResult",
    "TracerouteHop",
    "TracerouteProbe",
    "TracerouteResult",
    "SCHEMAS",
    "ToolSchema",
    "TOOLS",
    "detect_variant",
    "extract_hop_ip",
    "parse_dig",
    "parse_ping",
    "parse_tool_output",
    "parse_traceroute",
    "validate",
]
