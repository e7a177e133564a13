"""Fixed tool registry: descriptors, argument validation, argv rendering.

Exactly three tools are registered. Argument schemas are closed (extra
keys rejected), targets must be hostname or IPv4 syntax, and rendering
never goes through a shell: the target is always a single argv element.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import InvalidParams

# Hostname: RFC-1123-style labels. Deliberately excludes every shell
# metacharacter; this regex is the injection boundary.
_HOSTNAME_RE = re.compile(
    r"^(?=.{1,253}$)[A-Za-z0-9]([A-Za-z0-9\-]{0,61}[A-Za-z0-9])?"
    r"(\.[A-Za-z0-9]([A-Za-z0-9\-]{0,61}[A-Za-z0-9])?)*$")
_IPV4_RE = re.compile(r"^\d{1,3}(?:\.\d{1,3}){3}$")
_SHELL_META = set(";|&`$<>(){}!\\\"'\n\r\t ")

RECORD_TYPES = ("A", "AAAA", "CNAME", "MX", "NS", "SOA", "TXT", "ANY")

TOOL_DESCRIPTORS = {
    "ping": {
        "name": "ping",
        "description": "Send ICMP echo requests to a host and report loss and round-trip times.",
        "inputSchema": {
            "type": "object",
            "properties": {
                "target": {"type": "string", "description": "hostname or IPv4 address"},
                "count": {"type": "integer", "minimum": 1, "maximum": 20,
                          "default": 4, "description": "echo requests to send"},
            },
            "required": ["target"],
            "additionalProperties": False,
        },
    },
    "traceroute": {
        "name": "traceroute",
        "description": "Trace the network path to a host, one line per hop.",
        "inputSchema": {
            "type": "object",
            "properties": {
                "target": {"type": "string", "description": "hostname or IPv4 address"},
                "max_hops": {"type": "integer", "minimum": 1, "maximum": 64,
                             "default": 30, "description": "TTL limit"},
            },
            "required": ["target"],
            "additionalProperties": False,
        },
    },
    "dig": {
        "name": "dig",
        "description": "Resolve DNS records for a name and report the answer section.",
        "inputSchema": {
            "type": "object",
            "properties": {
                "target": {"type": "string", "description": "name to resolve"},
                "record_type": {"type": "string", "enum": list(RECORD_TYPES),
                                "default": "A"},
            },
            "required": ["target"],
            "additionalProperties": False,
        },
    },
}


@dataclass(frozen=True)
class ToolRequest:
    """A validated ⟨tool, arguments⟩ pair; constructing one implies the
    arguments already passed validate_request."""

    tool: str
    args: dict


def list_tools() -> list[dict]:
    return [dict(d) for d in TOOL_DESCRIPTORS.values()]


def _valid_target(target: str) -> bool:
    if not isinstance(target, str) or not target:
        return False
    if any(ch in _SHELL_META for ch in target):
        return False
    return bool(_IPV4_RE.match(target) or _HOSTNAME_RE.match(target))


def validate_request(tool: str, args: dict) -> ToolRequest:
    """Validate raw arguments against the registry; raises InvalidParams
    listing every violation. No free-form strings survive this gate."""
    violations: list[str] = []
    if tool not in TOOL_DESCRIPTORS:
        raise InvalidParams(f"unknown tool: {tool}")
    if not isinstance(args, dict):
        raise InvalidParams("arguments must be an object")
    schema = TOOL_DESCRIPTORS[tool]["inputSchema"]
    props = schema["properties"]
    for key in args:
        if key not in props:
            violations.append(f"unknown argument {key!r}")
    for key in schema["required"]:
        if key not in args:
            violations.append(f"missing required argument {key!r}")
    target = args.get("target")
    if target is not None and not _valid_target(target):
        violations.append(f"target {target!r} is not a valid hostname or IPv4 address")
    if tool == "ping" and "count" in args:
        c = args["count"]
        if not isinstance(c, int) or isinstance(c, bool) or not (1 <= c <= 20):
            violations.append("count must be an integer in [1, 20]")
    if tool == "traceroute" and "max_hops" in args:
        h = args["max_hops"]
        if not isinstance(h, int) or isinstance(h, bool) or not (1 <= h <= 64):
            violations.append("max_hops must be an integer in [1, 64]")
    if tool == "dig" and "record_type" in args:
        rt = args["record_type"]
        if rt not in RECORD_TYPES:
            violations.append(f"record_type must be one of {RECORD_TYPES}")
    if violations:
        raise InvalidParams("; ".join(violations), data=violations)
    merged = {k: spec["default"] for k, spec in props.items() if "default" in spec}
    merged.update(args)
    return ToolRequest(tool=tool, args=merged)


def render_argv(req: ToolRequest, binaries: dict[str, object]) -> list[str]:
    """Render the exact argument vector. `binaries` maps tool name to an
    executable path or an argv prefix list (used to point at mock tools)."""
    prefix = binaries[req.tool]
    argv = list(prefix) if isinstance(prefix, (list, tuple)) else [str(prefix)]
    if req.tool == "ping":
        argv += ["-c", str(req.args["count"]), req.args["target"]]
    elif req.tool == "traceroute":
        argv += ["-m", str(req.args["max_hops"]), req.args["target"]]
    elif req.tool == "dig":
        argv += [req.args["target"], req.args["record_type"]]
    return argv
