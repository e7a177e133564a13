"""Structured result types for the three supported tools.

Each dataclass mirrors one tool schema; ParsedResult is the tagged union
that travels over the control plane. Canonical JSON (sorted keys, no
whitespace) makes repeated serialization byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional, Union


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass
class PingResponse:
    """One echo reply, or an explicit timeout marker."""

    seq: int
    ttl: Optional[int] = None
    rtt_ms: Optional[float] = None
    responder_ip: Optional[str] = None
    timeout: bool = False


@dataclass
class PingResult:
    destination: str
    destination_ip: str
    packets_transmitted: int
    packets_received: int
    packet_loss_percent: float
    rtt_min_ms: Optional[float] = None
    rtt_avg_ms: Optional[float] = None
    rtt_max_ms: Optional[float] = None
    rtt_mdev_ms: Optional[float] = None
    responses: list[PingResponse] = field(default_factory=list)


@dataclass
class TracerouteProbe:
    ip: Optional[str] = None
    hostname: Optional[str] = None
    rtt_ms: Optional[float] = None
    timeout: bool = False
    icmp_annotation: Optional[str] = None


@dataclass
class TracerouteHop:
    hop: int
    probes: list[TracerouteProbe] = field(default_factory=list)


@dataclass
class TracerouteResult:
    destination: str
    destination_ip: str
    max_hops: int
    hops: list[TracerouteHop] = field(default_factory=list)


@dataclass
class DigAnswer:
    name: str
    record_type: str
    ttl: int
    data: str


@dataclass
class DigResult:
    status: str
    question: dict  # {"name": ..., "record_type": ...}
    answers: list[DigAnswer] = field(default_factory=list)
    query_time_ms: Optional[int] = None
    server: Optional[str] = None


ToolPayload = Union[PingResult, TracerouteResult, DigResult]


def payload_from_dict(tool: str, obj: dict) -> ToolPayload:
    """Rebuild a typed payload from a plain dict (inverse of asdict)."""
    if tool == "ping":
        return PingResult(
            **{k: obj[k] for k in (
                "destination", "destination_ip", "packets_transmitted",
                "packets_received", "packet_loss_percent")},
            **{k: obj.get(k) for k in (
                "rtt_min_ms", "rtt_avg_ms", "rtt_max_ms", "rtt_mdev_ms")},
            responses=[PingResponse(**r) for r in obj.get("responses", [])],
        )
    if tool == "traceroute":
        return TracerouteResult(
            destination=obj["destination"],
            destination_ip=obj["destination_ip"],
            max_hops=obj["max_hops"],
            hops=[TracerouteHop(hop=h["hop"],
                                probes=[TracerouteProbe(**p) for p in h["probes"]])
                  for h in obj.get("hops", [])],
        )
    if tool == "dig":
        return DigResult(
            status=obj["status"],
            question=dict(obj["question"]),
            answers=[DigAnswer(**a) for a in obj.get("answers", [])],
            query_time_ms=obj.get("query_time_ms"),
            server=obj.get("server"),
        )
    raise ValueError(f"unsupported tool: {tool}")


@dataclass
class ParsedResult:
    """Tagged union of the three tool results plus the untransformed text."""

    tool: str
    result: ToolPayload
    raw_stdout: str

    def result_dict(self) -> dict:
        return asdict(self.result)

    def to_dict(self) -> dict:
        return {
            "tool": self.tool,
            "result": self.result_dict(),
            "raw_stdout": self.raw_stdout,
        }

    def canonical(self) -> str:
        return canonical_json(self.to_dict())

    def model_view(self) -> dict:
        """The structure injected into model context: validated fields only,
        never the raw text."""
        return {"tool": self.tool, "result": self.result_dict()}
