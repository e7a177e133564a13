"""Closed tool schemas and the structural/semantic validator.

Every parsed result must validate against exactly one schema. Schemas are
closed: unknown fields are violations, as are cross-field inconsistencies
(loss percentage vs packet counts, hop gaps, timeout markers that still
carry measurements).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Optional

_IP_RE = re.compile(r"^\d{1,3}(?:\.\d{1,3}){3}$")


@dataclass
class FieldSpec:
    name: str
    kind: str  # string | ip | count | number | percent | boolean | list | object
    required: bool = True
    nullable: bool = False
    units: Optional[str] = None


@dataclass
class ToolSchema:
    tool: str
    version: str
    fields: list[FieldSpec]
    item_schemas: dict = field(default_factory=dict)  # list-field name -> [FieldSpec]
    invariants: Optional[Callable[[dict, list], None]] = None

    def field_names(self) -> set[str]:
        return {f.name for f in self.fields}


def _check_kind(value, kind: str) -> Optional[str]:
    if kind == "string":
        if not isinstance(value, str):
            return f"expected string, got {type(value).__name__}"
    elif kind == "ip":
        if not isinstance(value, str) or not _IP_RE.match(value):
            return f"expected IPv4 string, got {value!r}"
    elif kind == "count":
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            return f"expected non-negative integer, got {value!r}"
    elif kind == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return f"expected number, got {value!r}"
        if isinstance(value, float) and not math.isfinite(value):
            return f"expected finite number, got {value!r}"
    elif kind == "percent":
        err = _check_kind(value, "number")
        if err:
            return err
        if not (0.0 <= float(value) <= 100.0):
            return f"percentage out of range: {value!r}"
    elif kind == "boolean":
        if not isinstance(value, bool):
            return f"expected boolean, got {value!r}"
    elif kind == "list":
        if not isinstance(value, list):
            return f"expected list, got {type(value).__name__}"
    elif kind == "object":
        if not isinstance(value, dict):
            return f"expected object, got {type(value).__name__}"
    return None


def _check_fields(obj: dict, specs: list[FieldSpec], where: str,
                  violations: list[str]) -> None:
    known = {s.name for s in specs}
    for key in obj:
        if key not in known:
            violations.append(f"{where}: unknown field {key!r}")
    for spec in specs:
        if spec.name not in obj:
            if spec.required:
                violations.append(f"{where}: missing required field {spec.name!r}")
            continue
        value = obj[spec.name]
        if value is None:
            if not spec.nullable:
                violations.append(f"{where}: field {spec.name!r} must not be null")
            continue
        err = _check_kind(value, spec.kind)
        if err:
            violations.append(f"{where}.{spec.name}: {err}")


def validate(json_obj: dict, schema: ToolSchema) -> list[str]:
    """Return the (possibly empty) list of violations of obj against schema."""
    violations: list[str] = []
    if not isinstance(json_obj, dict):
        return ["payload is not a JSON object"]
    _check_fields(json_obj, schema.fields, schema.tool, violations)
    for list_name, item_specs in schema.item_schemas.items():
        items = json_obj.get(list_name)
        if not isinstance(items, list):
            continue
        for i, item in enumerate(items):
            where = f"{schema.tool}.{list_name}[{i}]"
            if not isinstance(item, dict):
                violations.append(f"{where}: expected object")
                continue
            _check_fields(item, item_specs, where, violations)
    if not violations and schema.invariants is not None:
        schema.invariants(json_obj, violations)
    return violations


def _ping_invariants(obj: dict, violations: list[str]) -> None:
    tx, rx = obj["packets_transmitted"], obj["packets_received"]
    if rx > tx:
        violations.append("packets_received exceeds packets_transmitted")
    if tx > 0:
        expected = 100.0 * (1 - rx / tx)
        if abs(expected - obj["packet_loss_percent"]) > 0.1:
            violations.append(
                f"packet_loss_percent {obj['packet_loss_percent']} inconsistent "
                f"with {rx}/{tx}")
    rtt = [obj.get(k) for k in ("rtt_min_ms", "rtt_avg_ms", "rtt_max_ms", "rtt_mdev_ms")]
    present = [v for v in rtt if v is not None]
    if rx > 0 and len(present) != 4:
        violations.append("rtt summary fields must all be present when replies exist")
    if rx == 0 and present:
        violations.append("rtt summary fields must be absent with zero replies")
    if len(present) == 4 and not (rtt[0] <= rtt[1] <= rtt[2]):
        violations.append("rtt summary must satisfy min <= avg <= max")
    replies = [r for r in obj.get("responses", []) if not r.get("timeout")]
    if len(replies) != rx:
        violations.append(
            f"{len(replies)} non-timeout responses but packets_received={rx}")
    for i, r in enumerate(obj.get("responses", [])):
        if r.get("timeout"):
            if r.get("rtt_ms") is not None or r.get("responder_ip") is not None:
                violations.append(f"responses[{i}]: timeout marker carries data")
        else:
            if r.get("rtt_ms") is None or r.get("responder_ip") is None:
                violations.append(f"responses[{i}]: reply missing rtt or responder")


_PROBE_SPECS = [
    FieldSpec("ip", "ip", nullable=True),
    FieldSpec("hostname", "string", nullable=True),
    FieldSpec("rtt_ms", "number", nullable=True, units="ms"),
    FieldSpec("timeout", "boolean"),
    FieldSpec("icmp_annotation", "string", nullable=True),
]


def _traceroute_invariants(obj: dict, violations: list[str]) -> None:
    hops = obj.get("hops", [])
    for idx, hop in enumerate(hops, start=1):
        if hop["hop"] != idx:
            violations.append(f"hop gap: expected {idx}, found {hop['hop']}")
            break
    for hop in hops:
        for j, probe in enumerate(hop.get("probes", [])):
            where = f"traceroute.hops[{hop['hop']}].probes[{j}]"
            if not isinstance(probe, dict):
                violations.append(f"{where}: expected object")
                continue
            _check_fields(probe, _PROBE_SPECS, where, violations)
            absent = probe.get("ip") is None and probe.get("rtt_ms") is None
            if bool(probe.get("timeout")) != absent:
                violations.append(
                    f"{where}: timeout flag must equal absence of ip and rtt")


def _dig_invariants(obj: dict, violations: list[str]) -> None:
    q = obj.get("question", {})
    for key in q:
        if key not in ("name", "record_type"):
            violations.append(f"question: unknown field {key!r}")
    for key in ("name", "record_type"):
        if not isinstance(q.get(key), str) or not q.get(key):
            violations.append(f"question.{key} missing or empty")
    for i, ans in enumerate(obj.get("answers", [])):
        if ans.get("ttl", 0) < 0:
            violations.append(f"answers[{i}]: negative ttl")
    if not isinstance(obj.get("status"), str) or not obj.get("status"):
        violations.append("status missing")


SCHEMAS: dict[str, ToolSchema] = {
    "ping": ToolSchema(
        tool="ping",
        version="1",
        fields=[
            FieldSpec("destination", "string"),
            FieldSpec("destination_ip", "string"),
            FieldSpec("packets_transmitted", "count"),
            FieldSpec("packets_received", "count"),
            FieldSpec("packet_loss_percent", "percent"),
            FieldSpec("rtt_min_ms", "number", required=False, nullable=True, units="ms"),
            FieldSpec("rtt_avg_ms", "number", required=False, nullable=True, units="ms"),
            FieldSpec("rtt_max_ms", "number", required=False, nullable=True, units="ms"),
            FieldSpec("rtt_mdev_ms", "number", required=False, nullable=True, units="ms"),
            FieldSpec("responses", "list"),
        ],
        item_schemas={
            "responses": [
                FieldSpec("seq", "count"),
                FieldSpec("ttl", "count", nullable=True),
                FieldSpec("rtt_ms", "number", nullable=True, units="ms"),
                FieldSpec("responder_ip", "ip", nullable=True),
                FieldSpec("timeout", "boolean"),
            ],
        },
        invariants=_ping_invariants,
    ),
    "traceroute": ToolSchema(
        tool="traceroute",
        version="1",
        fields=[
            FieldSpec("destination", "string"),
            FieldSpec("destination_ip", "string"),
            FieldSpec("max_hops", "count"),
            FieldSpec("hops", "list"),
        ],
        item_schemas={
            "hops": [
                FieldSpec("hop", "count"),
                FieldSpec("probes", "list"),
            ],
        },
        invariants=_traceroute_invariants,
    ),
    "dig": ToolSchema(
        tool="dig",
        version="1",
        fields=[
            FieldSpec("status", "string"),
            FieldSpec("question", "object"),
            FieldSpec("answers", "list"),
            FieldSpec("query_time_ms", "count", required=False, nullable=True, units="ms"),
            FieldSpec("server", "string", required=False, nullable=True),
        ],
        item_schemas={
            "answers": [
                FieldSpec("name", "string"),
                FieldSpec("record_type", "string"),
                FieldSpec("ttl", "count", units="s"),
                FieldSpec("data", "string"),
            ],
        },
        invariants=_dig_invariants,
    ),
}
