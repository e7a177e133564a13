"""Declared field mapping between this package's schemas and the jc
reference parser's vocabulary.

The comparison subset for oracle equivalence is exactly the fields below;
anything jc emits outside this table is out of scope. map_jc_output turns
a jc document into our field names so external-serializer mode and the
expected-JSON regeneration script share one mechanical translation.
"""

from __future__ import annotations

# ours -> jc, per tool. Nested list fields are mapped by the functions below.
PING_FIELD_MAP = {
    "destination": "destination",
    "destination_ip": "destination_ip",
    "packets_transmitted": "packets_transmitted",
    "packets_received": "packets_received",
    "packet_loss_percent": "packet_loss_percent",
    "rtt_min_ms": "round_trip_ms_min",
    "rtt_avg_ms": "round_trip_ms_avg",
    "rtt_max_ms": "round_trip_ms_max",
    "rtt_mdev_ms": "round_trip_ms_stddev",
}
PING_RESPONSE_MAP = {
    "seq": "icmp_seq",
    "ttl": "ttl",
    "rtt_ms": "time_ms",
    "responder_ip": "response_ip",
}
TRACEROUTE_FIELD_MAP = {
    "destination": "destination_name",
    "destination_ip": "destination_ip",
}
TRACEROUTE_PROBE_MAP = {
    "ip": "ip",
    "hostname": "name",
    "rtt_ms": "rtt",
    "icmp_annotation": "annotation",
}
DIG_FIELD_MAP = {
    "status": "status",
    "query_time_ms": "query_time",
    "server": "server",
}
DIG_ANSWER_MAP = {
    "name": "name",
    "record_type": "type",
    "ttl": "ttl",
    "data": "data",
}


def map_jc_ping(jc_obj: dict) -> dict:
    out = {ours: jc_obj.get(theirs) for ours, theirs in PING_FIELD_MAP.items()}
    responses = []
    for r in jc_obj.get("responses", []):
        if r.get("type") == "timeout":
            responses.append({
                "seq": r.get("icmp_seq"), "ttl": None, "rtt_ms": None,
                "responder_ip": None, "timeout": True})
        else:
            responses.append({
                **{ours: r.get(theirs) for ours, theirs in PING_RESPONSE_MAP.items()},
                "timeout": False})
    out["responses"] = responses
    return out


def map_jc_traceroute(jc_obj: dict) -> dict:
    out = {ours: jc_obj.get(theirs) for ours, theirs in TRACEROUTE_FIELD_MAP.items()}
    hops = []
    for hop in jc_obj.get("hops", []):
        probes = []
        for p in hop.get("probes", []):
            if p.get("ip") is None and p.get("rtt") is None:
                probes.append({"ip": None, "hostname": None, "rtt_ms": None,
                               "timeout": True, "icmp_annotation": None})
            else:
                mapped = {ours: p.get(theirs)
                          for ours, theirs in TRACEROUTE_PROBE_MAP.items()}
                mapped["timeout"] = False
                probes.append(mapped)
        hops.append({"hop": hop.get("hop"), "probes": probes})
    out["hops"] = hops
    return out


def map_jc_dig(jc_doc) -> dict:
    # jc --dig emits a list of response objects; our schema covers one query
    jc_obj = jc_doc[0] if isinstance(jc_doc, list) else jc_doc
    out = {ours: jc_obj.get(theirs) for ours, theirs in DIG_FIELD_MAP.items()}
    q = jc_obj.get("question", {})
    out["question"] = {"name": q.get("name"), "record_type": q.get("type")}
    out["answers"] = [
        {ours: a.get(theirs) for ours, theirs in DIG_ANSWER_MAP.items()}
        for a in jc_obj.get("answer", []) or []
    ]
    return out


JC_MAPPERS = {
    "ping": map_jc_ping,
    "traceroute": map_jc_traceroute,
    "dig": map_jc_dig,
}


def comparison_subset(tool: str, ours: dict) -> dict:
    """Project our parsed payload onto the declared comparison subset."""
    if tool == "ping":
        out = {k: ours.get(k) for k in PING_FIELD_MAP}
        out["responses"] = [
            {k: r.get(k) for k in (*PING_RESPONSE_MAP, "timeout")}
            for r in ours.get("responses", [])
        ]
        return out
    if tool == "traceroute":
        out = {k: ours.get(k) for k in TRACEROUTE_FIELD_MAP}
        out["max_hops"] = ours.get("max_hops")
        out["hops"] = [
            {"hop": h.get("hop"), "probes": [
                {k: p.get(k) for k in (*TRACEROUTE_PROBE_MAP, "timeout")}
                for p in h.get("probes", [])]}
            for h in ours.get("hops", [])
        ]
        return out
    if tool == "dig":
        out = {k: ours.get(k) for k in DIG_FIELD_MAP}
        out["question"] = dict(ours.get("question", {}))
        out["answers"] = [
            {k: a.get(k) for k in DIG_ANSWER_MAP}
            for a in ours.get("answers", [])
        ]
        return out
    raise ValueError(f"unsupported tool: {tool}")
