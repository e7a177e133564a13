"""traceroute stdout translation.

Hop lines are scanned probe by probe: `*` marks a timeout, a probe may
open with `name (ip)` or a bare ip, and rtt-only probes reuse the most
recent address on the line. ICMP annotations (`!H`, `!N`, ...) attach to
the preceding probe.
"""

from __future__ import annotations

import logging
import re

from ..errors import ParseFailure
from .types import TracerouteHop, TracerouteProbe, TracerouteResult

log = logging.getLogger(__name__)

_HEADER = re.compile(
    r"^traceroute to (\S+) \(([^)]+)\), (\d+) hops max")
_HOP_LINE = re.compile(r"^\s*(\d+)\s+(.*)$")
_IP = re.compile(r"^\d{1,3}(?:\.\d{1,3}){3}$")

# probe grammar, tried in order at each scan position
_P_TIMEOUT = re.compile(r"\*")
_P_NAMED = re.compile(r"(\S+)\s+\(([^)\s]+)\)\s+([\d.]+) ms(?:\s+(!\S*))?")
_P_BARE = re.compile(r"(\d{1,3}(?:\.\d{1,3}){3})\s+([\d.]+) ms(?:\s+(!\S*))?")
_P_RTT_ONLY = re.compile(r"([\d.]+) ms(?:\s+(!\S*))?")


def parse_traceroute(raw: str) -> TracerouteResult:
    """Translate complete traceroute stdout into a TracerouteResult.

    Raises ParseFailure on an unrecognizable hop line or a gap in the hop
    sequence; all-timeout hops still appear with timeout probes.
    """
    lines = raw.splitlines()
    destination = destination_ip = None
    max_hops = 0
    hops: list[TracerouteHop] = []

    for no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        m = _HEADER.match(line)
        if m:
            destination, destination_ip = m.group(1), m.group(2)
            max_hops = int(m.group(3))
            continue
        m = _HOP_LINE.match(line)
        if m and destination is not None:
            hop_no = int(m.group(1))
            probes = _scan_probes(m.group(2), no)
            hops.append(TracerouteHop(hop=hop_no, probes=probes))
            continue
        log.warning("ignoring unrecognized traceroute line %d: %s", no, line)

    if destination is None:
        raise ParseFailure(1, "traceroute header line missing")
    if not hops:
        raise ParseFailure(len(lines), "no hop lines found")
    for idx, hop in enumerate(hops, start=1):
        if hop.hop != idx:
            raise ParseFailure(
                0, f"hop gap: expected hop {idx}, found {hop.hop}")
    return TracerouteResult(
        destination=destination,
        destination_ip=destination_ip,
        max_hops=max_hops,
        hops=hops,
    )


def _scan_probes(text: str, line_no: int) -> list[TracerouteProbe]:
    probes: list[TracerouteProbe] = []
    last_ip = None
    last_name = None
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        if text[pos] == "*":
            probes.append(TracerouteProbe(timeout=True))
            pos += 1
            continue
        m = _P_BARE.match(text, pos)
        if m:
            last_ip, last_name = m.group(1), None
            probes.append(TracerouteProbe(
                ip=last_ip, rtt_ms=float(m.group(2)),
                icmp_annotation=m.group(3)))
            pos = m.end()
            continue
        m = _P_NAMED.match(text, pos)
        if m and _IP.match(m.group(2)):
            last_name, last_ip = m.group(1), m.group(2)
            probes.append(TracerouteProbe(
                ip=last_ip, hostname=last_name, rtt_ms=float(m.group(3)),
                icmp_annotation=m.group(4)))
            pos = m.end()
            continue
        m = _P_RTT_ONLY.match(text, pos)
        if m and last_ip is not None:
            probes.append(TracerouteProbe(
                ip=last_ip, hostname=last_name, rtt_ms=float(m.group(1)),
                icmp_annotation=m.group(2)))
            pos = m.end()
            continue
        raise ParseFailure(line_no, f"unrecognizable probe at: {text[pos:]!r}")
    if not probes:
        raise ParseFailure(line_no, "hop line with no probes")
    return probes


def extract_hop_ip(result: TracerouteResult, n: int) -> str | None:
    """First non-timeout probe ip at 1-based hop n; None when the hop is
    missing or every probe timed out."""
    if n < 1:
        raise ValueError("hop index is 1-based")
    for hop in result.hops:
        if hop.hop == n:
            for probe in hop.probes:
                if not probe.timeout and probe.ip:
                    return probe.ip
            return None
    return None
