"""ping stdout translation.

The textual output differs between iputils (Linux) and BSD-derived
systems: header shape, the statistics line ("4 received" vs "4 packets
received"), and the summary label ("rtt min/avg/max/mdev" vs "round-trip
min/avg/max/stddev"). detect_variant keys on those markers; parse_ping
handles both dialects with explicit timeout markers.
"""

from __future__ import annotations

import logging
import re

from ..errors import ParseFailure, UnknownDialect
from .types import PingResponse, PingResult

log = logging.getLogger(__name__)

LINUX = "linux_iputils"
BSD = "bsd"

_RTT_LINUX = re.compile(
    r"^rtt min/avg/max/mdev = ([\d.]+)/([\d.]+)/([\d.]+)/([\d.]+) ms")
_RTT_BSD = re.compile(
    r"^round-trip min/avg/max/stddev = ([\d.]+)/([\d.]+)/([\d.]+)/([\d.]+) ms")
_STATS_LINUX = re.compile(
    r"^(\d+) packets transmitted, (\d+) received,.* ([\d.]+)% packet loss")
_STATS_BSD = re.compile(
    r"^(\d+) packets transmitted, (\d+) packets received, ([\d.]+)% packet loss")
_HEADER_LINUX = re.compile(r"^PING (\S+) \(([^)]+)\) \d+\(\d+\) bytes of data\.")
_HEADER_BSD = re.compile(r"^PING (\S+) \(([^)]+)\): \d+ data bytes")
_REPLY = re.compile(
    r"^\d+ bytes from (\S+?)(?: \(([^)]+)\))?: icmp_seq=(\d+) ttl=(\d+)"
    r" time=([\d.]+) ms")
_TIMEOUT_LINUX = re.compile(r"^no answer yet for icmp_seq=(\d+)")
_TIMEOUT_BSD = re.compile(r"^Request timeout for icmp_seq (\d+)")


def detect_variant(raw: str, tool: str) -> str:
    """Classify raw output as linux_iputils or bsd by marker tokens."""
    if not raw:
        raise ValueError("detect_variant requires non-empty output")
    if tool != "ping":
        # traceroute and dig print one recognized dialect on both platforms
        return LINUX
    for line in raw.splitlines():
        if _RTT_LINUX.match(line):
            return LINUX
        if _RTT_BSD.match(line):
            return BSD
    # 100%-loss runs have no rtt summary; fall back to the stats line shape,
    # then the header shape
    for line in raw.splitlines():
        if _STATS_BSD.match(line):
            return BSD
        if _STATS_LINUX.match(line):
            return LINUX
    for line in raw.splitlines():
        if _HEADER_LINUX.match(line):
            return LINUX
        if _HEADER_BSD.match(line):
            return BSD
    raise UnknownDialect("no ping dialect marker found")


def parse_ping(raw: str, variant: str) -> PingResult:
    """Translate complete ping stdout into a PingResult.

    Raises ParseFailure when the statistics block is absent or any parsed
    quantity is inconsistent with the per-probe lines.
    """
    if variant not in (LINUX, BSD):
        raise ValueError(f"unknown ping variant: {variant}")
    stats_re = _STATS_LINUX if variant == LINUX else _STATS_BSD
    rtt_re = _RTT_LINUX if variant == LINUX else _RTT_BSD
    header_re = _HEADER_LINUX if variant == LINUX else _HEADER_BSD
    timeout_re = _TIMEOUT_LINUX if variant == LINUX else _TIMEOUT_BSD

    destination = None
    destination_ip = None
    responses: list[PingResponse] = []
    stats = None
    rtt = None
    stats_line_no = 0

    lines = raw.splitlines()
    for no, line in enumerate(lines, start=1):
        line = line.rstrip()
        if not line or line.startswith("---"):
            continue
        m = header_re.match(line)
        if m:
            destination, destination_ip = m.group(1), m.group(2)
            continue
        m = _REPLY.match(line)
        if m:
            host, paren_ip, seq, ttl, rtt_ms = m.groups()
            responses.append(PingResponse(
                seq=int(seq), ttl=int(ttl), rtt_ms=float(rtt_ms),
                responder_ip=paren_ip or host))
            continue
        m = timeout_re.match(line)
        if m:
            responses.append(PingResponse(seq=int(m.group(1)), timeout=True))
            continue
        m = stats_re.match(line)
        if m:
            stats = (int(m.group(1)), int(m.group(2)), float(m.group(3)))
            stats_line_no = no
            continue
        m = rtt_re.match(line)
        if m:
            rtt = tuple(float(g) for g in m.groups())
            continue
        log.warning("ignoring unrecognized ping line %d: %s", no, line)

    if destination is None:
        raise ParseFailure(1, "ping header line missing")
    if stats is None:
        raise ParseFailure(len(lines), "statistics block missing")

    transmitted, received, loss = stats
    if received > transmitted:
        raise ParseFailure(stats_line_no, "received exceeds transmitted")
    if transmitted > 0:
        expected_loss = 100.0 * (1 - received / transmitted)
        if abs(expected_loss - loss) > 0.1:
            raise ParseFailure(
                stats_line_no,
                f"loss {loss}% inconsistent with {received}/{transmitted}")
    replies = [r for r in responses if not r.timeout]
    if len(replies) != received:
        raise ParseFailure(
            stats_line_no,
            f"{len(replies)} reply lines but statistics report {received}")
    if received > 0 and rtt is None:
        raise ParseFailure(len(lines), "rtt summary missing despite replies")
    if received == 0 and rtt is not None:
        raise ParseFailure(len(lines), "rtt summary present without replies")

    result = PingResult(
        destination=destination,
        destination_ip=destination_ip,
        packets_transmitted=transmitted,
        packets_received=received,
        packet_loss_percent=loss,
        responses=responses,
    )
    if rtt is not None:
        result.rtt_min_ms, result.rtt_avg_ms, result.rtt_max_ms, result.rtt_mdev_ms = rtt
        if not (result.rtt_min_ms <= result.rtt_avg_ms <= result.rtt_max_ms):
            raise ParseFailure(len(lines), "rtt summary not ordered min<=avg<=max")
    return result
