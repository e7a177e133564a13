"""dig stdout translation: header status, question, and ANSWER section."""

from __future__ import annotations

import logging
import re

from ..errors import ParseFailure
from .types import DigAnswer, DigResult

log = logging.getLogger(__name__)

_HEADER = re.compile(
    r"^;; ->>HEADER<<- opcode: (\w+), status: (\w+), id: (\d+)")
_QUESTION = re.compile(r"^;(\S+)\s+(\S+)\s+(\S+)\s*$")
_ANSWER = re.compile(r"^(\S+)\s+(\d+)\s+(\S+)\s+(\S+)\s+(.*\S)\s*$")
_QUERY_TIME = re.compile(r"^;; Query time: (\d+) msec")
_SERVER = re.compile(r"^;; SERVER: (\S+)")


def parse_dig(raw: str) -> DigResult:
    """Translate complete dig stdout into a DigResult.

    Raises ParseFailure when the HEADER block is missing. Authority and
    additional sections are outside the schema and are skipped.
    """
    lines = raw.splitlines()
    status = None
    question = None
    answers: list[DigAnswer] = []
    query_time_ms = None
    server = None
    section = None

    for no, line in enumerate(lines, start=1):
        stripped = line.rstrip()
        if not stripped:
            section = None
            continue
        m = _HEADER.match(stripped)
        if m:
            status = m.group(2)
            continue
        if stripped.startswith(";; QUESTION SECTION"):
            section = "question"
            continue
        if stripped.startswith(";; ANSWER SECTION"):
            section = "answer"
            continue
        if stripped.startswith(";;"):
            m = _QUERY_TIME.match(stripped)
            if m:
                query_time_ms = int(m.group(1))
            else:
                m = _SERVER.match(stripped)
                if m:
                    server = m.group(1)
            section = None  # any other ;; marker opens a section we skip
            continue
        if stripped.startswith(";"):
            if section == "question":
                m = _QUESTION.match(stripped)
                if not m:
                    raise ParseFailure(no, f"malformed question line: {stripped!r}")
                question = {"name": m.group(1), "record_type": m.group(3)}
            continue
        if section == "answer":
            m = _ANSWER.match(stripped)
            if not m:
                raise ParseFailure(no, f"malformed answer line: {stripped!r}")
            answers.append(DigAnswer(
                name=m.group(1), ttl=int(m.group(2)),
                record_type=m.group(4), data=m.group(5)))
            continue
        log.debug("ignoring dig line %d: %s", no, stripped)

    if status is None:
        raise ParseFailure(len(lines) or 1, "header block missing")
    if question is None:
        raise ParseFailure(len(lines), "question section missing")
    for ans in answers:
        if ans.ttl < 0:
            raise ParseFailure(0, f"negative ttl on {ans.name}")
    return DigResult(
        status=status,
        question=question,
        answers=answers,
        query_time_ms=query_time_ms,
        server=server,
    )
