"""Dual-process execution pipeline.

The diagnostic tool is spawned directly from an argument vector — never a
shell. Its stdout is consumed line by line and simultaneously (a) fed to
the serializer (native parsers, or an external jc process piped
stdin/stdout) and (b) emitted to the call's SSE buffer unless headless.
Exit codes are validated per tool before deserialization.
"""

from __future__ import annotations

import json
import re
import subprocess
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..errors import ParseFailure, SpawnFailure, ToolTimeout
from ..parsers import parse_tool_output
from ..parsers.oracle_map import JC_MAPPERS
from ..parsers.types import ParsedResult, payload_from_dict
from ..wire import EVENT_STDERR, EVENT_STDOUT, StreamBuffer
from .gateway import ExecutionGrant


@dataclass(frozen=True)
class ExitPolicy:
    tool: str
    success_codes: frozenset[int]
    notes: dict = field(default_factory=dict)


# ping exit 1 means transmitted-but-nothing-received: a valid 100%-loss
# measurement, not a failure. dig exit 9 is accepted at the exit gate and
# then mapped to a structured resolver-unreachable error.
EXIT_POLICIES: dict[str, ExitPolicy] = {
    "ping": ExitPolicy("ping", frozenset({0, 1}),
                       {1: "no replies received; valid 100%-loss result"}),
    "traceroute": ExitPolicy("traceroute", frozenset({0})),
    "dig": ExitPolicy("dig", frozenset({0, 9}),
                      {9: "resolver unreachable; mapped to structured error"}),
}

TOOL_TIMEOUTS_S: dict[str, float] = {"ping": 60.0, "traceroute": 120.0, "dig": 30.0}

# Exit codes whose stdout is deserialized. dig's 9 passes the exit gate but
# carries no parseable answer, so it is excluded here.
PARSE_CODES: dict[str, frozenset[int]] = {
    "ping": frozenset({0, 1}),
    "traceroute": frozenset({0}),
    "dig": frozenset({0}),
}

STDERR_TAIL_LINES = 40


def check_exit(tool: str, code: int) -> bool:
    """True iff code is in the tool's declared success set."""
    return code in EXIT_POLICIES[tool].success_codes


@dataclass
class ExecutionOutcome:
    """Exactly one of result/error is set."""

    result: Optional[ParsedResult] = None
    error: Optional[dict] = None  # {"kind": ..., "stderr_tail": ...}
    timing: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.result is None) == (self.error is None):
            raise ValueError("outcome must carry exactly one of result/error")

    @classmethod
    def failure(cls, kind: str, detail: str = "", stderr_tail: str = "",
                timing: Optional[dict] = None) -> "ExecutionOutcome":
        return cls(error={"kind": kind, "detail": detail,
                          "stderr_tail": stderr_tail}, timing=timing or {})

    def to_dict(self) -> dict:
        if self.result is not None:
            return {"result": self.result.to_dict(), "timing": self.timing}
        return {"error": self.error, "timing": self.timing}


@dataclass
class PipelineRun:
    parsed: Optional[ParsedResult]  # None when the exit code rules out parsing
    lines: list[str]
    exit_code: int
    timing: dict
    stderr_tail: str


def execute_pipeline(
    argv: list[str],
    *,
    tool: str,
    grant: ExecutionGrant,
    stream: Optional[StreamBuffer] = None,
    serializer: str = "native",
    jc_path: str = "jc",
    timeout_s: Optional[float] = None,
    spawn: Callable = subprocess.Popen,
) -> PipelineRun:
    """Run one authorized tool invocation.

    Raises SpawnFailure, ToolTimeout, or ParseFailure; the caller maps
    these onto structured errors. The stream buffer, when given, receives
    one stdout_line event per line and is finished by the caller.
    """
    if not isinstance(grant, ExecutionGrant):
        raise PermissionError("execute_pipeline requires an ExecutionGrant")
    budget = timeout_s if timeout_s is not None else TOOL_TIMEOUTS_S[tool]

    started = time.monotonic()
    try:
        proc = spawn(argv, stdout=subprocess.PIPE, stderr=subprocess.PIPE,
                     text=True, bufsize=1)
    except OSError as exc:
        raise SpawnFailure(f"cannot spawn {argv[0]}: {exc}") from exc

    serializer_proc = None
    if serializer == "external":
        try:
            serializer_proc = subprocess.Popen(
                [jc_path, f"--{tool}"], stdin=subprocess.PIPE,
                stdout=subprocess.PIPE, stderr=subprocess.DEVNULL,
                text=True)
        except OSError as exc:
            proc.kill()
            raise SpawnFailure(f"cannot spawn serializer {jc_path}: {exc}") from exc

    lines: list[str] = []
    stderr_tail: deque[str] = deque(maxlen=STDERR_TAIL_LINES)

    def pump_stdout():
        for line in proc.stdout:
            line = line.rstrip("\n")
            lines.append(line)
            if stream is not None:
                stream.emit(EVENT_STDOUT, line)
            if serializer_proc is not None:
                try:
                    serializer_proc.stdin.write(line + "\n")
                except (BrokenPipeError, ValueError):
                    pass

    def pump_stderr():
        for line in proc.stderr:
            line = line.rstrip("\n")
            stderr_tail.append(line)
            if stream is not None:
                stream.emit(EVENT_STDERR, line)

    t_out = threading.Thread(target=pump_stdout, daemon=True)
    t_err = threading.Thread(target=pump_stderr, daemon=True)
    t_out.start()
    t_err.start()
    try:
        exit_code = proc.wait(timeout=budget)
    except subprocess.TimeoutExpired:
        proc.kill()
        proc.wait()
        if serializer_proc is not None:
            serializer_proc.kill()
        raise ToolTimeout(f"{tool} exceeded {budget:.0f}s budget")
    t_out.join(timeout=10)
    t_err.join(timeout=10)
    spawn_to_exit_ms = (time.monotonic() - started) * 1000.0

    raw_stdout = "".join(line + "\n" for line in lines)
    parse_started = time.monotonic()
    parsed = None
    if exit_code in PARSE_CODES[tool]:
        if serializer == "external":
            parsed = _external_deserialize(serializer_proc, tool, raw_stdout)
        else:
            parsed = parse_tool_output(tool, raw_stdout)
    elif serializer_proc is not None:
        serializer_proc.kill()
    parse_ms = (time.monotonic() - parse_started) * 1000.0

    return PipelineRun(
        parsed=parsed,
        lines=lines,
        exit_code=exit_code,
        timing={"spawn_to_exit_ms": round(spawn_to_exit_ms, 3),
                "parse_ms": round(parse_ms, 3)},
        stderr_tail="\n".join(stderr_tail),
    )


_MAX_HOPS_RE = re.compile(r"\((?:[^)]*)\), (\d+) hops max")


def _external_deserialize(serializer_proc, tool: str, raw_stdout: str) -> ParsedResult:
    """Collect the external serializer's JSON and map it into our schema."""
    try:
        serializer_proc.stdin.close()
    except (BrokenPipeError, ValueError):
        pass
    out, _ = serializer_proc.communicate(timeout=30)
    if serializer_proc.returncode != 0:
        raise ParseFailure(0, f"external serializer exited {serializer_proc.returncode}")
    try:
        jc_doc = json.loads(out)
    except ValueError as exc:
        raise ParseFailure(0, f"external serializer emitted invalid JSON: {exc}")
    mapped = JC_MAPPERS[tool](jc_doc)
    if tool == "traceroute":
        # jc omits the TTL limit; recover it from the header line
        m = _MAX_HOPS_RE.search(raw_stdout)
        mapped["max_hops"] = int(m.group(1)) if m else 0
    return ParsedResult(tool=tool, result=payload_from_dict(tool, mapped),
                        raw_stdout=raw_stdout)
