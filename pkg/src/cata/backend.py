"""Incremental SMT-LIB sessions with an external solver process, plus a
replay backend that answers from a recorded trace.

Trace format: each command sent is one line; each response line that is
not ``success`` follows as ``; <line>``.  Lines starting with ``;;`` are
comments.
"""
from __future__ import annotations

import os
import queue
import shutil
import subprocess
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

VERDICTS = ("sat", "unsat", "unknown")
ENV_SOLVER = "CATA_SOLVER_PATH"


class BackendError(Exception):
    pass


class SpawnError(BackendError):
    pass


class ProtocolError(BackendError):
    def __init__(self, message: str, raw: str = ""):
        super().__init__(f"{message}: {raw!r}" if raw else message)
        self.raw = raw


class SolverError(BackendError):
    """The solver rejected a command with ``(error ...)``."""


class ReplayDivergence(BackendError):
    def __init__(self, expected: str | None, got: str, index: int):
        super().__init__(f"command {index} diverges from the trace: expected {expected!r}, got {got!r}")
        self.expected = expected
        self.got = got
        self.index = index


@dataclass(frozen=True)
class SolverConfig:
    kind: str = "z3"  # z3 | cvc | path | replay
    path: str | None = None
    timeout_ms: int = 10_000
    logic: str | None = None
    extra_args: tuple[str, ...] = ()
    dialect: str | None = None

    def __post_init__(self):
        if self.kind not in ("z3", "cvc", "path", "replay"):
            raise ValueError(f"unknown backend kind {self.kind}")
        if self.timeout_ms <= 0:
            raise ValueError("timeout must be positive")
        if self.kind in ("path", "replay") and not self.path:
            raise ValueError(f"{self.kind} backend needs a path")

    @classmethod
    def from_spec(cls, spec: str, **kw) -> "SolverConfig":
        """``z3``, ``cvc``, ``path:<exe>`` or ``replay:<file>``."""
        if spec in ("z3", "cvc"):
            return cls(kind=spec, **kw)
        for kind in ("path", "replay"):
            if spec.startswith(kind + ":"):
                return cls(kind=kind, path=spec[len(kind) + 1:], **kw)
        raise ValueError(f"bad solver spec {spec!r}; use z3, cvc, path:<exe> or replay:<file>")

    @property
    def printer_dialect(self) -> str:
        if self.dialect:
            return self.dialect
        if self.kind == "cvc":
            return "smtlib"
        if self.kind == "path" and "cvc" in Path(self.path).name:
            return "smtlib"
        return "z3"

    def identity(self) -> str:
        return self.kind if self.kind in ("z3", "cvc") else f"{self.kind}:{self.path}"


@dataclass
class CheckResult:
    verdict: str
    model_text: str | None = None
    elapsed_ms: float = 0.0
    values_text: str | None = None


def _balanced(text: str) -> bool:
    depth, in_str, in_bar = 0, False, False
    for ch in text:
        if in_str:
            in_str = ch != '"'
        elif in_bar:
            in_bar = ch != "|"
        elif ch == '"':
            in_str = True
        elif ch == "|":
            in_bar = True
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
    return depth <= 0 and not in_str and not in_bar


class Session:
    """Common push/pop bookkeeping, tracing and the check protocol.
    Subclasses implement ``_exchange``."""

    def __init__(self, config: SolverConfig):
        self.config = config
        self.trace: list[str] = []
        self.frames = 0
        self.closed = False

    # transport
    def _exchange(self, command: str, expect: str) -> str:
        """Send ``command``; return its response text.  ``expect`` is
        ``success``, ``verdict`` or ``sexpr``."""
        raise NotImplementedError

    def _record(self, command: str, response: str):
        self.trace.append(command)
        if response != "success":
            self.trace.extend("; " + line for line in response.splitlines())

    def _send(self, command: str, expect: str = "success") -> str:
        if self.closed:
            raise BackendError("session is closed")
        if "\n" in command:
            raise ValueError("commands must be single-line")
        response = self._exchange(command, expect)
        self._record(command, response)
        if response.startswith("(error"):
            raise SolverError(response)
        if expect == "success" and response != "success":
            raise ProtocolError("expected success", response)
        return response

    # public API
    def command(self, text: str):
        self._send(text)

    def assert_text(self, term_text: str):
        self._send(f"(assert {term_text})")

    def push(self):
        self._send("(push)")
        self.frames += 1

    def pop(self):
        if self.frames == 0:
            raise BackendError("pop without push")
        self._send("(pop)")
        self.frames -= 1

    def check(self) -> CheckResult:
        start = time.monotonic()
        raw = self._send("(check-sat)", "verdict").strip()
        if raw not in VERDICTS:
            raise ProtocolError("unexpected check-sat response", raw)
        return CheckResult(raw, elapsed_ms=(time.monotonic() - start) * 1000)

    def get_model(self) -> str:
        return self._send("(get-model)", "sexpr")

    def get_values(self, terms: Sequence[str]) -> str:
        return self._send(f"(get-value ({' '.join(terms)}))", "sexpr")

    def check_sat(self, frame: Sequence[str] | None = None, model: bool = False,
                  values: Sequence[str] = ()) -> CheckResult:
        """Check the current assertions plus ``frame`` (asserted inside a
        push/pop pair; ``None`` means a bare check with no frame).  The
        model is fetched before the frame is popped."""
        if frame is None:
            result = self.check()
            if result.verdict == "sat":
                self._fetch(result, model, values)
            return result
        depth = self.frames
        self.push()
        try:
            for text in frame:
                self.assert_text(text)
            result = self.check()
            if result.verdict == "sat":
                self._fetch(result, model, values)
        finally:
            if not self.closed:
                while self.frames > depth:
                    self.pop()
        return result

    def _fetch(self, result: CheckResult, model: bool, values: Sequence[str]):
        if model:
            result.model_text = self.get_model()
        if values:
            result.values_text = self.get_values(values)

    def trace_text(self) -> str:
        return "".join(line + "\n" for line in self.trace)

    def close(self):
        self.closed = True

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class ProcessSession(Session):
    """A solver child process speaking SMT-LIB over stdin/stdout.  One
    reader thread owns the child's stdout."""

    GRACE_MS = 2000

    def __init__(self, config: SolverConfig):
        super().__init__(config)
        argv = _command_line(config)
        try:
            self.proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, stderr=subprocess.PIPE,
                text=True, bufsize=1,
            )
        except OSError as err:
            raise SpawnError(f"cannot start solver {argv[0]}: {err}") from None
        self.lines: queue.Queue = queue.Queue()
        self.reader = threading.Thread(target=self._pump, daemon=True)
        self.reader.start()
        try:
            self._send("(set-option :print-success true)")
        except BackendError as err:
            self.close()
            raise SpawnError(f"handshake with {argv[0]} failed: {err}") from None
        self._send("(set-option :produce-models true)")
        if config.logic:
            self._send(f"(set-logic {config.logic})")

    def _pump(self):
        try:
            for line in self.proc.stdout:
                self.lines.put(line.rstrip("\n"))
        except (ValueError, OSError):
            pass  # stream closed under us by close()
        self.lines.put(None)

    def _readline(self, deadline: float) -> str:
        remaining = deadline - time.monotonic()
        try:
            line = self.lines.get(timeout=max(remaining, 0.001))
        except queue.Empty:
            self.close()
            raise SolverTimeout("solver did not answer in time") from None
        if line is None:
            err = self.proc.stderr.read() if self.proc.stderr else ""
            self.close()
            raise BackendError(f"solver exited unexpectedly {err.strip()}".strip())
        return line

    def _exchange(self, command: str, expect: str) -> str:
        try:
            self.proc.stdin.write(command + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as err:
            self.close()
            raise BackendError(f"solver pipe closed: {err}") from None
        budget = self.config.timeout_ms + self.GRACE_MS if expect == "verdict" else 30_000
        deadline = time.monotonic() + budget / 1000
        first = self._readline(deadline)
        while first.startswith(";"):
            first = self._readline(deadline)
        if expect != "sexpr" and not first.startswith("(error"):
            return first
        text = first
        while not _balanced(text):
            text += "\n" + self._readline(deadline)
        return text

    def check(self) -> CheckResult:
        try:
            return super().check()
        except SolverTimeout:
            return CheckResult("unknown")

    def close(self):
        if self.closed:
            return
        self.closed = True
        try:
            if self.proc.poll() is None:
                try:
                    self.proc.stdin.write("(exit)\n")
                    self.proc.stdin.flush()
                except OSError:
                    pass
                try:
                    self.proc.wait(timeout=1)
                except subprocess.TimeoutExpired:
                    self.proc.kill()
                    self.proc.wait()
        finally:
            self.reader.join(timeout=1)
            for stream in (self.proc.stdin, self.proc.stdout, self.proc.stderr):
                try:
                    stream.close()
                except Exception:
                    pass


class SolverTimeout(BackendError):
    pass


def _command_line(config: SolverConfig) -> list[str]:
    if config.kind == "path":
        exe = config.path
    else:
        exe = os.environ.get(ENV_SOLVER) or _find(config.kind)
    if not exe:
        raise SpawnError(f"no {config.kind} executable found (set {ENV_SOLVER})")
    name = Path(exe).name
    if "cvc" in name:
        tlimit = f"--tlimit-per={config.timeout_ms}"
        argv = [exe, "--lang=smt2", "--incremental", tlimit]
    else:
        argv = [exe, "-in", "-smt2", f"-t:{config.timeout_ms}"]
    return argv + list(config.extra_args)


def _find(kind: str) -> str | None:
    names = ["z3"] if kind == "z3" else ["cvc5", "cvc4"]
    for n in names:
        found = shutil.which(n)
        if found:
            return found
    return None


class ReplaySession(Session):
    """Answers from a trace; any command that differs from the recorded
    stream raises ``ReplayDivergence``."""

    def __init__(self, config: SolverConfig):
        super().__init__(config)
        try:
            text = Path(config.path).read_text(encoding="utf-8")
        except OSError as err:
            raise SpawnError(f"cannot read trace {config.path}: {err}") from None
        self.entries = parse_trace(text)
        self.pos = 0
        self._send("(set-option :print-success true)")
        self._send("(set-option :produce-models true)")
        if config.logic:
            self._send(f"(set-logic {config.logic})")

    def _exchange(self, command: str, expect: str) -> str:
        if self.pos >= len(self.entries):
            raise ReplayDivergence(None, command, self.pos)
        recorded, response = self.entries[self.pos]
        if recorded != command:
            raise ReplayDivergence(recorded, command, self.pos)
        self.pos += 1
        return response if response is not None else "success"

    @property
    def exhausted(self) -> bool:
        return self.pos == len(self.entries)


def parse_trace(text: str) -> list[tuple[str, str | None]]:
    entries: list[tuple[str, str | None]] = []
    for line in text.splitlines():
        if not line.strip() or line.startswith(";;"):
            continue
        if line.startswith("; ") or line == ";":
            if not entries:
                raise ProtocolError("trace starts with a response", line)
            cmd, resp = entries[-1]
            body = line[2:]
            entries[-1] = (cmd, body if resp is None else resp + "\n" + body)
        else:
            entries.append((line, None))
    return entries


def start(config: SolverConfig) -> Session:
    if config.kind == "replay":
        return ReplaySession(config)
    return ProcessSession(config)


def extract_values(text: str) -> dict[str, str]:
    """Per-constant value text from a ``get-model`` response."""
    from .frontend import Atom, SList, read_sexprs

    out: dict[str, str] = {}
    try:
        sxs = read_sexprs(text)
    except Exception:
        return out
    if not sxs:
        return out
    items = sxs[0].items if isinstance(sxs[0], SList) else ()
    if items and isinstance(items[0], Atom) and items[0].text == "model":
        items = items[1:]
    raw = text.encode("utf-8")
    for d in items:
        if not isinstance(d, SList) or len(d.items) != 5:
            continue
        head, name, params = d.items[0], d.items[1], d.items[2]
        if getattr(head, "text", None) != "define-fun" or not isinstance(params, SList) or params.items:
            continue
        body = d.items[4]
        out[name.text] = raw[body.span.offset:body.span.offset + body.span.length].decode("utf-8")
    return out
