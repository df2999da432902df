"""Isolated execution of generated code.

Every execution gets a fresh working directory, a scrubbed environment, a
mandatory timeout, and capped output capture. SCRIPT programs run under the
configured interpreter; SYNTH programs compile first, then run. Harnesses for
test cases are generated from the sub-function's declared interface so the
comparison side stays mechanical.
"""

from __future__ import annotations

import re
import shlex
import subprocess
import tempfile
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .coding_types import TestCase
from .errors import SandboxError
from .patcher import CodeLevel, IntegratedSource, locate_function

OUTPUT_CAP = 64_000
CAP_MARKER = "\n[output truncated]"
TIMEOUT_GRACE_SECONDS = 1.0

_WIDTH_RE = re.compile(r"(\d+)\s*(?:-?\s*bits?)?", re.IGNORECASE)


@dataclass(frozen=True)
class ToolchainConfig:
    script_run_cmd: str = "python3 {file}"
    synth_compile_cmd: str = "g++ -std=c++17 -O0 {file} -o {exe}"
    synth_run_cmd: str = "{exe}"
    timeout_seconds: float = 20.0
    max_parallel: int = 4


@dataclass(frozen=True)
class ExecutionRequest:
    level: CodeLevel
    program_text: str
    harness_text: str
    timeout_seconds: float
    workdir: Path

    def __post_init__(self):
        if self.level == CodeLevel.PSEUDO:
            raise ValueError("PSEUDO is never executed")
        if self.timeout_seconds <= 0:
            raise ValueError("timeout must be positive")


@dataclass(frozen=True)
class ExecutionResult:
    status: str  # OK | COMPILE_ERROR | RUNTIME_ERROR | TIMEOUT
    stdout: str
    stderr: str
    exit_code: int
    duration_seconds: float


@dataclass(frozen=True)
class CaseResult:
    case_id: str
    status: str  # PASS | FAIL | ERROR
    observed: str
    expected: str


def _cap(text: str) -> str:
    if len(text) > OUTPUT_CAP:
        return text[:OUTPUT_CAP] + CAP_MARKER
    return text


def _scrubbed_env() -> dict:
    return {"PATH": "/usr/local/bin:/usr/bin:/bin", "LC_ALL": "C", "HOME": "/tmp"}


class Sandbox:
    """Runs untrusted generated programs; artifacts are retained for postmortem."""

    def __init__(self, config: ToolchainConfig, artifacts_root: Path | None = None):
        self.config = config
        self.artifacts_root = artifacts_root
        self._semaphore = threading.Semaphore(max(1, config.max_parallel))
        self._counter = 0
        self._counter_lock = threading.Lock()

    def new_workdir(self) -> Path:
        with self._counter_lock:
            self._counter += 1
            n = self._counter
        if self.artifacts_root is not None:
            self.artifacts_root.mkdir(parents=True, exist_ok=True)
            path = self.artifacts_root / f"{n:04d}-{uuid.uuid4().hex[:8]}"
            path.mkdir()
            return path
        return Path(tempfile.mkdtemp(prefix=f"specforge-exec-{n}-"))

    def _run_cmd(self, cmd: str, substitutions: dict, cwd: Path,
                 timeout: float) -> tuple[subprocess.CompletedProcess | None, float, bool]:
        argv = [a.format(**substitutions) for a in shlex.split(cmd)]
        started = time.monotonic()
        try:
            proc = subprocess.run(
                argv, cwd=cwd, env=_scrubbed_env(), capture_output=True, text=True,
                timeout=timeout + TIMEOUT_GRACE_SECONDS)
            return proc, time.monotonic() - started, False
        except subprocess.TimeoutExpired:
            return None, time.monotonic() - started, True
        except FileNotFoundError as exc:
            raise SandboxError(f"toolchain command not executable: {argv[0]} ({exc})",
                               code="TOOLCHAIN_MISSING")

    def execute(self, request: ExecutionRequest) -> ExecutionResult:
        """Run one program+harness pair inside its own directory."""
        with self._semaphore:
            return self._execute_locked(request)

    def _execute_locked(self, request: ExecutionRequest) -> ExecutionResult:
        workdir = request.workdir
        workdir.mkdir(parents=True, exist_ok=True)
        if request.level == CodeLevel.SCRIPT:
            src = workdir / "main.py"
            src.write_text(request.program_text + "\n\n" + request.harness_text,
                           encoding="utf-8")
            proc, dur, timed_out = self._run_cmd(
                self.config.script_run_cmd, {"file": str(src)}, workdir,
                request.timeout_seconds)
            if timed_out:
                return ExecutionResult("TIMEOUT", "", "", -1, dur)
            status = "OK" if proc.returncode == 0 else "RUNTIME_ERROR"
            return ExecutionResult(status, _cap(proc.stdout), _cap(proc.stderr),
                                   proc.returncode, dur)

        src = workdir / "main.cpp"
        exe = workdir / "prog"
        src.write_text(request.program_text + "\n\n" + request.harness_text,
                       encoding="utf-8")
        proc, dur, timed_out = self._run_cmd(
            self.config.synth_compile_cmd, {"file": str(src), "exe": str(exe)},
            workdir, request.timeout_seconds)
        if timed_out:
            return ExecutionResult("TIMEOUT", "", "compilation timed out", -1, dur)
        if proc.returncode != 0:
            return ExecutionResult("COMPILE_ERROR", _cap(proc.stdout), _cap(proc.stderr),
                                   proc.returncode, dur)
        proc, run_dur, timed_out = self._run_cmd(
            self.config.synth_run_cmd, {"file": str(src), "exe": str(exe)},
            workdir, request.timeout_seconds)
        if timed_out:
            return ExecutionResult("TIMEOUT", "", "", -1, dur + run_dur)
        status = "OK" if proc.returncode == 0 else "RUNTIME_ERROR"
        return ExecutionResult(status, _cap(proc.stdout), _cap(proc.stderr),
                               proc.returncode, dur + run_dur)

    # --- test-case harnesses -------------------------------------------------

    def run_testcases(self, source: IntegratedSource, entry: str, tests: list[TestCase],
                      interface: dict) -> list[CaseResult]:
        """Execute test cases against a sub-function of the integrated source.

        ``interface`` is the sub-function's declared I/O shape:
        ``{"inputs": [{"name", "width_bits"|None}], "output_width_bits": int|None}``.
        A PASS means observed equals expected after numeric canonicalization.
        """
        if not tests:
            return []
        if locate_function(source, entry) is None:
            raise SandboxError(
                f"entry {entry!r} not defined in the {source.level.value} source",
                code="HARNESS_GENERATION_FAILED")
        harness = generate_harness(source.level, entry, tests, interface)
        request = ExecutionRequest(
            level=source.level, program_text=source.text, harness_text=harness,
            timeout_seconds=self.config.timeout_seconds, workdir=self.new_workdir())
        result = self.execute(request)
        observed = parse_case_lines(result.stdout)
        out: list[CaseResult] = []
        for case in tests:
            if case.case_id in observed:
                got = observed[case.case_id]
                ok = values_equal(got, case.expected)
                out.append(CaseResult(case.case_id, "PASS" if ok else "FAIL",
                                      got, case.expected))
            else:
                detail = result.stderr.strip() or result.status
                out.append(CaseResult(case.case_id, "ERROR", f"<{detail}>", case.expected))
        return out

    def run_oracle(self, source: IntegratedSource, entry: str, inputs_list: list[list[str]],
                   interface: dict) -> list[str]:
        """Execute an oracle unit on a batch of inputs and return observed values.

        Used to fill the expected side of HIGHER_LEVEL test cases; the oracle
        must be executable (SCRIPT level).
        """
        if source.level != CodeLevel.SCRIPT:
            raise SandboxError("oracle must be executable SCRIPT code",
                               code="ORACLE_EXECUTION_FAILED")
        probes = [TestCase(case_id=f"probe{i}", level=source.level, inputs=tuple(ins),
                           expected="", origin="HIGHER_LEVEL")
                  for i, ins in enumerate(inputs_list)]
        if locate_function(source, entry) is None:
            raise SandboxError(f"oracle entry {entry!r} missing from SCRIPT source",
                               code="ORACLE_EXECUTION_FAILED")
        harness = generate_harness(source.level, entry, probes, interface)
        request = ExecutionRequest(
            level=source.level, program_text=source.text, harness_text=harness,
            timeout_seconds=self.config.timeout_seconds, workdir=self.new_workdir())
        result = self.execute(request)
        observed = parse_case_lines(result.stdout)
        values = []
        for probe in probes:
            if probe.case_id not in observed:
                raise SandboxError(
                    f"oracle run produced no value for inputs {probe.inputs} "
                    f"({result.status}: {result.stderr.strip()[:200]})",
                    code="ORACLE_EXECUTION_FAILED")
            values.append(observed[probe.case_id])
        return values


def parse_width_bits(width: str | None) -> int | None:
    if not width:
        return None
    m = _WIDTH_RE.search(width)
    return int(m.group(1)) if m else None


def inferred_interface(inputs: list[str]) -> dict:
    """Minimal-width interface inferred from literal values; used when no
    information dictionary is available (single-shot mode). Widening casts
    keep the values intact for unsigned scalars."""
    decls = []
    for value in inputs:
        bits = max(8, int(value, 0).bit_length())
        for width in (8, 16, 32, 64):
            if bits <= width:
                decls.append({"name": f"a{len(decls)}", "width_bits": width})
                break
    return {"inputs": decls, "output_width_bits": 64}


def _ctype_for_bits(bits: int) -> str:
    for limit, name in ((8, "uint8_t"), (16, "uint16_t"), (32, "uint32_t"), (64, "uint64_t")):
        if bits <= limit:
            return name
    raise SandboxError(f"unsupported width {bits} bits", code="HARNESS_GENERATION_FAILED")


def _literal_ok(value: str) -> bool:
    try:
        int(value, 0)
        return True
    except ValueError:
        return False


def generate_harness(level: CodeLevel, entry: str, tests: list[TestCase],
                     interface: dict) -> str:
    """Build the per-level test driver that prints one ``CASE <id> <value>``
    line per case. Values print as lowercase hex when the output declares a
    bit width, decimal otherwise."""
    inputs_decl = interface.get("inputs", [])
    out_bits = interface.get("output_width_bits")
    for case in tests:
        if len(case.inputs) != len(inputs_decl):
            raise SandboxError(
                f"case {case.case_id}: {len(case.inputs)} inputs but the interface "
                f"declares {len(inputs_decl)}", code="HARNESS_GENERATION_FAILED")
        for value in case.inputs:
            if not _literal_ok(value):
                raise SandboxError(f"case {case.case_id}: bad literal {value!r}",
                                   code="HARNESS_GENERATION_FAILED")
    if level == CodeLevel.SCRIPT:
        return _python_harness(entry, tests, out_bits)
    if level == CodeLevel.SYNTH:
        return _cpp_harness(entry, tests, inputs_decl, out_bits)
    raise SandboxError("no harness for PSEUDO", code="HARNESS_GENERATION_FAILED")


def _python_harness(entry: str, tests: list[TestCase], out_bits: int | None) -> str:
    value_expr = "hex(v)" if out_bits is not None else "str(v)"
    lines = [
        "def _show(v):",
        "    if isinstance(v, (tuple, list)):",
        "        return ' '.join(_show(x) for x in v)",
        f"    return {value_expr}",
        "",
        "if __name__ == '__main__':",
    ]
    for case in tests:
        args = ", ".join(case.inputs)
        lines.append(f"    print('CASE {case.case_id} ' + _show({entry}({args})))")
    return "\n".join(lines) + "\n"


def _cpp_harness(entry: str, tests: list[TestCase], inputs_decl: list[dict],
                 out_bits: int | None) -> str:
    lines = ["#include <cstdio>", "int main() {"]
    fmt = "0x%llx" if out_bits is not None else "%lld"
    cast = "(unsigned long long)" if out_bits is not None else "(long long)"
    for case in tests:
        args = []
        for decl, value in zip(inputs_decl, case.inputs):
            bits = decl.get("width_bits")
            if bits is not None:
                args.append(f"({_ctype_for_bits(bits)}){value}")
            else:
                args.append(value)
        call = f"{entry}({', '.join(args)})"
        lines.append(f'    printf("CASE {case.case_id} {fmt}\\n", {cast}({call}));')
    lines.append("    return 0;")
    lines.append("}")
    return "\n".join(lines) + "\n"


def parse_case_lines(stdout: str) -> dict[str, str]:
    observed: dict[str, str] = {}
    for line in stdout.splitlines():
        parts = line.strip().split(None, 2)
        if len(parts) >= 3 and parts[0] == "CASE":
            observed[parts[1]] = parts[2].strip()
    return observed


def values_equal(observed: str, expected: str) -> bool:
    """Numeric equivalence across hex/decimal spellings; whitespace-insensitive
    fallback to string comparison for non-numeric values."""
    obs_items = observed.split()
    exp_items = expected.split()
    if len(obs_items) != len(exp_items):
        return False
    for o, e in zip(obs_items, exp_items):
        try:
            if int(o, 0) != int(e, 0):
                return False
        except ValueError:
            if o != e:
                return False
    return True
