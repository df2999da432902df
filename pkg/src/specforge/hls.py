"""Synthesis-compatibility lint and the optimizer rewrite loop.

The shipped ruleset is a conservative generic subset of common HLS coding
restrictions (no dynamic allocation, no recursion, bounded storage,
fixed-width integer types, no stream I/O). Rulesets are data files so vendor
rules can replace them. The optimizer loop rewrites one violating
sub-function per round through the marker protocol and re-verifies behavior
after every round: a patch that breaks a previously passing test is rolled
back, recorded as a behavior regression, and never reaches the synthesizer.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import HlsError, PatchError
from .patcher import IntegratedSource, PatchBlock, apply_patch, parse_patch
from .prompts import build_request, tag_header

DEFAULT_HLS_BUDGET = 5
SEVERITIES = ("BLOCKING", "WARNING")


@dataclass(frozen=True)
class HlsRule:
    rule_id: str
    description: str
    severity: str
    detector_kind: str  # regex | recursion
    pattern: str | None = None


@dataclass(frozen=True)
class Violation:
    rule_id: str
    line: int
    excerpt: str
    severity: str

    def to_json(self) -> dict:
        return {"rule_id": self.rule_id, "line": self.line,
                "excerpt": self.excerpt, "severity": self.severity}


@dataclass(frozen=True)
class LintReport:
    violations: tuple[Violation, ...]

    @property
    def clean(self) -> bool:
        return not any(v.severity == "BLOCKING" for v in self.violations)

    def to_json(self) -> dict:
        return {"clean": self.clean, "violations": [v.to_json() for v in self.violations]}


def load_ruleset(path: str | Path | None = None) -> list[HlsRule]:
    """Load a ruleset file; None loads the shipped default."""
    if path is None:
        raw = resources.files("specforge").joinpath("data/hls_rules.json").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    try:
        rec = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise HlsError(f"ruleset is not valid JSON: {exc}", code="RULESET_MALFORMED")
    rules: list[HlsRule] = []
    seen: set[str] = set()
    for item in rec.get("rules", ()):
        rid = item.get("rule_id")
        if not rid or rid in seen:
            raise HlsError(f"missing or duplicate rule_id: {rid!r}", code="RULESET_MALFORMED")
        seen.add(rid)
        severity = item.get("severity")
        if severity not in SEVERITIES:
            raise HlsError(f"rule {rid}: bad severity {severity!r}", code="RULESET_MALFORMED")
        detector = item.get("detector", {})
        kind = detector.get("kind")
        if kind == "regex":
            pattern = detector.get("pattern")
            try:
                re.compile(pattern or "")
            except re.error as exc:
                raise HlsError(f"rule {rid}: bad pattern: {exc}", code="RULESET_MALFORMED")
            if not pattern:
                raise HlsError(f"rule {rid}: regex detector needs a pattern",
                               code="RULESET_MALFORMED")
            rules.append(HlsRule(rid, item.get("description", ""), severity, "regex", pattern))
        elif kind == "recursion":
            rules.append(HlsRule(rid, item.get("description", ""), severity, "recursion"))
        else:
            raise HlsError(f"rule {rid}: unknown detector kind {kind!r}",
                           code="RULESET_MALFORMED")
    if not rules:
        raise HlsError("ruleset lists no rules", code="RULESET_MALFORMED")
    return rules


def _call_graph(source: IntegratedSource) -> dict[str, set[str]]:
    names = set(source.index)
    lines = source.text.split("\n")
    graph: dict[str, set[str]] = {}
    for name, span in source.index.items():
        body = "\n".join(lines[span.start_line:span.end_line])  # header line excluded
        calls = set()
        for other in names:
            if re.search(r"\b" + re.escape(other) + r"\s*\(", body):
                calls.add(other)
        graph[name] = calls
    return graph


def _recursion_cycles(source: IntegratedSource) -> list[tuple[str, int]]:
    """Names participating in call-graph cycles, with their header lines."""
    graph = _call_graph(source)
    flagged: list[tuple[str, int]] = []
    for start in sorted(graph):
        stack = [(start, iter(sorted(graph[start])))]
        visited = {start}
        found = False
        while stack and not found:
            _, it = stack[-1]
            for nxt in it:
                if nxt == start:
                    found = True
                    break
                if nxt in graph and nxt not in visited:
                    visited.add(nxt)
                    stack.append((nxt, iter(sorted(graph[nxt]))))
                    break
            else:
                stack.pop()
        if found:
            flagged.append((start, source.index[start].start_line))
    return flagged


def lint_for_hls(source: IntegratedSource, rules: list[HlsRule]) -> LintReport:
    """Evaluate every rule over the integrated SYNTH source. Pure and
    deterministic: same (source, ruleset) means the same report."""
    violations: list[Violation] = []
    lines = source.text.split("\n")
    for rule in rules:
        if rule.detector_kind == "regex":
            pat = re.compile(rule.pattern)
            for lineno, line in enumerate(lines, 1):
                if pat.search(line):
                    violations.append(Violation(rule.rule_id, lineno, line.strip()[:120],
                                                rule.severity))
        elif rule.detector_kind == "recursion":
            for name, lineno in _recursion_cycles(source):
                violations.append(Violation(rule.rule_id, lineno,
                                            f"{name} participates in a call cycle",
                                            rule.severity))
    violations.sort(key=lambda v: (v.line, v.rule_id))
    return LintReport(violations=tuple(violations))


def enclosing_subfunction(source: IntegratedSource, line: int) -> str | None:
    for name, span in source.index.items():
        if span.start_line <= line <= span.end_line:
            return name
    return None


def _blocking(report: LintReport) -> list[Violation]:
    return [v for v in report.violations if v.severity == "BLOCKING"]


def optimize_for_hls(source: IntegratedSource, report: LintReport, rules: list[HlsRule],
                     guidelines: str, provider, budget: int, reverify,
                     on_round=None) -> tuple[IntegratedSource, LintReport]:
    """Drive the rewrite agent until the source lints clean or the budget ends.

    ``reverify(source) -> list[str]`` re-runs the previously passing behavior
    tests and returns the ids of any that now fail; a non-empty answer rolls
    the round back. Raises HlsError(HLS_BUDGET_EXHAUSTED) when blocking
    violations remain after the last round.
    """
    if report.clean:
        raise ValueError("optimize_for_hls requires a non-clean report")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    rules_text = guidelines
    for round_no in range(1, budget + 1):
        blocking = _blocking(report)
        target_violation = blocking[0]
        target = enclosing_subfunction(source, target_violation.line)
        if target is None:
            raise HlsError(
                f"violation at line {target_violation.line} is outside every "
                f"sub-function", code="HLS_BUDGET_EXHAUSTED",
                detail=report.to_json())
        current_body = _function_text(source, target)
        request = build_request(
            "CodeOptimizer", tag_header(task="hls_optimize", subfunction=target),
            ["Rewrite this sub-function so it satisfies the rules without changing "
             "behavior. Emit the marker-protocol block.",
             "Rules:\n" + rules_text,
             "Violations in this sub-function:\n" +
             "\n".join(f"- {v.rule_id} line {v.line}: {v.excerpt}"
                       for v in blocking
                       if enclosing_subfunction(source, v.line) == target),
             "Current implementation:\n" + current_body],
            tag=f"hls:{target}:round{round_no}")
        result = provider.complete(request)
        rolled_back = False
        try:
            block = parse_patch(result.text)
            patched = apply_patch(source, block)
        except PatchError:
            patched = source
            rolled_back = True
        regressions: list[str] = []
        if not rolled_back:
            regressions = reverify(patched)
            if regressions:
                rolled_back = True
                patched = source  # the round never lands
        if not rolled_back:
            source = patched
        report = lint_for_hls(source, rules)
        if on_round is not None:
            on_round(round_no, target, rolled_back, regressions, report)
        if report.clean:
            return source, report
    raise HlsError(f"blocking violations remain after {budget} rounds",
                   code="HLS_BUDGET_EXHAUSTED", detail=report.to_json())


def _function_text(source: IntegratedSource, name: str) -> str:
    span = source.index[name]
    lines = source.text.split("\n")
    return "\n".join(lines[span.start_line - 1:span.end_line])


def invoke_synthesizer(source_path: Path, cmd_template: str | None,
                       timeout_seconds: float) -> dict:
    """Run the external synthesis command; absent config skips the step."""
    if not cmd_template:
        return {"status": "SKIPPED", "exit_code": None, "output": ""}
    import shlex
    import subprocess
    import time

    argv = [a.format(file=str(source_path)) for a in shlex.split(cmd_template)]
    started = time.monotonic()
    try:
        proc = subprocess.run(argv, capture_output=True, text=True,
                              timeout=timeout_seconds)
    except FileNotFoundError as exc:
        raise HlsError(f"synthesizer command not executable: {exc}",
                       code="TOOLCHAIN_MISSING")
    except subprocess.TimeoutExpired:
        return {"status": "TIMEOUT", "exit_code": None,
                "output": "", "duration_seconds": time.monotonic() - started}
    output = (proc.stdout + proc.stderr)[:8000]
    return {"status": "OK" if proc.returncode == 0 else "FAILED",
            "exit_code": proc.returncode, "output": output,
            "duration_seconds": time.monotonic() - started}
