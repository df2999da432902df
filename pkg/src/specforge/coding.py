"""Progressive coding: lower each sub-function through PSEUDO, SCRIPT, SYNTH.

Each level runs a draft/verify loop. Drafts arrive through the marker
protocol and are spliced into the level's integrated source. Verification is
mechanical whenever executable test cases exist; expected values for cases
derived from a higher level are always computed by running that level in the
sandbox, never taken from provider text. When a level keeps failing, a prompt
optimizer distills the recurring mistake into an addendum for later attempts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .coding_types import CodeUnit, PromptState, TestCase, VerificationReport
from .document import SpecDocument, render_context
from .errors import PatchError, TestDerivationError
from .patcher import (CodeLevel, IntegratedSource, PatchBlock, apply_patch,
                      count_patch_blocks, parse_patch)
from .prompts import MARKER_PROTOCOL_REMINDER, build_request, tag_header
from .sandbox import CaseResult, Sandbox, parse_width_bits
from .structured import FencedBlockError, parse_fenced_json
from .understanding import SubFunctionSpec

DEFAULT_MAX_ATTEMPTS = 10
DEFAULT_OPTIMIZER_TRIGGER = 3

LEVEL_LANGUAGE = {
    CodeLevel.PSEUDO: "structured pseudocode (FUNCTION <name> ... END FUNCTION)",
    CodeLevel.SCRIPT: "Python (a top-level def)",
    CodeLevel.SYNTH: "C++ with fixed-width integer types, opening brace on the header line",
}


def interface_of(spec: SubFunctionSpec) -> dict:
    """Flatten the declared I/O shape for harness generation."""
    inputs = [{"name": f.name, "width_bits": parse_width_bits(f.shape_or_width)}
              for f in spec.inputs]
    out_bits = parse_width_bits(spec.outputs[0].shape_or_width) if spec.outputs else None
    return {"inputs": inputs, "output_width_bits": out_bits}


@dataclass(frozen=True)
class DraftContext:
    higher_unit: CodeUnit | None = None
    integrated_text: str = ""
    guidance: str = ""  # reflection feedback / operator answers
    previous_unit: CodeUnit | None = None  # set when the verifier asked for a revision
    previous_comments: tuple[str, ...] = ()
    failure_notes: str = ""


def draft_code(spec: SubFunctionSpec, level: CodeLevel, ctx: DraftContext,
               prompt_state: PromptState, provider, version: int,
               on_extra_blocks=None) -> tuple[CodeUnit, str]:
    """One Coder call; returns the parsed unit and the raw response text.

    A marker-protocol violation earns a single reprompt with the protocol
    reminder before PATCH_UNPARSEABLE is raised.
    """
    if level != CodeLevel.PSEUDO and ctx.higher_unit is None:
        raise ValueError(f"progressive-coding precondition: no accepted "
                         f"{level.higher_neighbor().value} unit for {spec.name}")
    header = tag_header(task="draft", level=level.value, subfunction=spec.name)
    body = [
        f"Implement sub-function '{spec.name}' in {LEVEL_LANGUAGE[level]}.",
        "Information dictionary:\n" + json.dumps(spec.to_json(), indent=2, sort_keys=True),
    ]
    addendum = prompt_state.current_addendum()
    if addendum:
        body.append("Prompt addendum from earlier attempts:\n" + addendum)
    if ctx.higher_unit is not None:
        body.append(f"Reference implementation at {ctx.higher_unit.level.value} level:\n"
                    + ctx.higher_unit.source_text)
    if ctx.integrated_text:
        body.append("Current integrated source at this level:\n" + ctx.integrated_text)
    if ctx.previous_unit is not None:
        body.append("Your previous attempt:\n" + ctx.previous_unit.source_text)
        if ctx.previous_comments:
            body.append("Verifier comments:\n" +
                        "\n".join(f"- {c}" for c in ctx.previous_comments))
    if ctx.failure_notes:
        body.append("Failing cases:\n" + ctx.failure_notes)
    if ctx.guidance:
        body.append("Guidance:\n" + ctx.guidance)

    request = build_request("Coder", header, body, tag=f"draft:{spec.name}:{level.value}")
    result = provider.complete(request)
    raw = result.text
    try:
        block = parse_patch(raw)
    except PatchError:
        retry = build_request("Coder", header, body + [MARKER_PROTOCOL_REMINDER],
                              tag=f"draft:{spec.name}:{level.value}:reprompt")
        result = provider.complete(retry)
        raw = result.text
        try:
            block = parse_patch(raw)
        except PatchError as exc:
            raise PatchError(f"marker protocol violated twice for {spec.name}: {exc}",
                             code="PATCH_UNPARSEABLE")
    if count_patch_blocks(raw) > 1 and on_extra_blocks is not None:
        on_extra_blocks(spec.name, level)
    derived = None
    if ctx.higher_unit is not None:
        derived = (ctx.higher_unit.level.value, ctx.higher_unit.version)
    unit = CodeUnit(subfunction=block.subfunction_name, level=level, source_text=block.body,
                    version=version, derived_from=derived)
    return unit, raw


def derive_tests(spec: SubFunctionSpec, level: CodeLevel, doc: SpecDocument,
                 oracle: tuple[IntegratedSource, CodeUnit] | None, provider,
                 sandbox: Sandbox, doc_budget_chars: int = 24_000) -> list[TestCase]:
    """Build the level's test suite.

    SCRIPT cases are extracted from the document (input/expected pairs that
    already appear there). SYNTH cases are proposed by the provider as inputs
    only; the expected side comes from executing the accepted SCRIPT oracle.
    PSEUDO has no executable tests. Raises TestDerivationError
    (NO_TESTS_AVAILABLE) when a level ends up with no cases, which signals the
    self-validation fallback.
    """
    if level == CodeLevel.PSEUDO:
        raise TestDerivationError("pseudocode is not executable", code="NO_TESTS_AVAILABLE")

    if level == CodeLevel.SCRIPT:
        context = render_context(doc, doc.section_ids(), doc_budget_chars)
        request = build_request(
            "Verifier", tag_header(task="derive_tests", origin="SPEC",
                                   level=level.value, subfunction=spec.name),
            ["Extract input/expected pairs for this sub-function that are stated in "
             "the document (worked examples, test vectors). Emit a ```tests fence. "
             "Emit an empty list when the document states none.",
             "Information dictionary:\n" + json.dumps(spec.to_json(), sort_keys=True)],
            context=context, tag=f"derive_tests:{spec.name}:{level.value}")
        result = provider.complete(request)
        cases = _parse_cases(result.text, level, origin="SPEC")
        if not cases:
            raise TestDerivationError(f"document yields no cases for {spec.name}",
                                      code="NO_TESTS_AVAILABLE")
        return cases

    # SYNTH: inputs proposed by the provider, expected computed from the oracle.
    if oracle is None:
        raise TestDerivationError(f"no executable oracle for {spec.name} at SYNTH",
                                  code="NO_TESTS_AVAILABLE")
    oracle_source, oracle_unit = oracle
    request = build_request(
        "Verifier", tag_header(task="derive_tests", origin="HIGHER_LEVEL",
                               level=level.value, subfunction=spec.name),
        ["Propose representative input tuples for this sub-function. Only the inputs "
         "matter; any expected values you emit are ignored. Emit a ```tests fence.",
         "Information dictionary:\n" + json.dumps(spec.to_json(), sort_keys=True)],
        tag=f"derive_tests:{spec.name}:{level.value}")
    result = provider.complete(request)
    proposed = _parse_cases(result.text, level, origin="HIGHER_LEVEL")
    if not proposed:
        raise TestDerivationError(f"provider proposed no inputs for {spec.name}",
                                  code="NO_TESTS_AVAILABLE")
    observed = sandbox.run_oracle(oracle_source, spec.name,
                                  [list(c.inputs) for c in proposed], interface_of(spec))
    return [TestCase(case_id=c.case_id, level=level, inputs=c.inputs, expected=obs,
                     origin="HIGHER_LEVEL",
                     oracle=(oracle_unit.level.value, oracle_unit.version))
            for c, obs in zip(proposed, observed)]


def _parse_cases(text: str, level: CodeLevel, origin: str) -> list[TestCase]:
    try:
        rec = parse_fenced_json(text, "tests")
    except FencedBlockError as exc:
        raise TestDerivationError(f"tests fence unparseable: {exc}",
                                  code="NO_TESTS_AVAILABLE")
    if not isinstance(rec, list):
        raise TestDerivationError("tests fence must contain a JSON list",
                                  code="NO_TESTS_AVAILABLE")
    cases = []
    for i, item in enumerate(rec):
        cases.append(TestCase(
            case_id=str(item.get("id", f"t{i}")), level=level,
            inputs=tuple(str(v) for v in item.get("inputs", ())),
            expected=str(item.get("expected", "")), origin=origin))
    return cases


def _failure_digest(results: list[CaseResult]) -> str:
    lines = []
    for r in results:
        if r.status != "PASS":
            lines.append(f"{r.case_id}: {r.status} observed={r.observed} "
                         f"expected={r.expected}")
    return "\n".join(lines)


def verify_code(unit: CodeUnit, source: IntegratedSource, tests: list[TestCase],
                spec: SubFunctionSpec, provider, sandbox: Sandbox) -> VerificationReport:
    """Mechanical verification when tests exist; provider self-validation otherwise.

    Failing mechanical runs get a Verifier pass over the failure output to
    assess where the error likely lives and whether the next attempt should
    revise or regenerate.
    """
    if tests:
        results = sandbox.run_testcases(source, unit.subfunction, tests, interface_of(spec))
        case_results = tuple({"id": r.case_id, "status": r.status, "observed": r.observed,
                              "expected": r.expected} for r in results)
        if all(r.status == "PASS" for r in results):
            return VerificationReport(passed=True, case_results=case_results,
                                      suspicion="CURRENT", notes="all cases pass")
        digest = _failure_digest(results)
        request = build_request(
            "Verifier", tag_header(task="assess_failure", level=unit.level.value,
                                   subfunction=unit.subfunction),
            ["The implementation failed mechanical verification.",
             "Failures:\n" + digest,
             "Implementation:\n" + unit.source_text,
             "Information dictionary:\n" + json.dumps(spec.to_json(), sort_keys=True)],
            tag=f"assess:{unit.subfunction}:{unit.level.value}")
        result = provider.complete(request)
        suspicion, mode, comments = _parse_assessment(result.text)
        return VerificationReport(passed=False, case_results=case_results,
                                  suspicion=suspicion, notes=digest,
                                  verdict_mode=mode, comments=comments)

    # Self-validation: no executable cases, the provider compares against the spec.
    request = build_request(
        "Verifier", tag_header(task="self_validate", level=unit.level.value,
                               subfunction=unit.subfunction),
        ["No test cases are available. Compare the implementation directly against "
         "its information dictionary and give a verdict fence.",
         "Implementation:\n" + unit.source_text,
         "Information dictionary:\n" + json.dumps(spec.to_json(), sort_keys=True)],
        tag=f"selfval:{unit.subfunction}:{unit.level.value}")
    result = provider.complete(request)
    _, mode, comments = _parse_assessment(result.text)
    accepted = _verdict_of(result.text) == "ACCEPT"
    return VerificationReport(passed=accepted, case_results=(),
                              suspicion="CURRENT", notes="self-validation",
                              verdict_mode=mode, comments=comments)


def _verdict_of(text: str) -> str:
    try:
        rec = parse_fenced_json(text, "verdict")
        return rec.get("verdict", "REVISE") if isinstance(rec, dict) else "REVISE"
    except FencedBlockError:
        return "REVISE"


def _parse_assessment(text: str) -> tuple[str, str, tuple[str, ...]]:
    try:
        rec = parse_fenced_json(text, "verdict")
    except FencedBlockError:
        return "UNKNOWN", "REVISE", ("verifier response unparseable",)
    if not isinstance(rec, dict):
        return "UNKNOWN", "REVISE", ("verifier response malformed",)
    suspicion = rec.get("suspicion", "UNKNOWN")
    if suspicion not in ("CURRENT", "PRIOR_SUBFUNCTION", "INSTRUCTIONS", "UNKNOWN"):
        suspicion = "UNKNOWN"
    mode = "REGENERATE" if rec.get("verdict") == "REGENERATE" else "REVISE"
    return suspicion, mode, tuple(rec.get("comments", ()))


def optimize_prompt(prompt_state: PromptState, spec_name: str, level: CodeLevel,
                    recent_failures: list[VerificationReport], provider,
                    trigger: int = DEFAULT_OPTIMIZER_TRIGGER) -> dict:
    """Distill the recent failures into one appended prompt addendum.

    Returns the appended revision record. Malformed optimizer output is
    skipped (empty record returned) so a bad optimization never stalls coding.
    """
    if len(recent_failures) < trigger:
        raise ValueError(f"optimizer needs {trigger} consecutive failures, "
                         f"got {len(recent_failures)}")
    log_lines = []
    for i, report in enumerate(recent_failures, 1):
        log_lines.append(f"attempt {i}: suspicion={report.suspicion}; "
                         f"{report.notes or 'no notes'}")
        for c in report.comments:
            log_lines.append(f"  comment: {c}")
    request = build_request(
        "PromptOptimizer", tag_header(task="optimize_prompt", subfunction=spec_name,
                                      level=level.value),
        ["Recent failed attempts:\n" + "\n".join(log_lines)],
        tag=f"optimize:{spec_name}:{level.value}")
    result = provider.complete(request)
    try:
        rec = parse_fenced_json(result.text, "addendum")
    except FencedBlockError:
        return {}
    if not isinstance(rec, dict) or not rec.get("addendum"):
        return {}
    revision = {"trigger_summary": rec.get("trigger_summary", ""),
                "addendum": rec["addendum"]}
    prompt_state.addenda.append(revision)
    return revision


# --- the level loop -----------------------------------------------------------

@dataclass
class LoopProgress:
    """Mutable per-loop bookkeeping, reconstructible from attempt history."""

    attempts: int = 0
    optimizations: int = 0
    recent_failures: list[VerificationReport] = None  # since the last optimization
    last_unit: CodeUnit | None = None
    last_report: VerificationReport | None = None

    def __post_init__(self):
        if self.recent_failures is None:
            self.recent_failures = []

    def optimizer_due(self, trigger: int) -> bool:
        return (self.last_report is not None and not self.last_report.passed
                and len(self.recent_failures) >= trigger)

    def note_attempt(self, unit: CodeUnit, report: VerificationReport) -> None:
        self.attempts += 1
        self.last_unit = unit
        self.last_report = report
        if report.passed:
            self.recent_failures = []
        else:
            self.recent_failures.append(report)

    def note_optimized(self) -> None:
        self.optimizations += 1
        self.recent_failures = []


def next_draft_context(progress: LoopProgress, higher_unit: CodeUnit | None,
                       integrated_text: str, guidance: str = "",
                       fresh: bool = False) -> DraftContext:
    """Decide what the Coder sees next: previous unit + comments after a REVISE
    verdict, the spec alone after a REGENERATE verdict or a fresh loop entry."""
    report = progress.last_report
    if fresh or report is None or report.passed or report.verdict_mode == "REGENERATE":
        return DraftContext(higher_unit=higher_unit, integrated_text=integrated_text,
                            guidance=guidance)
    return DraftContext(higher_unit=higher_unit, integrated_text=integrated_text,
                        guidance=guidance, previous_unit=progress.last_unit,
                        previous_comments=report.comments, failure_notes=report.notes)


@dataclass(frozen=True)
class LevelOutcome:
    accepted: bool
    attempts: int
    unit: CodeUnit | None
    source: IntegratedSource
    last_report: VerificationReport | None
    tests: tuple[TestCase, ...] = ()


def run_level_loop(spec: SubFunctionSpec, level: CodeLevel, source: IntegratedSource,
                   higher_unit: CodeUnit | None, doc: SpecDocument, provider,
                   sandbox: Sandbox, prompt_state: PromptState,
                   max_attempts: int = DEFAULT_MAX_ATTEMPTS,
                   optimizer_trigger: int = DEFAULT_OPTIMIZER_TRIGGER,
                   guidance: str = "", start_version: int = 1,
                   oracle: tuple[IntegratedSource, CodeUnit] | None = None,
                   on_attempt=None, on_optimized=None) -> LevelOutcome:
    """Alternate draft and verify until acceptance or budget exhaustion.

    This is the in-process form of the loop; the orchestrator drives the same
    primitives one attempt at a time so runs can pause and resume.
    """
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    try:
        tests = derive_tests(spec, level, doc, oracle, provider, sandbox)
    except TestDerivationError:
        tests = []
    progress = LoopProgress()
    version = start_version
    fresh = True
    while progress.attempts < max_attempts:
        ctx = next_draft_context(progress, higher_unit, source.text,
                                 guidance=guidance, fresh=fresh)
        fresh = False
        unit, _raw = draft_code(spec, level, ctx, prompt_state, provider, version)
        version += 1
        source = apply_patch(source, PatchBlock(unit.subfunction, unit.source_text))
        report = verify_code(unit, source, tests, spec, provider, sandbox)
        progress.note_attempt(unit, report)
        if on_attempt is not None:
            on_attempt(unit, report, progress.attempts)
        if report.passed:
            return LevelOutcome(accepted=True, attempts=progress.attempts, unit=unit,
                                source=source, last_report=report, tests=tuple(tests))
        if progress.optimizer_due(optimizer_trigger):
            revision = optimize_prompt(prompt_state, spec.name, level,
                                       progress.recent_failures, provider,
                                       trigger=optimizer_trigger)
            progress.note_optimized()
            if on_optimized is not None and revision:
                on_optimized(revision)
    return LevelOutcome(accepted=False, attempts=progress.attempts, unit=progress.last_unit,
                        source=source, last_report=progress.last_report, tests=tuple(tests))
