"""Adaptive reflection: trace the error, pick a route, escalate when unclear.

After a coding budget runs out, an Analyzer reviews a digest of the run
trajectory and proposes error-locus hypotheses; a Reflector then chooses one
of four resolutions: revise the instructions, revise a prior unit, regenerate
the current one, or escalate to a human. Invalid targets collapse to human
escalation rather than looping.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone

from .errors import ReflectionError
from .prompts import build_request, tag_header
from .structured import FencedBlockError, parse_fenced_json

DEFAULT_MAX_REFLECTIONS = 3
DEFAULT_DIGEST_CHARS = 16_000

ROUTES = ("REVISE_INSTRUCTIONS", "REVISE_PRIOR", "REGENERATE_CURRENT", "ESCALATE_HUMAN")
LOCI = ("INSTRUCTIONS", "PRIOR_SUBFUNCTION", "CURRENT", "UNKNOWN")


@dataclass(frozen=True)
class ErrorHypothesis:
    locus: str
    name: str | None = None  # set for PRIOR_SUBFUNCTION
    rationale: str = ""


@dataclass(frozen=True)
class TrajectorySummary:
    completed_work: str
    failure_focus: str
    hypotheses: tuple[ErrorHypothesis, ...]
    degraded: bool = False  # true when the UNKNOWN fallback had to be inserted


@dataclass(frozen=True)
class ReflectionDecision:
    route: str
    target: str | None = None  # sub-function name, optionally "name@LEVEL"
    feedback: str = ""
    justification: str = ""
    forced: bool = False  # reflection budget exceeded, no Reflector consulted

    def to_json(self) -> dict:
        return {"route": self.route, "target": self.target, "feedback": self.feedback,
                "justification": self.justification, "forced": self.forced}


@dataclass
class InterventionRequest:
    request_id: str
    observations: str
    attempts: str
    questions: list[str]
    created_at: str
    status: str = "PENDING"  # PENDING | ANSWERED
    answer: str | None = None

    def to_json(self) -> dict:
        return {"request_id": self.request_id, "observations": self.observations,
                "attempts": self.attempts, "questions": self.questions,
                "created_at": self.created_at, "status": self.status,
                "answer": self.answer}

    @staticmethod
    def from_json(rec: dict) -> "InterventionRequest":
        return InterventionRequest(
            request_id=rec["request_id"], observations=rec.get("observations", ""),
            attempts=rec.get("attempts", ""), questions=list(rec.get("questions", ())),
            created_at=rec.get("created_at", ""), status=rec.get("status", "PENDING"),
            answer=rec.get("answer"))


def render_digest(events: list[dict], budget_chars: int = DEFAULT_DIGEST_CHARS) -> str:
    """Compact the trajectory slice, most recent events first, within a budget."""
    lines: list[str] = []
    used = 0
    for ev in reversed(events):
        payload = ev.get("payload", {})
        brief = {k: v for k, v in payload.items()
                 if isinstance(v, (str, int, float, bool)) and k != "response"}
        line = f"#{ev.get('seq')} {ev.get('kind')} " + json.dumps(brief, sort_keys=True)
        if len(line) > 600:
            line = line[:600] + "..."
        if used + len(line) + 1 > budget_chars:
            break
        lines.append(line)
        used += len(line) + 1
    return "\n".join(lines)


def analyze_trajectory(events: list[dict], provider, accepted_names: set[str],
                       digest_chars: int = DEFAULT_DIGEST_CHARS) -> TrajectorySummary:
    """Analyzer pass over the trajectory digest.

    Hypotheses with malformed loci are dropped; when none survive, an UNKNOWN
    fallback is inserted and the summary is flagged as degraded.
    """
    if not any(ev.get("kind") == "LEVEL_EXHAUSTED" for ev in events):
        raise ValueError("trajectory slice contains no exhausted coding outcome")
    digest = render_digest(events, digest_chars)
    request = build_request(
        "Analyzer", tag_header(task="analyze_trajectory"),
        ["Trajectory digest (most recent first):\n" + digest],
        tag="analyze")
    result = provider.complete(request)
    completed, focus, hypotheses = "", "", []
    degraded = False
    try:
        rec = parse_fenced_json(result.text, "analysis")
        if isinstance(rec, dict):
            completed = str(rec.get("completed_work", ""))
            focus = str(rec.get("failure_focus", ""))
            for h in rec.get("hypotheses", ()):
                locus = h.get("locus")
                if locus not in LOCI:
                    degraded = True
                    continue
                name = h.get("name")
                if locus == "PRIOR_SUBFUNCTION" and (not name or name not in accepted_names):
                    degraded = True
                    continue
                hypotheses.append(ErrorHypothesis(locus=locus, name=name,
                                                  rationale=str(h.get("rationale", ""))))
    except FencedBlockError:
        degraded = True
    if not hypotheses:
        hypotheses = [ErrorHypothesis(locus="UNKNOWN",
                                      rationale="analysis unparseable; fallback")]
        degraded = True
    return TrajectorySummary(completed_work=completed, failure_focus=focus,
                             hypotheses=tuple(hypotheses), degraded=degraded)


def _summary_block(summary: TrajectorySummary) -> str:
    lines = [f"Completed work: {summary.completed_work}",
             f"Failure focus: {summary.failure_focus}", "Hypotheses:"]
    for h in summary.hypotheses:
        name = f"({h.name})" if h.name else ""
        lines.append(f"- {h.locus}{name}: {h.rationale}")
    return "\n".join(lines)


def decide_route(summary: TrajectorySummary, provider,
                 valid_targets: set[str]) -> ReflectionDecision:
    """Reflector chooses the route; an invalid target gets one reprompt and then
    collapses to ESCALATE_HUMAN by design.

    ``valid_targets`` holds the acceptable REVISE_PRIOR targets (accepted
    sub-function names, plus name@LEVEL forms for accepted units).
    """
    body = [_summary_block(summary),
            "Valid REVISE_PRIOR targets: " + (", ".join(sorted(valid_targets)) or "(none)")]

    def ask(extra: list[str]) -> ReflectionDecision | None:
        request = build_request("Reflector", tag_header(task="decide_route"),
                                body + extra, tag="reflect")
        result = provider.complete(request)
        try:
            rec = parse_fenced_json(result.text, "route")
        except FencedBlockError:
            return None
        if not isinstance(rec, dict) or rec.get("route") not in ROUTES:
            return None
        decision = ReflectionDecision(
            route=rec["route"], target=rec.get("target"),
            feedback=str(rec.get("feedback", "")),
            justification=str(rec.get("justification", "")))
        if decision.route in ("REVISE_INSTRUCTIONS", "REVISE_PRIOR"):
            if not decision.target or (decision.route == "REVISE_PRIOR"
                                       and decision.target not in valid_targets):
                return None
        return decision

    decision = ask([])
    if decision is None:
        decision = ask(["Your previous route was invalid (unknown route token or "
                        "target). Pick again from the valid targets listed above."])
    if decision is None:
        return ReflectionDecision(route="ESCALATE_HUMAN",
                                  justification="route selection failed twice; escalating")
    return decision


def build_intervention_request(summary: TrajectorySummary, decision: ReflectionDecision,
                               provider, request_id: str) -> InterventionRequest:
    """Draft the human-facing escalation payload."""
    if decision.route != "ESCALATE_HUMAN":
        raise ValueError("intervention requests are only built for ESCALATE_HUMAN")
    request = build_request(
        "Reflector", tag_header(task="build_intervention"),
        [_summary_block(summary),
         "Write the escalation: observations, attempts, and the questions a human "
         "should answer. Emit an ```intervention fence."],
        tag="intervention")
    result = provider.complete(request)
    observations, attempts, questions = summary.failure_focus, "", []
    try:
        rec = parse_fenced_json(result.text, "intervention")
        if isinstance(rec, dict):
            observations = str(rec.get("observations", observations))
            attempts = str(rec.get("attempts", ""))
            questions = [str(q) for q in rec.get("questions", ())]
    except FencedBlockError:
        pass
    if not questions:
        questions = ["How should the pipeline proceed?"]
    return InterventionRequest(
        request_id=request_id, observations=observations, attempts=attempts,
        questions=questions,
        created_at=datetime.now(timezone.utc).isoformat())


@dataclass(frozen=True)
class ResumptionDirective:
    """What an intervention answer means for the pipeline."""

    route: str | None  # explicit override, or None for plain guidance
    target: str | None
    guidance: str


def parse_answer(answer: str) -> ResumptionDirective:
    """Answers may start with ``ROUTE: <route> [target]``; the rest is guidance."""
    lines = answer.split("\n")
    first = lines[0].strip()
    if first.upper().startswith("ROUTE:"):
        tokens = first[len("ROUTE:"):].split()
        if not tokens or tokens[0].upper() not in ROUTES:
            raise ReflectionError(f"bad route directive: {first!r}", code="BAD_DIRECTIVE")
        route = tokens[0].upper()
        target = tokens[1] if len(tokens) > 1 else None
        if route in ("REVISE_INSTRUCTIONS", "REVISE_PRIOR") and target is None:
            raise ReflectionError(f"route {route} requires a target", code="BAD_DIRECTIVE")
        return ResumptionDirective(route=route, target=target,
                                   guidance="\n".join(lines[1:]).strip())
    return ResumptionDirective(route=None, target=None, guidance=answer.strip())


def apply_answer(request: InterventionRequest, answer: str) -> ResumptionDirective:
    """Mark a PENDING request answered and parse the resumption directive."""
    if request.status == "ANSWERED":
        raise ReflectionError(f"request {request.request_id} already answered",
                              code="ALREADY_ANSWERED")
    directive = parse_answer(answer)
    request.status = "ANSWERED"
    request.answer = answer
    return directive
