"""Document understanding: summarize, decompose, augment.

The flow turns a loaded document into (a) one summary per section, (b) an
ordered decomposition plan for the target function, and (c) one verified
information dictionary per planned sub-function. Dictionaries are checked
structurally before any provider sees them: references must resolve and every
quote must be copied verbatim from the cited section, which makes fabricated
citations mechanically impossible to accept.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .document import SpecDocument, render_context
from .errors import AugmentError, PlanError, ProviderError
from .prompts import build_request, tag_header
from .structured import FencedBlockError, parse_fenced_json

DEFAULT_AUGMENT_ROUNDS = 3
DEFAULT_DOC_CONTEXT_CHARS = 24_000


@dataclass(frozen=True)
class SectionSummary:
    section_id: str
    summary_text: str


@dataclass(frozen=True)
class PlanItem:
    name: str
    goal: str
    depends_on: tuple[str, ...] = ()


@dataclass(frozen=True)
class DecompositionPlan:
    target_name: str
    sub_functions: tuple[PlanItem, ...]

    def names(self) -> list[str]:
        return [item.name for item in self.sub_functions]

    def to_json(self) -> dict:
        return {"target": self.target_name,
                "sub_functions": [{"name": i.name, "goal": i.goal,
                                   "depends_on": list(i.depends_on)}
                                  for i in self.sub_functions]}

    @staticmethod
    def from_json(rec: dict) -> "DecompositionPlan":
        items = tuple(PlanItem(name=s["name"], goal=s.get("goal", ""),
                               depends_on=tuple(s.get("depends_on", ())))
                      for s in rec.get("sub_functions", ()))
        return DecompositionPlan(target_name=rec.get("target", ""), sub_functions=items)


@dataclass(frozen=True)
class IoField:
    name: str
    type_description: str
    shape_or_width: str


@dataclass(frozen=True)
class Reference:
    section_id: str
    quote: str


@dataclass(frozen=True)
class SubFunctionSpec:
    """The information dictionary for one sub-function."""

    name: str
    inputs: tuple[IoField, ...]
    outputs: tuple[IoField, ...]
    functionality: str
    references: tuple[Reference, ...]
    depends_on: tuple[str, ...] = ()
    side_effect_only: bool = False
    revision: int = 0

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "inputs": [{"name": f.name, "type": f.type_description,
                        "width": f.shape_or_width} for f in self.inputs],
            "outputs": [{"name": f.name, "type": f.type_description,
                         "width": f.shape_or_width} for f in self.outputs],
            "functionality": self.functionality,
            "references": [{"section_id": r.section_id, "quote": r.quote}
                           for r in self.references],
            "depends_on": list(self.depends_on),
            "side_effect_only": self.side_effect_only,
            "revision": self.revision,
        }

    @staticmethod
    def from_json(rec: dict) -> "SubFunctionSpec":
        def fields(key: str) -> tuple[IoField, ...]:
            return tuple(IoField(name=f.get("name", ""), type_description=f.get("type", ""),
                                 shape_or_width=f.get("width", ""))
                         for f in rec.get(key, ()))
        return SubFunctionSpec(
            name=rec["name"], inputs=fields("inputs"), outputs=fields("outputs"),
            functionality=rec.get("functionality", ""),
            references=tuple(Reference(r["section_id"], r["quote"])
                             for r in rec.get("references", ())),
            depends_on=tuple(rec.get("depends_on", ())),
            side_effect_only=bool(rec.get("side_effect_only", False)),
            revision=int(rec.get("revision", 0)))


@dataclass(frozen=True)
class VerifierFeedback:
    verdict: str  # ACCEPT | REVISE
    comments: tuple[str, ...] = ()

    def __post_init__(self):
        if self.verdict == "REVISE" and not self.comments:
            raise ValueError("REVISE feedback must carry comments")


def summarize_sections(doc: SpecDocument, provider, budget_chars: int = DEFAULT_DOC_CONTEXT_CHARS,
                       on_summary=None) -> list[SectionSummary]:
    """One Summarizer call per section, in document order."""
    summaries: list[SectionSummary] = []
    for sec in doc.sections:
        summaries.append(summarize_one(doc, sec.section_id, provider, budget_chars))
        if on_summary is not None:
            on_summary(summaries[-1])
    return summaries


def summarize_one(doc: SpecDocument, section_id: str, provider,
                  budget_chars: int = DEFAULT_DOC_CONTEXT_CHARS) -> SectionSummary:
    context = render_context(doc, [section_id], budget_chars)
    request = build_request(
        "Summarizer", tag_header(task="summarize", section=section_id),
        [], context=context, tag=f"summarize:{section_id}")
    try:
        result = provider.complete(request)
    except ProviderError as exc:
        raise ProviderError(f"summarizing section {section_id}: {exc}",
                            code=exc.code, detail=exc.detail)
    text = result.text.strip()
    if not text:
        raise ProviderError(f"empty summary for section {section_id}", code="EMPTY_SUMMARY")
    return SectionSummary(section_id=section_id, summary_text=text)


def _summaries_block(summaries: list[SectionSummary]) -> str:
    return "\n".join(f"[{s.section_id}] {s.summary_text}" for s in summaries)


def validate_plan(plan: DecompositionPlan) -> list[str]:
    errors: list[str] = []
    if not plan.sub_functions:
        errors.append("plan lists no sub-functions")
    if not plan.target_name:
        errors.append("plan names no target")
    seen: set[str] = set()
    for item in plan.sub_functions:
        if not item.name:
            errors.append("a sub-function has no name")
            continue
        if item.name in seen:
            errors.append(f"duplicate sub-function name {item.name!r}")
        for dep in item.depends_on:
            if dep not in seen:
                errors.append(f"{item.name!r} depends on {dep!r} which is not an earlier entry")
        seen.add(item.name)
    return errors


def decompose(doc: SpecDocument, summaries: list[SectionSummary], provider,
              target_name: str, budget_chars: int = DEFAULT_DOC_CONTEXT_CHARS
              ) -> DecompositionPlan:
    """Ask the Decomposer for an ordered plan; one reprompt on violations."""
    missing = set(doc.section_ids()) - {s.section_id for s in summaries}
    if missing:
        raise PlanError(f"summaries missing for sections: {sorted(missing)}",
                        code="PLAN_INVALID")
    context = render_context(doc, doc.section_ids(), budget_chars)
    header = tag_header(task="decompose", target=target_name)
    body = ["Section summaries:\n" + _summaries_block(summaries)]

    def ask(extra: list[str]) -> DecompositionPlan:
        request = build_request("Decomposer", header, body + extra, context=context,
                                tag=f"decompose:{target_name}")
        result = provider.complete(request)
        try:
            rec = parse_fenced_json(result.text, "plan")
        except FencedBlockError as exc:
            raise PlanError(f"plan response unparseable: {exc}", code="PLAN_UNPARSEABLE")
        if not isinstance(rec, dict):
            raise PlanError("plan fence must contain a JSON object", code="PLAN_UNPARSEABLE")
        return DecompositionPlan.from_json(rec)

    plan = ask([])
    errors = validate_plan(plan)
    if errors:
        plan = ask(["Your previous plan was invalid:\n" +
                    "\n".join(f"- {e}" for e in errors) +
                    "\nEmit a corrected ```plan fence."])
        errors = validate_plan(plan)
        if errors:
            raise PlanError("plan still invalid after reprompt: " + "; ".join(errors),
                            code="PLAN_INVALID")
    return plan


def check_spec_structure(spec: SubFunctionSpec, doc: SpecDocument) -> list[str]:
    """Mechanical checks run before any provider review."""
    problems: list[str] = []
    if not spec.name:
        problems.append("dictionary has no name")
    if not spec.functionality:
        problems.append("functionality is empty")
    if not spec.side_effect_only and (not spec.inputs or not spec.outputs):
        problems.append("inputs and outputs must be non-empty unless side_effect_only is set")
    if not spec.references:
        problems.append("at least one document reference is required")
    known = set(doc.section_ids())
    for ref in spec.references:
        if ref.section_id not in known:
            problems.append(f"reference cites unknown section {ref.section_id!r}")
        elif ref.quote and ref.quote not in doc.section(ref.section_id).body_text:
            problems.append(f"quote is not a verbatim substring of section "
                            f"{ref.section_id!r}: {ref.quote[:60]!r}")
        elif not ref.quote:
            problems.append(f"reference to {ref.section_id!r} has an empty quote")
    return problems


def verify_infodict(spec: SubFunctionSpec, doc: SpecDocument, provider) -> VerifierFeedback:
    """Local structural checks first; only a clean dictionary reaches the Verifier."""
    problems = check_spec_structure(spec, doc)
    if problems:
        return VerifierFeedback(verdict="REVISE", comments=tuple(problems))
    request = build_request(
        "Verifier", tag_header(task="verify_infodict", subfunction=spec.name),
        ["Information dictionary under review:\n" +
         json.dumps(spec.to_json(), indent=2, sort_keys=True)],
        tag=f"verify_infodict:{spec.name}")
    result = provider.complete(request)
    try:
        rec = parse_fenced_json(result.text, "verdict")
    except FencedBlockError as exc:
        return VerifierFeedback(verdict="REVISE",
                                comments=(f"verdict response unparseable: {exc}",))
    verdict = rec.get("verdict", "REVISE")
    comments = tuple(rec.get("comments", ()))
    if verdict != "ACCEPT" and not comments:
        comments = ("verifier requested revision without comments",)
    return VerifierFeedback(verdict="ACCEPT" if verdict == "ACCEPT" else "REVISE",
                            comments=comments)


def _parse_infodict(text: str, item: PlanItem, revision: int) -> SubFunctionSpec | str:
    try:
        rec = parse_fenced_json(text, "infodict")
    except FencedBlockError as exc:
        return f"infodict response unparseable: {exc}"
    if not isinstance(rec, dict):
        return "infodict fence must contain a JSON object"
    rec.setdefault("name", item.name)
    rec.setdefault("depends_on", list(item.depends_on))
    rec["revision"] = revision
    try:
        return SubFunctionSpec.from_json(rec)
    except (KeyError, TypeError, ValueError) as exc:
        return f"infodict fields malformed: {exc}"


def augment_subfunction(item: PlanItem, doc: SpecDocument, summaries: list[SectionSummary],
                        provider, max_rounds: int = DEFAULT_AUGMENT_ROUNDS,
                        budget_chars: int = DEFAULT_DOC_CONTEXT_CHARS,
                        guidance: str = "") -> SubFunctionSpec:
    """Describer proposes, Verifier reviews, loop until ACCEPT or budget.

    The returned spec's ``revision`` equals the number of REVISE rounds taken.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    context = render_context(doc, doc.section_ids(), budget_chars)
    header = tag_header(task="augment", subfunction=item.name)
    base_body = [
        f"Sub-function goal: {item.goal}",
        f"Depends on: {', '.join(item.depends_on) or '(none)'}",
        "Section summaries:\n" + _summaries_block(summaries),
    ]
    if guidance:
        base_body.append("Operator guidance:\n" + guidance)

    feedback_text = ""
    last_feedback: VerifierFeedback | None = None
    for round_no in range(max_rounds):
        body = list(base_body)
        if feedback_text:
            body.append("Revise the previous dictionary. Review feedback:\n" + feedback_text)
        request = build_request("Describer", header, body, context=context,
                                tag=f"augment:{item.name}:round{round_no}")
        result = provider.complete(request)
        parsed = _parse_infodict(result.text, item, revision=round_no)
        if isinstance(parsed, str):
            last_feedback = VerifierFeedback(verdict="REVISE", comments=(parsed,))
        else:
            last_feedback = verify_infodict(parsed, doc, provider)
            if last_feedback.verdict == "ACCEPT":
                return parsed
        feedback_text = "\n".join(f"- {c}" for c in last_feedback.comments)
    raise AugmentError(
        f"dictionary for {item.name!r} not accepted within {max_rounds} rounds",
        code="AUGMENT_BUDGET_EXHAUSTED",
        detail={"comments": list(last_feedback.comments) if last_feedback else []})


def revise_instructions(spec: SubFunctionSpec, failure_report: str, doc: SpecDocument,
                        summaries: list[SectionSummary], provider,
                        max_rounds: int = DEFAULT_AUGMENT_ROUNDS,
                        budget_chars: int = DEFAULT_DOC_CONTEXT_CHARS) -> SubFunctionSpec:
    """Produce a revised information dictionary in response to coding failures."""
    if not failure_report:
        raise ValueError("failure_report must be non-empty")
    item = PlanItem(name=spec.name, goal=spec.functionality[:200],
                    depends_on=spec.depends_on)
    context = render_context(doc, doc.section_ids(), budget_chars)
    header = tag_header(task="revise_instructions", subfunction=spec.name)
    base_body = [
        "Current dictionary:\n" + json.dumps(spec.to_json(), indent=2, sort_keys=True),
        "Implementation failures attributed to these instructions:\n" + failure_report,
        "Section summaries:\n" + _summaries_block(summaries),
    ]
    feedback_text = ""
    last_comments: tuple[str, ...] = ()
    for round_no in range(max_rounds):
        body = list(base_body)
        if feedback_text:
            body.append("Review feedback on your revision:\n" + feedback_text)
        request = build_request("Describer", header, body, context=context,
                                tag=f"revise_instructions:{spec.name}:round{round_no}")
        result = provider.complete(request)
        parsed = _parse_infodict(result.text, item, revision=spec.revision + 1)
        if isinstance(parsed, str):
            last_comments = (parsed,)
        else:
            parsed = replace(parsed, revision=spec.revision + 1)
            feedback = verify_infodict(parsed, doc, provider)
            if feedback.verdict == "ACCEPT":
                return parsed
            last_comments = feedback.comments
        feedback_text = "\n".join(f"- {c}" for c in last_comments)
    raise AugmentError(
        f"revised dictionary for {spec.name!r} not accepted within {max_rounds} rounds",
        code="AUGMENT_BUDGET_EXHAUSTED", detail={"comments": list(last_comments)})
