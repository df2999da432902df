import pytest

from specforge.errors import ReflectionError
from specforge.reflection import (InterventionRequest, TrajectorySummary,
                                  analyze_trajectory, apply_answer,
                                  build_intervention_request, decide_route,
                                  parse_answer, render_digest, ReflectionDecision,
                                  ErrorHypothesis)
from specforge.structured import make_fenced_json


def ev(seq, kind, **payload):
    return {"seq": seq, "kind": kind, "payload": payload}


EXHAUSTED_SLICE = [
    ev(1, "RUN_STARTED", run_id="r"),
    ev(2, "CODING_ATTEMPT", name="f", level="SCRIPT", passed=False),
    ev(3, "LEVEL_EXHAUSTED", name="f", level="SCRIPT", attempts=2),
]


def analysis_response(hypotheses):
    return make_fenced_json("analysis", {
        "completed_work": "w", "failure_focus": "focus", "hypotheses": hypotheses})


def test_analyze_parses_hypotheses(queue_provider):
    provider = queue_provider([analysis_response(
        [{"locus": "PRIOR_SUBFUNCTION", "name": "sub_bytes", "rationale": "r"}])])
    summary = analyze_trajectory(EXHAUSTED_SLICE, provider, {"sub_bytes"})
    assert summary.hypotheses[0].locus == "PRIOR_SUBFUNCTION"
    assert summary.hypotheses[0].name == "sub_bytes"
    assert not summary.degraded


def test_analyze_drops_bad_locus_with_fallback(queue_provider):
    provider = queue_provider([analysis_response(
        [{"locus": "SOMEWHERE", "rationale": "?"}])])
    summary = analyze_trajectory(EXHAUSTED_SLICE, provider, set())
    assert summary.hypotheses[0].locus == "UNKNOWN"
    assert summary.degraded


def test_analyze_rejects_unaccepted_prior_name(queue_provider):
    provider = queue_provider([analysis_response(
        [{"locus": "PRIOR_SUBFUNCTION", "name": "ghost", "rationale": "r"},
         {"locus": "CURRENT", "rationale": "r2"}])])
    summary = analyze_trajectory(EXHAUSTED_SLICE, provider, {"real"})
    assert [h.locus for h in summary.hypotheses] == ["CURRENT"]


def test_analyze_requires_exhaustion():
    with pytest.raises(ValueError):
        analyze_trajectory([ev(1, "RUN_STARTED")], None, set())


def test_digest_budget_and_recency():
    events = [ev(i, "CODING_ATTEMPT", name=f"f{i}", passed=False)
              for i in range(1, 300)]
    digest = render_digest(events, budget_chars=600)
    assert len(digest) <= 600
    assert "#299" in digest  # most recent first
    assert "#1 " not in digest


def summary_with(locus, name=None):
    return TrajectorySummary("w", "focus",
                             (ErrorHypothesis(locus=locus, name=name),))


def route_response(route, target=None, feedback="fb"):
    return make_fenced_json("route", {"route": route, "target": target,
                                      "feedback": feedback, "justification": "j"})


def test_route_regenerate(queue_provider):
    provider = queue_provider([route_response("REGENERATE_CURRENT")])
    decision = decide_route(summary_with("CURRENT"), provider, set())
    assert decision.route == "REGENERATE_CURRENT"
    assert decision.feedback == "fb"


def test_route_invalid_target_escalates_after_reprompt(queue_provider):
    provider = queue_provider([
        route_response("REVISE_PRIOR", target="Foo"),
        route_response("REVISE_PRIOR", target="Foo"),
    ])
    decision = decide_route(summary_with("PRIOR_SUBFUNCTION", "Foo"), provider,
                            {"bar"})
    assert decision.route == "ESCALATE_HUMAN"
    assert len(provider.requests) == 2


def test_route_valid_prior_target(queue_provider):
    provider = queue_provider([route_response("REVISE_PRIOR", target="bar@SCRIPT")])
    decision = decide_route(summary_with("PRIOR_SUBFUNCTION", "bar"), provider,
                            {"bar@SCRIPT", "bar"})
    assert decision.route == "REVISE_PRIOR"
    assert decision.target == "bar@SCRIPT"


def test_build_intervention_payload(queue_provider):
    provider = queue_provider([make_fenced_json("intervention", {
        "observations": "obs", "attempts": "tried", "questions": ["q1", "q2"]})])
    decision = ReflectionDecision(route="ESCALATE_HUMAN")
    request = build_intervention_request(summary_with("UNKNOWN"), decision,
                                         provider, "iv-1")
    assert request.request_id == "iv-1"
    assert request.status == "PENDING"
    assert request.questions == ["q1", "q2"]


def test_build_intervention_requires_escalation_route(queue_provider):
    with pytest.raises(ValueError):
        build_intervention_request(summary_with("UNKNOWN"),
                                   ReflectionDecision(route="REGENERATE_CURRENT"),
                                   queue_provider([]), "iv-1")


def test_parse_answer_guidance_only():
    directive = parse_answer("just use the table in section 2")
    assert directive.route is None
    assert "table" in directive.guidance


def test_parse_answer_route_directive():
    directive = parse_answer("ROUTE: REVISE_PRIOR sub_bytes\nthe table is wrong")
    assert directive.route == "REVISE_PRIOR"
    assert directive.target == "sub_bytes"
    assert directive.guidance == "the table is wrong"


def test_parse_answer_bad_directive():
    with pytest.raises(ReflectionError) as err:
        parse_answer("ROUTE: SIDEWAYS")
    assert err.value.code == "BAD_DIRECTIVE"
    with pytest.raises(ReflectionError):
        parse_answer("ROUTE: REVISE_PRIOR")  # target required


def test_apply_answer_once():
    request = InterventionRequest("iv-9", "obs", "att", ["q"], "now")
    directive = apply_answer(request, "go regenerate")
    assert request.status == "ANSWERED"
    assert directive.guidance == "go regenerate"
    with pytest.raises(ReflectionError) as err:
        apply_answer(request, "again")
    assert err.value.code == "ALREADY_ANSWERED"
