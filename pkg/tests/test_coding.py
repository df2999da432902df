import pytest

from specforge.coding import (DraftContext, LoopProgress, derive_tests, draft_code,
                              interface_of, next_draft_context, optimize_prompt,
                              run_level_loop, verify_code)
from specforge.coding_types import CodeUnit, PromptState, TestCase, VerificationReport
from specforge.errors import PatchError, TestDerivationError
from specforge.patcher import FENCE, CodeLevel, make_source
from specforge.sandbox import Sandbox, ToolchainConfig
from specforge.structured import make_fenced_json
from specforge.understanding import SubFunctionSpec

from test_understanding import infodict


def wrap(name, body):
    return f"{FENCE}\nSUBFUNCTION: {name}\n{body}\n{FENCE}"


SPEC = SubFunctionSpec.from_json(infodict(name="ident"))


@pytest.fixture
def sandbox(tmp_path):
    return Sandbox(ToolchainConfig(timeout_seconds=10.0), artifacts_root=tmp_path)


@pytest.fixture
def doc(tmp_path_factory):
    from test_document import write_min_bundle
    from specforge.document import load_manifest
    return load_manifest(write_min_bundle(tmp_path_factory.mktemp("doc")))


def test_draft_parses_marker_block(queue_provider):
    provider = queue_provider([wrap("ident", "def ident(x):\n    return x")])
    unit, raw = draft_code(SPEC, CodeLevel.PSEUDO, DraftContext(),
                           PromptState("base"), provider, version=1)
    assert unit.subfunction == "ident"
    assert unit.version == 1
    assert unit.source_text.endswith("return x\n")


def test_draft_reprompts_once_on_protocol_violation(queue_provider):
    provider = queue_provider(["no fence", wrap("ident", "FUNCTION ident\nEND FUNCTION")])
    unit, _ = draft_code(SPEC, CodeLevel.PSEUDO, DraftContext(),
                         PromptState("base"), provider, version=1)
    assert unit.subfunction == "ident"
    assert len(provider.requests) == 2
    assert any("Protocol reminder" in p.value
               for p in provider.requests[1].messages[1].parts)


def test_draft_fails_after_second_violation(queue_provider):
    provider = queue_provider(["no fence", "still no fence"])
    with pytest.raises(PatchError) as err:
        draft_code(SPEC, CodeLevel.PSEUDO, DraftContext(), PromptState("base"),
                   provider, version=1)
    assert err.value.code == "PATCH_UNPARSEABLE"


def test_progressive_precondition(queue_provider):
    with pytest.raises(ValueError):
        draft_code(SPEC, CodeLevel.SYNTH, DraftContext(higher_unit=None),
                   PromptState("base"), queue_provider([]), version=1)


def test_pseudo_has_no_tests(doc, sandbox, queue_provider):
    with pytest.raises(TestDerivationError) as err:
        derive_tests(SPEC, CodeLevel.PSEUDO, doc, None, queue_provider([]), sandbox)
    assert err.value.code == "NO_TESTS_AVAILABLE"


def test_script_tests_from_document(doc, sandbox, queue_provider):
    provider = queue_provider([make_fenced_json(
        "tests", [{"id": "t1", "inputs": ["0x7"], "expected": "0x7"}])])
    cases = derive_tests(SPEC, CodeLevel.SCRIPT, doc, None, provider, sandbox)
    assert [c.origin for c in cases] == ["SPEC"]
    assert cases[0].expected == "0x7"


def test_higher_level_expected_comes_from_oracle(doc, sandbox, queue_provider):
    # The provider lies about expected values; the sandbox result must win.
    provider = queue_provider([make_fenced_json(
        "tests", [{"id": "h1", "inputs": ["5"], "expected": "999"}])])
    oracle_source = make_source(CodeLevel.SCRIPT, "def ident(x):\n    return x\n")
    oracle_unit = CodeUnit("ident", CodeLevel.SCRIPT, "def ident(x):\n    return x\n", 3)
    cases = derive_tests(SPEC, CodeLevel.SYNTH, doc, (oracle_source, oracle_unit),
                         provider, sandbox)
    assert cases[0].expected == "0x5"
    assert cases[0].oracle == ("SCRIPT", 3)


def test_synth_without_oracle(doc, sandbox, queue_provider):
    with pytest.raises(TestDerivationError):
        derive_tests(SPEC, CodeLevel.SYNTH, doc, None, queue_provider([]), sandbox)


def script_case(cid, x, expected):
    return TestCase(cid, CodeLevel.SCRIPT, (x,), expected, "SPEC")


def test_verify_mechanical_pass(sandbox, queue_provider):
    source = make_source(CodeLevel.SCRIPT, "def ident(x):\n    return x\n")
    unit = CodeUnit("ident", CodeLevel.SCRIPT, "def ident(x):\n    return x\n", 1)
    report = verify_code(unit, source, [script_case("a", "1", "1")], SPEC,
                         queue_provider([]), sandbox)
    assert report.passed


def test_verify_mechanical_fail_gets_assessment(sandbox, queue_provider):
    source = make_source(CodeLevel.SCRIPT, "def ident(x):\n    return x + 1\n")
    unit = CodeUnit("ident", CodeLevel.SCRIPT, "def ident(x):\n    return x + 1\n", 1)
    provider = queue_provider([make_fenced_json(
        "verdict", {"verdict": "REVISE", "suspicion": "PRIOR_SUBFUNCTION",
                    "comments": ["prior unit fed wrong values"]})])
    report = verify_code(unit, source, [script_case("a", "1", "1")], SPEC,
                         provider, sandbox)
    assert not report.passed
    assert report.suspicion == "PRIOR_SUBFUNCTION"
    assert report.case_results[0]["status"] == "FAIL"


def test_verify_self_validation_accept(sandbox, queue_provider):
    unit = CodeUnit("ident", CodeLevel.PSEUDO, "FUNCTION ident\nEND FUNCTION\n", 1)
    source = make_source(CodeLevel.PSEUDO, unit.source_text)
    provider = queue_provider([make_fenced_json("verdict", {"verdict": "ACCEPT",
                                                            "comments": []})])
    report = verify_code(unit, source, [], SPEC, provider, sandbox)
    assert report.passed
    assert report.suspicion == "CURRENT"


def test_optimizer_trigger_precondition(queue_provider):
    with pytest.raises(ValueError):
        optimize_prompt(PromptState("base"), "f", CodeLevel.SCRIPT,
                        [VerificationReport(False, (), "CURRENT")] * 2,
                        queue_provider([]), trigger=3)


def test_optimizer_appends_addendum(queue_provider):
    ps = PromptState("base")
    provider = queue_provider([make_fenced_json(
        "addendum", {"trigger_summary": "dims", "addendum": "match the widths"})])
    failures = [VerificationReport(False, (), "CURRENT")] * 3
    revision = optimize_prompt(ps, "f", CodeLevel.SCRIPT, failures, provider)
    assert revision["addendum"] == "match the widths"
    assert ps.current_addendum() == "match the widths"
    assert ps.base_prompt == "base"


def test_optimizer_malformed_output_skipped(queue_provider):
    ps = PromptState("base")
    failures = [VerificationReport(False, (), "CURRENT")] * 3
    revision = optimize_prompt(ps, "f", CodeLevel.SCRIPT, failures,
                               queue_provider(["not a fence"]))
    assert revision == {}
    assert ps.addenda == []


def test_two_optimizations_preserve_order(queue_provider):
    ps = PromptState("base")
    for text in ("first", "second"):
        provider = queue_provider([make_fenced_json(
            "addendum", {"trigger_summary": "t", "addendum": text})])
        optimize_prompt(ps, "f", CodeLevel.SCRIPT,
                        [VerificationReport(False, (), "CURRENT")] * 3, provider)
    assert [a["addendum"] for a in ps.addenda] == ["first", "second"]


def test_next_draft_context_revise_vs_regenerate():
    progress = LoopProgress()
    unit = CodeUnit("f", CodeLevel.SCRIPT, "def f(x):\n    return x\n", 1)
    progress.note_attempt(unit, VerificationReport(
        False, (), "CURRENT", notes="n", verdict_mode="REVISE", comments=("c",)))
    ctx = next_draft_context(progress, None, "")
    assert ctx.previous_unit is unit and ctx.previous_comments == ("c",)
    progress.note_attempt(unit, VerificationReport(
        False, (), "CURRENT", verdict_mode="REGENERATE"))
    ctx = next_draft_context(progress, None, "")
    assert ctx.previous_unit is None


def test_interface_of_widths():
    iface = interface_of(SPEC)
    assert iface["inputs"][0]["width_bits"] == 16
    assert iface["output_width_bits"] == 16


PSEUDO_UNIT = CodeUnit("ident", CodeLevel.PSEUDO,
                       "FUNCTION ident\n  OUTPUT the input\nEND FUNCTION\n", 1)


def test_run_level_loop_first_try(doc, sandbox, queue_provider):
    provider = queue_provider([
        make_fenced_json("tests", [{"id": "t", "inputs": ["3"], "expected": "3"}]),
        wrap("ident", "def ident(x):\n    return x"),
    ])
    outcome = run_level_loop(SPEC, CodeLevel.SCRIPT,
                             make_source(CodeLevel.SCRIPT, ""), PSEUDO_UNIT, doc,
                             provider, sandbox, PromptState("base"), max_attempts=3)
    assert outcome.accepted and outcome.attempts == 1


def test_run_level_loop_trigger_then_pass(doc, sandbox, queue_provider):
    bad = wrap("ident", "def ident(x):\n    return x + 1")
    assess = make_fenced_json("verdict", {"verdict": "REVISE",
                                          "suspicion": "CURRENT", "comments": ["off"]})
    provider = queue_provider([
        make_fenced_json("tests", [{"id": "t", "inputs": ["3"], "expected": "3"}]),
        bad, assess, bad, assess, bad, assess,
        make_fenced_json("addendum", {"trigger_summary": "s", "addendum": "note"}),
        wrap("ident", "def ident(x):\n    return x"),
    ])
    ps = PromptState("base")
    outcome = run_level_loop(SPEC, CodeLevel.SCRIPT,
                             make_source(CodeLevel.SCRIPT, ""), PSEUDO_UNIT, doc,
                             provider, sandbox, ps, max_attempts=10,
                             optimizer_trigger=3)
    assert outcome.accepted and outcome.attempts == 4
    assert len(ps.addenda) == 1


def test_run_level_loop_exhaustion(doc, sandbox, queue_provider):
    bad = wrap("ident", "def ident(x):\n    return x + 1")
    assess = make_fenced_json("verdict", {"verdict": "REVISE",
                                          "suspicion": "PRIOR_SUBFUNCTION",
                                          "comments": ["upstream"]})
    provider = queue_provider([
        make_fenced_json("tests", [{"id": "t", "inputs": ["3"], "expected": "3"}]),
        bad, assess, bad, assess,
    ])
    outcome = run_level_loop(SPEC, CodeLevel.SCRIPT,
                             make_source(CodeLevel.SCRIPT, ""), PSEUDO_UNIT, doc,
                             provider, sandbox, PromptState("base"), max_attempts=2,
                             optimizer_trigger=5)
    assert not outcome.accepted
    assert outcome.attempts == 2
    assert outcome.last_report.suspicion == "PRIOR_SUBFUNCTION"
