import json

import pytest

from specforge.errors import HlsError
from specforge.hls import (LintReport, Violation, enclosing_subfunction,
                           invoke_synthesizer, lint_for_hls, load_ruleset,
                           optimize_for_hls)
from specforge.patcher import FENCE, CodeLevel, make_source

RULES = load_ruleset()


def src(text):
    return make_source(CodeLevel.SYNTH, text)


CLEAN_KERNEL = """#include <cstdint>
uint16_t scale(uint16_t x) {
    uint16_t acc = 0;
    for (uint8_t i = 0; i < 4; i = (uint8_t)(i + 1)) {
        acc = (uint16_t)(acc + x);
    }
    return acc;
}
"""


def test_clean_kernel_lints_clean():
    report = lint_for_hls(src(CLEAN_KERNEL), RULES)
    assert report.clean
    assert report.violations == ()


def test_dynamic_allocation_flagged_with_line():
    text = CLEAN_KERNEL + "\nuint16_t bad(uint16_t n) {\n" \
                          "    uint16_t* p = new uint16_t[4];\n" \
                          "    return p[0];\n}\n"
    report = lint_for_hls(src(text), RULES)
    hits = [v for v in report.violations if v.rule_id == "HLS001"]
    assert hits and not report.clean
    assert text.split("\n")[hits[0].line - 1].strip() == "uint16_t* p = new uint16_t[4];"


def test_recursion_flagged():
    text = "#include <cstdint>\nuint16_t fact(uint16_t n) {\n" \
           "    return n < 2 ? 1 : (uint16_t)(n * fact((uint16_t)(n - 1)));\n}\n"
    report = lint_for_hls(src(text), RULES)
    assert any(v.rule_id == "HLS002" for v in report.violations)


def test_mutual_recursion_flagged():
    text = ("#include <cstdint>\n"
            "uint16_t pong(uint16_t n);\n"
            "uint16_t ping(uint16_t n) {\n    return pong(n);\n}\n"
            "uint16_t pong(uint16_t n) {\n    return ping(n);\n}\n")
    report = lint_for_hls(src(text), RULES)
    assert sum(1 for v in report.violations if v.rule_id == "HLS002") == 2


def test_plain_int_flagged_but_not_fixed_width():
    text = "#include <cstdint>\nuint32_t f(uint32_t x) {\n    int y = 1;\n" \
           "    return (uint32_t)(x + y);\n}\n"
    report = lint_for_hls(src(text), RULES)
    assert any(v.rule_id == "HLS004" for v in report.violations)
    assert not any(v.line == 1 for v in report.violations)  # cstdint untouched


def test_stream_io_flagged():
    text = "#include <cstdint>\nuint16_t f(uint16_t x) {\n" \
           "    printf(\"%d\", x);\n    return x;\n}\n"
    report = lint_for_hls(src(text), RULES)
    assert any(v.rule_id == "HLS005" for v in report.violations)


def test_float_is_warning_only():
    text = "#include <cstdint>\nuint16_t f(uint16_t x) {\n" \
           "    float r = 0.5f;\n    return (uint16_t)(x + (uint16_t)r);\n}\n"
    report = lint_for_hls(src(text), RULES)
    assert any(v.rule_id == "HLS006" and v.severity == "WARNING"
               for v in report.violations)
    assert report.clean  # warnings do not block


def test_lint_deterministic():
    text = CLEAN_KERNEL + "\nuint16_t g(uint16_t x) {\n    int z = 0;\n" \
                          "    return (uint16_t)(x + z);\n}\n"
    a = lint_for_hls(src(text), RULES)
    b = lint_for_hls(src(text), RULES)
    assert a.to_json() == b.to_json()


def test_ruleset_malformed(tmp_path):
    bad = tmp_path / "rules.json"
    bad.write_text(json.dumps({"rules": [{"rule_id": "X", "severity": "NOPE",
                                          "detector": {"kind": "regex",
                                                       "pattern": "x"}}]}))
    with pytest.raises(HlsError) as err:
        load_ruleset(bad)
    assert err.value.code == "RULESET_MALFORMED"


def test_enclosing_subfunction():
    source = src(CLEAN_KERNEL)
    span = source.index["scale"]
    assert enclosing_subfunction(source, span.start_line + 1) == "scale"
    assert enclosing_subfunction(source, 1) is None


DIRTY = """#include <cstdint>
uint16_t doubled(uint16_t x) {
    int tmp = x;
    return (uint16_t)(tmp * 2);
}
"""

FIX = """uint16_t doubled(uint16_t x) {
    uint16_t tmp = x;
    return (uint16_t)(tmp * 2);
}"""

BREAKER = """uint16_t doubled(uint16_t x) {
    uint16_t tmp = x;
    return (uint16_t)(tmp * 3);
}"""


def wrap(name, body):
    return f"{FENCE}\nSUBFUNCTION: {name}\n{body}\n{FENCE}"


def test_optimize_clean_in_one_round(queue_provider):
    source = src(DIRTY)
    report = lint_for_hls(source, RULES)
    assert not report.clean
    provider = queue_provider([wrap("doubled", FIX)])
    fixed, final = optimize_for_hls(source, report, RULES, "no plain int", provider,
                                    budget=3, reverify=lambda s: [])
    assert final.clean
    assert "uint16_t tmp" in fixed.text


def test_optimize_rolls_back_behavior_regression(queue_provider):
    source = src(DIRTY)
    report = lint_for_hls(source, RULES)
    provider = queue_provider([wrap("doubled", BREAKER)] * 2)

    def reverify(candidate):
        return ["t1"] if "* 3" in candidate.text else []

    rounds = []
    with pytest.raises(HlsError) as err:
        optimize_for_hls(source, report, RULES, "rules", provider, budget=2,
                         reverify=reverify,
                         on_round=lambda *a: rounds.append(a))
    assert err.value.code == "HLS_BUDGET_EXHAUSTED"
    assert all(rolled for (_n, _t, rolled, _r, _rep) in rounds)
    # source untouched by the rolled-back rounds
    assert "int tmp" in source.text


def test_optimize_budget_exhausted_with_remaining_violations(queue_provider):
    two_bad = DIRTY + "\nuint16_t tripled(uint16_t x) {\n    int t = x;\n" \
                      "    return (uint16_t)(t * 3);\n}\n"
    source = src(two_bad)
    report = lint_for_hls(source, RULES)
    provider = queue_provider([wrap("doubled", FIX)])
    with pytest.raises(HlsError) as err:
        optimize_for_hls(source, report, RULES, "rules", provider, budget=1,
                         reverify=lambda s: [])
    assert err.value.code == "HLS_BUDGET_EXHAUSTED"


def test_invoke_synthesizer_skipped(tmp_path):
    out = invoke_synthesizer(tmp_path / "main.cpp", None, 5.0)
    assert out["status"] == "SKIPPED"


def test_invoke_synthesizer_exit_codes(tmp_path):
    path = tmp_path / "main.cpp"
    path.write_text("// nothing")
    ok = invoke_synthesizer(path, "true", 5.0)
    assert ok["status"] == "OK" and ok["exit_code"] == 0
    bad = invoke_synthesizer(path, "false", 5.0)
    assert bad["status"] == "FAILED" and bad["exit_code"] == 1


def test_invoke_synthesizer_missing_tool(tmp_path):
    with pytest.raises(HlsError) as err:
        invoke_synthesizer(tmp_path / "x.cpp", "no-such-synth {file}", 5.0)
    assert err.value.code == "TOOLCHAIN_MISSING"
