import pytest

from specforge.coding_types import TestCase
from specforge.errors import SandboxError
from specforge.patcher import CodeLevel, make_source
from specforge.sandbox import (ExecutionRequest, Sandbox, ToolchainConfig,
                               inferred_interface, parse_case_lines, values_equal)

CONFIG = ToolchainConfig(timeout_seconds=10.0)


@pytest.fixture
def sandbox(tmp_path):
    return Sandbox(CONFIG, artifacts_root=tmp_path / "sb")


def test_script_ok(sandbox, tmp_path):
    result = sandbox.execute(ExecutionRequest(
        level=CodeLevel.SCRIPT, program_text="x = 40 + 2",
        harness_text="print(x)", timeout_seconds=5, workdir=tmp_path / "w1"))
    assert result.status == "OK"
    assert result.stdout == "42\n"
    assert result.exit_code == 0


def test_synth_compile_error(sandbox, tmp_path):
    result = sandbox.execute(ExecutionRequest(
        level=CodeLevel.SYNTH, program_text="this is not C++ at all",
        harness_text="int main() { return 0; }",
        timeout_seconds=10, workdir=tmp_path / "w2"))
    assert result.status == "COMPILE_ERROR"
    assert result.stderr


def test_timeout_enforced(sandbox, tmp_path):
    result = sandbox.execute(ExecutionRequest(
        level=CodeLevel.SCRIPT, program_text="",
        harness_text="while True:\n    pass", timeout_seconds=1,
        workdir=tmp_path / "w3"))
    assert result.status == "TIMEOUT"
    assert result.duration_seconds <= 1 + 1.5  # timeout + grace, small margin


def test_runtime_error_status(sandbox, tmp_path):
    result = sandbox.execute(ExecutionRequest(
        level=CodeLevel.SCRIPT, program_text="",
        harness_text="raise RuntimeError('nope')", timeout_seconds=5,
        workdir=tmp_path / "w4"))
    assert result.status == "RUNTIME_ERROR"
    assert "nope" in result.stderr


def test_toolchain_missing(tmp_path):
    sandbox = Sandbox(ToolchainConfig(script_run_cmd="definitely-not-a-binary {file}"),
                      artifacts_root=tmp_path)
    with pytest.raises(SandboxError) as err:
        sandbox.execute(ExecutionRequest(
            level=CodeLevel.SCRIPT, program_text="", harness_text="print(1)",
            timeout_seconds=5, workdir=tmp_path / "w5"))
    assert err.value.code == "TOOLCHAIN_MISSING"


def test_isolation_distinct_workdirs(sandbox):
    assert sandbox.new_workdir() != sandbox.new_workdir()


def test_deterministic_for_deterministic_programs(sandbox, tmp_path):
    results = []
    for i in range(2):
        results.append(sandbox.execute(ExecutionRequest(
            level=CodeLevel.SCRIPT, program_text="v = sum(range(10))",
            harness_text="print('CASE t0', hex(v))", timeout_seconds=5,
            workdir=tmp_path / f"d{i}")))
    assert results[0].status == results[1].status == "OK"
    assert results[0].stdout == results[1].stdout


IDENTITY_PY = "def ident(x):\n    return x\n"
INTERFACE_16 = {"inputs": [{"name": "x", "width_bits": 16}], "output_width_bits": 16}


def case(cid, inputs, expected):
    return TestCase(case_id=cid, level=CodeLevel.SCRIPT, inputs=tuple(inputs),
                    expected=expected, origin="SPEC")


def test_run_testcases_pass_and_fail(sandbox):
    source = make_source(CodeLevel.SCRIPT, IDENTITY_PY)
    results = sandbox.run_testcases(source, "ident",
                                    [case("a", ["7"], "7"), case("b", ["7"], "8")],
                                    INTERFACE_16)
    assert [r.status for r in results] == ["PASS", "FAIL"]
    assert results[1].observed == "0x7"


def test_run_testcases_hex_decimal_equivalence(sandbox):
    source = make_source(CodeLevel.SCRIPT, IDENTITY_PY)
    results = sandbox.run_testcases(source, "ident", [case("a", ["0x10"], "16")],
                                    INTERFACE_16)
    assert results[0].status == "PASS"


def test_missing_entry_is_harness_failure(sandbox):
    source = make_source(CodeLevel.SCRIPT, IDENTITY_PY)
    with pytest.raises(SandboxError) as err:
        sandbox.run_testcases(source, "absent", [case("a", ["1"], "1")], INTERFACE_16)
    assert err.value.code == "HARNESS_GENERATION_FAILED"


def test_arity_mismatch_is_harness_failure(sandbox):
    source = make_source(CodeLevel.SCRIPT, IDENTITY_PY)
    with pytest.raises(SandboxError) as err:
        sandbox.run_testcases(source, "ident", [case("a", ["1", "2"], "1")],
                              INTERFACE_16)
    assert err.value.code == "HARNESS_GENERATION_FAILED"


def test_synth_testcases(sandbox):
    source = make_source(
        CodeLevel.SYNTH,
        "#include <cstdint>\nuint16_t twice(uint16_t x) {\n"
        "    return (uint16_t)(x * 2);\n}\n")
    results = sandbox.run_testcases(
        source, "twice",
        [TestCase("t0", CodeLevel.SYNTH, ("0x10",), "0x20", "SPEC")],
        INTERFACE_16)
    assert results[0].status == "PASS"


def test_run_oracle_computes_expected(sandbox):
    source = make_source(CodeLevel.SCRIPT, "def sq(x):\n    return x * x\n")
    values = sandbox.run_oracle(source, "sq", [["3"], ["0x10"]], INTERFACE_16)
    assert values == ["0x9", "0x100"]


def test_run_oracle_requires_script_level(sandbox):
    source = make_source(CodeLevel.SYNTH, "#include <cstdint>\n")
    with pytest.raises(SandboxError) as err:
        sandbox.run_oracle(source, "f", [["1"]], INTERFACE_16)
    assert err.value.code == "ORACLE_EXECUTION_FAILED"


def test_crashing_case_reports_error(sandbox):
    source = make_source(CodeLevel.SCRIPT,
                         "def boom(x):\n    raise ValueError('bad')\n")
    results = sandbox.run_testcases(source, "boom", [case("a", ["1"], "1")],
                                    INTERFACE_16)
    assert results[0].status == "ERROR"


def test_parse_case_lines_ignores_noise():
    parsed = parse_case_lines("junk\nCASE a 0x1\nmore junk\nCASE b 2 3\n")
    assert parsed == {"a": "0x1", "b": "2 3"}


def test_values_equal_variants():
    assert values_equal("0x10", "16")
    assert values_equal("1 2", "0x1 0x2")
    assert not values_equal("1 2", "1")
    assert not values_equal("x", "y")
    assert values_equal("abc", "abc")


def test_inferred_interface_widths():
    decls = inferred_interface(["0x12", "0x1234", "0x123456789"])["inputs"]
    assert [d["width_bits"] for d in decls] == [8, 16, 64]
