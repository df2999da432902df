"""Domain types shared by the coding loop, the sandbox, and the orchestrator."""

from __future__ import annotations

from dataclasses import dataclass, field

from .patcher import CodeLevel


@dataclass(frozen=True)
class CodeUnit:
    """One sub-function's code at one abstraction level."""

    subfunction: str
    level: CodeLevel
    source_text: str
    version: int  # starts at 1, increments per regeneration/revision at this level
    derived_from: tuple[str, int] | None = None  # (level, version) of the reference unit


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # domain type, not a pytest class

    case_id: str
    level: CodeLevel
    inputs: tuple[str, ...]  # decimal or hex literals
    expected: str
    origin: str  # SPEC | HIGHER_LEVEL | HUMAN
    oracle: tuple[str, int] | None = None  # (level, version) that produced `expected`

    def to_json(self) -> dict:
        rec = {"id": self.case_id, "level": self.level.value, "inputs": list(self.inputs),
               "expected": self.expected, "origin": self.origin}
        if self.oracle is not None:
            rec["oracle"] = {"level": self.oracle[0], "version": self.oracle[1]}
        return rec

    @staticmethod
    def from_json(rec: dict) -> "TestCase":
        oracle = None
        if rec.get("oracle"):
            oracle = (rec["oracle"]["level"], rec["oracle"]["version"])
        return TestCase(case_id=rec["id"], level=CodeLevel(rec["level"]),
                        inputs=tuple(rec["inputs"]), expected=rec["expected"],
                        origin=rec["origin"], oracle=oracle)


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    case_results: tuple[dict, ...]  # {id, status, observed, expected}
    suspicion: str  # CURRENT | PRIOR_SUBFUNCTION | INSTRUCTIONS | UNKNOWN
    notes: str = ""
    verdict_mode: str = "REVISE"  # REVISE | REGENERATE (how the next attempt starts)
    comments: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {"passed": self.passed, "case_results": list(self.case_results),
                "suspicion": self.suspicion, "notes": self.notes,
                "verdict_mode": self.verdict_mode, "comments": list(self.comments)}

    @staticmethod
    def from_json(rec: dict) -> "VerificationReport":
        return VerificationReport(
            passed=rec["passed"], case_results=tuple(rec.get("case_results", [])),
            suspicion=rec.get("suspicion", "UNKNOWN"), notes=rec.get("notes", ""),
            verdict_mode=rec.get("verdict_mode", "REVISE"),
            comments=tuple(rec.get("comments", ())))


@dataclass
class PromptState:
    """Per-sub-function prompt evolution: immutable base, append-only addenda."""

    base_prompt: str
    addenda: list[dict] = field(default_factory=list)  # {trigger_summary, addendum}

    def current_addendum(self) -> str:
        return "\n".join(rec["addendum"] for rec in self.addenda)
