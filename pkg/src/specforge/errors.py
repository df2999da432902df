"""Error types shared across the pipeline.

Every failure mode the engine can report carries a stable machine-readable
``code`` so callers (and tests) never have to match on message text.
"""

from __future__ import annotations


class SpecForgeError(Exception):
    """Base class for all engine errors."""

    code = "INTERNAL"

    def __init__(self, message: str, *, code: str | None = None, detail: object = None):
        super().__init__(message)
        if code is not None:
            self.code = code
        self.detail = detail


class ManifestError(SpecForgeError):
    """Bundle loading failures: MANIFEST_MALFORMED, ATTACHMENT_MISSING, DUPLICATE_SECTION_ID."""

    code = "MANIFEST_MALFORMED"


class DocumentError(SpecForgeError):
    """Document rendering failures: UNKNOWN_SECTION_ID."""

    code = "UNKNOWN_SECTION_ID"


class ProviderError(SpecForgeError):
    """Completion failures: NO_MATCHING_ENTRY, REMOTE_FAILURE, OUTPUT_TRUNCATED."""

    code = "REMOTE_FAILURE"


class PlanError(SpecForgeError):
    """Decomposition failures: PLAN_UNPARSEABLE, PLAN_INVALID."""

    code = "PLAN_INVALID"


class AugmentError(SpecForgeError):
    """Information-dictionary loop failures: AUGMENT_BUDGET_EXHAUSTED."""

    code = "AUGMENT_BUDGET_EXHAUSTED"


class PatchError(SpecForgeError):
    """Marker-protocol failures: NO_FENCE_FOUND, UNTERMINATED_FENCE,
    MISSING_NAME_LABEL, AMBIGUOUS_DEFINITION, PATCH_UNPARSEABLE."""

    code = "PATCH_UNPARSEABLE"


class SandboxError(SpecForgeError):
    """Execution harness failures: TOOLCHAIN_MISSING, HARNESS_GENERATION_FAILED,
    ORACLE_EXECUTION_FAILED."""

    code = "TOOLCHAIN_MISSING"


class TestDerivationError(SpecForgeError):
    """Test derivation failures: NO_TESTS_AVAILABLE."""

    __test__ = False  # error type, not a pytest class

    code = "NO_TESTS_AVAILABLE"


class ReflectionError(SpecForgeError):
    """Trajectory analysis failures: ANALYSIS_UNPARSEABLE, ALREADY_ANSWERED, UNKNOWN_REQUEST."""

    code = "ANALYSIS_UNPARSEABLE"


class HlsError(SpecForgeError):
    """HLS preparation failures: RULESET_MALFORMED, HLS_BUDGET_EXHAUSTED,
    BEHAVIOR_REGRESSION."""

    code = "RULESET_MALFORMED"


class RunError(SpecForgeError):
    """Run lifecycle failures: CONFIG_INVALID, BLOCKED_ON_INTERVENTION, LOG_CORRUPT."""

    code = "CONFIG_INVALID"
