"""Event-sourced run driver.

One run = one append-only event log plus projections (plan, specs, tests,
integrated sources) derived from it. The driver advances in small work units;
every unit ends with a state-bearing event, and the only mid-unit events are
PROVIDER_CALL and PATCH_APPLIED effects. On resume, the trailing run of
effect events is replayed positionally (recorded responses are reused instead
of calling the provider again), so a run killed after any event continues
byte-identically to a run that was never interrupted.

Pipeline order: understanding (summarize, decompose, augment) -> per
sub-function in plan order PSEUDO -> SCRIPT -> SYNTH coding loops, with
reflection on every exhausted budget -> synthesis lint/optimize -> external
synthesizer -> whole-program final verification.
"""

from __future__ import annotations

import json
import secrets
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import coding, hls, reflection, understanding
from .coding_types import CodeUnit, PromptState, TestCase, VerificationReport
from .config import RunConfig, validate_config
from .document import SpecDocument, load_manifest, validate_document
from .errors import (AugmentError, PatchError, ProviderError, RunError,
                     SandboxError, SpecForgeError, TestDerivationError)
from .events import EventLog, TERMINAL_KINDS
from .patcher import (CodeLevel, IntegratedSource, LEVEL_EXTENSIONS, LEVEL_ORDER,
                      PatchBlock, apply_patch, make_source, parse_patch)
from .prompts import NOISE_INSTRUCTION, build_request, tag_header
from .providers import (CompletionRequest, CompletionResult, RetryPolicy,
                        ScriptedProvider, HttpProvider, Transcript, Usage,
                        provider_call_payload, with_retry)
from .sandbox import Sandbox
from .structured import FencedBlockError, parse_fenced_json
from .understanding import SubFunctionSpec

LEVELS = list(LEVEL_ORDER)

SOURCE_SKELETONS = {
    CodeLevel.PSEUDO: "",
    CodeLevel.SCRIPT: "",
    CodeLevel.SYNTH: "#include <cstdint>\n",
}


# --------------------------------------------------------------------------
# Fold state
# --------------------------------------------------------------------------

@dataclass
class LoopInfo:
    name: str
    level: str
    loop_id: int
    attempts: int = 0
    last_passed: bool = False
    fail_streak: int = 0  # failures since the last prompt optimization
    last_report: dict | None = None
    last_version: int = 0
    tests: list[dict] = field(default_factory=list)


@dataclass
class RunState:
    """Pure fold over the event log; nothing here comes from anywhere else."""

    run_id: str = ""
    bundle_path: str = ""
    config: RunConfig | None = None
    doc_section_ids: list[str] = field(default_factory=list)
    summaries: list[dict] = field(default_factory=list)
    plan: understanding.DecompositionPlan | None = None
    specs: dict[str, SubFunctionSpec] = field(default_factory=dict)
    sources: dict[str, IntegratedSource] = field(default_factory=dict)
    body_history: dict[tuple[str, str], list[str]] = field(default_factory=dict)
    accepted: dict[tuple[str, str], CodeUnit] = field(default_factory=dict)
    first_accept_seq: dict[tuple[str, str], int] = field(default_factory=dict)
    tests: dict[tuple[str, str], list[TestCase]] = field(default_factory=dict)
    prompt_states: dict[str, PromptState] = field(default_factory=dict)
    queue: list[dict] = field(default_factory=list)
    active_loop: LoopInfo | None = None
    max_loop_id: int = 0
    awaiting_reflection: dict | None = None  # LEVEL_EXHAUSTED payload
    pending_escalation: dict | None = None  # REFLECTION_DECIDED payload (ESCALATE)
    reflections_used: dict[tuple[str, str], int] = field(default_factory=dict)
    interventions: dict[str, reflection.InterventionRequest] = field(default_factory=dict)
    pending_intervention: str | None = None
    augment_guidance: dict[str, str] = field(default_factory=dict)
    augment_blocked: str | None = None  # sub-function waiting on an augment answer
    noise_done: bool = False
    last_lint: dict | None = None
    hls_rounds: int = 0
    synth_invoked: bool = False
    consumed_entries: list[int] = field(default_factory=list)
    last_event: dict | None = None
    seq: int = 0

    # -- helpers ---------------------------------------------------------

    def terminal(self) -> bool:
        return self.last_event is not None and self.last_event["kind"] in TERMINAL_KINDS

    def source(self, level: CodeLevel) -> IntegratedSource:
        if level.value not in self.sources:
            self.sources[level.value] = make_source(level, SOURCE_SKELETONS[level])
        return self.sources[level.value]

    def prompt_state(self, name: str) -> PromptState:
        if name not in self.prompt_states:
            self.prompt_states[name] = PromptState(base_prompt="coder-base")
        return self.prompt_states[name]

    def summarized_ids(self) -> set[str]:
        return {s["section_id"] for s in self.summaries}

    def next_version(self, name: str, level: str) -> int:
        return len(self.body_history.get((name, level), [])) + 1

    def front_job(self) -> dict | None:
        return self.queue[0] if self.queue else None

    def phase(self) -> str:
        if self.config is None:
            return "NEW"
        if self.terminal():
            return "COMPLETED" if self.last_event["kind"] == "RUN_COMPLETED" else "FAILED"
        if self.pending_intervention:
            return "BLOCKED"
        if self.plan is None:
            return "UNDERSTANDING"
        if any(item.name not in self.specs for item in self.plan.sub_functions):
            return "UNDERSTANDING"
        if self.queue:
            return "CODING"
        return "HLS_PREP"

    def current_subfunction(self) -> str | None:
        job = self.front_job()
        if job and "name" in job:
            return job["name"]
        return None


def _plan_jobs(plan: understanding.DecompositionPlan) -> list[dict]:
    return [{"job": "loop", "name": item.name, "level": level.value,
             "guidance": "", "fresh": True}
            for item in plan.sub_functions for level in LEVELS]


def _apply_route(state: RunState, payload: dict) -> None:
    """Mutate the job queue the way a reflection decision (or an answer with a
    route directive) demands. Pure function of the event payload."""
    route = payload["route"]
    name = payload.get("name", "") or (state.front_job() or {}).get("name", "")
    level = payload.get("level", "") or (state.front_job() or {}).get("level", "")
    feedback = payload.get("feedback", "")
    front = state.front_job()
    if route == "REVISE_INSTRUCTIONS":
        target = payload.get("target") or name
        if front and front["job"] == "loop":
            front["fresh"] = True
        state.queue.insert(0, {"job": "revise_spec", "name": target,
                               "feedback": feedback or payload.get("failing_digest", "")})
    elif route == "REVISE_PRIOR":
        target = payload.get("target") or ""
        t_name, t_level = _parse_target(target, level)
        if front and front["job"] == "loop":
            front["fresh"] = True
        downstream = _downstream_accepted(state, t_name, t_level)
        jobs = [{"job": "loop", "name": t_name, "level": t_level,
                 "guidance": _revise_prior_guidance(payload), "fresh": True}]
        jobs += [{"job": "reverify", "name": d, "level": t_level} for d in downstream]
        state.queue[0:0] = jobs
    elif route == "REGENERATE_CURRENT":
        if front and front["job"] == "loop":
            front["fresh"] = True
            if feedback:
                front["guidance"] = (front.get("guidance", "") + "\n" + feedback).strip()
    # ESCALATE_HUMAN mutates nothing; the intervention build follows.


def _parse_target(target: str, current_level: str) -> tuple[str, str]:
    if "@" in target:
        name, level = target.split("@", 1)
        return name, level
    return target, current_level


def _revise_prior_guidance(payload: dict) -> str:
    parts = []
    if payload.get("feedback"):
        parts.append(payload["feedback"])
    if payload.get("failing_digest"):
        parts.append("Failing cases observed downstream:\n" + payload["failing_digest"])
    return "\n".join(parts)


def _downstream_accepted(state: RunState, name: str, level: str) -> list[str]:
    """Accepted sub-functions after ``name`` in plan order, at ``level``."""
    if state.plan is None:
        return []
    names = state.plan.names()
    if name not in names:
        return []
    after = names[names.index(name) + 1:]
    return [n for n in after if (n, level) in state.accepted]


def fold_event(state: RunState, rec: dict) -> RunState:
    kind, payload, seq = rec["kind"], rec["payload"], rec["seq"]
    state.seq = seq
    state.last_event = rec

    if kind == "RUN_STARTED":
        state.run_id = payload["run_id"]
        state.bundle_path = payload["bundle_path"]
        state.config = RunConfig.from_json(payload["config"])
        state.doc_section_ids = list(payload.get("section_ids", ()))

    elif kind == "SECTION_SUMMARIZED":
        state.summaries.append({"section_id": payload["section_id"],
                                "summary_text": payload["summary_text"]})

    elif kind == "PLAN_ACCEPTED":
        state.plan = understanding.DecompositionPlan.from_json(payload["plan"])
        state.queue = _plan_jobs(state.plan)

    elif kind == "SPEC_ACCEPTED":
        spec = SubFunctionSpec.from_json(payload["spec"])
        state.specs[spec.name] = spec
        state.augment_blocked = None
        front = state.front_job()
        if front and front["job"] == "revise_spec" and front["name"] == spec.name:
            state.queue.pop(0)

    elif kind == "PROVIDER_CALL":
        if "entry_index" in payload:
            state.consumed_entries.append(payload["entry_index"])

    elif kind == "PATCH_APPLIED":
        level = CodeLevel(payload["level"])
        source = state.source(level)
        block = PatchBlock(subfunction_name=payload["name"], body=payload["body"])
        state.sources[level.value] = apply_patch(source, block)
        state.body_history.setdefault((payload["name"], level.value),
                                      []).append(payload["body"])

    elif kind == "CODING_ATTEMPT":
        name, level = payload["name"], payload["level"]
        loop_id = payload["loop_id"]
        if state.active_loop is None or state.active_loop.loop_id != loop_id:
            state.active_loop = LoopInfo(name=name, level=level, loop_id=loop_id)
            state.max_loop_id = max(state.max_loop_id, loop_id)
        loop = state.active_loop
        loop.attempts = payload["attempt"]
        loop.last_passed = payload["passed"]
        loop.last_report = payload
        loop.last_version = payload["version"]
        loop.fail_streak = 0 if payload["passed"] else loop.fail_streak + 1
        if "tests" in payload:
            loop.tests = payload["tests"]
            state.tests[(name, level)] = [TestCase.from_json(t) for t in payload["tests"]]
        front = state.front_job()
        if front and front["job"] == "loop" and front["name"] == name \
                and front["level"] == level:
            front["fresh"] = False

    elif kind == "PROMPT_OPTIMIZED":
        ps = state.prompt_state(payload["name"])
        ps.addenda.append({"trigger_summary": payload["trigger_summary"],
                           "addendum": payload["addendum"]})
        if state.active_loop is not None:
            state.active_loop.fail_streak = 0

    elif kind == "LEVEL_ACCEPTED":
        name, level = payload["name"], payload["level"]
        key = (name, level)
        body = state.body_history.get(key, [""])[-1]
        state.accepted[key] = CodeUnit(
            subfunction=name, level=CodeLevel(level), source_text=body,
            version=payload["version"],
            derived_from=tuple(payload["derived_from"]) if payload.get("derived_from")
            else None)
        state.first_accept_seq.setdefault(key, seq)
        state.active_loop = None
        front = state.front_job()
        if front and front["job"] in ("loop", "reverify") and front["name"] == name \
                and front["level"] == level:
            state.queue.pop(0)
            cfg = state.config
            if (cfg and cfg.noise_stage == level and not state.noise_done
                    and cfg.noise_stage in ("PSEUDO", "SCRIPT", "SYNTH")
                    and not payload.get("reverified")):
                state.queue.insert(0, {"job": "noise", "name": name, "level": level})

    elif kind == "LEVEL_EXHAUSTED":
        state.awaiting_reflection = payload
        state.active_loop = None

    elif kind == "REFLECTION_DECIDED":
        state.awaiting_reflection = None
        key = (payload["name"], payload["level"])
        if payload["route"] == "ESCALATE_HUMAN":
            state.pending_escalation = payload
        else:
            state.reflections_used[key] = state.reflections_used.get(key, 0) + 1
            _apply_route(state, payload)

    elif kind == "INTERVENTION_REQUESTED":
        req = reflection.InterventionRequest.from_json(payload["request"])
        state.interventions[req.request_id] = req
        state.pending_intervention = req.request_id
        state.pending_escalation = None
        if payload.get("origin") == "augment":
            state.augment_blocked = payload.get("name")

    elif kind == "INTERVENTION_ANSWERED":
        rid = payload["request_id"]
        req = state.interventions.get(rid)
        if req is not None:
            req.status = "ANSWERED"
            req.answer = payload["answer"]
        state.pending_intervention = None
        directive = payload.get("directive", {})
        if state.augment_blocked:
            name = state.augment_blocked
            guidance = directive.get("guidance") or payload["answer"]
            prior = state.augment_guidance.get(name, "")
            state.augment_guidance[name] = (prior + "\n" + guidance).strip()
            state.augment_blocked = None
        elif directive.get("route") in ("REVISE_INSTRUCTIONS", "REVISE_PRIOR"):
            _apply_route(state, {
                "route": directive["route"], "target": directive.get("target"),
                "feedback": directive.get("guidance", ""),
                "name": payload.get("name", ""), "level": payload.get("level", "")})
        else:
            front = state.front_job()
            if front and front["job"] == "loop":
                front["fresh"] = True
                guidance = directive.get("guidance") or payload["answer"]
                front["guidance"] = (front.get("guidance", "") + "\n" + guidance).strip()

    elif kind == "NOISE_INJECTED":
        state.noise_done = True
        front = state.front_job()
        if front and front["job"] == "noise":
            state.queue.pop(0)
        if payload["stage"] == "UNDERSTANDING":
            spec = SubFunctionSpec.from_json(payload["spec"])
            state.specs[spec.name] = spec
        else:
            name, level = payload["name"], payload["level"]
            key = (name, level)
            body = state.body_history.get(key, [""])[-1]
            prior = state.accepted.get(key)
            state.accepted[key] = CodeUnit(
                subfunction=name, level=CodeLevel(level), source_text=body,
                version=payload["version"],
                derived_from=prior.derived_from if prior else None)

    elif kind == "HLS_LINTED":
        state.last_lint = payload["report"]

    elif kind == "HLS_OPTIMIZED":
        state.hls_rounds += 1
        state.last_lint = payload["report"]

    elif kind == "SYNTH_INVOKED":
        state.synth_invoked = True

    return state


def fold(records: list[dict]) -> RunState:
    state = RunState()
    for rec in records:
        fold_event(state, rec)
    return state


# --------------------------------------------------------------------------
# Scheduler: what happens next, as a pure function of folded state
# --------------------------------------------------------------------------

def next_action(state: RunState) -> dict:
    """Return the next work unit descriptor, or {'unit': 'DONE'|'BLOCKED'}."""
    if state.terminal():
        return {"unit": "DONE"}
    if state.pending_intervention:
        return {"unit": "BLOCKED"}
    if state.pending_escalation is not None:
        return {"unit": "BUILD_INTERVENTION"}
    if state.awaiting_reflection is not None:
        return {"unit": "REFLECT"}
    if state.config is None:
        raise RunError("log has no RUN_STARTED", code="LOG_CORRUPT")

    if state.plan is None:
        if len(state.summaries) < len(state.doc_section_ids):
            return {"unit": "SUMMARIZE", "index": len(state.summaries)}
        return {"unit": "DECOMPOSE"}

    if (state.config.noise_stage == "UNDERSTANDING" and not state.noise_done
            and state.plan.sub_functions and state.plan.sub_functions[0].name in state.specs):
        return {"unit": "NOISE_SPEC", "name": state.plan.sub_functions[0].name}

    for item in state.plan.sub_functions:
        if item.name not in state.specs:
            return {"unit": "AUGMENT", "name": item.name}

    job = state.front_job()
    if job is not None:
        if job["job"] == "revise_spec":
            return {"unit": "REVISE_SPEC", **job}
        if job["job"] == "noise":
            return {"unit": "NOISE_CODE", **job}
        if job["job"] == "reverify":
            return {"unit": "REVERIFY", **job}
        # loop job
        loop = state.active_loop
        budgets = state.config.budgets
        in_loop = (loop is not None and loop.name == job["name"]
                   and loop.level == job["level"] and not job.get("fresh"))
        if in_loop and loop.last_passed:
            return {"unit": "ACCEPT_LEVEL", **job}
        if in_loop and loop.fail_streak >= budgets.optimizer_trigger \
                and not loop.last_passed:
            return {"unit": "OPTIMIZE_PROMPT", **job}
        if in_loop and loop.attempts >= budgets.max_attempts_per_level:
            return {"unit": "EXHAUST_LEVEL", **job}
        return {"unit": "ATTEMPT", **job}

    # HLS preparation and the final gate.
    if state.last_lint is None:
        return {"unit": "HLS_LINT"}
    if not state.last_lint.get("clean", False):
        if state.hls_rounds < state.config.budgets.hls_budget:
            return {"unit": "HLS_OPTIMIZE"}
        return {"unit": "FAIL_RUN", "error": "HLS_BUDGET_EXHAUSTED",
                "message": "blocking synthesis-lint violations remain after budget"}
    if not state.synth_invoked:
        return {"unit": "SYNTH_INVOKE"}
    return {"unit": "FINAL_VERIFY"}


# --------------------------------------------------------------------------
# Effect journal
# --------------------------------------------------------------------------

class Journal:
    """Replays an interrupted unit's recorded effects, then appends live ones."""

    def __init__(self, log: EventLog, replay_tail: list[dict]):
        self.log = log
        self.tail = replay_tail
        self.cursor = 0
        self.emitted: list[dict] = []

    def _next_replay(self, kind: str) -> dict | None:
        if self.cursor < len(self.tail):
            rec = self.tail[self.cursor]
            if rec["kind"] != kind:
                raise RunError(
                    f"resume divergence: log has {rec['kind']} where the unit "
                    f"produces {kind}", code="LOG_CORRUPT")
            self.cursor += 1
            return rec
        return None

    def provider_call(self, request: CompletionRequest, live_call) -> CompletionResult:
        rec = self._next_replay("PROVIDER_CALL")
        if rec is not None:
            p = rec["payload"]
            if p["agent"] != request.agent_name:
                raise RunError(f"resume divergence: recorded call was for {p['agent']}, "
                               f"unit asked for {request.agent_name}", code="LOG_CORRUPT")
            return CompletionResult(
                text=p["response"],
                usage=Usage(p["prompt_chars"], p["completion_chars"]),
                provider_id=p["provider_id"], entry_index=p.get("entry_index"))
        result = live_call(request)
        self._append("PROVIDER_CALL", provider_call_payload(request, result))
        return result

    def patch_applied(self, payload: dict) -> None:
        rec = self._next_replay("PATCH_APPLIED")
        if rec is not None:
            return
        self._append("PATCH_APPLIED", payload)

    def state_event(self, kind: str, payload: dict) -> None:
        if self.cursor < len(self.tail):
            raise RunError("resume divergence: unreplayed effects remain at a state "
                           "event boundary", code="LOG_CORRUPT")
        self._append(kind, payload)

    def _append(self, kind: str, payload: dict) -> None:
        event = self.log.append(kind, payload)
        self.emitted.append(event.to_json())


class JournaledProvider:
    """The provider facade every unit uses; routes through the journal."""

    def __init__(self, inner, journal: Journal, retry: RetryPolicy):
        self.inner = inner
        self.journal = journal
        self.retry = retry

    def complete(self, request: CompletionRequest) -> CompletionResult:
        def live(req):
            return with_retry(self.inner, req, self.retry)
        return self.journal.provider_call(request, live)


# --------------------------------------------------------------------------
# The driver
# --------------------------------------------------------------------------

def new_run_id() -> str:
    return "run-" + time.strftime("%Y%m%d-%H%M%S") + "-" + secrets.token_hex(3)


class Orchestrator:
    """Drives runs under one runs-root directory."""

    def __init__(self, runs_root: str | Path):
        self.runs_root = Path(runs_root)
        self._providers: dict[str, object] = {}
        self._docs: dict[str, SpecDocument] = {}

    # -- lifecycle ---------------------------------------------------------

    def run_dir(self, run_id: str) -> Path:
        return self.runs_root / run_id

    def log(self, run_id: str) -> EventLog:
        return EventLog(self.run_dir(run_id) / "events.log")

    def list_runs(self) -> list[str]:
        if not self.runs_root.is_dir():
            return []
        return sorted(p.name for p in self.runs_root.iterdir()
                      if (p / "events.log").is_file())

    def start_run(self, bundle_path: str | Path, config: RunConfig,
                  run_id: str | None = None) -> str:
        validate_config(config)
        doc = load_manifest(bundle_path)
        issues = validate_document(doc)
        if issues:
            raise RunError("document invalid: " +
                           "; ".join(f"{i.section_id}:{i.code}" for i in issues),
                           code="CONFIG_INVALID")
        run_id = run_id or new_run_id()
        run_dir = self.run_dir(run_id)
        if (run_dir / "events.log").exists():
            raise RunError(f"run {run_id} already exists", code="CONFIG_INVALID")
        run_dir.mkdir(parents=True, exist_ok=True)
        for sub in ("specs", "tests", "build", "sandbox", "interventions"):
            (run_dir / sub).mkdir(exist_ok=True)
        self.log(run_id).append("RUN_STARTED", {
            "run_id": run_id,
            "bundle_path": str(Path(bundle_path).resolve()),
            "config": config.to_json(),
            "doc_id": doc.doc_id,
            "section_ids": doc.section_ids(),
        })
        return run_id

    def state(self, run_id: str) -> RunState:
        records = self.log(run_id).read()
        if not records:
            raise RunError(f"no events for run {run_id}", code="LOG_CORRUPT")
        return fold(records)

    def resume(self, run_id: str) -> RunState:
        """Validate the log (hashes, gaplessness) and rebuild state and
        projections; identical in behavior to never having stopped."""
        state = self.state(run_id)
        self.project(run_id, state)
        return state

    def _doc(self, state: RunState) -> SpecDocument:
        if state.bundle_path not in self._docs:
            self._docs[state.bundle_path] = load_manifest(state.bundle_path)
        return self._docs[state.bundle_path]

    def _provider(self, run_id: str, state: RunState,
                  consumed: list[int] | None = None):
        if run_id in self._providers:
            return self._providers[run_id]
        cfg = state.config.provider
        if cfg.kind == "scripted":
            path = Path(cfg.transcript_path)
            if not path.is_absolute():
                path = Path(state.bundle_path).parent / path
            provider = ScriptedProvider(Transcript.load(path))
            provider.prime_consumption(consumed if consumed is not None
                                       else state.consumed_entries)
        else:
            provider = HttpProvider(base_url=cfg.base_url, model=cfg.model or "",
                                    auth_token_env=cfg.auth_token_env,
                                    timeout_seconds=cfg.timeout_seconds)
        self._providers[run_id] = provider
        return provider

    def _sandbox(self, run_id: str, state: RunState) -> Sandbox:
        return Sandbox(state.config.toolchain,
                       artifacts_root=self.run_dir(run_id) / "sandbox")

    def _retry_policy(self, state: RunState) -> RetryPolicy:
        cfg = state.config.provider
        return RetryPolicy(max_attempts=cfg.retry_max_attempts,
                           backoff_seconds=cfg.retry_backoff_seconds)

    # -- stepping ----------------------------------------------------------

    def step(self, run_id: str) -> list[dict]:
        """Advance the run by one work unit; returns the events it appended.

        The unit executes against state folded WITHOUT the trailing effect
        events: those belong to an interrupted unit and are replayed through
        the journal, so re-execution emits a byte-identical continuation.
        """
        log = self.log(run_id)
        records = log.read()
        tail = log.tail_effects(records)
        base = records[:len(records) - len(tail)] if tail else records
        state = fold(base)
        if state.terminal():
            raise RunError(f"run {run_id} is {state.phase()}", code="RUN_TERMINAL")
        action = next_action(state)
        if action["unit"] == "BLOCKED":
            raise RunError("run is blocked on a pending intervention",
                           code="BLOCKED_ON_INTERVENTION")
        if action["unit"] == "DONE":
            return []
        journal = Journal(log, tail)
        consumed = [ev["payload"]["entry_index"] for ev in records
                    if ev["kind"] == "PROVIDER_CALL"
                    and "entry_index" in ev["payload"]]
        provider = JournaledProvider(self._provider(run_id, state, consumed), journal,
                                     self._retry_policy(state))
        sandbox = self._sandbox(run_id, state)
        doc = self._doc(state)
        try:
            handler = getattr(self, "_unit_" + action["unit"].lower())
            handler(state, action, journal, provider, sandbox, doc)
        except RunError:
            raise
        except SpecForgeError as exc:
            event = log.append("RUN_FAILED", {"error": exc.code, "message": str(exc)})
            journal.emitted.append(event.to_json())
        self.project(run_id, fold(log.read()))
        return journal.emitted

    def run_to_completion(self, run_id: str, max_steps: int = 10_000) -> RunState:
        """Step until terminal or blocked; returns the final folded state."""
        for _ in range(max_steps):
            state = fold(self.log(run_id).read())
            if state.terminal() or state.pending_intervention:
                return state
            self.step(run_id)
        raise RunError(f"run {run_id} did not settle within {max_steps} steps",
                       code="STEP_LIMIT")

    # -- unit executors ------------------------------------------------------

    def _unit_summarize(self, state, action, journal, provider, sandbox, doc):
        section_id = state.doc_section_ids[action["index"]]
        summary = understanding.summarize_one(
            doc, section_id, provider, state.config.context.doc_chars)
        journal.state_event("SECTION_SUMMARIZED",
                            {"section_id": summary.section_id,
                             "summary_text": summary.summary_text})

    def _unit_decompose(self, state, action, journal, provider, sandbox, doc):
        summaries = [understanding.SectionSummary(s["section_id"], s["summary_text"])
                     for s in state.summaries]
        plan = understanding.decompose(doc, summaries, provider,
                                       state.config.target_name,
                                       state.config.context.doc_chars)
        journal.state_event("PLAN_ACCEPTED", {"plan": plan.to_json()})

    def _unit_augment(self, state, action, journal, provider, sandbox, doc):
        name = action["name"]
        item = next(i for i in state.plan.sub_functions if i.name == name)
        summaries = [understanding.SectionSummary(s["section_id"], s["summary_text"])
                     for s in state.summaries]
        try:
            spec = understanding.augment_subfunction(
                item, doc, summaries, provider,
                max_rounds=state.config.budgets.augment_max_rounds,
                budget_chars=state.config.context.doc_chars,
                guidance=state.augment_guidance.get(name, ""))
        except AugmentError as exc:
            request = reflection.InterventionRequest(
                request_id=f"iv-{state.seq + 1}",
                observations=f"information dictionary for {name!r} was not accepted "
                             f"within budget",
                attempts="; ".join((exc.detail or {}).get("comments", [])),
                questions=[f"How should the dictionary for {name!r} describe this "
                           f"sub-function?"],
                created_at=_now_iso())
            journal.state_event("INTERVENTION_REQUESTED",
                                {"request": request.to_json(), "origin": "augment",
                                 "name": name})
            return
        journal.state_event("SPEC_ACCEPTED", {"spec": spec.to_json()})

    def _unit_revise_spec(self, state, action, journal, provider, sandbox, doc):
        name = action["name"]
        spec = state.specs[name]
        summaries = [understanding.SectionSummary(s["section_id"], s["summary_text"])
                     for s in state.summaries]
        revised = understanding.revise_instructions(
            spec, action.get("feedback") or "coding failures attributed to instructions",
            doc, summaries, provider,
            max_rounds=state.config.budgets.augment_max_rounds,
            budget_chars=state.config.context.doc_chars)
        journal.state_event("SPEC_ACCEPTED", {"spec": revised.to_json(), "revised": True})

    def _unit_noise_spec(self, state, action, journal, provider, sandbox, doc):
        name = action["name"]
        spec = state.specs[name]
        request = build_request(
            "NoiseInjector", tag_header(task="noise", stage="UNDERSTANDING",
                                        subfunction=name),
            [NOISE_INSTRUCTION,
             "Artifact (emit the revised version in an ```infodict fence):\n" +
             json.dumps(spec.to_json(), indent=2, sort_keys=True)],
            tag=f"noise:{name}")
        result = provider.complete(request)
        try:
            rec = parse_fenced_json(result.text, "infodict")
        except FencedBlockError as exc:
            raise ProviderError(f"noise revision unparseable: {exc}",
                                code="NOISE_UNPARSEABLE")
        rec["name"] = name
        rec["revision"] = spec.revision
        revised = SubFunctionSpec.from_json(rec)
        journal.state_event("NOISE_INJECTED",
                            {"stage": "UNDERSTANDING", "name": name,
                             "spec": revised.to_json()})

    def _unit_noise_code(self, state, action, journal, provider, sandbox, doc):
        name, level = action["name"], action["level"]
        unit = state.accepted[(name, level)]
        request = build_request(
            "NoiseInjector", tag_header(task="noise", stage=level, subfunction=name),
            [NOISE_INSTRUCTION,
             "Artifact (emit the revised version in the marker protocol):\n" +
             unit.source_text],
            tag=f"noise:{name}:{level}")
        result = provider.complete(request)
        block = parse_patch(result.text)
        version = state.next_version(name, level)
        self._apply_unit_patch(state, journal, CodeLevel(level), block.subfunction_name,
                               block.body, version)
        journal.state_event("NOISE_INJECTED",
                            {"stage": level, "name": name, "level": level,
                             "version": version, "prev_version": unit.version})

    def _apply_unit_patch(self, state, journal, level: CodeLevel, name: str,
                          body: str, version: int) -> None:
        source = state.source(level)
        block = PatchBlock(subfunction_name=name, body=body)
        new_source = apply_patch(source, block)
        state.sources[level.value] = new_source
        state.body_history.setdefault((name, level.value), []).append(body)
        journal.patch_applied({"level": level.value, "name": name, "body": body,
                               "version": version,
                               "content_hash": _text_hash(new_source.text)})

    def _loop_tests(self, state, action, journal, provider, sandbox, doc,
                    fresh: bool) -> tuple[list[TestCase], str | None]:
        """Derive tests at loop start; reuse the active loop's tests otherwise."""
        name, level = action["name"], CodeLevel(action["level"])
        if not fresh and state.active_loop is not None:
            return state.tests.get((name, level.value), []), None
        spec = state.specs[name]
        oracle = None
        if level == CodeLevel.SYNTH:
            script_unit = state.accepted.get((name, CodeLevel.SCRIPT.value))
            if script_unit is not None:
                oracle = (state.source(CodeLevel.SCRIPT), script_unit)
        try:
            tests = coding.derive_tests(spec, level, doc, oracle, provider, sandbox,
                                        state.config.context.doc_chars)
            return tests, None
        except TestDerivationError as exc:
            return [], exc.code

    def _unit_attempt(self, state, action, journal, provider, sandbox, doc):
        name, level = action["name"], CodeLevel(action["level"])
        spec = state.specs[name]
        fresh = bool(action.get("fresh")) or state.active_loop is None \
            or state.active_loop.name != name or state.active_loop.level != level.value
        tests, derivation_note = self._loop_tests(state, action, journal, provider,
                                                  sandbox, doc, fresh)
        if fresh:
            loop_id = state.max_loop_id + 1
            attempt_no = 1
        else:
            loop_id = state.active_loop.loop_id
            attempt_no = state.active_loop.attempts + 1

        higher_unit = None
        if level != CodeLevel.PSEUDO:
            higher_unit = state.accepted.get((name, level.higher_neighbor().value))

        progress = coding.LoopProgress()
        if not fresh and state.active_loop is not None \
                and state.active_loop.last_report is not None:
            rep = state.active_loop.last_report
            progress.last_report = VerificationReport(
                passed=rep["passed"], case_results=tuple(rep.get("case_results", ())),
                suspicion=rep.get("suspicion", "UNKNOWN"), notes=rep.get("notes", ""),
                verdict_mode=rep.get("verdict_mode", "REVISE"),
                comments=tuple(rep.get("comments", ())))
            key = (name, level.value)
            bodies = state.body_history.get(key, [])
            if bodies:
                progress.last_unit = CodeUnit(
                    subfunction=name, level=level, source_text=bodies[-1],
                    version=len(bodies))
        ctx = coding.next_draft_context(
            progress, higher_unit, state.source(level).text,
            guidance=action.get("guidance", ""), fresh=fresh)

        version = state.next_version(name, level.value)
        try:
            unit, _raw = coding.draft_code(spec, level, ctx, state.prompt_state(name),
                                           provider, version)
        except PatchError as exc:
            payload = {"name": name, "level": level.value, "loop_id": loop_id,
                       "attempt": attempt_no, "version": version, "passed": False,
                       "suspicion": "CURRENT", "verdict_mode": "REGENERATE",
                       "comments": [str(exc)], "notes": f"draft failed: {exc.code}",
                       "case_results": [], "error": exc.code}
            if fresh:
                payload["tests"] = [t.to_json() for t in tests]
                if derivation_note:
                    payload["test_derivation"] = derivation_note
            journal.state_event("CODING_ATTEMPT", payload)
            return

        self._apply_unit_patch(state, journal, level, unit.subfunction,
                               unit.source_text, version)
        report = coding.verify_code(unit, state.source(level), tests, spec,
                                    provider, sandbox)
        payload = {"name": name, "level": level.value, "loop_id": loop_id,
                   "attempt": attempt_no, "version": version, "passed": report.passed,
                   "suspicion": report.suspicion, "verdict_mode": report.verdict_mode,
                   "comments": list(report.comments), "notes": report.notes,
                   "case_results": list(report.case_results)}
        if unit.derived_from is not None:
            payload["derived_from"] = list(unit.derived_from)
        if fresh:
            payload["tests"] = [t.to_json() for t in tests]
            if derivation_note:
                payload["test_derivation"] = derivation_note
        journal.state_event("CODING_ATTEMPT", payload)

    def _unit_accept_level(self, state, action, journal, provider, sandbox, doc):
        loop = state.active_loop
        payload = {"name": loop.name, "level": loop.level, "loop_id": loop.loop_id,
                   "attempts": loop.attempts, "version": loop.last_version}
        derived = (loop.last_report or {}).get("derived_from")
        if derived:
            payload["derived_from"] = derived
        journal.state_event("LEVEL_ACCEPTED", payload)

    def _unit_exhaust_level(self, state, action, journal, provider, sandbox, doc):
        loop = state.active_loop
        rep = loop.last_report or {}
        digest = "\n".join(
            f"{r['id']}: {r['status']} observed={r.get('observed')} "
            f"expected={r.get('expected')}"
            for r in rep.get("case_results", ()) if r.get("status") != "PASS")
        journal.state_event("LEVEL_EXHAUSTED", {
            "name": loop.name, "level": loop.level, "loop_id": loop.loop_id,
            "attempts": loop.attempts, "suspicion": rep.get("suspicion", "UNKNOWN"),
            "failing_digest": digest or rep.get("notes", "")})

    def _unit_optimize_prompt(self, state, action, journal, provider, sandbox, doc):
        loop = state.active_loop
        rep = loop.last_report or {}
        failures = [VerificationReport(
            passed=False, case_results=tuple(rep.get("case_results", ())),
            suspicion=rep.get("suspicion", "UNKNOWN"), notes=rep.get("notes", ""),
            comments=tuple(rep.get("comments", ())))] * loop.fail_streak
        ps = state.prompt_state(loop.name)
        before = len(ps.addenda)
        revision = coding.optimize_prompt(
            ps, loop.name, CodeLevel(loop.level), failures, provider,
            trigger=state.config.budgets.optimizer_trigger)
        if not revision:
            revision = {"trigger_summary": "optimizer output unusable", "addendum": ""}
        journal.state_event("PROMPT_OPTIMIZED", {
            "name": loop.name, "level": loop.level, "loop_id": loop.loop_id,
            "index": before, "trigger_summary": revision["trigger_summary"],
            "addendum": revision["addendum"]})

    def _unit_reverify(self, state, action, journal, provider, sandbox, doc):
        name, level = action["name"], CodeLevel(action["level"])
        tests = state.tests.get((name, level.value), [])
        unit = state.accepted[(name, level.value)]
        failures: list[str] = []
        if tests:
            spec = state.specs[name]
            results = sandbox.run_testcases(state.source(level), name, tests,
                                            coding.interface_of(spec))
            failures = [r.case_id for r in results if r.status != "PASS"]
        if failures:
            journal.state_event("LEVEL_EXHAUSTED", {
                "name": name, "level": level.value, "loop_id": 0, "attempts": 0,
                "suspicion": "PRIOR_SUBFUNCTION", "reverified": True,
                "failing_digest": "reverification failures: " + ", ".join(failures)})
        else:
            journal.state_event("LEVEL_ACCEPTED", {
                "name": name, "level": level.value, "loop_id": 0,
                "attempts": 0, "version": unit.version, "reverified": True})

    def _unit_reflect(self, state, action, journal, provider, sandbox, doc):
        exhausted = state.awaiting_reflection
        name, level = exhausted["name"], exhausted["level"]
        key = (name, level)
        events = self.log(state.run_id).read()
        accepted_names = {n for (n, _l) in state.accepted}
        summary = reflection.analyze_trajectory(
            events, provider, accepted_names,
            state.config.context.reflection_digest_chars)
        used = state.reflections_used.get(key, 0)
        forced = used >= state.config.budgets.max_reflections_per_subfunction
        if forced:
            decision = reflection.ReflectionDecision(
                route="ESCALATE_HUMAN", forced=True,
                justification=f"reflection budget for {name}@{level} exhausted "
                              f"({used} non-escalation decisions)")
        else:
            targets = _valid_prior_targets(state, name, level)
            decision = reflection.decide_route(summary, provider, targets)
        payload = {
            "name": name, "level": level, "loop_id": exhausted.get("loop_id"),
            "route": decision.route, "target": decision.target,
            "feedback": decision.feedback, "justification": decision.justification,
            "forced": decision.forced,
            "failing_digest": exhausted.get("failing_digest", ""),
            "summary": {
                "completed_work": summary.completed_work,
                "failure_focus": summary.failure_focus,
                "hypotheses": [{"locus": h.locus, "name": h.name,
                                "rationale": h.rationale} for h in summary.hypotheses],
            },
        }
        journal.state_event("REFLECTION_DECIDED", payload)

    def _unit_build_intervention(self, state, action, journal, provider, sandbox, doc):
        decided = state.pending_escalation
        summary = reflection.TrajectorySummary(
            completed_work=decided["summary"]["completed_work"],
            failure_focus=decided["summary"]["failure_focus"],
            hypotheses=tuple(reflection.ErrorHypothesis(
                locus=h["locus"], name=h.get("name"), rationale=h.get("rationale", ""))
                for h in decided["summary"]["hypotheses"]))
        decision = reflection.ReflectionDecision(
            route="ESCALATE_HUMAN", forced=decided.get("forced", False),
            justification=decided.get("justification", ""))
        request = reflection.build_intervention_request(
            summary, decision, provider, request_id=f"iv-{state.seq + 1}")
        journal.state_event("INTERVENTION_REQUESTED", {
            "request": request.to_json(), "origin": "reflection",
            "name": decided["name"], "level": decided["level"]})

    def _unit_hls_lint(self, state, action, journal, provider, sandbox, doc):
        rules = hls.load_ruleset()
        report = hls.lint_for_hls(state.source(CodeLevel.SYNTH), rules)
        journal.state_event("HLS_LINTED", {"report": report.to_json()})

    def _hls_reverify(self, state, sandbox):
        """Behavior gate for optimizer rounds: every previously passing SYNTH
        case must still pass on the candidate source."""
        def check(candidate: IntegratedSource) -> list[str]:
            failed: list[str] = []
            for (name, level), tests in state.tests.items():
                if level != CodeLevel.SYNTH.value or not tests:
                    continue
                if (name, level) not in state.accepted:
                    continue
                spec = state.specs[name]
                results = sandbox.run_testcases(candidate, name, tests,
                                                coding.interface_of(spec))
                failed.extend(r.case_id for r in results if r.status != "PASS")
            return failed
        return check

    def _unit_hls_optimize(self, state, action, journal, provider, sandbox, doc):
        """One optimizer round: rewrite the first violating sub-function, then
        re-verify behavior; a regression rolls the round back untouched."""
        rules = hls.load_ruleset()
        source = state.source(CodeLevel.SYNTH)
        report = hls.LintReport(violations=tuple(
            hls.Violation(**v) for v in state.last_lint["violations"]))
        guidelines = "\n".join(f"{r.rule_id}: {r.description}" for r in rules)
        reverify = self._hls_reverify(state, sandbox)

        blocking = [v for v in report.violations if v.severity == "BLOCKING"]
        target_violation = blocking[0]
        target = hls.enclosing_subfunction(source, target_violation.line)
        if target is None:
            journal.state_event("RUN_FAILED", {
                "error": "HLS_BUDGET_EXHAUSTED",
                "message": f"violation at line {target_violation.line} lies outside "
                           f"every sub-function"})
            return
        current_body = _function_body(source, target)
        request = build_request(
            "CodeOptimizer", tag_header(task="hls_optimize", subfunction=target),
            ["Rewrite this sub-function so it satisfies the rules without changing "
             "behavior. Emit the marker-protocol block.",
             "Rules:\n" + guidelines,
             "Violations in this sub-function:\n" +
             "\n".join(f"- {v.rule_id} line {v.line}: {v.excerpt}" for v in blocking
                       if hls.enclosing_subfunction(source, v.line) == target),
             "Current implementation:\n" + current_body],
            tag=f"hls:{target}:round{state.hls_rounds + 1}")
        result = provider.complete(request)
        rolled_back = False
        regressions: list[str] = []
        version = state.next_version(target, CodeLevel.SYNTH.value)
        try:
            block = parse_patch(result.text)
            candidate = apply_patch(source, PatchBlock(block.subfunction_name, block.body))
        except PatchError:
            candidate = source
            rolled_back = True
            block = None
        if not rolled_back:
            regressions = reverify(candidate)
            if regressions:
                rolled_back = True
        if not rolled_back and block is not None:
            self._apply_unit_patch(state, journal, CodeLevel.SYNTH,
                                   block.subfunction_name, block.body, version)
        new_report = hls.lint_for_hls(state.source(CodeLevel.SYNTH), rules)
        journal.state_event("HLS_OPTIMIZED", {
            "round": state.hls_rounds + 1, "target": target,
            "rolled_back": rolled_back, "regressions": regressions,
            "behavior_regression": bool(regressions),
            "report": new_report.to_json()})

    def _unit_synth_invoke(self, state, action, journal, provider, sandbox, doc):
        run_dir = self.run_dir(state.run_id)
        path = _write_source_file(run_dir, CodeLevel.SYNTH, state.source(CodeLevel.SYNTH))
        outcome = hls.invoke_synthesizer(path, state.config.synthesizer_cmd,
                                         state.config.toolchain.timeout_seconds)
        journal.state_event("SYNTH_INVOKED", outcome)

    def _unit_final_verify(self, state, action, journal, provider, sandbox, doc):
        target = state.config.target_name
        cases = [t for t in state.tests.get((target, CodeLevel.SCRIPT.value), [])
                 if t.origin == "SPEC"]
        golden = _load_golden(state)
        all_cases = cases + golden
        if not all_cases:
            correct = None
            results_json: list[dict] = []
        else:
            spec = state.specs[target]
            synth_cases = [TestCase(case_id=c.case_id, level=CodeLevel.SYNTH,
                                    inputs=c.inputs, expected=c.expected,
                                    origin=c.origin) for c in all_cases]
            try:
                results = sandbox.run_testcases(state.source(CodeLevel.SYNTH), target,
                                                synth_cases, coding.interface_of(spec))
                correct = all(r.status == "PASS" for r in results)
                results_json = [{"id": r.case_id, "status": r.status,
                                 "observed": r.observed, "expected": r.expected}
                                for r in results]
            except SandboxError as exc:
                correct = False
                results_json = [{"id": "harness", "status": "ERROR",
                                 "observed": str(exc), "expected": ""}]
        metrics = compute_metrics_from_events(self.log(state.run_id).read())
        metrics["correct"] = correct
        journal.state_event("RUN_COMPLETED", {
            "correct": correct, "cases": results_json, "metrics": metrics,
            "flagged_unknown": correct is None})

    def _unit_fail_run(self, state, action, journal, provider, sandbox, doc):
        journal.state_event("RUN_FAILED", {"error": action["error"],
                                           "message": action["message"]})

    # -- single-shot diagnostic mode -------------------------------------------

    def single_shot(self, bundle_path: str | Path, config: RunConfig,
                    run_id: str | None = None) -> tuple[str, bool | None]:
        """Whole document in, one completion out, parsed and verified.

        A diagnostic baseline mode, not a pipeline: no understanding phase, no
        loops, no reflection. Verification uses the golden vector file only.
        """
        validate_config(config)
        doc = load_manifest(bundle_path)
        run_id = run_id or ("ss-" + new_run_id()[4:])
        run_dir = self.run_dir(run_id)
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / "sandbox").mkdir(exist_ok=True)
        log = self.log(run_id)
        log.append("RUN_STARTED", {
            "run_id": run_id, "bundle_path": str(Path(bundle_path).resolve()),
            "config": config.to_json(), "doc_id": doc.doc_id,
            "section_ids": doc.section_ids(), "mode": "single_shot"})
        state = fold(log.read())
        provider = self._provider(run_id, state)
        from .document import render_context
        context = render_context(doc, doc.section_ids(), config.context.doc_chars)
        request = build_request(
            "Coder", tag_header(task="single_shot", target=config.target_name),
            ["Implement the entire target described by this document as "
             "synthesizable systems-level code, one marker-protocol block per "
             "sub-function."],
            context=context, tag="single_shot")
        result = with_retry(provider, request, self._retry_policy(state))
        log.append("PROVIDER_CALL", provider_call_payload(request, result))
        source = make_source(CodeLevel.SYNTH, SOURCE_SKELETONS[CodeLevel.SYNTH])
        from .patcher import parse_all_patches
        blocks = parse_all_patches(result.text)
        if not blocks:
            blocks = [PatchBlock(subfunction_name=config.target_name,
                                 body=result.text.rstrip("\n") + "\n")]
        versions: dict[str, int] = {}
        for block in blocks:
            source = apply_patch(source, block)
            versions[block.subfunction_name] = versions.get(block.subfunction_name, 0) + 1
            log.append("PATCH_APPLIED", {
                "level": CodeLevel.SYNTH.value, "name": block.subfunction_name,
                "body": block.body, "version": versions[block.subfunction_name],
                "content_hash": _text_hash(source.text)})
        state = fold(log.read())
        golden = _load_golden(state)
        correct: bool | None = None
        results_json: list[dict] = []
        if golden:
            from .sandbox import inferred_interface
            sandbox = self._sandbox(run_id, state)
            interface = inferred_interface(list(golden[0].inputs))
            try:
                results = sandbox.run_testcases(source, config.target_name,
                                                golden, interface)
                correct = all(r.status == "PASS" for r in results)
                results_json = [{"id": r.case_id, "status": r.status,
                                 "observed": r.observed, "expected": r.expected}
                                for r in results]
            except SandboxError as exc:
                correct = False
                results_json = [{"id": "harness", "status": "ERROR",
                                 "observed": str(exc), "expected": ""}]
        log.append("RUN_COMPLETED", {"correct": correct, "cases": results_json,
                                     "metrics": compute_metrics_from_events(log.read()),
                                     "mode": "single_shot"})
        self.project(run_id, fold(log.read()))
        return run_id, correct

    # -- interventions -------------------------------------------------------

    def answer_intervention(self, run_id: str, request_id: str, answer: str) -> dict:
        log = self.log(run_id)
        with log.mutate():
            state = fold(log.read())
            req = state.interventions.get(request_id)
            if req is None:
                raise RunError(f"unknown intervention request {request_id}",
                               code="UNKNOWN_REQUEST")
            if req.status == "ANSWERED":
                raise RunError(f"request {request_id} already answered",
                               code="ALREADY_ANSWERED")
            directive = reflection.parse_answer(answer)
            if directive.route == "REVISE_PRIOR":
                front = state.front_job() or {}
                targets = _valid_prior_targets(state, front.get("name", ""),
                                               front.get("level", ""))
                if directive.target not in targets:
                    raise RunError(
                        f"answer names unknown prior target {directive.target!r}",
                        code="BAD_DIRECTIVE")
            event = log.append("INTERVENTION_ANSWERED", {
                "request_id": request_id, "answer": answer,
                "directive": {"route": directive.route, "target": directive.target,
                              "guidance": directive.guidance}})
        self.project(run_id, fold(log.read()))
        return event.to_json()

    # -- projections and metrics ----------------------------------------------

    def project(self, run_id: str, state: RunState) -> None:
        """Write the human-readable views of the folded state."""
        run_dir = self.run_dir(run_id)
        if state.plan is not None:
            _write_json(run_dir / "plan", state.plan.to_json())
        for name, spec in state.specs.items():
            _write_json(run_dir / "specs" / f"{name}.rev{spec.revision}", spec.to_json())
        for (name, level), tests in state.tests.items():
            _write_json(run_dir / "tests" / f"{name}.{level}",
                        [t.to_json() for t in tests])
        for level in LEVELS:
            if level.value in state.sources:
                _write_source_file(run_dir, level, state.sources[level.value])
        for req in state.interventions.values():
            _write_json(run_dir / "interventions" / req.request_id, req.to_json())
        if state.terminal():
            metrics = compute_metrics_from_events(self.log(run_id).read())
            if state.last_event["kind"] == "RUN_COMPLETED":
                metrics["correct"] = state.last_event["payload"].get("correct")
            _write_json(run_dir / "metrics", metrics)

    def compute_metrics(self, run_id: str) -> dict:
        return compute_metrics_from_events(self.log(run_id).read())


def _valid_prior_targets(state: RunState, name: str, level: str) -> set[str]:
    targets: set[str] = set()
    for (n, l) in state.accepted:
        if (n, l) == (name, level):
            continue
        targets.add(f"{n}@{l}")
        if l == level and n != name:
            targets.add(n)
    return targets


def _function_body(source: IntegratedSource, name: str) -> str:
    span = source.index[name]
    lines = source.text.split("\n")
    return "\n".join(lines[span.start_line - 1:span.end_line])


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _write_source_file(run_dir: Path, level: CodeLevel,
                       source: IntegratedSource) -> Path:
    path = run_dir / "build" / level.value / f"main.{LEVEL_EXTENSIONS[level]}"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(source.text, encoding="utf-8")
    return path


def _load_golden(state: RunState) -> list[TestCase]:
    if not state.config.golden_vectors:
        return []
    path = Path(state.config.golden_vectors)
    if not path.is_absolute():
        path = Path(state.bundle_path) / path
    records = json.loads(path.read_text(encoding="utf-8"))
    return [TestCase(case_id=r["id"], level=CodeLevel.SYNTH,
                     inputs=tuple(str(v) for v in r["inputs"]),
                     expected=str(r["expected"]), origin="SPEC")
            for r in records]


def _text_hash(text: str) -> str:
    import hashlib
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def _now_iso() -> str:
    from datetime import datetime, timezone
    return datetime.now(timezone.utc).isoformat()


def compute_metrics_from_events(events: list[dict]) -> dict:
    """Run metrics: intervention count, per-sub-function attempts, the mean."""
    n_interventions = sum(1 for ev in events if ev["kind"] == "INTERVENTION_ANSWERED")
    attempts: dict[str, int] = {}
    for ev in events:
        if ev["kind"] == "CODING_ATTEMPT":
            name = ev["payload"]["name"]
            attempts[name] = attempts.get(name, 0) + 1
    avg = (sum(attempts.values()) / len(attempts)) if attempts else 0.0
    correct = None
    for ev in events:
        if ev["kind"] == "RUN_COMPLETED":
            correct = ev["payload"].get("correct")
    return {"correct": correct, "n_interventions": n_interventions,
            "coding_attempts": attempts, "avg_coding": avg}

