"""Completion providers.

Two implementations sit behind one interface: a deterministic scripted
provider that replays a transcript of canned responses (the test double every
offline run uses), and an HTTP provider that talks to an OpenAI-style chat
endpoint. Usage is accounted in characters, not model tokens, so the numbers
are identical no matter which provider served a run.

Transcript files are JSONL, one entry per line::

    {"agent": "Coder", "match": ["[subfunction: f]", "[level: SCRIPT]"],
     "response": "...", "max_uses": 1}

``max_uses`` null or absent means unlimited. An entry matches a request when
its agent equals the request's agent AND every ``match`` substring occurs in
the rendered request text; entries are consumed top-down, first match with
remaining budget wins.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable

from .errors import ProviderError

AGENT_NAMES = (
    "Summarizer",
    "Decomposer",
    "Describer",
    "Verifier",
    "Coder",
    "PromptOptimizer",
    "Analyzer",
    "Reflector",
    "CodeOptimizer",
    "NoiseInjector",
)


class Role(str, Enum):
    SYSTEM = "SYSTEM"
    USER = "USER"
    ASSISTANT = "ASSISTANT"


@dataclass(frozen=True)
class Part:
    """One message part: plain text or a reference to an attachment image."""

    kind: str  # "text" | "image_ref"
    value: str

    @staticmethod
    def text(value: str) -> "Part":
        return Part("text", value)

    @staticmethod
    def image_ref(path: str) -> "Part":
        return Part("image_ref", path)


@dataclass(frozen=True)
class ChatMessage:
    role: Role
    parts: tuple[Part, ...]

    def __post_init__(self):
        if not self.parts:
            raise ValueError("ChatMessage.parts must be non-empty")


@dataclass(frozen=True)
class CompletionRequest:
    agent_name: str
    messages: tuple[ChatMessage, ...]
    temperature: float = 0.0
    max_output_chars: int = 100_000
    tag: str = ""

    def __post_init__(self):
        if self.agent_name not in AGENT_NAMES:
            raise ValueError(f"unknown agent name: {self.agent_name}")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class Usage:
    prompt_chars: int
    completion_chars: int


@dataclass(frozen=True)
class CompletionResult:
    text: str
    usage: Usage
    provider_id: str
    entry_index: int | None = None  # transcript position, scripted provider only


def render_request_text(request: CompletionRequest) -> str:
    """Flatten a request into the text the scripted matcher sees."""
    lines: list[str] = []
    for msg in request.messages:
        for part in msg.parts:
            if part.kind == "text":
                lines.append(part.value)
            else:
                lines.append(f"[[ATTACH:{part.value}]]")
    return "\n".join(lines)


# An event sink receives (kind, payload) for every completed provider call;
# the orchestrator wires it to the run's event log.
EventSink = Callable[[str, dict], None]


@dataclass
class TranscriptEntry:
    agent: str
    match: tuple[str, ...]
    response: str
    max_uses: int | None  # None = unlimited
    uses: int = 0

    def available(self) -> bool:
        return self.max_uses is None or self.uses < self.max_uses

    def matches(self, agent_name: str, rendered: str) -> bool:
        return self.agent == agent_name and all(m in rendered for m in self.match)


class Transcript:
    """Ordered collection of scripted responses."""

    def __init__(self, entries: Iterable[TranscriptEntry]):
        self.entries = list(entries)

    @classmethod
    def load(cls, path: str | Path) -> "Transcript":
        entries = []
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ProviderError(f"transcript line {lineno} is not valid JSON: {exc}",
                                    code="TRANSCRIPT_MALFORMED")
            if rec.get("agent") not in AGENT_NAMES:
                raise ProviderError(f"transcript line {lineno}: unknown agent {rec.get('agent')!r}",
                                    code="TRANSCRIPT_MALFORMED")
            match = rec.get("match", [])
            if not isinstance(match, list) or not all(isinstance(m, str) for m in match):
                raise ProviderError(f"transcript line {lineno}: match must be a list of strings",
                                    code="TRANSCRIPT_MALFORMED")
            entries.append(TranscriptEntry(
                agent=rec["agent"], match=tuple(match),
                response=rec.get("response", ""), max_uses=rec.get("max_uses")))
        return cls(entries)


class ScriptedProvider:
    """Deterministic provider replaying a transcript.

    Entry consumption is serialized under a lock so concurrent callers still
    consume entries in one total order. ``prime_consumption`` restores the
    per-entry use counts recorded in an event log when a run is resumed.
    """

    provider_id = "scripted"

    def __init__(self, transcript: Transcript, event_sink: EventSink | None = None):
        self.transcript = transcript
        self.event_sink = event_sink
        self._lock = threading.Lock()

    def prime_consumption(self, entry_indices: Iterable[int]) -> None:
        for idx in entry_indices:
            if 0 <= idx < len(self.transcript.entries):
                self.transcript.entries[idx].uses += 1

    def complete(self, request: CompletionRequest) -> CompletionResult:
        rendered = render_request_text(request)
        with self._lock:
            for idx, entry in enumerate(self.transcript.entries):
                if entry.available() and entry.matches(request.agent_name, rendered):
                    entry.uses += 1
                    result = self._result(request, rendered, entry.response, idx)
                    self._record(request, result)
                    return result
        raise ProviderError(
            f"no transcript entry matches agent={request.agent_name} tag={request.tag}",
            code="NO_MATCHING_ENTRY",
            detail={"agent": request.agent_name, "tag": request.tag,
                    "rendered_head": rendered[:400]})

    def _result(self, request: CompletionRequest, rendered: str,
                text: str, idx: int) -> CompletionResult:
        if len(text) > request.max_output_chars:
            raise ProviderError(
                f"response length {len(text)} exceeds max_output_chars "
                f"{request.max_output_chars}", code="OUTPUT_TRUNCATED",
                detail={"truncated": text[:request.max_output_chars]})
        return CompletionResult(
            text=text,
            usage=Usage(prompt_chars=len(rendered), completion_chars=len(text)),
            provider_id=self.provider_id, entry_index=idx)

    def _record(self, request: CompletionRequest, result: CompletionResult) -> None:
        if self.event_sink is not None:
            self.event_sink("PROVIDER_CALL", provider_call_payload(request, result))


class HttpProvider:
    """Live provider speaking the common /chat/completions JSON shape."""

    def __init__(self, base_url: str, model: str, auth_token_env: str = "",
                 timeout_seconds: float = 60.0, event_sink: EventSink | None = None):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.auth_token_env = auth_token_env
        self.timeout_seconds = timeout_seconds
        self.event_sink = event_sink
        self.provider_id = f"http:{model}"

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.auth_token_env:
            token = os.environ.get(self.auth_token_env, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers

    def _wire_messages(self, request: CompletionRequest) -> list[dict]:
        wire = []
        for msg in request.messages:
            content = []
            for part in msg.parts:
                if part.kind == "text":
                    content.append({"type": "text", "text": part.value})
                else:
                    content.append({"type": "image_url", "image_url": {"url": part.value}})
            wire.append({"role": msg.role.value.lower(), "content": content})
        return wire

    def complete(self, request: CompletionRequest) -> CompletionResult:
        import httpx

        body = {
            "model": self.model,
            "messages": self._wire_messages(request),
            "temperature": request.temperature,
        }
        try:
            resp = httpx.post(f"{self.base_url}/chat/completions", json=body,
                              headers=self._headers(), timeout=self.timeout_seconds)
            resp.raise_for_status()
            data = resp.json()
            text = data["choices"][0]["message"]["content"]
        except Exception as exc:
            raise ProviderError(f"remote completion failed: {exc}", code="REMOTE_FAILURE")
        if len(text) > request.max_output_chars:
            raise ProviderError("response hit max_output_chars", code="OUTPUT_TRUNCATED",
                                detail={"truncated": text[:request.max_output_chars]})
        rendered = render_request_text(request)
        result = CompletionResult(
            text=text,
            usage=Usage(prompt_chars=len(rendered), completion_chars=len(text)),
            provider_id=self.provider_id)
        if self.event_sink is not None:
            self.event_sink("PROVIDER_CALL", provider_call_payload(request, result))
        return result


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 1
    backoff_seconds: tuple[float, ...] = ()

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")


def with_retry(provider, request: CompletionRequest, policy: RetryPolicy,
               sleep=time.sleep) -> CompletionResult:
    """Retry transient remote failures; scripted providers are never retried
    (their responses are deterministic, so a retry could only desynchronize
    transcript consumption)."""
    if isinstance(provider, ScriptedProvider):
        return provider.complete(request)
    last: ProviderError | None = None
    for attempt in range(policy.max_attempts):
        try:
            return provider.complete(request)
        except ProviderError as exc:
            if exc.code != "REMOTE_FAILURE":
                raise
            last = exc
            if attempt + 1 < policy.max_attempts:
                schedule = policy.backoff_seconds
                delay = schedule[min(attempt, len(schedule) - 1)] if schedule else 0.0
                if delay:
                    sleep(delay)
    raise ProviderError(f"remote failed after {policy.max_attempts} attempts: {last}",
                        code="REMOTE_FAILURE", detail=last)


def provider_call_payload(request: CompletionRequest, result: CompletionResult) -> dict:
    """The PROVIDER_CALL event payload: everything needed to re-prime provider
    state and replay an interrupted work unit from the log alone."""
    payload = {
        "agent": request.agent_name,
        "tag": request.tag,
        "prompt_chars": result.usage.prompt_chars,
        "completion_chars": result.usage.completion_chars,
        "provider_id": result.provider_id,
        "response": result.text,
    }
    if result.entry_index is not None:
        payload["entry_index"] = result.entry_index
    return payload


def usage_totals(events: Iterable[dict]) -> dict:
    """Sum prompt/completion chars per agent over PROVIDER_CALL events.

    Accepts raw event dicts (as read from an events.log). Returns
    ``{"agents": {name: {"prompt_chars": .., "completion_chars": .., "calls": ..}},
    "total": {...}}``.
    """
    agents: dict[str, dict] = {}
    total = {"prompt_chars": 0, "completion_chars": 0, "calls": 0}
    for ev in events:
        if ev.get("kind") != "PROVIDER_CALL":
            continue
        p = ev.get("payload", {})
        row = agents.setdefault(p.get("agent", "?"),
                                {"prompt_chars": 0, "completion_chars": 0, "calls": 0})
        row["prompt_chars"] += int(p.get("prompt_chars", 0))
        row["completion_chars"] += int(p.get("completion_chars", 0))
        row["calls"] += 1
        total["prompt_chars"] += int(p.get("prompt_chars", 0))
        total["completion_chars"] += int(p.get("completion_chars", 0))
        total["calls"] += 1
    return {"agents": agents, "total": total}
