"""Append-only run event log.

The log is the source of truth: run state is a pure fold over it, metrics
are projections of it, and resuming a run replays it. Each line is one JSON
record ``{"seq", "ts", "kind", "payload", "payload_hash"}``. Sequence numbers
are gapless from 1, appends are atomic and serialized through a file lock,
and the payload hash covers (kind, payload) only, never timestamps, so two
replays of the same fixture hash identically.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from filelock import FileLock

from .errors import RunError

# One in-process lock per log path: FileLock serializes across processes,
# this serializes the threads sharing one process (API handlers).
_THREAD_LOCKS: dict[str, threading.RLock] = {}
_REGISTRY_LOCK = threading.Lock()


def _thread_lock(path: Path) -> threading.RLock:
    key = str(path)
    with _REGISTRY_LOCK:
        if key not in _THREAD_LOCKS:
            _THREAD_LOCKS[key] = threading.RLock()
        return _THREAD_LOCKS[key]

EVENT_KINDS = (
    "RUN_STARTED", "SECTION_SUMMARIZED", "PLAN_ACCEPTED", "SPEC_ACCEPTED",
    "CODING_ATTEMPT", "LEVEL_ACCEPTED", "LEVEL_EXHAUSTED", "PROVIDER_CALL",
    "PATCH_APPLIED", "REFLECTION_DECIDED", "INTERVENTION_REQUESTED",
    "INTERVENTION_ANSWERED", "PROMPT_OPTIMIZED", "NOISE_INJECTED", "HLS_LINTED",
    "HLS_OPTIMIZED", "SYNTH_INVOKED", "RUN_COMPLETED", "RUN_FAILED",
)

# Events that only journal effects mid-unit; every work unit ends with a
# non-effect event, which is what makes any log prefix resumable.
EFFECT_KINDS = ("PROVIDER_CALL", "PATCH_APPLIED")

TERMINAL_KINDS = ("RUN_COMPLETED", "RUN_FAILED")


def payload_hash(kind: str, payload: dict) -> str:
    canon = json.dumps({"kind": kind, "payload": payload},
                       sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class RunEvent:
    seq: int
    ts: float
    kind: str
    payload: dict

    def to_json(self) -> dict:
        return {"seq": self.seq, "ts": self.ts, "kind": self.kind,
                "payload": self.payload,
                "payload_hash": payload_hash(self.kind, self.payload)}


class EventLog:
    """One run's append-only log file plus its writer lock."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self._lock = FileLock(str(self.path) + ".lock")
        self._local = _thread_lock(self.path)

    def exists(self) -> bool:
        return self.path.is_file()

    @contextmanager
    def mutate(self):
        """Hold the writer locks across a read-check-append sequence, so a
        race (two operators answering the same request) has exactly one
        winner."""
        with self._local, self._lock:
            yield self

    def append(self, kind: str, payload: dict) -> RunEvent:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind: {kind}")
        with self._local, self._lock:
            last = self._last_seq()
            event = RunEvent(seq=last + 1, ts=time.time(), kind=kind, payload=payload)
            line = json.dumps(event.to_json(), sort_keys=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
            return event

    def _last_seq(self) -> int:
        if not self.path.is_file():
            return 0
        last = 0
        with self.path.open("r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    last = json.loads(line)["seq"]
        return last

    def read(self, from_seq: int = 1) -> list[dict]:
        """Read verified event records starting at ``from_seq``."""
        return [ev for ev in self.iter_all() if ev["seq"] >= from_seq]

    def iter_all(self) -> Iterator[dict]:
        """Yield every record, verifying gaplessness and payload hashes."""
        if not self.path.is_file():
            return
        expected = 1
        with self.path.open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise RunError(f"events.log line {lineno} unreadable: {exc}",
                                   code="LOG_CORRUPT")
                if rec.get("seq") != expected:
                    raise RunError(f"events.log seq gap: expected {expected}, "
                                   f"found {rec.get('seq')}", code="LOG_CORRUPT")
                if rec.get("payload_hash") != payload_hash(rec["kind"], rec["payload"]):
                    raise RunError(f"events.log seq {expected}: payload hash mismatch",
                                   code="LOG_CORRUPT")
                expected += 1
                yield rec

    def tail_effects(self, events: list[dict] | None = None) -> list[dict]:
        """The trailing run of effect events (an interrupted unit's journal)."""
        evs = events if events is not None else self.read()
        tail: list[dict] = []
        for rec in reversed(evs):
            if rec["kind"] in EFFECT_KINDS:
                tail.append(rec)
            else:
                break
        tail.reverse()
        return tail


def strip_timestamps(records: Iterable[dict]) -> list[dict]:
    """For byte-comparison of logs across runs: drop the one nondeterministic field."""
    out = []
    for rec in records:
        clean = dict(rec)
        clean.pop("ts", None)
        out.append(clean)
    return out
