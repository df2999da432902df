import json

import httpx
import pytest

from specforge.errors import ProviderError
from specforge.providers import (ChatMessage, CompletionRequest, HttpProvider, Part,
                                 RetryPolicy, Role, ScriptedProvider, Transcript,
                                 TranscriptEntry, render_request_text, usage_totals,
                                 with_retry)

from oracles.log_summer import summarize


def req(agent="Coder", text="hello", tag="t"):
    return CompletionRequest(
        agent_name=agent,
        messages=(ChatMessage(role=Role.USER, parts=(Part.text(text),)),),
        tag=tag)


def scripted(entries):
    return ScriptedProvider(Transcript(
        [TranscriptEntry(agent=a, match=tuple(m), response=r, max_uses=u)
         for a, m, r, u in entries]))


def test_first_matching_entry_wins():
    provider = scripted([
        ("Coder", ["alpha"], "first", 1),
        ("Coder", [], "fallback", None),
    ])
    assert provider.complete(req(text="alpha beta")).text == "first"
    assert provider.complete(req(text="alpha beta")).text == "fallback"


def test_no_matching_entry():
    provider = scripted([("Verifier", [], "x", None)])
    with pytest.raises(ProviderError) as err:
        provider.complete(req(agent="Coder"))
    assert err.value.code == "NO_MATCHING_ENTRY"


def test_budget_exhaustion_falls_through():
    provider = scripted([
        ("Coder", [], "one", 1),
        ("Coder", [], "two", 1),
    ])
    assert provider.complete(req()).text == "one"
    assert provider.complete(req()).text == "two"
    with pytest.raises(ProviderError):
        provider.complete(req())


def test_determinism_same_sequence():
    entries = [("Coder", ["a"], "ra", 1), ("Coder", [], "rb", None)]
    requests = [req(text="a"), req(text="b"), req(text="a again")]
    provider1 = scripted(entries)
    out1 = [provider1.complete(r).text for r in requests]
    provider2 = scripted(entries)
    out2 = [provider2.complete(r).text for r in requests]
    assert out1 == out2 == ["ra", "rb", "rb"]


def test_usage_counts_are_chars():
    provider = scripted([("Coder", [], "12345", None)])
    result = provider.complete(req(text="abc"))
    assert result.usage.completion_chars == 5
    assert result.usage.prompt_chars == len(render_request_text(req(text="abc")))


def test_output_truncated():
    provider = scripted([("Coder", [], "x" * 50, None)])
    request = CompletionRequest(
        agent_name="Coder",
        messages=(ChatMessage(role=Role.USER, parts=(Part.text("q"),)),),
        max_output_chars=10)
    with pytest.raises(ProviderError) as err:
        provider.complete(request)
    assert err.value.code == "OUTPUT_TRUNCATED"


def test_transcript_load_rejects_bad_agent(tmp_path):
    path = tmp_path / "t.jsonl"
    path.write_text(json.dumps({"agent": "Nobody", "match": [], "response": "x"}))
    with pytest.raises(ProviderError):
        Transcript.load(path)


def test_transcript_multiline_response(tmp_path):
    path = tmp_path / "t.jsonl"
    path.write_text(json.dumps({"agent": "Coder", "match": [],
                                "response": "line1\nline2", "max_uses": 1}))
    provider = ScriptedProvider(Transcript.load(path))
    assert provider.complete(req()).text == "line1\nline2"


def test_prime_consumption_restores_budgets():
    entries = [("Coder", [], "one", 1), ("Coder", [], "two", 1)]
    provider = scripted(entries)
    provider.prime_consumption([0])
    assert provider.complete(req()).text == "two"


def test_scripted_never_retried():
    provider = scripted([("Coder", [], "only", 1)])
    result = with_retry(provider, req(), RetryPolicy(max_attempts=5))
    assert result.text == "only"
    assert provider.transcript.entries[0].uses == 1


class FlakyRemote:
    def __init__(self, failures):
        self.failures = failures
        self.calls = 0

    def complete(self, request):
        from specforge.providers import CompletionResult, Usage
        self.calls += 1
        if self.calls <= self.failures:
            raise ProviderError("boom", code="REMOTE_FAILURE")
        return CompletionResult("ok", Usage(1, 2), "http:test")


def test_retry_exhaustion():
    remote = FlakyRemote(failures=99)
    with pytest.raises(ProviderError) as err:
        with_retry(remote, req(), RetryPolicy(max_attempts=1), sleep=lambda s: None)
    assert err.value.code == "REMOTE_FAILURE"
    assert remote.calls == 1


def test_retry_then_success():
    remote = FlakyRemote(failures=1)
    result = with_retry(remote, req(), RetryPolicy(max_attempts=2), sleep=lambda s: None)
    assert result.text == "ok"
    assert remote.calls == 2


def test_http_provider_wire_shape(monkeypatch):
    captured = {}

    def fake_post(url, json=None, headers=None, timeout=None):
        captured["url"] = url
        captured["json"] = json
        request = httpx.Request("POST", url)
        return httpx.Response(
            200, request=request,
            json={"choices": [{"message": {"content": "remote says hi"}}]})

    monkeypatch.setattr(httpx, "post", fake_post)
    provider = HttpProvider(base_url="http://llm.example/v1", model="m1")
    result = provider.complete(req(text="ping"))
    assert result.text == "remote says hi"
    assert captured["url"].endswith("/chat/completions")
    assert captured["json"]["model"] == "m1"
    assert captured["json"]["messages"][0]["content"][0]["text"] == "ping"


def test_usage_totals_grouping():
    events = [
        {"kind": "PROVIDER_CALL", "payload": {"agent": "Coder", "prompt_chars": 10,
                                              "completion_chars": 5}},
        {"kind": "PROVIDER_CALL", "payload": {"agent": "Coder", "prompt_chars": 3,
                                              "completion_chars": 7}},
        {"kind": "OTHER", "payload": {}},
    ]
    totals = usage_totals(events)
    assert totals["agents"]["Coder"] == {"prompt_chars": 13, "completion_chars": 12,
                                         "calls": 2}
    assert totals["total"]["prompt_chars"] == 13


def test_usage_totals_empty():
    totals = usage_totals([])
    assert totals["total"] == {"prompt_chars": 0, "completion_chars": 0, "calls": 0}


def test_usage_totals_match_independent_summer(demo_run):
    events = demo_run["events"]
    engine = usage_totals(events)
    oracle = summarize(events)["usage"]
    assert engine["agents"] == oracle
