from __future__ import annotations

import sys
from pathlib import Path

import pytest

from specforge.config import load_config
from specforge.orchestrator import Orchestrator

REPO = Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"

sys.path.insert(0, str(Path(__file__).resolve().parent))


class QueueProvider:
    """Unit-test double: serves queued responses in order, records requests."""

    provider_id = "queued"

    def __init__(self, responses):
        self.responses = list(responses)
        self.requests = []

    def complete(self, request):
        from specforge.providers import CompletionResult, Usage, render_request_text
        self.requests.append(request)
        if not self.responses:
            raise AssertionError(f"no queued response for {request.agent_name} "
                                 f"tag={request.tag}")
        text = self.responses.pop(0)
        if callable(text):
            text = text(request)
        return CompletionResult(
            text=text,
            usage=Usage(len(render_request_text(request)), len(text)),
            provider_id=self.provider_id)


@pytest.fixture
def queue_provider():
    return QueueProvider


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def toy_doc():
    from specforge.document import load_manifest
    return load_manifest(FIXTURES / "toy_cipher")


def run_fixture(tmp_root: Path, config_name: str, bundle: str, run_id: str,
                answer_file: str | None = None):
    """Drive one scripted fixture to completion, answering one escalation."""
    orch = Orchestrator(tmp_root)
    config = load_config(FIXTURES / "configs" / config_name)
    orch.start_run(FIXTURES / bundle, config, run_id=run_id)
    state = orch.run_to_completion(run_id, max_steps=2000)
    if state.pending_intervention and answer_file:
        answer = (FIXTURES / answer_file).read_text(encoding="utf-8")
        orch.answer_intervention(run_id, state.pending_intervention, answer)
        state = orch.run_to_completion(run_id, max_steps=2000)
    return orch, state


@pytest.fixture(scope="session")
def toy_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("toy-run")
    orch, state = run_fixture(root, "toy_cipher.json", "toy_cipher", "toy")
    return {"orch": orch, "state": state, "run_id": "toy",
            "events": orch.log("toy").read()}


@pytest.fixture(scope="session")
def noise_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("noise-run")
    orch, state = run_fixture(root, "toy_cipher_noise.json", "toy_cipher", "noise")
    return {"orch": orch, "state": state, "run_id": "noise",
            "events": orch.log("noise").read()}


@pytest.fixture(scope="session")
def demo_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("demo-run")
    orch, state = run_fixture(root, "full_route_demo.json", "full_route_demo",
                              "demo", answer_file="full_route_demo/answer.txt")
    return {"orch": orch, "state": state, "run_id": "demo",
            "events": orch.log("demo").read()}
