import json

import pytest

from specforge.config import RunConfig, load_config, validate_config
from specforge.errors import RunError
from specforge.events import EventLog, payload_hash, strip_timestamps


def test_append_assigns_gapless_seq(tmp_path):
    log = EventLog(tmp_path / "events.log")
    e1 = log.append("RUN_STARTED", {"run_id": "r"})
    e2 = log.append("SECTION_SUMMARIZED", {"section_id": "s1", "summary_text": "x"})
    assert (e1.seq, e2.seq) == (1, 2)
    assert [ev["seq"] for ev in log.read()] == [1, 2]


def test_unknown_kind_rejected(tmp_path):
    log = EventLog(tmp_path / "events.log")
    with pytest.raises(ValueError):
        log.append("NOT_A_KIND", {})


def test_seq_gap_is_corrupt(tmp_path):
    log = EventLog(tmp_path / "events.log")
    log.append("RUN_STARTED", {"run_id": "r"})
    rec = {"seq": 3, "ts": 0, "kind": "RUN_COMPLETED", "payload": {},
           "payload_hash": payload_hash("RUN_COMPLETED", {})}
    with (tmp_path / "events.log").open("a") as fh:
        fh.write(json.dumps(rec) + "\n")
    with pytest.raises(RunError) as err:
        log.read()
    assert err.value.code == "LOG_CORRUPT"


def test_tampered_payload_is_corrupt(tmp_path):
    log = EventLog(tmp_path / "events.log")
    log.append("RUN_STARTED", {"run_id": "r"})
    lines = (tmp_path / "events.log").read_text().splitlines()
    rec = json.loads(lines[0])
    rec["payload"]["run_id"] = "tampered"
    (tmp_path / "events.log").write_text(json.dumps(rec) + "\n")
    with pytest.raises(RunError) as err:
        log.read()
    assert err.value.code == "LOG_CORRUPT"


def test_hash_excludes_timestamp():
    assert payload_hash("RUN_STARTED", {"a": 1}) == payload_hash("RUN_STARTED", {"a": 1})
    recs = [{"seq": 1, "ts": 123.4, "kind": "K", "payload": {}}]
    assert "ts" not in strip_timestamps(recs)[0]


def test_tail_effects(tmp_path):
    log = EventLog(tmp_path / "events.log")
    log.append("RUN_STARTED", {"run_id": "r"})
    log.append("PROVIDER_CALL", {"agent": "Coder", "tag": "t", "prompt_chars": 1,
                                 "completion_chars": 1, "provider_id": "s",
                                 "response": "x"})
    log.append("PATCH_APPLIED", {"level": "SCRIPT", "name": "f", "body": "b",
                                 "version": 1, "content_hash": "h"})
    tail = log.tail_effects()
    assert [t["kind"] for t in tail] == ["PROVIDER_CALL", "PATCH_APPLIED"]
    log.append("CODING_ATTEMPT", {"name": "f", "level": "SCRIPT", "loop_id": 1,
                                  "attempt": 1, "version": 1, "passed": True})
    assert log.tail_effects() == []


def test_config_defaults_and_validation(fixtures_dir):
    config = load_config(fixtures_dir / "configs" / "toy_cipher.json")
    assert config.target_name == "encrypt_block"
    assert config.budgets.max_attempts_per_level == 10
    validate_config(config)


def test_config_zero_budget_invalid():
    config = RunConfig.from_json({
        "target_name": "t",
        "budgets": {"max_attempts_per_level": 0},
        "provider": {"kind": "scripted", "transcript_path": "x.jsonl"}})
    with pytest.raises(RunError) as err:
        validate_config(config)
    assert err.value.code == "CONFIG_INVALID"


def test_config_bad_noise_stage():
    config = RunConfig.from_json({
        "target_name": "t", "noise_stage": "EVERYWHERE",
        "provider": {"kind": "scripted", "transcript_path": "x.jsonl"}})
    with pytest.raises(RunError):
        validate_config(config)


def test_config_scripted_needs_transcript():
    config = RunConfig.from_json({"target_name": "t",
                                  "provider": {"kind": "scripted"}})
    with pytest.raises(RunError):
        validate_config(config)


def test_config_roundtrip(fixtures_dir):
    config = load_config(fixtures_dir / "configs" / "full_route_demo.json")
    again = RunConfig.from_json(config.to_json())
    assert again == config
