import json

import pytest

from specforge.cli import main

from conftest import FIXTURES


def test_run_toy_fixture_exit_zero(tmp_path, capsys):
    code = main(["--runs-root", str(tmp_path), "run",
                 str(FIXTURES / "toy_cipher"),
                 str(FIXTURES / "configs" / "toy_cipher.json"),
                 "--run-id", "cli-toy"])
    out = capsys.readouterr().out
    assert code == 0
    assert '"correct": true' in out


def test_run_bad_config_path_usage_error(tmp_path, capsys):
    code = main(["--runs-root", str(tmp_path), "run",
                 str(FIXTURES / "toy_cipher"), "/does/not/exist.json"])
    assert code == 2


def test_blocked_run_exits_3_and_prints_questions(tmp_path, capsys):
    code = main(["--runs-root", str(tmp_path), "run",
                 str(FIXTURES / "full_route_demo"),
                 str(FIXTURES / "configs" / "full_route_demo.json"),
                 "--run-id", "cli-demo"])
    out = capsys.readouterr().out
    assert code == 3
    assert "question:" in out
    assert "blocked on intervention" in out


def test_answer_then_resume_completes(tmp_path, capsys):
    main(["--runs-root", str(tmp_path), "run",
          str(FIXTURES / "full_route_demo"),
          str(FIXTURES / "configs" / "full_route_demo.json"),
          "--run-id", "cli-demo"])
    out = capsys.readouterr().out
    request_id = next(line.split()[-1] for line in out.splitlines()
                      if line.startswith("blocked on intervention"))
    code = main(["--runs-root", str(tmp_path), "answer", "cli-demo", request_id,
                 "--file", str(FIXTURES / "full_route_demo" / "answer.txt")])
    assert code == 0
    code = main(["--runs-root", str(tmp_path), "resume", "cli-demo"])
    out = capsys.readouterr().out
    assert code == 0
    assert '"correct": true' in out

    # repeated answer -> error exit
    code = main(["--runs-root", str(tmp_path), "answer", "cli-demo", request_id,
                 "again"])
    assert code == 1
    # unknown request id -> error exit
    code = main(["--runs-root", str(tmp_path), "answer", "cli-demo", "iv-nope", "x"])
    assert code == 1


def test_status_and_metrics_and_replay(tmp_path, capsys):
    main(["--runs-root", str(tmp_path), "run", str(FIXTURES / "toy_cipher"),
          str(FIXTURES / "configs" / "toy_cipher.json"), "--run-id", "m1"])
    capsys.readouterr()

    assert main(["--runs-root", str(tmp_path), "status", "m1"]) == 0
    status = json.loads(capsys.readouterr().out)
    assert status["phase"] == "COMPLETED"

    assert main(["--runs-root", str(tmp_path), "metrics", "m1"]) == 0
    table = capsys.readouterr().out
    assert "m1" in table and "yes" in table

    assert main(["--runs-root", str(tmp_path), "replay", "m1"]) == 0
    replay = json.loads(capsys.readouterr().out)
    assert replay["log_integrity"] == "ok"
    assert replay["events"] > 100


def test_metrics_three_runs_stable_order(tmp_path, capsys):
    for rid in ("r3", "r1", "r2"):
        main(["--runs-root", str(tmp_path), "run", str(FIXTURES / "toy_cipher"),
              str(FIXTURES / "configs" / "toy_cipher.json"), "--run-id", rid])
    capsys.readouterr()
    assert main(["--runs-root", str(tmp_path), "metrics"]) == 0
    lines = [l.split()[0] for l in capsys.readouterr().out.splitlines()[1:] if l]
    assert lines == ["r1", "r2", "r3"]


def test_lint_command(tmp_path, capsys):
    dirty = tmp_path / "dirty.cpp"
    dirty.write_text("#include <cstdint>\nuint16_t f(uint16_t x) {\n"
                     "    int y = 2;\n    return (uint16_t)(x + y);\n}\n")
    assert main(["lint", str(dirty)]) == 1
    out = capsys.readouterr().out
    assert "HLS004" in out

    clean = tmp_path / "clean.cpp"
    clean.write_text("#include <cstdint>\nuint16_t f(uint16_t x) {\n"
                     "    return (uint16_t)(x + 2);\n}\n")
    assert main(["lint", str(clean)]) == 0


def test_single_shot_command(tmp_path, capsys):
    code = main(["--runs-root", str(tmp_path), "single-shot",
                 str(FIXTURES / "toy_cipher"),
                 str(FIXTURES / "configs" / "single_shot.json")])
    assert code == 0
    assert '"correct": true' in capsys.readouterr().out


def test_replay_detects_corruption(tmp_path, capsys):
    main(["--runs-root", str(tmp_path), "run", str(FIXTURES / "toy_cipher"),
          str(FIXTURES / "configs" / "toy_cipher.json"), "--run-id", "c1"])
    capsys.readouterr()
    log_path = tmp_path / "c1" / "events.log"
    lines = log_path.read_text().splitlines()
    del lines[5]  # introduce a seq gap
    log_path.write_text("\n".join(lines) + "\n")
    assert main(["--runs-root", str(tmp_path), "replay", "c1"]) == 1
    assert "log corrupt" in capsys.readouterr().err
