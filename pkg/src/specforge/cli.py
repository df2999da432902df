"""Command-line operator surface.

Exit codes: 0 success (for `run`, RUN_COMPLETED with correct=true),
1 failure, 2 usage/config error, 3 run blocked on a pending intervention.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import RunConfig, load_config
from .errors import RunError, SpecForgeError
from .events import EventLog
from .hls import lint_for_hls, load_ruleset
from .orchestrator import Orchestrator, compute_metrics_from_events, fold
from .patcher import CodeLevel, make_source

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_BLOCKED = 3


def _orch(args) -> Orchestrator:
    return Orchestrator(Path(args.runs_root))


def _print_intervention(state) -> None:
    req = state.interventions[state.pending_intervention]
    print(f"blocked on intervention {req.request_id}")
    print(f"observations: {req.observations}")
    if req.attempts:
        print(f"attempts: {req.attempts}")
    for q in req.questions:
        print(f"question: {q}")
    print(f"answer with: specforge answer <run_id> {req.request_id} '<text>'")


def _drive(orch: Orchestrator, run_id: str, interactive: bool) -> int:
    while True:
        state = orch.run_to_completion(run_id)
        if state.terminal():
            break
        if state.pending_intervention:
            if not interactive:
                _print_intervention(state)
                return EXIT_BLOCKED
            req = state.interventions[state.pending_intervention]
            print(f"intervention {req.request_id} requested:")
            print(f"  observations: {req.observations}")
            for q in req.questions:
                print(f"  question: {q}")
            answer = input("answer> ").strip()
            if not answer:
                print("empty answer; leaving the run blocked")
                return EXIT_BLOCKED
            orch.answer_intervention(run_id, req.request_id, answer)
    payload = state.last_event["payload"]
    metrics = orch.compute_metrics(run_id)
    print(json.dumps({"run_id": run_id, "phase": state.phase(),
                      "correct": payload.get("correct"),
                      "n_interventions": metrics["n_interventions"],
                      "avg_coding": metrics["avg_coding"]}, indent=2))
    if state.last_event["kind"] == "RUN_COMPLETED" and payload.get("correct") is True:
        return EXIT_OK
    return EXIT_FAILURE


def cmd_run(args) -> int:
    orch = _orch(args)
    config = load_config(args.config)
    run_id = orch.start_run(args.bundle, config, run_id=args.run_id)
    print(f"started {run_id}")
    return _drive(orch, run_id, args.interactive)


def cmd_resume(args) -> int:
    orch = _orch(args)
    orch.resume(args.run_id)
    return _drive(orch, args.run_id, args.interactive)


def cmd_step(args) -> int:
    orch = _orch(args)
    for _ in range(args.n):
        events = orch.step(args.run_id)
        for ev in events:
            print(f"{ev['seq']} {ev['kind']}")
        if not events:
            break
    return EXIT_OK


def cmd_answer(args) -> int:
    orch = _orch(args)
    text = args.answer
    if args.file:
        text = Path(args.file).read_text(encoding="utf-8")
    if text is None:
        print("provide an answer string or --file", file=sys.stderr)
        return EXIT_USAGE
    orch.answer_intervention(args.run_id, args.request_id, text)
    print(f"answered {args.request_id}; run {args.run_id} is resumable")
    return EXIT_OK


def cmd_status(args) -> int:
    orch = _orch(args)
    state = orch.state(args.run_id)
    print(json.dumps({
        "run_id": args.run_id,
        "phase": state.phase(),
        "current_subfunction": state.current_subfunction(),
        "pending_intervention": state.pending_intervention,
        "events": state.seq,
        "metrics": orch.compute_metrics(args.run_id),
    }, indent=2))
    return EXIT_OK


def cmd_metrics(args) -> int:
    orch = _orch(args)
    run_ids = args.run_ids or orch.list_runs()
    rows = []
    for run_id in sorted(run_ids):
        try:
            m = orch.compute_metrics(run_id)
        except SpecForgeError as exc:
            print(f"{run_id}: unreadable ({exc})", file=sys.stderr)
            continue
        rows.append((run_id, m))
    print(f"{'run':24} {'correct':8} {'#intervention':14} {'#coding':8}")
    for run_id, m in rows:
        correct = {True: "yes", False: "no", None: "unknown"}[m["correct"]]
        print(f"{run_id:24} {correct:8} {m['n_interventions']:<14} "
              f"{m['avg_coding']:<8.2f}")
    return EXIT_OK


def cmd_lint(args) -> int:
    rules = load_ruleset(args.ruleset)
    text = Path(args.source).read_text(encoding="utf-8")
    report = lint_for_hls(make_source(CodeLevel.SYNTH, text), rules)
    for v in report.violations:
        print(f"{args.source}:{v.line}: [{v.severity}] {v.rule_id}: {v.excerpt}")
    print("clean" if report.clean else
          f"{sum(1 for v in report.violations if v.severity == 'BLOCKING')} "
          f"blocking violation(s)")
    return EXIT_OK if report.clean else EXIT_FAILURE


def cmd_replay(args) -> int:
    orch = _orch(args)
    log = EventLog(orch.run_dir(args.run_id) / "events.log")
    try:
        records = log.read()
    except RunError as exc:
        print(f"log corrupt: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    state = fold(records)
    print(json.dumps({
        "run_id": args.run_id, "events": len(records), "phase": state.phase(),
        "log_integrity": "ok",
        "metrics": compute_metrics_from_events(records),
    }, indent=2))
    return EXIT_OK


def cmd_single_shot(args) -> int:
    orch = _orch(args)
    config = load_config(args.config)
    run_id, correct = orch.single_shot(args.bundle, config, run_id=args.run_id)
    print(json.dumps({"run_id": run_id, "correct": correct}, indent=2))
    return EXIT_OK if correct else EXIT_FAILURE


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    static_dir = Path(args.static) if args.static else None
    app = create_app(Path(args.runs_root), drive=args.drive, token=args.token,
                     static_dir=static_dir)
    host, _, port = args.addr.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8400),
                log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specforge",
        description="Lower a specification document into verified, "
                    "synthesis-ready code.")
    parser.add_argument("--runs-root", default="runs",
                        help="directory holding run state (default: ./runs)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="start a run and drive it")
    p.add_argument("bundle")
    p.add_argument("config")
    p.add_argument("--run-id")
    p.add_argument("--interactive", action="store_true",
                   help="answer interventions at the terminal")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("resume", help="resume a run from its event log")
    p.add_argument("run_id")
    p.add_argument("--interactive", action="store_true")
    p.set_defaults(func=cmd_resume)

    p = sub.add_parser("step", help="advance a run by N work units")
    p.add_argument("run_id")
    p.add_argument("-n", type=int, default=1)
    p.set_defaults(func=cmd_step)

    p = sub.add_parser("answer", help="answer a pending intervention")
    p.add_argument("run_id")
    p.add_argument("request_id")
    p.add_argument("answer", nargs="?")
    p.add_argument("--file", help="read the answer text from a file")
    p.set_defaults(func=cmd_answer)

    p = sub.add_parser("status", help="show one run's phase and counters")
    p.add_argument("run_id")
    p.set_defaults(func=cmd_status)

    p = sub.add_parser("metrics", help="metrics table over runs")
    p.add_argument("run_ids", nargs="*")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("lint", help="synthesis-compatibility lint of one file")
    p.add_argument("source")
    p.add_argument("--ruleset")
    p.set_defaults(func=cmd_lint)

    p = sub.add_parser("replay", help="verify a log and print reconstructed state")
    p.add_argument("run_id")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("single-shot",
                       help="diagnostic: whole document, one completion, verify")
    p.add_argument("bundle")
    p.add_argument("config")
    p.add_argument("--run-id")
    p.set_defaults(func=cmd_single_shot)

    p = sub.add_parser("serve", help="HTTP API + event stream")
    p.add_argument("--addr", default="127.0.0.1:8400")
    p.add_argument("--drive", action="store_true",
                   help="also step non-blocked runs in the background")
    p.add_argument("--token", default=None, help="require this bearer token")
    p.add_argument("--static", default=None,
                   help="serve the dashboard bundle from this directory")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except RunError as exc:
        if exc.code == "BLOCKED_ON_INTERVENTION":
            print(f"blocked: {exc}", file=sys.stderr)
            return EXIT_BLOCKED
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_USAGE if exc.code == "CONFIG_INVALID" else EXIT_FAILURE
    except SpecForgeError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
