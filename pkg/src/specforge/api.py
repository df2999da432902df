"""HTTP + server-push API over the runs directory.

Every read endpoint is a pure projection of a run's event log; the only
mutations are starting a run, stepping it, and answering an intervention
(where concurrent answers race and exactly one wins, the loser seeing 409).
The event stream replays history from ``?from=<seq>`` then tails the live
log, one SSE message per event keyed by its sequence number, so a client
that reconnects with its last seq never sees a duplicate.

All payloads carry api_version 1.
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Query, Request
from fastapi.responses import FileResponse, StreamingResponse
from pydantic import BaseModel

from .config import RunConfig, load_config
from .errors import RunError, SpecForgeError
from .events import TERMINAL_KINDS
from .orchestrator import Orchestrator, fold
from .patcher import LEVEL_EXTENSIONS, CodeLevel

API_VERSION = 1
POLL_SECONDS = 0.15


class AnswerBody(BaseModel):
    answer: str


class StartBody(BaseModel):
    bundle_path: str
    config_path: str
    run_id: str | None = None


def create_app(runs_root: Path, drive: bool = False, token: str | None = None,
               static_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="specforge", version=str(API_VERSION))
    orch = Orchestrator(runs_root)
    app.state.orchestrator = orch
    app.state.driver_task = None

    def auth(request: Request) -> None:
        if token is None:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="bad or missing token")

    def run_or_404(run_id: str):
        log = orch.log(run_id)
        if not log.exists():
            raise HTTPException(status_code=404, detail=f"no run {run_id}")
        try:
            return log.read()
        except RunError as exc:
            raise HTTPException(status_code=500, detail=str(exc))

    def summary(run_id: str, records) -> dict:
        state = fold(records)
        metrics = dict(state.last_event["payload"].get("metrics", {})) \
            if state.terminal() else {}
        if not metrics:
            from .orchestrator import compute_metrics_from_events
            metrics = compute_metrics_from_events(records)
        return {
            "api_version": API_VERSION,
            "run_id": run_id,
            "phase": state.phase(),
            "current_subfunction": state.current_subfunction(),
            "pending_intervention": state.pending_intervention is not None,
            "pending_intervention_id": state.pending_intervention,
            "events": state.seq,
            "metrics": metrics,
        }

    @app.get("/runs")
    def list_runs(_=Depends(auth)):
        out = []
        for run_id in orch.list_runs():
            try:
                out.append(summary(run_id, orch.log(run_id).read()))
            except RunError:
                out.append({"api_version": API_VERSION, "run_id": run_id,
                            "phase": "CORRUPT"})
        return {"api_version": API_VERSION, "runs": out}

    @app.get("/runs/{run_id}")
    def get_run(run_id: str, _=Depends(auth)):
        return summary(run_id, run_or_404(run_id))

    @app.get("/runs/{run_id}/plan")
    def get_plan(run_id: str, _=Depends(auth)):
        state = fold(run_or_404(run_id))
        if state.plan is None:
            raise HTTPException(status_code=404, detail="no plan yet")
        return {"api_version": API_VERSION, "plan": state.plan.to_json()}

    @app.get("/runs/{run_id}/specs/{name}")
    def get_spec(run_id: str, name: str, _=Depends(auth)):
        state = fold(run_or_404(run_id))
        spec = state.specs.get(name)
        if spec is None:
            raise HTTPException(status_code=404, detail=f"no spec for {name}")
        return {"api_version": API_VERSION, "spec": spec.to_json()}

    @app.get("/runs/{run_id}/source/{level}")
    def get_source(run_id: str, level: str, _=Depends(auth)):
        state = fold(run_or_404(run_id))
        try:
            lvl = CodeLevel(level.upper())
        except ValueError:
            raise HTTPException(status_code=404, detail=f"no level {level}")
        source = state.sources.get(lvl.value)
        if source is None:
            raise HTTPException(status_code=404, detail=f"no {lvl.value} source yet")
        return {"api_version": API_VERSION, "level": lvl.value,
                "extension": LEVEL_EXTENSIONS[lvl], "text": source.text}

    @app.get("/runs/{run_id}/interventions")
    def get_interventions(run_id: str, _=Depends(auth)):
        state = fold(run_or_404(run_id))
        return {"api_version": API_VERSION,
                "interventions": [req.to_json()
                                  for req in state.interventions.values()]}

    @app.post("/runs/{run_id}/interventions/{request_id}/answer")
    def post_answer(run_id: str, request_id: str, body: AnswerBody, _=Depends(auth)):
        run_or_404(run_id)
        try:
            event = orch.answer_intervention(run_id, request_id, body.answer)
        except RunError as exc:
            if exc.code == "ALREADY_ANSWERED":
                raise HTTPException(status_code=409, detail=str(exc))
            if exc.code == "UNKNOWN_REQUEST":
                raise HTTPException(status_code=404, detail=str(exc))
            raise HTTPException(status_code=400, detail=str(exc))
        return {"api_version": API_VERSION, "answered": request_id,
                "seq": event["seq"]}

    @app.post("/runs")
    def post_run(body: StartBody, _=Depends(auth)):
        try:
            config = load_config(body.config_path)
            run_id = orch.start_run(body.bundle_path, config, run_id=body.run_id)
        except SpecForgeError as exc:
            raise HTTPException(status_code=400, detail=f"[{exc.code}] {exc}")
        return {"api_version": API_VERSION, "run_id": run_id}

    @app.post("/runs/{run_id}/step")
    def post_step(run_id: str, _=Depends(auth)):
        run_or_404(run_id)
        try:
            events = orch.step(run_id)
        except RunError as exc:
            if exc.code == "BLOCKED_ON_INTERVENTION":
                raise HTTPException(status_code=409, detail=str(exc))
            raise HTTPException(status_code=400, detail=f"[{exc.code}] {exc}")
        return {"api_version": API_VERSION, "events": events}

    @app.get("/runs/{run_id}/events")
    async def stream_events(run_id: str, request: Request,
                            from_seq: int = Query(1, alias="from"),
                            _=Depends(auth)):
        run_or_404(run_id)
        log = orch.log(run_id)

        async def generate():
            next_seq = max(1, from_seq)
            terminal_seen = False
            while not terminal_seen:
                if await request.is_disconnected():
                    return
                records = await asyncio.to_thread(log.read, next_seq)
                for rec in records:
                    yield (f"id: {rec['seq']}\n"
                           f"event: run-event\n"
                           f"data: {json.dumps(rec, sort_keys=True)}\n\n")
                    next_seq = rec["seq"] + 1
                    if rec["kind"] in TERMINAL_KINDS:
                        terminal_seen = True
                if not terminal_seen:
                    await asyncio.sleep(POLL_SECONDS)
            yield "event: stream-end\ndata: {}\n\n"

        return StreamingResponse(generate(), media_type="text/event-stream",
                                 headers={"Cache-Control": "no-cache",
                                          "X-Accel-Buffering": "no"})

    if static_dir is not None and static_dir.is_dir():
        # index.html loads its modules from dist/, so both get routes here.
        @app.get("/")
        def index():
            return FileResponse(static_dir / "index.html")

        @app.get("/dist/{path:path}")
        def dist_assets(path: str):
            full = (static_dir / "dist" / path).resolve()
            if not str(full).startswith(str(static_dir.resolve())) \
                    or not full.is_file():
                raise HTTPException(status_code=404)
            return FileResponse(full)

    if drive:
        @app.on_event("startup")
        async def start_driver():
            async def drive_loop():
                while True:
                    for run_id in orch.list_runs():
                        try:
                            state = fold(orch.log(run_id).read())
                            if state.terminal() or state.pending_intervention:
                                continue
                            await asyncio.to_thread(orch.step, run_id)
                        except SpecForgeError:
                            continue
                    await asyncio.sleep(POLL_SECONDS)
            app.state.driver_task = asyncio.create_task(drive_loop())

        @app.on_event("shutdown")
        async def stop_driver():
            if app.state.driver_task is not None:
                app.state.driver_task.cancel()

    return app
