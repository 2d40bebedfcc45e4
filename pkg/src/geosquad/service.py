"""HTTP service consumed by the web UI: sessions, chat runs, SSE events.

Chat sessions are in-memory and ephemeral; benchmark traces live on disk
and are not served here.  Each run executes on a worker thread and pushes
JSON events {type: schedule|agent_start|tool_call|agent_done|verdict|final}
onto a queue drained by the SSE endpoint.
"""

from __future__ import annotations

import itertools
import json
import queue
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from .core import ExecutionTrace, TaskPrompt
from .engine import Engine
from .orchestrator import requests_plot, run_task
from .sandbox import REGIONS, SandboxSession
from .toolkit import AGENT_ROLES


@dataclass
class ChatSession:
    session_id: str
    history: list[dict] = field(default_factory=list)
    busy: bool = False
    sandbox_session: SandboxSession | None = None
    last_run_id: str | None = None


@dataclass
class RunState:
    run_id: str
    session_id: str
    events: "queue.Queue[dict | None]" = field(default_factory=queue.Queue)
    trace: ExecutionTrace | None = None


def extract_region(text: str) -> str:
    lowered = text.lower()
    for region in sorted(REGIONS):
        if region in lowered:
            return region
    return "all"


def make_chat_task(engine: Engine, run_id: str, text: str) -> TaskPrompt:
    for task in engine.tasks:
        if task.text == text:
            return task
    domain = "map" if requests_plot(text) else "database"
    return TaskPrompt(
        id=run_id, domain=domain, text=text, region=extract_region(text)
    )


def create_app(engine: Engine, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="geosquad")
    sessions: dict[str, ChatSession] = {}
    runs: dict[str, RunState] = {}
    lock = threading.Lock()
    session_counter = itertools.count(1)
    run_counter = itertools.count(1)
    pool = ThreadPoolExecutor(max_workers=engine.config.workers + 2)

    def _error(status: int, message: str) -> JSONResponse:
        return JSONResponse({"error": message}, status_code=status)

    @app.exception_handler(Exception)
    async def _internal_error(request: Request, exc: Exception):
        # a trace id in the body lets operators match client reports to logs
        trace_id = uuid.uuid4().hex[:12]
        print(f"internal error [{trace_id}] on {request.url.path}: {exc!r}")
        return JSONResponse(
            {"error": "internal error", "trace_id": trace_id}, status_code=500
        )

    @app.post("/api/sessions")
    def create_session():
        with lock:
            session_id = f"s{next(session_counter)}"
            sessions[session_id] = ChatSession(session_id=session_id)
        return {"session_id": session_id}

    @app.post("/api/chat")
    async def chat(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "body must be JSON")
        if not isinstance(body, dict) or not isinstance(body.get("text"), str):
            return _error(400, "body must carry session_id and text")
        text = body["text"].strip()
        session_id = body.get("session_id")
        if not text:
            return _error(400, "text must be nonempty")
        with lock:
            session = sessions.get(session_id)
            if session is None:
                return _error(404, f"unknown session {session_id}")
            if session.busy:
                return _error(409, "a run is already in progress for this session")
            run_id = f"r{next(run_counter)}"
            state = RunState(run_id=run_id, session_id=session_id)
            runs[run_id] = state
            session.busy = True
            session.last_run_id = run_id
            session.history.append({"role": "user", "text": text})

        task = make_chat_task(engine, run_id, text)

        def execute():
            def on_event(kind: str, payload: dict):
                state.events.put({"type": kind, **payload})

            try:
                trace, sandbox_session = run_task(
                    task,
                    engine.config.strategy,
                    engine.backend,
                    engine.config.backend,
                    engine.registry,
                    engine.sandbox,
                    prompt_dir=engine.config.prompt_dir,
                    on_event=on_event,
                )
                trace = ExecutionTrace(
                    task_id=run_id,
                    strategy=trace.strategy,
                    executed_steps=trace.executed_steps,
                    schedules=trace.schedules,
                    token_usage=trace.token_usage,
                    final_answer=trace.final_answer,
                    terminal=trace.terminal,
                )
                with lock:
                    state.trace = trace
                    session.sandbox_session = sandbox_session
                    session.history.append(
                        {"role": "assistant", "text": trace.final_answer}
                    )
            except Exception as error:  # surfaced to the stream, not lost
                state.events.put({"type": "final", "terminal": "error", "answer": str(error)})
            finally:
                with lock:
                    session.busy = False
                state.events.put(None)

        pool.submit(execute)
        return {"run_id": run_id}

    @app.get("/api/events/{run_id}")
    def events(run_id: str):
        state = runs.get(run_id)
        if state is None:
            return _error(404, f"unknown run {run_id}")

        def stream():
            while True:
                try:
                    event = state.events.get(timeout=60.0)
                except queue.Empty:
                    break
                if event is None:
                    break
                yield f"data: {json.dumps(event, sort_keys=True)}\n\n"

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.get("/api/map/{session_id}")
    def map_state(session_id: str):
        session = sessions.get(session_id)
        if session is None:
            return _error(404, f"unknown session {session_id}")
        if session.sandbox_session is None:
            return {"layers": [], "annotations": []}
        return session.sandbox_session.map_snapshot()

    @app.get("/api/traces/{run_id}")
    def trace(run_id: str):
        state = runs.get(run_id)
        if state is None or state.trace is None:
            return _error(404, f"no trace for run {run_id}")
        return state.trace.to_dict()

    @app.get("/api/agents")
    def agents():
        return {
            "agents": [
                {
                    "name": name,
                    "role": AGENT_ROLES.get(name, ""),
                    "tools": len(engine.registry.tools_for(name)),
                }
                for name in engine.registry.agents()
            ]
        }

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app
