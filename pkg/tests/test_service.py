"""HTTP API contract: sessions, chat runs, SSE events, map, traces."""

import json

import pytest
from fastapi.testclient import TestClient

from geosquad.cli import main
from geosquad.config import EngineConfig, with_overrides
from geosquad.engine import build_engine
from geosquad.service import create_app


@pytest.fixture(scope="module")
def dataset_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("svc_ds")
    assert main(["gen", "--seed", "7", "--per-agent", "2", "--out", str(root / "d")]) == 0
    return root / "d"


@pytest.fixture(scope="module")
def engine(dataset_dir):
    config = with_overrides(
        EngineConfig(sandbox_seed=7), dataset_dir=str(dataset_dir)
    )
    return build_engine(config)


@pytest.fixture(scope="module")
def rotation_text(dataset_dir):
    tasks = [json.loads(line) for line in (dataset_dir / "tasks.jsonl").read_text().splitlines()]
    return next(t["text"] for t in tasks if "crop rotation" in t["text"])


@pytest.fixture()
def client(engine):
    app = create_app(engine)
    with TestClient(app) as client:
        yield client


def _read_events(client, run_id):
    events = []
    with client.stream("GET", f"/api/events/{run_id}") as response:
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("text/event-stream")
        for line in response.iter_lines():
            if line.startswith("data: "):
                events.append(json.loads(line[len("data: "):]))
    return events


def test_chat_roundtrip_with_events_map_and_trace(client, rotation_text):
    session_id = client.post("/api/sessions").json()["session_id"]
    response = client.post("/api/chat", json={"session_id": session_id, "text": rotation_text})
    assert response.status_code == 200
    run_id = response.json()["run_id"]

    events = _read_events(client, run_id)
    kinds = [e["type"] for e in events]
    assert kinds[0] == "schedule"
    assert kinds[-1] == "final"
    assert "tool_call" in kinds and "agent_start" in kinds and "verdict" in kinds
    schedule_event = events[0]
    agents = [s["agent"] for s in schedule_event["subtasks"]]
    assert agents == ["Database", "DataOps", "Agriculture", "Map"]

    trace = client.get(f"/api/traces/{run_id}")
    assert trace.status_code == 200
    body = trace.json()
    assert body["terminal"] == "completed"
    assert body["task_id"] == run_id
    assert body["token_usage"]["total_tokens"] > 0

    map_state = client.get(f"/api/map/{session_id}")
    assert map_state.status_code == 200
    layers = map_state.json()["layers"]
    assert len(layers) >= 1
    assert {"product", "region", "date", "style"} <= set(layers[0])
    assert len(map_state.json()["annotations"]) >= 1


def test_agents_roster(client):
    body = client.get("/api/agents").json()
    names = {a["name"] for a in body["agents"]}
    assert names == {
        "Agriculture", "Climate", "Urban", "Forest", "Vision",
        "Database", "DataOps", "Map",
    }
    assert all(a["tools"] >= 2 for a in body["agents"])


def test_unknown_session_and_trace_404(client):
    assert client.post("/api/chat", json={"session_id": "nope", "text": "x"}).status_code == 404
    assert client.get("/api/traces/r999").status_code == 404
    assert client.get("/api/map/s999").status_code == 404
    assert client.get("/api/events/r999").status_code == 404


def test_invalid_body_400(client):
    session_id = client.post("/api/sessions").json()["session_id"]
    assert client.post("/api/chat", json={"session_id": session_id}).status_code == 400
    assert client.post("/api/chat", json={"session_id": session_id, "text": "  "}).status_code == 400
    assert client.post(
        "/api/chat", content=b"not json", headers={"content-type": "application/json"}
    ).status_code == 400


class _SlowBackend:
    def __init__(self, inner, delay=0.15):
        self.inner = inner
        self.delay = delay

    def complete(self, messages, tools, config):
        import time

        time.sleep(self.delay)
        return self.inner.complete(messages, tools, config)


def test_busy_session_409(engine, rotation_text):
    import dataclasses

    slow_engine = dataclasses.replace(engine, backend=_SlowBackend(engine.backend))
    app = create_app(slow_engine)
    with TestClient(app) as client:
        session_id = client.post("/api/sessions").json()["session_id"]
        first = client.post("/api/chat", json={"session_id": session_id, "text": rotation_text})
        run_id = first.json()["run_id"]
        second = client.post("/api/chat", json={"session_id": session_id, "text": rotation_text})
        assert second.status_code == 409
        _read_events(client, run_id)
        third = client.post("/api/chat", json={"session_id": session_id, "text": rotation_text})
        assert third.status_code == 200
        _read_events(client, third.json()["run_id"])


def test_map_empty_before_any_run(client):
    session_id = client.post("/api/sessions").json()["session_id"]
    body = client.get(f"/api/map/{session_id}").json()
    assert body == {"layers": [], "annotations": []}


def test_internal_error_returns_500_with_trace_id(engine, monkeypatch):
    import geosquad.service as service_module

    def explode(*args, **kwargs):
        raise RuntimeError("boom")

    monkeypatch.setattr(service_module, "make_chat_task", explode)
    app = create_app(engine)
    with TestClient(app, raise_server_exceptions=False) as client:
        session_id = client.post("/api/sessions").json()["session_id"]
        response = client.post("/api/chat", json={"session_id": session_id, "text": "x"})
        assert response.status_code == 500
        body = response.json()
        assert body["error"] == "internal error"
        assert len(body["trace_id"]) == 12
