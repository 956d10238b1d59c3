import json
import threading
import time

import pytest
from fastapi.testclient import TestClient

from multitalk.service import create_app

SCENARIO_CONFIG = {"backend": {"kind": "scenario", "scenario": "interchange"}}
QUESTION_CONFIG = {
    "backend": {"kind": "scenario", "scenario": "human-question"},
    "human": {"kind": "queue"},
}


@pytest.fixture()
def client(tmp_path):
    app = create_app(data_dir=tmp_path / "data")
    with TestClient(app) as c:
        yield c


def wait_status(client, session_id, statuses, timeout=10.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        detail = client.get(f"/sessions/{session_id}").json()
        if detail["status"] in statuses:
            return detail
        time.sleep(0.02)
    raise AssertionError(f"session never reached {statuses}")


TERMINAL = ("converged", "exhausted", "agent_error", "awaiting_human_timeout")


class TestSessionLifecycle:
    def test_create_and_converge(self, client):
        resp = client.post("/sessions", json=SCENARIO_CONFIG)
        assert resp.status_code == 201
        sid = resp.json()["session_id"]
        detail = wait_status(client, sid, TERMINAL)
        assert detail["status"] == "converged"

    def test_missing_instruction_rejected(self, client):
        resp = client.post("/sessions", json={"scene": {"generator": {"n_objects": 2}}})
        assert resp.status_code == 400
        assert "instruction" in resp.json()["detail"]

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/nope").status_code == 404
        assert client.get("/sessions/nope/events").status_code == 404

    def test_capacity_limit(self, tmp_path):
        app = create_app(data_dir=tmp_path / "data", max_sessions=1)
        with TestClient(app) as client:
            first = client.post("/sessions", json=QUESTION_CONFIG)
            assert first.status_code == 201
            sid = first.json()["session_id"]
            wait_status(client, sid, ("awaiting_human",))
            second = client.post("/sessions", json=SCENARIO_CONFIG)
            assert second.status_code == 503
            # free the slot
            client.post(f"/sessions/{sid}/answers",
                        json={"answers": ["Put it near [0.55, -0.25]."]})
            wait_status(client, sid, TERMINAL)

    def test_listing_contains_session(self, client):
        sid = client.post("/sessions", json=SCENARIO_CONFIG).json()["session_id"]
        wait_status(client, sid, TERMINAL)
        listing = client.get("/sessions").json()
        assert any(r["session_id"] == sid for r in listing)


class TestAnswers:
    def test_answer_resumes_session(self, client):
        sid = client.post("/sessions", json=QUESTION_CONFIG).json()["session_id"]
        wait_status(client, sid, ("awaiting_human",))
        resp = client.post(f"/sessions/{sid}/answers",
                           json={"answers": ["Put it at [0.55, -0.25]."]})
        assert resp.status_code == 200
        detail = wait_status(client, sid, TERMINAL)
        assert detail["status"] == "converged"

    def test_no_pending_question_409(self, client):
        sid = client.post("/sessions", json=SCENARIO_CONFIG).json()["session_id"]
        wait_status(client, sid, TERMINAL)
        resp = client.post(f"/sessions/{sid}/answers", json={"answers": ["hi"]})
        assert resp.status_code == 409

    def test_count_mismatch_400(self, client):
        sid = client.post("/sessions", json=QUESTION_CONFIG).json()["session_id"]
        wait_status(client, sid, ("awaiting_human",))
        resp = client.post(f"/sessions/{sid}/answers", json={"answers": ["a", "b"]})
        assert resp.status_code == 400
        ok = client.post(f"/sessions/{sid}/answers",
                         json={"answers": ["Put it at [0.55, -0.25]."]})
        assert ok.status_code == 200
        wait_status(client, sid, TERMINAL)

    def test_concurrent_submits_exactly_one_wins(self, client):
        sid = client.post("/sessions", json=QUESTION_CONFIG).json()["session_id"]
        wait_status(client, sid, ("awaiting_human",))
        codes = []
        lock = threading.Lock()

        def submit():
            resp = client.post(f"/sessions/{sid}/answers",
                               json={"answers": ["Put it at [0.55, -0.25]."]})
            with lock:
                codes.append(resp.status_code)

        threads = [threading.Thread(target=submit) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(codes) == [200, 409, 409, 409]
        wait_status(client, sid, TERMINAL)


def read_sse_events(client, sid, from_seq=0, limit=None):
    events = []
    with client.stream("GET", f"/sessions/{sid}/events",
                       params={"from_seq": from_seq}) as resp:
        assert resp.status_code == 200
        for line in resp.iter_lines():
            if line.startswith("data: "):
                events.append(json.loads(line[len("data: "):]))
                if limit is not None and len(events) >= limit:
                    break
    return events


class TestEventStream:
    def test_full_stream_then_close(self, client):
        sid = client.post("/sessions", json=SCENARIO_CONFIG).json()["session_id"]
        wait_status(client, sid, TERMINAL)
        events = read_sse_events(client, sid)
        assert [e["seq"] for e in events] == list(range(len(events)))
        assert events[-1]["kind"] == "status"
        assert events[-1]["body"]["status"] == "converged"

    def test_resume_from_seq(self, client):
        sid = client.post("/sessions", json=SCENARIO_CONFIG).json()["session_id"]
        wait_status(client, sid, TERMINAL)
        all_events = read_sse_events(client, sid)
        tail = read_sse_events(client, sid, from_seq=5)
        assert [e["seq"] for e in tail] == list(range(5, len(all_events)))

    def test_stream_matches_transcript_replay(self, client):
        sid = client.post("/sessions", json=SCENARIO_CONFIG).json()["session_id"]
        wait_status(client, sid, TERMINAL)
        streamed = read_sse_events(client, sid)
        replay_text = client.get(f"/sessions/{sid}/transcript").text
        replayed = [json.loads(line) for line in replay_text.splitlines()]
        assert streamed == replayed

    def test_live_stream_sees_question(self, client):
        sid = client.post("/sessions", json=QUESTION_CONFIG).json()["session_id"]
        wait_status(client, sid, ("awaiting_human",))

        collected = []

        def consume():
            collected.extend(read_sse_events(client, sid))

        t = threading.Thread(target=consume)
        t.start()
        time.sleep(0.1)
        client.post(f"/sessions/{sid}/answers",
                    json={"answers": ["Put it at [0.55, -0.25]."]})
        t.join(timeout=10)
        assert not t.is_alive()
        kinds = [e["kind"] for e in collected]
        assert "question" in kinds and "answer" in kinds
        assert collected[-1]["body"]["status"] == "converged"


class TestPersistence:
    def test_two_sessions_two_logs(self, tmp_path):
        app = create_app(data_dir=tmp_path / "data")
        with TestClient(app) as client:
            s1 = client.post("/sessions", json=SCENARIO_CONFIG).json()["session_id"]
            s2 = client.post("/sessions", json=SCENARIO_CONFIG).json()["session_id"]
            wait_status(client, s1, TERMINAL)
            wait_status(client, s2, TERMINAL)
        logs = list((tmp_path / "data" / "sessions").glob("*.jsonl"))
        assert {p.stem for p in logs} >= {s1, s2}

    def test_restart_lists_completed_sessions(self, tmp_path):
        app = create_app(data_dir=tmp_path / "data")
        with TestClient(app) as client:
            sid = client.post("/sessions", json=SCENARIO_CONFIG).json()["session_id"]
            wait_status(client, sid, TERMINAL)
            first = client.get(f"/sessions/{sid}/transcript").text

        app2 = create_app(data_dir=tmp_path / "data")
        with TestClient(app2) as client2:
            listing = client2.get("/sessions").json()
            match = [r for r in listing if r["session_id"] == sid]
            assert match and match[0]["status"] == "converged"
            replay = client2.get(f"/sessions/{sid}/transcript").text
            assert replay == first
