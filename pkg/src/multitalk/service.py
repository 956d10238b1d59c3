"""HTTP front door: session lifecycle, a server-sent event stream per session,
the remote human-answer bridge, and durable per-session transcript logs.

Every orchestrator transcript record becomes exactly one EventEnvelope, both
on the live stream and in the on-disk log, so a finished session replays
identically to having watched it live.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from .config import build_session_spec
from .errors import ConfigError, HumanTimeout, MultitalkError
from .model import SessionStatus
from .orchestrator import run_session

TERMINAL_STATUSES = {
    SessionStatus.CONVERGED.value,
    SessionStatus.EXHAUSTED.value,
    SessionStatus.AWAITING_HUMAN_TIMEOUT.value,
    SessionStatus.AGENT_ERROR.value,
}

DEFAULT_HUMAN_TIMEOUT = 300.0
DEFAULT_MAX_SESSIONS = 16


class QueueHuman:
    """Blocking bridge between the orchestrator thread and answer submissions."""

    def __init__(self):
        self._cond = threading.Condition()
        self._questions: list[str] | None = None
        self._answers: list[str] | None = None

    def ask(self, questions: list[str], timeout: float | None) -> list[str]:
        with self._cond:
            self._questions = list(questions)
            self._answers = None
            self._cond.notify_all()
            deadline = None if timeout is None else time.monotonic() + timeout
            while self._answers is None:
                remaining = None if deadline is None else deadline - time.monotonic()
                if remaining is not None and remaining <= 0:
                    self._questions = None
                    raise HumanTimeout(
                        f"no answer within {timeout:.0f} s"
                    )
                self._cond.wait(timeout=remaining)
            answers = self._answers
            self._questions = None
            self._answers = None
            return answers

    def pending(self) -> list[str] | None:
        with self._cond:
            return list(self._questions) if self._questions is not None else None

    def submit(self, answers: list[str]) -> tuple[int, str]:
        """(http status, reason). Exactly one concurrent submit wins."""
        with self._cond:
            if self._questions is None or self._answers is not None:
                return 409, "no question pending"
            if len(answers) != len(self._questions):
                return (
                    400,
                    f"expected {len(self._questions)} answers, got {len(answers)}",
                )
            self._answers = list(answers)
            self._cond.notify_all()
            return 200, "ok"


@dataclass
class ManagedSession:
    session_id: str
    created_at: float
    doc: dict
    human: QueueHuman | object
    log_path: Path
    events: list[dict] = field(default_factory=list)
    cond: threading.Condition = field(default_factory=threading.Condition)
    status: str = SessionStatus.RUNNING.value
    persist_error: str = ""
    thread: threading.Thread | None = None

    def append(self, envelope: dict) -> None:
        with self.cond:
            self.events.append(envelope)
            body = envelope.get("body", {})
            if envelope.get("kind") == "status":
                self.status = body.get("status", self.status)
            try:
                with open(self.log_path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(envelope, sort_keys=True) + "\n")
            except OSError as exc:
                if not self.persist_error:
                    self.persist_error = f"transcript persistence failed: {exc}"
            self.cond.notify_all()

    @property
    def terminal(self) -> bool:
        return self.status in TERMINAL_STATUSES or (
            self.thread is not None and not self.thread.is_alive() and self.events
        )

    def record(self) -> dict:
        body = {
            "session_id": self.session_id,
            "created_at": self.created_at,
            "status": self.status,
            "instruction": self.doc.get("instruction", ""),
            "events": len(self.events),
        }
        if self.persist_error:
            body["status"] = SessionStatus.AGENT_ERROR.value
            body["error"] = self.persist_error
        return body


class SessionManager:
    def __init__(self, data_dir: Path, max_sessions: int = DEFAULT_MAX_SESSIONS,
                 config_defaults: dict | None = None, base_dir: Path | None = None):
        self.data_dir = Path(data_dir)
        self.sessions_dir = self.data_dir / "sessions"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self.max_sessions = max_sessions
        self.config_defaults = config_defaults or {}
        self.base_dir = base_dir or Path.cwd()
        self._sessions: dict[str, ManagedSession] = {}
        self._lock = threading.Lock()

    def active_count(self) -> int:
        return sum(1 for s in self._sessions.values() if not s.terminal)

    def create(self, doc: dict) -> ManagedSession:
        merged = {**self.config_defaults, **doc}
        if not merged.get("instruction") and merged.get("backend", {}).get("kind") != "scenario":
            raise ConfigError("instruction required")
        spec = build_session_spec(merged, base_dir=self.base_dir)

        with self._lock:
            if self.active_count() >= self.max_sessions:
                raise CapacityError(
                    f"session capacity reached ({self.max_sessions} running)"
                )
            session_id = uuid.uuid4().hex[:12]
            human = spec.human if spec.human is not None else QueueHuman()
            managed = ManagedSession(
                session_id=session_id,
                created_at=time.time(),
                doc=spec.doc,
                human=human,
                log_path=self.sessions_dir / f"{session_id}.jsonl",
            )
            self._sessions[session_id] = managed

        cfg = spec.session_config
        if isinstance(human, QueueHuman) and cfg.human_timeout is None:
            from dataclasses import replace

            cfg = replace(cfg, human_timeout=DEFAULT_HUMAN_TIMEOUT)

        def on_event(event):
            managed.append({
                "session_id": session_id,
                "seq": event.seq,
                "kind": event.kind,
                "body": event.body,
            })

        def runner():
            try:
                run_session(
                    spec.instruction, spec.source, spec.planner_backend,
                    spec.analyzer_backend, human, spec.model, cfg,
                    on_event=on_event,
                )
            except Exception as exc:  # orchestrator handles agent errors itself
                with managed.cond:
                    managed.status = SessionStatus.AGENT_ERROR.value
                    managed.persist_error = managed.persist_error or str(exc)
                    managed.cond.notify_all()

        thread = threading.Thread(target=runner, daemon=True,
                                  name=f"session-{session_id}")
        managed.thread = thread
        thread.start()
        return managed

    def get(self, session_id: str) -> ManagedSession:
        session = self._sessions.get(session_id)
        if session is None:
            raise KeyError(session_id)
        return session

    def listing(self) -> list[dict]:
        live = {s.session_id: s.record() for s in self._sessions.values()}
        # completed sessions from previous runs remain listable from disk
        for path in sorted(self.sessions_dir.glob("*.jsonl")):
            sid = path.stem
            if sid in live:
                continue
            status = "unknown"
            try:
                *_, last = path.read_text().splitlines() or [""]
                doc = json.loads(last) if last else {}
                if doc.get("kind") == "status":
                    status = doc["body"].get("status", status)
            except (OSError, ValueError):
                pass
            live[sid] = {
                "session_id": sid,
                "created_at": path.stat().st_mtime,
                "status": status,
                "instruction": "",
                "events": None,
                "from_disk": True,
            }
        return sorted(live.values(), key=lambda r: (r["created_at"], r["session_id"]))

    def transcript_lines(self, session_id: str) -> list[str]:
        session = self._sessions.get(session_id)
        if session is not None:
            with session.cond:
                return [json.dumps(e, sort_keys=True) for e in session.events]
        path = self.sessions_dir / f"{session_id}.jsonl"
        if not path.exists():
            raise KeyError(session_id)
        return path.read_text().splitlines()


class CapacityError(MultitalkError):
    pass


def _sse_frame(envelope: dict) -> str:
    return (
        f"id: {envelope['seq']}\n"
        f"event: {envelope['kind']}\n"
        f"data: {json.dumps(envelope, sort_keys=True)}\n\n"
    )


def create_app(
    data_dir: str | Path = "./data",
    config_defaults: dict | None = None,
    max_sessions: int = DEFAULT_MAX_SESSIONS,
    console_dir: str | Path | None = None,
    base_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="multitalk planning service")
    manager = SessionManager(
        Path(data_dir), max_sessions=max_sessions,
        config_defaults=config_defaults,
        base_dir=Path(base_dir) if base_dir else None,
    )
    app.state.manager = manager

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        try:
            doc = await request.json()
        except ValueError:
            raise HTTPException(400, "body must be a JSON config document")
        if not isinstance(doc, dict):
            raise HTTPException(400, "config must be a JSON object")
        try:
            session = manager.create(doc)
        except CapacityError as exc:
            raise HTTPException(503, str(exc))
        except (ConfigError, MultitalkError) as exc:
            raise HTTPException(400, str(exc))
        return {"session_id": session.session_id}

    @app.get("/sessions")
    def list_sessions():
        return manager.listing()

    @app.get("/sessions/{session_id}")
    def session_detail(session_id: str):
        try:
            session = manager.get(session_id)
        except KeyError:
            raise HTTPException(404, "unknown session")
        record = session.record()
        record["config"] = session.doc
        return record

    @app.get("/sessions/{session_id}/events")
    def stream_events(session_id: str, from_seq: int = 0):
        try:
            session = manager.get(session_id)
        except KeyError:
            raise HTTPException(404, "unknown session")

        def generate() -> Iterator[str]:
            next_seq = from_seq
            while True:
                with session.cond:
                    while len(session.events) <= next_seq and not session.terminal:
                        session.cond.wait(timeout=1.0)
                    pending = list(session.events[next_seq:])
                    finished = (
                        session.terminal
                        and len(session.events) == next_seq + len(pending)
                    )
                for envelope in pending:
                    yield _sse_frame(envelope)
                next_seq += len(pending)
                if finished:
                    return

        return StreamingResponse(generate(), media_type="text/event-stream")

    @app.post("/sessions/{session_id}/answers")
    async def submit_answer(session_id: str, request: Request):
        try:
            session = manager.get(session_id)
        except KeyError:
            raise HTTPException(404, "unknown session")
        try:
            doc = await request.json()
        except ValueError:
            raise HTTPException(400, "body must be JSON")
        answers = doc.get("answers")
        if not isinstance(answers, list) or not all(isinstance(a, str) for a in answers):
            raise HTTPException(400, "'answers' must be a list of strings")
        if not isinstance(session.human, QueueHuman):
            raise HTTPException(409, "session does not take remote answers")
        status, reason = session.human.submit(answers)
        if status != 200:
            raise HTTPException(status, reason)
        return {"ok": True}

    @app.get("/sessions/{session_id}/transcript")
    def transcript(session_id: str):
        try:
            lines = manager.transcript_lines(session_id)
        except KeyError:
            raise HTTPException(404, "unknown session")
        return PlainTextResponse(
            "\n".join(lines) + ("\n" if lines else ""),
            media_type="application/x-ndjson",
        )

    if console_dir is not None and Path(console_dir).is_dir():
        app.mount("/console", StaticFiles(directory=str(console_dir), html=True),
                  name="console")

    @app.exception_handler(MultitalkError)
    async def on_error(request, exc):  # pragma: no cover - fastapi glue
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    return app
