"""JSON-over-HTTP session service: the backend the browser console talks to.

Each session runs on its own thread against an isolated world; feedback posted
over HTTP is queued and consumed at the session's next review point (posting
while the session is not awaiting feedback is a 409, never a silent drop).
Event reads are long-polls against the session transcript, which remains the
single source of truth for everything the service reports.
"""

from __future__ import annotations

import json
import threading
import traceback
import uuid
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qs, urlparse

from .config import AppConfig, load_config
from .memory import MemoryStore
from .session import (
    FeedbackEvent,
    RolloutReport,
    SessionError,
    Transcript,
    run_from_spec,
)
from .skillscript.nodes import SkillDef

LONG_POLL_SECONDS = 25.0

STATUS_AWAITING_AGENT = "awaiting_agent"
STATUS_AWAITING_FEEDBACK = "awaiting_feedback"
STATUS_DONE = "done"
STATUS_FAILED = "failed"


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        super().__init__(message)
        self.message = message


class _QueueFeedback:
    """Bridges HTTP feedback into the session loop, one review at a time."""

    def __init__(self, runner: "SessionRunner"):
        self.runner = runner
        self._queue: list[FeedbackEvent] = []
        self._lock = threading.Lock()
        self._ready = threading.Condition(self._lock)

    def post(self, event: FeedbackEvent) -> None:
        with self._ready:
            if self.runner.status != STATUS_AWAITING_FEEDBACK:
                raise ServiceError(
                    409, "not_awaiting_feedback",
                    f"session is {self.runner.status}, not awaiting feedback",
                )
            self._queue.append(event)
            self._ready.notify_all()

    def review(self, report: RolloutReport) -> FeedbackEvent:
        self.runner._set_status(STATUS_AWAITING_FEEDBACK)
        self.runner.last_report = {
            "instruction": report.instruction,
            "code": report.code,
            "digest": report.digest,
            "error": None if report.trace.error is None else report.trace.error.render(),
        }
        with self._ready:
            while not self._queue:
                self._ready.wait(timeout=0.5)
                if self.runner.stopping:
                    raise SessionError("session shut down while awaiting feedback")
            event = self._queue.pop(0)
        self.runner._set_status(STATUS_AWAITING_AGENT)
        return event

    # interactive learning over HTTP runs the single task named in the request
    def next_task(self):
        from .session import TaskRequest

        if getattr(self, "_task_served", False):
            return None
        self._task_served = True
        spec = self.runner.spec
        return TaskRequest(
            instruction=spec.get("instruction", spec.get("skill_description", "")),
            setup_description=spec.get("setup_description", ""),
            hint=spec.get("hint"),
        )

    def review_header(self, header: SkillDef) -> tuple[str, str]:
        return ("accept", "")


class _NotifyingTranscript(Transcript):
    def __init__(self, runner: "SessionRunner"):
        super().__init__()
        self.runner = runner

    def emit(self, type_: str, **payload) -> dict:
        event = super().emit(type_, **payload)
        self.runner.notify()
        return event


@dataclass
class SessionHandle:
    id: str
    mode: str
    created_at: int  # logical creation index, monotone per process
    status: str

    def to_json_obj(self) -> dict:
        return {
            "id": self.id,
            "phase": self.mode,
            "created_at": self.created_at,
            "status": self.status,
        }


class SessionRunner:
    def __init__(self, spec: dict, memory: MemoryStore, config: AppConfig, created_at: int):
        self.id = uuid.uuid4().hex[:16]
        self.spec = spec
        self.memory = memory
        self.config = config
        self.created_at = created_at
        self.status = STATUS_AWAITING_AGENT
        self.stopping = False
        self.last_report: Optional[dict] = None
        self.world_snapshot: Optional[str] = None
        self.transcript = _NotifyingTranscript(self)
        self.feedback = _QueueFeedback(self)
        self._cond = threading.Condition()
        self.thread = threading.Thread(target=self._run, daemon=True)

    def start(self) -> None:
        self.thread.start()

    def _set_status(self, status: str) -> None:
        with self._cond:
            self.status = status
            self._cond.notify_all()

    def notify(self) -> None:
        with self._cond:
            self._cond.notify_all()

    def _observer(self, encoded_snapshot: str) -> None:
        self.world_snapshot = encoded_snapshot

    def _run(self) -> None:
        try:
            run_from_spec(
                self.spec,
                self.memory,
                self.config.workspace,
                feedback_override=self.feedback if self.spec.get("interactive", True) else None,
                observer=self._observer,
                transcript=self.transcript,
            )
            final = self.transcript.events[-1].get("status") if self.transcript.events else None
            self._set_status(STATUS_DONE if final in ("ok",) else STATUS_FAILED)
        except Exception:
            self.transcript.emit("service_error", detail=traceback.format_exc(limit=4))
            self._set_status(STATUS_FAILED)

    def events_since(self, cursor: int, wait_seconds: float) -> list[dict]:
        """Long-poll: wait up to wait_seconds for news, then return the page
        (empty after a timeout, per the contract)."""
        with self._cond:
            if len(self.transcript.events) <= cursor and self.status not in (
                STATUS_DONE,
                STATUS_FAILED,
            ):
                self._cond.wait(timeout=wait_seconds)
            return list(self.transcript.events[cursor:])

    def handle(self) -> SessionHandle:
        return SessionHandle(self.id, self.spec.get("mode", "solve"), self.created_at, self.status)

    def summary(self) -> dict:
        return {
            **self.handle().to_json_obj(),
            "event_count": len(self.transcript.events),
            "latest": self.last_report,
            "success_report": self._success_report(),
        }

    def _success_report(self) -> Optional[dict]:
        """Latest evaluator verdict, when the session names a task evaluator."""
        evaluator = self.spec.get("evaluator")
        if not evaluator or self.world_snapshot is None:
            return None
        from .tasklib import evaluate
        from .world import WorldSnapshot

        world = WorldSnapshot.decode(self.world_snapshot).restore()
        return evaluate(evaluator, world, self.spec.get("evaluator_params")).to_json_obj()


class ServiceState:
    def __init__(self, config: AppConfig, memory_dir: Optional[str] = None):
        self.config = config
        self.memory = MemoryStore(Path(memory_dir) if memory_dir else config.memory_dir)
        self.sessions: dict[str, SessionRunner] = {}
        self._lock = threading.Lock()
        self._created = 0

    def create_session(self, spec: dict) -> SessionRunner:
        with self._lock:
            self._created += 1
            runner = SessionRunner(spec, self.memory, self.config, self._created)
            self.sessions[runner.id] = runner
        runner.start()
        return runner

    def get(self, session_id: str) -> SessionRunner:
        runner = self.sessions.get(session_id)
        if runner is None:
            raise ServiceError(404, "no_such_session", f"unknown session {session_id!r}")
        return runner


def _spec_from_request(body: dict) -> dict:
    """Translate the POST /api/session body into a run spec."""
    mode = body.get("mode", "solve")
    spec: dict = {"mode": mode, "interactive": "feedback" not in body}
    for key in (
        "instruction", "hint", "seed", "skill_description", "skill_name",
        "setup_description", "scene", "evaluator", "evaluator_params",
        "agent_script", "feedback", "memory", "config",
    ):
        if key in body:
            spec[key] = body[key]
    if mode == "solve" and "instruction" not in spec:
        raise ServiceError(400, "missing_instruction", "solve sessions need an instruction")
    if mode == "learn" and "skill_description" not in spec and "skill" in body:
        spec["skill_description"] = body["skill"]
    if mode == "extend" and "skill_name" not in spec and "skill" in body:
        spec["skill_name"] = body["skill"]
    if "env" in body:
        spec.setdefault("setup_description", body["env"])
    return spec


def _skill_record_json(record) -> dict:
    return {
        "record_id": record.record_id,
        "name": record.name,
        "version": record.version,
        "supersedes": record.supersedes,
        "status": record.status,
        "docstring": record.skill.docstring,
        "header": record.skill.header(),
        "source": record.source,
    }


def _example_record_json(record) -> dict:
    return {
        "record_id": record.record_id,
        "instruction": record.instruction,
        "code": record.code,
        "outcome_digest": record.outcome_digest,
    }


class _Handler(BaseHTTPRequestHandler):
    state: ServiceState  # injected by serve()
    static_dir: Optional[Path] = None
    long_poll_seconds: float = LONG_POLL_SECONDS

    # -- plumbing ---------------------------------------------------------------

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send_json(self, status: int, obj) -> None:
        payload = json.dumps(obj).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(payload)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(payload)

    def _send_error_obj(self, exc: ServiceError) -> None:
        self._send_json(exc.status, {"code": exc.code, "message": exc.message})

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        raw = self.rfile.read(length)
        try:
            body = json.loads(raw.decode("utf-8"))
        except json.JSONDecodeError as exc:
            raise ServiceError(400, "bad_json", f"request body is not JSON: {exc}")
        if not isinstance(body, dict):
            raise ServiceError(400, "bad_json", "request body must be a JSON object")
        return body

    # -- routing -----------------------------------------------------------------

    def do_GET(self) -> None:
        try:
            self._route_get()
        except ServiceError as exc:
            self._send_error_obj(exc)
        except (BrokenPipeError, ConnectionResetError):
            pass
        except Exception as exc:
            self._send_json(500, {"code": "internal", "message": str(exc)})

    def do_POST(self) -> None:
        try:
            self._route_post()
        except ServiceError as exc:
            self._send_error_obj(exc)
        except (BrokenPipeError, ConnectionResetError):
            pass
        except Exception as exc:
            self._send_json(500, {"code": "internal", "message": str(exc)})

    def _route_get(self) -> None:
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        state = self.state

        if parts[:2] == ["api", "session"] and len(parts) == 3:
            self._send_json(200, state.get(parts[2]).summary())
            return
        if parts[:2] == ["api", "session"] and len(parts) == 4 and parts[3] == "events":
            runner = state.get(parts[2])
            query = parse_qs(url.query)
            since = int(query.get("since", ["0"])[0])
            events = runner.events_since(since, self.long_poll_seconds)
            self._send_json(
                200,
                {"since": since, "next": since + len(events), "events": events,
                 "status": runner.status},
            )
            return
        if parts[:2] == ["api", "world"] and len(parts) == 3:
            runner = state.get(parts[2])
            snapshot = runner.world_snapshot
            if snapshot is None:
                raise ServiceError(404, "no_world", "session has no world snapshot yet")
            payload = snapshot.encode("utf-8")
            self.send_response(200)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(payload)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(payload)
            return
        if parts == ["api", "skills"]:
            self._send_json(
                200, [_skill_record_json(r) for r in state.memory.accepted_skills()]
            )
            return
        if parts[:2] == ["api", "skills"] and len(parts) == 4 and parts[3] == "versions":
            versions = state.memory.skill_versions(parts[2])
            if not versions:
                raise ServiceError(404, "no_such_skill", f"unknown skill {parts[2]!r}")
            self._send_json(200, [_skill_record_json(r) for r in versions])
            return
        if parts == ["api", "examples"]:
            self._send_json(
                200, [_example_record_json(r) for r in state.memory.examples]
            )
            return
        if self.static_dir is not None:
            self._serve_static(parts)
            return
        raise ServiceError(404, "no_route", f"no route for GET {url.path}")

    def _serve_static(self, parts: list[str]) -> None:
        assert self.static_dir is not None
        rel = "/".join(parts) if parts else "index.html"
        candidate = (self.static_dir / rel).resolve()
        if not str(candidate).startswith(str(self.static_dir.resolve())):
            raise ServiceError(404, "no_route", "path escapes static root")
        if candidate.is_dir():
            candidate = candidate / "index.html"
        if not candidate.exists():
            raise ServiceError(404, "no_route", f"no static file {rel}")
        payload = candidate.read_bytes()
        content_type = {
            ".html": "text/html; charset=utf-8",
            ".js": "text/javascript; charset=utf-8",
            ".css": "text/css; charset=utf-8",
            ".json": "application/json",
        }.get(candidate.suffix, "application/octet-stream")
        self.send_response(200)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def _route_post(self) -> None:
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        state = self.state

        if parts == ["api", "session"]:
            body = self._read_body()
            runner = state.create_session(_spec_from_request(body))
            self._send_json(201, runner.handle().to_json_obj())
            return
        if parts[:2] == ["api", "session"] and len(parts) == 4 and parts[3] == "feedback":
            runner = state.get(parts[2])
            body = self._read_body()
            kind = body.get("kind")
            try:
                event = FeedbackEvent(kind=kind, text=body.get("text", ""))
            except ValueError as exc:
                raise ServiceError(400, "bad_feedback", str(exc))
            runner.feedback.post(event)
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            return
        raise ServiceError(404, "no_route", f"no route for POST {url.path}")


def make_server(
    port: int,
    config: Optional[AppConfig] = None,
    memory_dir: Optional[str] = None,
    static_dir: Optional[Path] = None,
    long_poll_seconds: float = LONG_POLL_SECONDS,
) -> tuple[ThreadingHTTPServer, ServiceState]:
    config = config or load_config()
    state = ServiceState(config, memory_dir)
    handler = type(
        "BoundHandler",
        (_Handler,),
        {
            "state": state,
            "static_dir": static_dir,
            "long_poll_seconds": long_poll_seconds,
        },
    )
    server = ThreadingHTTPServer(("127.0.0.1", port), handler)
    return server, state


def serve(
    port: int,
    config: Optional[AppConfig] = None,
    memory_dir: Optional[str] = None,
) -> None:
    static = _default_static_dir()
    server, _state = make_server(port, config, memory_dir, static_dir=static)
    host, actual_port = server.server_address[:2]
    print(f"lyra service listening on http://{host}:{actual_port}/")
    if static is not None:
        print(f"serving console from {static}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()


def _default_static_dir() -> Optional[Path]:
    for candidate in (
        Path(__file__).resolve().parent.parent.parent / "frontend" / "dist",
        Path("frontend") / "dist",
    ):
        if candidate.exists():
            return candidate
    return None
