"""Session-scoped HTTP chat API over the inference pipeline.

In-memory sessions with TTL eviction; one in-flight request per session (a
concurrent second request gets 409, it is not queued); the checkpoint and
database are never mutated. JSON bodies carry an api_version field.
"""

from __future__ import annotations

import json
import mimetypes
import secrets
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .pipeline import DialogueSystem, SessionState, trace_to_obj

API_VERSION = 1


@dataclass
class ChatSession:
    session_id: str
    state: SessionState = field(default_factory=SessionState)
    traces: list[dict] = field(default_factory=list)
    created: float = field(default_factory=time.time)
    last_active: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock)


class ServiceError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


class ChatService:
    """Session registry + request handlers, transport-agnostic."""

    def __init__(self, system: DialogueSystem, session_ttl: float = 1800.0):
        self.system = system
        self.session_ttl = session_ttl
        self._sessions: dict[str, ChatSession] = {}
        self._registry_lock = threading.Lock()

    def _evict_expired(self) -> None:
        now = time.time()
        dead = [sid for sid, s in self._sessions.items()
                if now - s.last_active > self.session_ttl]
        for sid in dead:
            self._sessions.pop(sid, None)

    def _get(self, session_id: str) -> ChatSession:
        with self._registry_lock:
            self._evict_expired()
            session = self._sessions.get(session_id)
        if session is None:
            raise ServiceError(404, "unknown or expired session")
        return session

    def create_session(self) -> dict:
        session = ChatSession(session_id=secrets.token_hex(8))
        with self._registry_lock:
            self._evict_expired()
            self._sessions[session.session_id] = session
        return {"api_version": API_VERSION, "session_id": session.session_id}

    def post_message(self, session_id: str, text: str) -> dict:
        session = self._get(session_id)
        if not text or not text.strip():
            raise ServiceError(422, "empty message")
        if not session.lock.acquire(blocking=False):
            raise ServiceError(409, "a message for this session is already in flight")
        try:
            turn_index = session.state.turn_index
            trace, session.state = self.system.step(session.state, text)
            obj = trace_to_obj(trace, turn_index=turn_index)
            session.traces.append(obj)
            session.last_active = time.time()
            return {"api_version": API_VERSION, "session_id": session_id, **obj}
        finally:
            session.lock.release()

    def get_state(self, session_id: str) -> dict:
        session = self._get(session_id)
        session.last_active = time.time()
        return {
            "api_version": API_VERSION,
            "session_id": session_id,
            "turns": list(session.traces),
        }

    def reset(self, session_id: str) -> dict:
        session = self._get(session_id)
        with session.lock:
            session.state = SessionState()
            session.traces = []
            session.last_active = time.time()
        return {"api_version": API_VERSION, "session_id": session_id, "turns": []}


def _make_handler(service: ChatService, static_dir: str | None):
    static_root = Path(static_dir).resolve() if static_dir else None

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _send_json(self, status: int, obj: dict) -> None:
            body = json.dumps(obj).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _read_json(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            if length == 0:
                return {}
            try:
                return json.loads(self.rfile.read(length).decode("utf-8"))
            except json.JSONDecodeError as exc:
                raise ServiceError(422, f"bad json body: {exc}")

        def _serve_static(self, path: str) -> None:
            if static_root is None:
                self._send_json(404, {"error": "no static assets configured"})
                return
            rel = path.lstrip("/") or "index.html"
            target = (static_root / rel).resolve()
            if not str(target).startswith(str(static_root)) or not target.is_file():
                target = static_root / "index.html"
                if not target.is_file():
                    self._send_json(404, {"error": "not found"})
                    return
            body = target.read_bytes()
            ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _route(self, method: str) -> None:
            path = self.path.split("?", 1)[0].rstrip("/") or "/"
            try:
                if method == "GET" and path == "/healthz":
                    self._send_json(200, {"status": "ok", "api_version": API_VERSION})
                elif method == "POST" and path == "/api/session":
                    self._send_json(200, service.create_session())
                elif path.startswith("/api/session/"):
                    parts = path.split("/")
                    if len(parts) == 5 and method == "POST" and parts[4] == "message":
                        body = self._read_json()
                        self._send_json(200, service.post_message(parts[3],
                                                                  body.get("text", "")))
                    elif len(parts) == 5 and method == "GET" and parts[4] == "state":
                        self._send_json(200, service.get_state(parts[3]))
                    elif len(parts) == 5 and method == "POST" and parts[4] == "reset":
                        self._send_json(200, service.reset(parts[3]))
                    else:
                        self._send_json(404, {"error": "not found"})
                elif method == "GET":
                    self._serve_static(path)
                else:
                    self._send_json(404, {"error": "not found"})
            except ServiceError as exc:
                self._send_json(exc.status, {"error": exc.message})
            except Exception as exc:  # keep the demo server alive
                self._send_json(500, {"error": f"internal error: {exc}"})

        def do_GET(self):
            self._route("GET")

        def do_POST(self):
            self._route("POST")

    return Handler


def make_server(system: DialogueSystem, host: str = "127.0.0.1", port: int = 0,
                static_dir: str | None = None,
                session_ttl: float = 1800.0) -> ThreadingHTTPServer:
    service = ChatService(system, session_ttl=session_ttl)
    handler = _make_handler(service, static_dir)
    server = ThreadingHTTPServer((host, port), handler)
    server.chat_service = service
    return server
