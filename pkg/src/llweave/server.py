"""Step server: the simulation state behind a small JSON-over-HTTP protocol.

GET  /state        -> {processes, enabled, blocked, step_index, digest}
POST /step {"id"}  -> the new state document (fires one enabled redex)
POST /reset        -> the initial state document
Errors come back as {"error": code, "detail": text} with a 4xx status.

One server instance owns one simulation session; requests are serialised.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .pi import Process
from . import sim
from .sim import InvalidRedexIdError, SimState


class StepSession:
    """A resettable simulation session with serialised access."""

    def __init__(self, initial: Process):
        self.initial = initial
        self.state = SimState.initial(initial)
        self.lock = threading.Lock()

    def document(self) -> dict:
        report = sim.edge_report(self.state)
        term = self.state.term
        return {
            "processes": sim.origin_views(self.state),
            "enabled": [{
                "id": i,
                "channel": str(r.channel),
                "from": sim._origin_at(term, r.sender_path),
                "to": sim._origin_at(term, r.receiver_path),
            } for i, r in enumerate(report.enabled)],
            "blocked": [{
                "channel": str(b.channel),
                "from": b.sender_origin,
                "to": b.receiver_origin,
            } for b in report.blocked],
            "step_index": self.state.step_index,
            "digest": self.state.state_digest,
            "terminated": sim._is_terminated(term),
            "events": [{
                "step": e.step,
                "channel": str(e.channel),
                "from": e.sender_origin,
                "to": e.receiver_origin,
                "payload": [str(n) for n in e.payload],
                "pick": e.pick,
            } for e in self.state.history],
        }

    def get_state(self) -> dict:
        with self.lock:
            return self.document()

    def do_step(self, redex_id: int) -> dict:
        with self.lock:
            self.state = sim.step(self.state, redex_id)
            return self.document()

    def do_reset(self) -> dict:
        with self.lock:
            self.state = SimState.initial(self.initial)
            return self.document()


def _make_handler(session: StepSession):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, fmt, *args):
            pass

        def _send(self, status: int, doc: dict):
            body = json.dumps(doc).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.end_headers()
            self.wfile.write(body)

        def do_OPTIONS(self):
            self._send(200, {})

        def do_GET(self):
            if self.path.rstrip("/") in ("", "/state"):
                self._send(200, session.get_state())
            else:
                self._send(404, {"error": "not-found", "detail": self.path})

        def do_POST(self):
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            if self.path.rstrip("/") == "/reset":
                self._send(200, session.do_reset())
                return
            if self.path.rstrip("/") != "/step":
                self._send(404, {"error": "not-found", "detail": self.path})
                return
            try:
                doc = json.loads(raw or b"{}")
                redex_id = doc["id"]
            except (json.JSONDecodeError, KeyError, TypeError):
                self._send(400, {"error": "bad-request",
                                 "detail": "body must be {\"id\": <int>}"})
                return
            try:
                self._send(200, session.do_step(int(redex_id)))
            except (InvalidRedexIdError, ValueError) as e:
                self._send(409, {"error": "invalid-redex-id", "detail": str(e)})

    return Handler


def make_server(initial: Process, port: int = 0,
                host: str = "127.0.0.1") -> tuple[ThreadingHTTPServer, StepSession]:
    """Bound but not yet serving; port 0 picks a free one."""
    session = StepSession(initial)
    server = ThreadingHTTPServer((host, port), _make_handler(session))
    return server, session


def serve(initial: Process, port: int, host: str = "127.0.0.1"):
    server, _ = make_server(initial, port, host)
    try:
        server.serve_forever()
    finally:
        server.server_close()
