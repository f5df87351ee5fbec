"""Line-delimited JSON protocol server so out-of-process agents can drive
episodes from any ecosystem.

One connection owns one private environment. Every request line carries a
client-assigned ``id`` that is echoed in exactly one response line; malformed
input produces an ``error`` response without closing the connection. See
PROTOCOL.md for the byte-level message reference.
"""

import json
import socketserver
import sys
import threading
from pathlib import Path
from typing import Callable, IO, List, Optional

from .environment import Environment

PROTOCOL_VERSION = 1


def _error(msg_id, message: str) -> dict:
    return {"id": msg_id, "type": "error", "payload": {"message": message}}


class Session:
    """Protocol state for a single connection."""

    def __init__(self, make_env: Callable[[], Environment], log_file: Optional[IO[str]] = None):
        self.make_env = make_env
        self.env: Optional[Environment] = None
        self.log_file = log_file
        self.step_count = 0

    def handle_line(self, line: str) -> dict:
        line = line.strip()
        if not line:
            return _error(None, "empty message")
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            return _error(None, f"malformed JSON: {exc}")
        if not isinstance(msg, dict):
            return _error(None, "message must be a JSON object")
        msg_id = msg.get("id")
        msg_type = msg.get("type")
        try:
            if msg_type == "hello":
                return self._hello(msg_id)
            if msg_type == "spaces":
                return self._spaces(msg_id)
            if msg_type == "reset":
                return self._reset(msg_id)
            if msg_type == "step":
                return self._step(msg_id, msg.get("payload") or {})
            if msg_type == "done":
                return {"id": msg_id, "type": "done"}
            return _error(msg_id, f"unknown message type {msg_type!r}")
        except Exception as exc:
            return _error(msg_id, str(exc))

    def _ensure_env(self) -> Environment:
        if self.env is None:
            self.env = self.make_env()
        return self.env

    def _hello(self, msg_id) -> dict:
        env = self._ensure_env()
        return {
            "id": msg_id,
            "type": "hello",
            "payload": {
                "protocol": PROTOCOL_VERSION,
                "buildings": [b.id for b in env.buildings],
                "central_agent": env.central_agent,
                "period": list(env.period),
                "action_dims": env.action_dims,
            },
        }

    def _spaces(self, msg_id) -> dict:
        env = self._ensure_env()
        return {"id": msg_id, "type": "spaces", "payload": env.get_state_action_spaces()}

    def _reset(self, msg_id) -> dict:
        env = self._ensure_env()
        states = env.reset()
        self.step_count = 0
        if self.log_file is not None:
            self.log_file.write(json.dumps({"event": "reset"}) + "\n")
            self.log_file.flush()
        return {"id": msg_id, "type": "result", "payload": {"states": states, "done": False}}

    def _step(self, msg_id, payload: dict) -> dict:
        env = self._ensure_env()
        if "actions" not in payload:
            return _error(msg_id, "step payload missing 'actions'")
        result = env.step(payload["actions"])
        self.step_count += 1
        if self.log_file is not None:
            self.log_file.write(
                json.dumps(
                    {
                        "event": "step",
                        "actions": payload["actions"],
                        "net": env.trackers.net_electric_consumption[-1],
                    }
                )
                + "\n"
            )
            self.log_file.flush()
        return {
            "id": msg_id,
            "type": "done" if result.done else "result",
            "payload": {
                "states": result.states,
                "rewards": result.rewards,
                "done": result.done,
                "info": result.info,
            },
        }


def handle_stream(make_env: Callable[[], Environment], reader: IO[str], writer: IO[str],
                  log_file: Optional[IO[str]] = None) -> None:
    """Run one protocol session over text streams until EOF."""
    session = Session(make_env, log_file=log_file)
    for line in reader:
        response = session.handle_line(line)
        writer.write(json.dumps(response) + "\n")
        writer.flush()


def serve_stdio(make_env: Callable[[], Environment], log_path: Optional[str] = None) -> None:
    """One session over stdin/stdout; exits at EOF."""
    log_file = open(log_path, "w") if log_path else None
    try:
        handle_stream(make_env, sys.stdin, sys.stdout, log_file=log_file)
    finally:
        if log_file is not None:
            log_file.close()


class _TCPServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


def serve_tcp(
    make_env: Callable[[], Environment],
    host: str = "127.0.0.1",
    port: int = 7780,
    log_dir: Optional[str] = None,
    ready_event: Optional[threading.Event] = None,
) -> None:
    """Accept TCP connections forever; each connection gets its own environment."""
    counter = {"n": 0}
    lock = threading.Lock()

    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            log_file = None
            if log_dir is not None:
                with lock:
                    counter["n"] += 1
                    n = counter["n"]
                log_file = open(Path(log_dir) / f"session_{n}.jsonl", "w")
            try:
                session = Session(make_env, log_file=log_file)
                for raw in self.rfile:
                    response = session.handle_line(raw.decode("utf-8", errors="replace"))
                    self.wfile.write((json.dumps(response) + "\n").encode())
            finally:
                if log_file is not None:
                    log_file.close()

    try:
        server = _TCPServer((host, port), Handler)
    except OSError as exc:
        raise OSError(f"cannot bind {host}:{port}: {exc}") from exc
    with server:
        if ready_event is not None:
            ready_event.set()
        server.serve_forever()


def replay_check(
    make_env: Callable[[], Environment], log_path: str, tolerance: float = 1e-9
) -> bool:
    """Replay a recorded session log against a fresh in-process environment and
    compare the district net series step by step."""
    env = make_env()
    logged_net: List[float] = []
    actions: List = []
    with open(log_path) as f:
        for line in f:
            rec = json.loads(line)
            if rec.get("event") == "reset":
                actions.clear()
                logged_net.clear()
            elif rec.get("event") == "step":
                actions.append(rec["actions"])
                logged_net.append(rec["net"])
    env.reset()
    for i, acts in enumerate(actions):
        env.step(acts)
        replayed = env.trackers.net_electric_consumption[-1]
        expected = logged_net[i]
        scale = max(abs(expected), 1.0)
        if abs(replayed - expected) > tolerance * scale:
            return False
    return True
