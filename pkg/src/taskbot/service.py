"""HTTP facade over the dialogue engine.

Three endpoints: create a session, post a message, read the tree snapshot.
Handlers are stateless; every turn round-trips through the context store,
so killing and restarting the process (with an external store) loses
nothing. A per-session gate serializes concurrent posts to the same
session and rejects clients once the wait queue is four deep.
"""

import logging
import threading
from typing import Dict, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from taskbot.dialogue.orchestrator import Engine
from taskbot.errors import ConnectionError_, NotFound

logger = logging.getLogger(__name__)

QUEUE_DEPTH = 4


class MessageIn(BaseModel):
    text: str = ""


class SessionOut(BaseModel):
    session_id: str
    greeting: str


class MessageOut(BaseModel):
    reply: str
    session_id: str
    turn: int
    finished_tasks: list
    active_task: Optional[str] = None


class QueueFull(Exception):
    pass


class SessionGate:
    """One lock per session plus a bounded wait count."""

    def __init__(self, depth: int = QUEUE_DEPTH):
        self._depth = depth
        self._registry = threading.Lock()
        self._locks: Dict[str, threading.Lock] = {}
        self._waiting: Dict[str, int] = {}

    def acquire(self, session_id: str) -> None:
        with self._registry:
            lock = self._locks.setdefault(session_id, threading.Lock())
            pending = self._waiting.get(session_id, 0)
            if pending >= self._depth:
                raise QueueFull(session_id)
            self._waiting[session_id] = pending + 1
        lock.acquire()

    def release(self, session_id: str) -> None:
        with self._registry:
            self._locks[session_id].release()
            self._waiting[session_id] -= 1

    def waiting(self, session_id: str) -> int:
        with self._registry:
            return self._waiting.get(session_id, 0)

    def forget(self, session_id: str) -> None:
        with self._registry:
            self._locks.pop(session_id, None)
            self._waiting.pop(session_id, None)


def build_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="taskbot", docs_url=None, redoc_url=None)
    gate = SessionGate()
    app.state.gate = gate  # introspection for tests and operators

    @app.post("/sessions", response_model=SessionOut)
    def create_session():
        try:
            session_id, greeting = engine.start_session()
        except ConnectionError_ as exc:
            raise HTTPException(status_code=503, detail="context store unreachable: %s" % exc)
        return SessionOut(session_id=session_id, greeting=greeting)

    @app.post("/sessions/{session_id}/messages", response_model=MessageOut)
    def post_message(session_id: str, message: MessageIn):
        try:
            gate.acquire(session_id)
        except QueueFull:
            raise HTTPException(status_code=409, detail="too many queued turns for this session")
        try:
            result = engine.process_turn(session_id, message.text)
        except NotFound:
            raise HTTPException(status_code=404, detail="unknown session")
        except ConnectionError_ as exc:
            raise HTTPException(status_code=503, detail="context store unreachable: %s" % exc)
        finally:
            gate.release(session_id)
        return MessageOut(
            reply=result.response,
            session_id=result.session_id,
            turn=result.turn,
            finished_tasks=list(result.finished_tasks),
            active_task=result.active_task,
        )

    @app.get("/sessions/{session_id}/tree")
    def get_tree(session_id: str):
        try:
            return engine.tree_snapshot(session_id)
        except NotFound:
            raise HTTPException(status_code=404, detail="unknown session")
        except ConnectionError_ as exc:
            raise HTTPException(status_code=503, detail="context store unreachable: %s" % exc)

    return app
