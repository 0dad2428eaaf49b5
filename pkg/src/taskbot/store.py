"""Per-session dialogue context and the stores that hold it.

The context is everything a turn needs to resume a conversation: the task
tree, the cross-turn dialogue state, the accepted entity values, and the
response rotation counters. It travels as a versioned JSON envelope so a
context written by one process can be picked up by another, and a schema
bump is detected instead of misread.

Two stores implement the same interface: an in-process dict for
stand-alone mode, and a TCP client speaking the common GET/SET/DEL text
protocol of key-value servers for distributed mode.
"""

import datetime
import json
import socket
import threading
from dataclasses import dataclass, field
from typing import Dict, Optional

from taskbot.dialogue.states import MultiTurnState
from taskbot.entities.history import EntityHistory
from taskbot.errors import ConnectionError_, CorruptPayload, NotFound, StoreError, VersionMismatch
from taskbot.tree.manager import TaskTree

FORMAT_TAG = "taskbot-ctx"
SCHEMA_VERSION = 1
KEY_PREFIX = "taskbot:ctx:"


@dataclass
class DialogueContext:
    session_id: str
    created_at: str
    session_date: str  # anchors relative date words for the whole session
    config_version: str
    tree: TaskTree
    multi_turn: MultiTurnState = field(default_factory=MultiTurnState)
    entity_history: EntityHistory = field(default_factory=EntityHistory)
    rotation: Dict[str, int] = field(default_factory=dict)

    @classmethod
    def fresh(cls, session_id: str, config_version: str, now: Optional[datetime.datetime] = None) -> "DialogueContext":
        now = now or datetime.datetime.now(datetime.timezone.utc)
        return cls(
            session_id=session_id,
            created_at=now.isoformat(),
            session_date=now.date().isoformat(),
            config_version=config_version,
            tree=TaskTree(),
        )

    @property
    def today(self) -> datetime.date:
        return datetime.date.fromisoformat(self.session_date)


def serialize(ctx: DialogueContext) -> bytes:
    envelope = {
        "format": FORMAT_TAG,
        "schema_version": SCHEMA_VERSION,
        "body": {
            "session_id": ctx.session_id,
            "created_at": ctx.created_at,
            "session_date": ctx.session_date,
            "config_version": ctx.config_version,
            "tree": ctx.tree.to_dict(),
            "multi_turn": ctx.multi_turn.to_dict(),
            "entity_history": ctx.entity_history.to_dict(),
            "rotation": dict(sorted(ctx.rotation.items())),
        },
    }
    return json.dumps(envelope, sort_keys=True, separators=(",", ":")).encode("utf-8")


def deserialize(payload: bytes) -> DialogueContext:
    try:
        envelope = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptPayload(str(exc)) from exc
    if not isinstance(envelope, dict) or envelope.get("format") != FORMAT_TAG:
        raise CorruptPayload("missing or wrong format tag")
    if envelope.get("schema_version") != SCHEMA_VERSION:
        raise VersionMismatch(
            "schema version %r, expected %r" % (envelope.get("schema_version"), SCHEMA_VERSION)
        )
    try:
        body = envelope["body"]
        return DialogueContext(
            session_id=body["session_id"],
            created_at=body["created_at"],
            session_date=body["session_date"],
            config_version=body["config_version"],
            tree=TaskTree.from_dict(body["tree"]),
            multi_turn=MultiTurnState.from_dict(body["multi_turn"]),
            entity_history=EntityHistory.from_dict(body["entity_history"]),
            rotation=dict(body.get("rotation", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptPayload("malformed body: %s" % exc) from exc


class ContextStore:
    """Interface: create/load/save/delete contexts keyed by session id."""

    def save(self, ctx: DialogueContext) -> None:
        raise NotImplementedError

    def load(self, session_id: str) -> DialogueContext:
        raise NotImplementedError

    def delete(self, session_id: str) -> None:
        raise NotImplementedError

    def exists(self, session_id: str) -> bool:
        try:
            self.load(session_id)
            return True
        except NotFound:
            return False


class MemoryStore(ContextStore):
    """Stand-alone mode. Still round-trips through bytes so both modes
    exercise the exact same serialization path."""

    def __init__(self) -> None:
        self._data: Dict[str, bytes] = {}
        self._lock = threading.Lock()

    def save(self, ctx: DialogueContext) -> None:
        payload = serialize(ctx)
        with self._lock:
            self._data[ctx.session_id] = payload

    def load(self, session_id: str) -> DialogueContext:
        with self._lock:
            payload = self._data.get(session_id)
        if payload is None:
            raise NotFound(session_id)
        return deserialize(payload)

    def delete(self, session_id: str) -> None:
        with self._lock:
            self._data.pop(session_id, None)


class _RespConnection:
    """Minimal client for the text protocol (arrays of bulk strings)."""

    def __init__(self, host: str, port: int, timeout: float = 5.0) -> None:
        self._host = host
        self._port = port
        self._timeout = timeout
        self._sock: Optional[socket.socket] = None
        self._buffer = b""

    def _connect(self) -> None:
        try:
            self._sock = socket.create_connection((self._host, self._port), timeout=self._timeout)
        except OSError as exc:
            self._sock = None
            raise ConnectionError_("%s:%d unreachable: %s" % (self._host, self._port, exc)) from exc

    def close(self) -> None:
        if self._sock is not None:
            try:
                self._sock.close()
            finally:
                self._sock = None
        self._buffer = b""

    def command(self, *parts: bytes):
        if self._sock is None:
            self._connect()
        message = b"*%d\r\n" % len(parts)
        for part in parts:
            message += b"$%d\r\n%s\r\n" % (len(part), part)
        try:
            self._sock.sendall(message)
            return self._read_reply()
        except OSError as exc:
            self.close()
            raise ConnectionError_(str(exc)) from exc

    def _read_line(self) -> bytes:
        while b"\r\n" not in self._buffer:
            chunk = self._sock.recv(65536)
            if not chunk:
                raise ConnectionError_("connection closed by server")
            self._buffer += chunk
        line, self._buffer = self._buffer.split(b"\r\n", 1)
        return line

    def _read_exact(self, n: int) -> bytes:
        while len(self._buffer) < n + 2:
            chunk = self._sock.recv(65536)
            if not chunk:
                raise ConnectionError_("connection closed by server")
            self._buffer += chunk
        data, self._buffer = self._buffer[:n], self._buffer[n + 2 :]
        return data

    def _read_reply(self):
        line = self._read_line()
        marker, rest = line[:1], line[1:]
        if marker == b"+":
            return rest.decode()
        if marker == b"-":
            raise StoreError("server error: %s" % rest.decode())
        if marker == b":":
            return int(rest)
        if marker == b"$":
            length = int(rest)
            if length < 0:
                return None
            return self._read_exact(length)
        raise StoreError("unexpected reply marker %r" % marker)


class KvStore(ContextStore):
    """Distributed mode: contexts live in an external key-value server."""

    def __init__(self, host: str, port: int, ttl: Optional[int] = None, timeout: float = 5.0) -> None:
        self._conn = _RespConnection(host, port, timeout)
        self._ttl = ttl
        self._lock = threading.Lock()
        with self._lock:
            reply = self._conn.command(b"PING")
        if reply != "PONG":
            raise ConnectionError_("unexpected PING reply: %r" % (reply,))

    @staticmethod
    def key(session_id: str) -> bytes:
        return (KEY_PREFIX + session_id).encode("utf-8")

    def save(self, ctx: DialogueContext) -> None:
        payload = serialize(ctx)
        args = [b"SET", self.key(ctx.session_id), payload]
        if self._ttl is not None:
            args += [b"EX", str(self._ttl).encode()]
        with self._lock:
            reply = self._conn.command(*args)
        if reply != "OK":
            raise StoreError("SET failed: %r" % (reply,))

    def load(self, session_id: str) -> DialogueContext:
        with self._lock:
            payload = self._conn.command(b"GET", self.key(session_id))
        if payload is None:
            raise NotFound(session_id)
        return deserialize(payload)

    def delete(self, session_id: str) -> None:
        with self._lock:
            self._conn.command(b"DEL", self.key(session_id))

    def close(self) -> None:
        self._conn.close()


def make_store(mode: str, address: Optional[str] = None, ttl: Optional[int] = None) -> ContextStore:
    """Factory: ``memory`` needs nothing, ``kv`` needs host:port."""
    if mode == "memory":
        return MemoryStore()
    if mode == "kv":
        if not address:
            raise StoreError("kv mode requires an address (host:port)")
        host, _, port_text = address.rpartition(":")
        if not host or not port_text.isdigit():
            raise StoreError("bad address %r, expected host:port" % address)
        return KvStore(host, int(port_text), ttl=ttl)
    raise StoreError("unknown store mode %r" % mode)
