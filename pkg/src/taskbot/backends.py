"""Bridge between dialogue actions and task-specific backend functions.

Handlers are looked up by the ``function:`` string on an entity slot or
task. A plain name hits the in-process registry; an http(s) URL becomes a
POST carrying a fixed-shape JSON body. Whatever goes wrong on the far
side, the caller only ever sees a BackendResult: faults are reported as
``success=False`` with no message, never as an exception.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import requests

from taskbot.errors import DuplicateHandler, UnknownHandler

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 5.0


@dataclass(frozen=True)
class BackendRequest:
    session_id: str
    task: str
    entity: Optional[str]
    value: object
    collected: Dict[str, object] = field(default_factory=dict)

    def to_payload(self) -> Dict[str, object]:
        # fixed key order is part of the wire contract
        return {
            "session_id": self.session_id,
            "task": self.task,
            "entity": self.entity,
            "value": self.value,
            "collected": dict(self.collected),
        }


@dataclass(frozen=True)
class BackendResult:
    success: bool
    message: str = ""
    faulted: bool = False


Handler = Callable[[BackendRequest], BackendResult]


class BackendRegistry:
    """Name to handler mapping. Registration is write once per name."""

    def __init__(self) -> None:
        self._handlers: Dict[str, Handler] = {}

    def register(self, name: str, handler: Handler) -> None:
        if name in self._handlers:
            raise DuplicateHandler(name)
        self._handlers[name] = handler

    def get(self, name: str) -> Handler:
        try:
            return self._handlers[name]
        except KeyError:
            raise UnknownHandler(name) from None

    def __contains__(self, name: str) -> bool:
        return name in self._handlers

    def names(self) -> list:
        return sorted(self._handlers)


def _call_http(url: str, request: BackendRequest, timeout: float) -> BackendResult:
    response = requests.post(url, json=request.to_payload(), timeout=timeout)
    response.raise_for_status()
    body = response.json()
    if not isinstance(body, dict) or not isinstance(body.get("success"), bool):
        raise ValueError("malformed backend response: %r" % (body,))
    return BackendResult(success=body["success"], message=str(body.get("message", "")))


def dispatch(
    function: str,
    request: BackendRequest,
    registry: BackendRegistry,
    timeout: float = DEFAULT_TIMEOUT,
) -> BackendResult:
    """Run a backend function and absorb its faults.

    A handler that raises, an unreachable URL, a timeout, or a malformed
    response all come back as a faulted failure; the dialogue layer
    apologizes and retries rather than crashing the turn.
    """
    try:
        if function.startswith("http://") or function.startswith("https://"):
            return _call_http(function, request, timeout)
        handler = registry.get(function)
        result = handler(request)
        if not isinstance(result, BackendResult):
            raise TypeError("handler %r returned %r" % (function, result))
        return result
    except UnknownHandler:
        raise
    except Exception as exc:
        logger.warning("backend %r faulted: %s", function, exc)
        return BackendResult(success=False, message="", faulted=True)
