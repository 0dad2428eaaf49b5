"""Turn pipeline: policy selection, action execution, response rendering."""

from importlib import import_module

from taskbot.dialogue.nlg import ResponseEvent, render_response
from taskbot.dialogue.policy import (
    DEFAULT_POLICY_YAML,
    compile_policy,
    default_policy,
    select_action,
)
from taskbot.dialogue.states import (
    KNOWN_PATHS,
    MultiTurnState,
    SingleTurnState,
    TreeView,
    build_snapshot,
)

# actions and the orchestrator depend on the context store, which itself
# serializes MultiTurnState from this package; load them on first use so
# importing taskbot.dialogue.states never recurses back through them
_LAZY = {
    "ACTION_NAMES": "taskbot.dialogue.actions",
    "TurnRuntime": "taskbot.dialogue.actions",
    "execute_action": "taskbot.dialogue.actions",
    "Engine": "taskbot.dialogue.orchestrator",
    "TurnResult": "taskbot.dialogue.orchestrator",
}

__all__ = [
    "ACTION_NAMES",
    "DEFAULT_POLICY_YAML",
    "Engine",
    "KNOWN_PATHS",
    "MultiTurnState",
    "ResponseEvent",
    "SingleTurnState",
    "TreeView",
    "TurnResult",
    "TurnRuntime",
    "build_snapshot",
    "compile_policy",
    "default_policy",
    "execute_action",
    "render_response",
    "select_action",
]


def __getattr__(name: str):
    module_name = _LAZY.get(name)
    if module_name is None:
        raise AttributeError("module %r has no attribute %r" % (__name__, name))
    return getattr(import_module(module_name), name)
