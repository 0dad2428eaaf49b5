from taskbot.tree.manager import (
    AT_LEAF,
    COMPLETE,
    IDLE,
    TASK_FAILED,
    Cursor,
    TaskTree,
    TraversalResult,
)
from taskbot.tree.nodes import (
    AND,
    ASKED,
    CONFIRMING,
    FAILED,
    FILLED_OK,
    LEAF,
    OR,
    REF,
    RETRY_LIMITS,
    ROOT,
    TASK_ROOT,
    UNASKED,
    LeafSlotState,
    TaskNode,
)

__all__ = [
    "AT_LEAF",
    "COMPLETE",
    "IDLE",
    "TASK_FAILED",
    "Cursor",
    "TaskTree",
    "TraversalResult",
    "AND",
    "ASKED",
    "CONFIRMING",
    "FAILED",
    "FILLED_OK",
    "LEAF",
    "OR",
    "REF",
    "RETRY_LIMITS",
    "ROOT",
    "TASK_ROOT",
    "UNASKED",
    "LeafSlotState",
    "TaskNode",
]
