"""Node types for the and-or task tree."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

# node kinds
AND = "And"
OR = "Or"
LEAF = "Leaf"
TASK_ROOT = "TaskRoot"
REF = "Ref"
ROOT = "Root"  # the single Or node every TaskRoot hangs under

# slot statuses
UNASKED = "unasked"
ASKED = "asked"
CONFIRMING = "confirming"
FILLED_OK = "filled_ok"
FAILED = "failed"

#: How many failed attempts a slot tolerates before it is marked failed,
#: keyed by the leaf's success operator. VERIFY and API failures are final
#: (the tree immediately falls through to an alternative branch); INSERT
#: slots get one re-ask; INFORM never asks at all.
RETRY_LIMITS = {"VERIFY": 0, "INSERT": 1, "API": 0, "INFORM": 0}


@dataclass
class LeafSlotState:
    entity_name: str
    status: str = UNASKED
    accepted_value: Optional[object] = None
    attempts: int = 0
    prefill_attempted: bool = False

    def to_dict(self) -> dict:
        return {
            "entity": self.entity_name,
            "status": self.status,
            "value": self.accepted_value,
            "attempts": self.attempts,
            "prefill_attempted": self.prefill_attempted,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "LeafSlotState":
        return cls(
            entity_name=raw["entity"],
            status=raw["status"],
            accepted_value=raw.get("value"),
            attempts=raw.get("attempts", 0),
            prefill_attempted=raw.get("prefill_attempted", False),
        )


@dataclass
class TaskNode:
    id: int
    kind: str
    success: bool = False
    exhausted: bool = False
    children: Tuple[int, ...] = ()
    parent: Optional[int] = None
    # TaskRoot only
    task_name: Optional[str] = None
    # Leaf only
    group_name: Optional[str] = None
    operator: Optional[str] = None  # VERIFY | INSERT | API | INFORM
    min_required: int = 0
    slots: List[LeafSlotState] = field(default_factory=list)
    # Ref only
    ref_target: Optional[str] = None

    def slot(self, entity_name: str) -> Optional[LeafSlotState]:
        for state in self.slots:
            if state.entity_name == entity_name:
                return state
        return None

    def filled_count(self) -> int:
        return sum(1 for s in self.slots if s.status == FILLED_OK)

    def failed_count(self) -> int:
        return sum(1 for s in self.slots if s.status == FAILED)

    def label(self) -> str:
        if self.kind == ROOT:
            return "root"
        if self.kind == TASK_ROOT:
            return self.task_name or ""
        if self.kind == LEAF:
            return "%s %s" % (self.operator, self.group_name)
        if self.kind == REF:
            return "TASK %s" % self.ref_target
        return self.kind.upper()

    def to_dict(self) -> dict:
        out: Dict[str, object] = {
            "id": self.id,
            "kind": self.kind,
            "success": self.success,
            "exhausted": self.exhausted,
            "children": list(self.children),
            "parent": self.parent,
        }
        if self.kind == TASK_ROOT:
            out["task_name"] = self.task_name
        elif self.kind == LEAF:
            out["group_name"] = self.group_name
            out["operator"] = self.operator
            out["min_required"] = self.min_required
            out["slots"] = [s.to_dict() for s in self.slots]
        elif self.kind == REF:
            out["ref_target"] = self.ref_target
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "TaskNode":
        return cls(
            id=raw["id"],
            kind=raw["kind"],
            success=raw["success"],
            exhausted=raw["exhausted"],
            children=tuple(raw.get("children") or ()),
            parent=raw.get("parent"),
            task_name=raw.get("task_name"),
            group_name=raw.get("group_name"),
            operator=raw.get("operator"),
            min_required=raw.get("min_required", 0),
            slots=[LeafSlotState.from_dict(s) for s in raw.get("slots") or []],
            ref_target=raw.get("ref_target"),
        )
