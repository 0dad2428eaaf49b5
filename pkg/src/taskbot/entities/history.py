"""Session-scoped record of accepted entity values.

Append only. Lookups return the most recent record so a re-collected
value shadows earlier ones without losing them.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional


@dataclass(frozen=True)
class EntityRecord:
    entity_name: str
    value: object
    task_name: str
    turn: int
    semantic_type: Optional[str] = None


class EntityHistory:
    def __init__(self) -> None:
        self._records: List[EntityRecord] = []

    def record(self, record: EntityRecord) -> None:
        self._records.append(record)

    def lookup(self, entity_name: str) -> Optional[EntityRecord]:
        for record in reversed(self._records):
            if record.entity_name == entity_name:
                return record
        return None

    def lookup_by_type(self, semantic_type: str) -> Optional[EntityRecord]:
        for record in reversed(self._records):
            if record.semantic_type == semantic_type:
                return record
        return None

    def collected(self, task_name: str) -> Dict[str, object]:
        """Latest value per entity accepted while the given task was active."""
        values: Dict[str, object] = {}
        for record in self._records:
            if record.task_name == task_name:
                values[record.entity_name] = record.value
        return values

    def all_records(self) -> List[EntityRecord]:
        return list(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def to_dict(self) -> List[dict]:
        return [
            {
                "entity_name": r.entity_name,
                "value": r.value,
                "task_name": r.task_name,
                "turn": r.turn,
                "semantic_type": r.semantic_type,
            }
            for r in self._records
        ]

    @classmethod
    def from_dict(cls, payload: List[dict]) -> "EntityHistory":
        history = cls()
        for item in payload:
            history.record(
                EntityRecord(
                    entity_name=item["entity_name"],
                    value=item["value"],
                    task_name=item["task_name"],
                    turn=item["turn"],
                    semantic_type=item.get("semantic_type"),
                )
            )
        return history
