"""Domain model for compiled bot configuration.

A bot is described by three YAML files (tasks, entities, response templates)
plus an optional policy file. Loading compiles them into an immutable
:class:`BotConfig`; nothing here is mutated after load, so one BotConfig can
be shared read-only across concurrent sessions.
"""

import hashlib
import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from taskbot.errors import ArityError, UnknownOperator

SEMANTIC_TYPES = (
    "CARDINAL",
    "DATE",
    "TIME",
    "EMAIL",
    "ZIPCODE",
    "PERSON",
    "LOCATION",
    "PICKLIST",
    "USER_UTT",
)

GROUP_OPERATORS = ("VERIFY", "INSERT", "API", "INFORM")

#: Operators valid as success-expression keys.
SUCCESS_KEYS = ("AND", "OR", "TASK") + GROUP_OPERATORS

DEFAULT_INTENT_THRESHOLD = 0.6
DEFAULT_MAX_TURNS = 10

#: General response templates shipped with the engine. A bot's template file
#: overrides any of these by name; each value is a list of variants cycled
#: round-robin per session.
DEFAULT_TEMPLATES: Dict[str, Tuple[str, ...]] = {
    "greeting": (
        "Hi there, I am the digital assistant for {bot_name}. What can I do for you?",
    ),
    "goodbye": ("Thank you, goodbye!",),
    "task_acknowledge": ("I'd be happy to help you {description}.",),
    "subtask_intro": ("First, I need to {description}.",),
    "ask_entity": ("Could you tell me your {entity}?",),
    "suggest_options": ("You can choose from: {options}.",),
    "entity_ack": ("Got it.",),
    "verify_failed": ("I am sorry, but I could not recognize your {entity}.",),
    "extract_retry": ("Sorry, I didn't catch your {entity}.",),
    "confirm_entity": ("Just to confirm, your {entity} is {value}, correct?",),
    "disambiguate": (
        "I got multiple possible answers for {entity}: {options}, which one did you mean?",
    ),
    "task_already_done": (
        "It looks like we already took care of that. Is there anything else I can help you with?",
    ),
    "anything_else": ("Is there anything else I can help you with?",),
    "clarify": ("I'm sorry, I don't quite understand. Could you rephrase that?",),
    "apology": (
        "I'm sorry, something went wrong on my end. Could you try that again?",
    ),
}


# --- success expressions ----------------------------------------------------

class SuccessExpr:
    """Base class for compiled success-expression AST nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class And(SuccessExpr):
    children: Tuple["SuccessExpr", ...]


@dataclass(frozen=True)
class Or(SuccessExpr):
    children: Tuple["SuccessExpr", ...]


@dataclass(frozen=True)
class GroupLeaf(SuccessExpr):
    operator: str  # VERIFY | INSERT | API | INFORM
    group_name: str


@dataclass(frozen=True)
class TaskRef(SuccessExpr):
    task_name: str


def compile_success_expression(raw, location: str = "success") -> SuccessExpr:
    """Compile the YAML structure of a success block into an AST.

    ``raw`` is a single-key mapping: AND/OR map to lists of child
    expressions, VERIFY/INSERT/API/INFORM name exactly one entity group,
    and TASK names exactly one sub-task. Child order is preserved.
    """
    if not isinstance(raw, dict) or len(raw) != 1:
        raise ArityError(location, "expected a single-operator mapping, got %r" % (raw,))
    key, value = next(iter(raw.items()))
    if key not in SUCCESS_KEYS:
        raise UnknownOperator(location, "unknown operator %r (expected one of %s)" % (key, ", ".join(SUCCESS_KEYS)))

    if key in ("AND", "OR"):
        if not isinstance(value, list) or not value:
            raise ArityError(f"{location}.{key}", "%s requires a non-empty list of children" % key)
        children = tuple(
            compile_success_expression(child, f"{location}.{key}[{i}]")
            for i, child in enumerate(value)
        )
        return And(children) if key == "AND" else Or(children)

    # operator leaves: exactly one group / task name
    if not isinstance(value, list) or len(value) != 1 or not isinstance(value[0], str):
        raise ArityError(f"{location}.{key}", "%s must name exactly one target" % key)
    if key == "TASK":
        return TaskRef(value[0])
    return GroupLeaf(key, value[0])


def serialize_success_expression(expr: SuccessExpr):
    """Inverse of :func:`compile_success_expression` (round-trip stable)."""
    if isinstance(expr, And):
        return {"AND": [serialize_success_expression(c) for c in expr.children]}
    if isinstance(expr, Or):
        return {"OR": [serialize_success_expression(c) for c in expr.children]}
    if isinstance(expr, GroupLeaf):
        return {expr.operator: [expr.group_name]}
    if isinstance(expr, TaskRef):
        return {"TASK": [expr.task_name]}
    raise TypeError("not a success expression: %r" % (expr,))


def iter_task_refs(expr: SuccessExpr):
    """Yield every task name referenced anywhere under ``expr``."""
    if isinstance(expr, (And, Or)):
        for child in expr.children:
            yield from iter_task_refs(child)
    elif isinstance(expr, TaskRef):
        yield expr.task_name


def iter_group_leaves(expr: SuccessExpr):
    if isinstance(expr, (And, Or)):
        for child in expr.children:
            yield from iter_group_leaves(child)
    elif isinstance(expr, GroupLeaf):
        yield expr


# --- tasks and entities ----------------------------------------------------

@dataclass(frozen=True)
class EntitySlotSpec:
    """Per-task slot configuration for one entity."""

    name: str
    function: Optional[str] = None
    confirm: bool = False
    prompt: Tuple[str, ...] = ()
    response: Tuple[str, ...] = ()


@dataclass(frozen=True)
class FinishResponse:
    success: Tuple[str, ...] = ()
    failure: Tuple[str, ...] = ()


@dataclass(frozen=True)
class TaskDef:
    name: str
    description: str = ""
    samples: Tuple[str, ...] = ()
    entity_specs: Dict[str, EntitySlotSpec] = field(default_factory=dict)
    entity_groups: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    group_min_required: Dict[str, int] = field(default_factory=dict)
    success: Optional[SuccessExpr] = None
    finish_response: FinishResponse = field(default_factory=FinishResponse)
    task_finish_function: Optional[str] = None
    repeat: bool = False
    repeat_response: Tuple[str, ...] = ()
    max_turns: int = DEFAULT_MAX_TURNS

    @property
    def is_polarity(self) -> bool:
        """Polarity pseudo-tasks feed the yes/no classifier, not the task registry."""
        return self.description == "polarity" and self.name in ("positive", "negative")

    def min_required(self, group_name: str) -> int:
        members = self.entity_groups.get(group_name, ())
        return self.group_min_required.get(group_name, len(members))


@dataclass(frozen=True)
class EntityDef:
    name: str
    semantic_type: Optional[str] = None
    methods: Tuple[str, ...] = ()  # subset of {pattern, fuzzy_matching, user_utterance}
    picklist: Tuple[str, ...] = ()
    suggest_value: bool = False


@dataclass(frozen=True)
class FaqEntry:
    question: str
    answer: str


@dataclass(frozen=True)
class BotConfig:
    """Compiled, immutable configuration for one bot."""

    bot_name: str = "this service"
    text_bot: bool = True
    tasks: Dict[str, TaskDef] = field(default_factory=dict)
    entities: Dict[str, EntityDef] = field(default_factory=dict)
    templates: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    faqs: Tuple[FaqEntry, ...] = ()
    policy: object = None  # PolicyTreeDef; typed loosely to avoid an import cycle
    intent_threshold: float = DEFAULT_INTENT_THRESHOLD

    def user_tasks(self) -> Dict[str, TaskDef]:
        """Tasks addable to a session's task tree (polarity pseudo-tasks excluded)."""
        return {name: t for name, t in self.tasks.items() if not t.is_polarity}

    def polarity_samples(self) -> Dict[str, Tuple[str, ...]]:
        return {t.name: t.samples for t in self.tasks.values() if t.is_polarity}

    def version_hash(self) -> str:
        """Stable fingerprint used to detect config drift on context load."""
        canon = {
            "bot": self.bot_name,
            "tasks": {
                name: {
                    "samples": list(t.samples),
                    "entities": sorted(t.entity_specs),
                    "groups": {g: list(m) for g, m in t.entity_groups.items()},
                    "success": serialize_success_expression(t.success) if t.success else None,
                    "repeat": t.repeat,
                    "max_turns": t.max_turns,
                }
                for name, t in self.tasks.items()
            },
            "entities": {
                name: {"type": e.semantic_type, "methods": list(e.methods)}
                for name, e in self.entities.items()
            },
            "faqs": [[f.question, f.answer] for f in self.faqs],
            "threshold": self.intent_threshold,
        }
        digest = hashlib.sha256(json.dumps(canon, sort_keys=True).encode("utf-8"))
        return digest.hexdigest()[:12]


@dataclass
class ValidationReport:
    """Outcome of referential-integrity validation; valid iff no errors."""

    errors: List[Tuple[str, str]] = field(default_factory=list)
    warnings: List[Tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, path: str, message: str) -> None:
        self.errors.append((path, message))

    def warn(self, path: str, message: str) -> None:
        self.warnings.append((path, message))

    def format(self) -> str:
        lines = []
        for path, msg in self.errors:
            lines.append(f"ERROR   {path}: {msg}")
        for path, msg in self.warnings:
            lines.append(f"WARNING {path}: {msg}")
        if not lines:
            lines.append("OK: configuration is valid")
        return "\n".join(lines)
