"""Dialogue state containers and the policy snapshot contract.

Three families of state feed action selection:

* single-turn: facts about the current utterance only, rebuilt every turn
* multi-turn: everything that survives between turns (pending questions,
  turn counters, what the bot last asked)
* tree: a read-only view of the session's task tree

``build_snapshot`` flattens them into the path → value mapping that policy
conditions evaluate against; ``KNOWN_PATHS`` is the full set of legal paths.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

POLARITY_POSITIVE = "positive"
POLARITY_NEGATIVE = "negative"
POLARITY_NEUTRAL = "neutral"


@dataclass(frozen=True)
class SingleTurnState:
    """What this one utterance told us. Never persisted."""

    utterance: str = ""
    tokens: Tuple[str, ...] = ()
    intent: Optional[str] = None
    suppressed_intent: Optional[str] = None
    got_entity_info: bool = False
    faq_answer: Optional[str] = None
    polarity: str = POLARITY_NEUTRAL
    negation: bool = False
    is_greeting: bool = False
    is_goodbye: bool = False

    @property
    def got_intent(self) -> bool:
        return self.intent is not None

    @property
    def got_intent_and_info(self) -> bool:
        return self.got_intent and self.got_entity_info

    @property
    def faq_hit(self) -> bool:
        return self.faq_answer is not None


@dataclass(frozen=True)
class PendingConfirmation:
    """Bot asked "is <value> correct?" for a slot and awaits yes/no."""

    task: str
    entity: str
    value: object


@dataclass(frozen=True)
class PendingDisambiguation:
    """Bot presented several candidate values for one slot."""

    task: str
    entity: str
    options: Tuple[str, ...]


@dataclass(frozen=True)
class PendingRepeatOffer:
    """Bot offered to run a repeatable task again and awaits yes/no."""

    task: str


@dataclass
class MultiTurnState:
    """Cross-turn dialogue memory. At most one pending question at a time."""

    global_turn: int = 0
    last_action: Optional[str] = None
    asked_entity: Optional[str] = None
    asked_task: Optional[str] = None
    pending_confirmation: Optional[PendingConfirmation] = None
    pending_disambiguation: Optional[PendingDisambiguation] = None
    pending_repeat_offer: Optional[PendingRepeatOffer] = None
    presented_options: Tuple[str, ...] = ()

    @property
    def expecting_yes_no(self) -> bool:
        return self.pending_confirmation is not None or self.pending_repeat_offer is not None

    def pending_count(self) -> int:
        return sum(
            1
            for p in (self.pending_confirmation, self.pending_disambiguation, self.pending_repeat_offer)
            if p is not None
        )

    def clear_pending(self) -> None:
        self.pending_confirmation = None
        self.pending_disambiguation = None
        self.pending_repeat_offer = None

    def to_dict(self) -> dict:
        return {
            "global_turn": self.global_turn,
            "last_action": self.last_action,
            "asked_entity": self.asked_entity,
            "asked_task": self.asked_task,
            "pending_confirmation": (
                {"task": self.pending_confirmation.task, "entity": self.pending_confirmation.entity, "value": self.pending_confirmation.value}
                if self.pending_confirmation
                else None
            ),
            "pending_disambiguation": (
                {"task": self.pending_disambiguation.task, "entity": self.pending_disambiguation.entity, "options": list(self.pending_disambiguation.options)}
                if self.pending_disambiguation
                else None
            ),
            "pending_repeat_offer": ({"task": self.pending_repeat_offer.task} if self.pending_repeat_offer else None),
            "presented_options": list(self.presented_options),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "MultiTurnState":
        state = cls(
            global_turn=raw.get("global_turn", 0),
            last_action=raw.get("last_action"),
            asked_entity=raw.get("asked_entity"),
            asked_task=raw.get("asked_task"),
            presented_options=tuple(raw.get("presented_options") or ()),
        )
        pc = raw.get("pending_confirmation")
        if pc:
            state.pending_confirmation = PendingConfirmation(pc["task"], pc["entity"], pc["value"])
        pd = raw.get("pending_disambiguation")
        if pd:
            state.pending_disambiguation = PendingDisambiguation(pd["task"], pd["entity"], tuple(pd["options"]))
        pr = raw.get("pending_repeat_offer")
        if pr:
            state.pending_repeat_offer = PendingRepeatOffer(pr["task"])
        return state


@dataclass(frozen=True)
class TreeView:
    """Read-only facts about the task tree, as policy conditions see them."""

    active: bool = False
    task: Optional[str] = None
    current_entity: Optional[str] = None
    stack_depth: int = 0
    turn_limit_exceeded: bool = False


KNOWN_PATHS = frozenset(
    {
        "single.got_intent",
        "single.got_entity_info",
        "single.got_intent_and_info",
        "single.faq_hit",
        "single.polarity",
        "single.negation",
        "single.is_greeting",
        "single.is_goodbye",
        "single.intent",
        "single.suppressed_intent",
        "multi.global_turn",
        "multi.last_action",
        "multi.asked_entity",
        "multi.expecting_yes_no",
        "multi.pending_confirmation",
        "multi.pending_disambiguation",
        "multi.pending_repeat_offer",
        "tree.active",
        "tree.task",
        "tree.intent_is_current",
        "tree.turn_limit_exceeded",
        "tree.stack_depth",
        "tree.current_entity",
    }
)


def build_snapshot(single: SingleTurnState, multi: MultiTurnState, tree: TreeView) -> Dict[str, object]:
    """Flatten the three state families for condition evaluation.

    Optional strings are mapped to '' so comparisons never meet None.
    Covers exactly KNOWN_PATHS.
    """
    return {
        "single.got_intent": single.got_intent,
        "single.got_entity_info": single.got_entity_info,
        "single.got_intent_and_info": single.got_intent_and_info,
        "single.faq_hit": single.faq_hit,
        "single.polarity": single.polarity,
        "single.negation": single.negation,
        "single.is_greeting": single.is_greeting,
        "single.is_goodbye": single.is_goodbye,
        "single.intent": single.intent or "",
        "single.suppressed_intent": single.suppressed_intent or "",
        "multi.global_turn": multi.global_turn,
        "multi.last_action": multi.last_action or "",
        "multi.asked_entity": multi.asked_entity or "",
        "multi.expecting_yes_no": multi.expecting_yes_no,
        "multi.pending_confirmation": multi.pending_confirmation is not None,
        "multi.pending_disambiguation": multi.pending_disambiguation is not None,
        "multi.pending_repeat_offer": multi.pending_repeat_offer is not None,
        "tree.active": tree.active,
        "tree.task": tree.task or "",
        "tree.intent_is_current": bool(single.intent) and single.intent == tree.task,
        "tree.turn_limit_exceeded": tree.turn_limit_exceeded,
        "tree.stack_depth": tree.stack_depth,
        "tree.current_entity": tree.current_entity or "",
    }
