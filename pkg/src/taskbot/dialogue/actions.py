"""Dialogue actions: what the bot does once the policy has chosen.

Every action receives the same runtime bundle (config, session context,
single-turn facts, extracted candidates, backend registry) and appends
response events to it. The shared workhorse is ``_advance``: drive the
tree forward, committing resolved values through backends, draining
INFORM leaves, cascading finishes and failures up the stack, and stopping
at the next thing to say.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from taskbot.backends import BackendRegistry, BackendRequest, BackendResult, dispatch
from taskbot.config.model import BotConfig, EntitySlotSpec, TaskDef
from taskbot.dialogue.nlg import ResponseEvent
from taskbot.dialogue.states import (
    MultiTurnState,
    PendingConfirmation,
    PendingDisambiguation,
    PendingRepeatOffer,
    SingleTurnState,
)
from taskbot.entities.extract import EntityCandidate
from taskbot.entities.history import EntityRecord
from taskbot.entities.resolve import (
    AMBIGUOUS,
    ASSIGNED,
    SlotRequest,
    resolve_choice,
    resolve_slots,
)
from taskbot.errors import TaskAlreadyComplete, UnknownAction, UnknownHandler
from taskbot.store import DialogueContext
from taskbot.tree.manager import AT_LEAF, COMPLETE, IDLE, TASK_FAILED
from taskbot.tree.nodes import FAILED, FILLED_OK

logger = logging.getLogger(__name__)

ACTION_NAMES = frozenset(
    {
        "greeting",
        "new_task",
        "new_task_with_info",
        "continue_task",
        "confirm_entity",
        "handle_yes",
        "handle_no",
        "disambiguate",
        "answer_faq",
        "finish_task",
        "fail_task",
        "quit_task_turn_limit",
        "switch_task",
        "fallback_clarify",
        "goodbye",
    }
)

COMMIT_ACCEPTED = "accepted"
COMMIT_REJECTED = "rejected"
COMMIT_FAULT = "fault"
COMMIT_CONFIRM = "confirm"

_ADVANCE_GUARD = 200  # hard stop against a traversal that stopped converging


@dataclass
class TurnRuntime:
    """Everything one action execution may read or mutate."""

    config: BotConfig
    ctx: DialogueContext
    single: SingleTurnState
    candidates: List[EntityCandidate]
    registry: BackendRegistry
    backend_timeout: float = 5.0
    events: List[ResponseEvent] = field(default_factory=list)
    asked_entity: Optional[str] = None
    asked_task: Optional[str] = None
    presented_options: Tuple[object, ...] = ()

    @property
    def tree(self):
        return self.ctx.tree

    @property
    def multi(self) -> MultiTurnState:
        return self.ctx.multi_turn

    @property
    def tasks(self) -> Dict[str, TaskDef]:
        return self.config.user_tasks()

    def emit(self, key: str, variants: Sequence[str] = (), **bindings) -> None:
        self.events.append(ResponseEvent(key=key, variants=tuple(variants), bindings=dict(bindings)))


def _display(entity_name: str) -> str:
    return entity_name.replace("_", " ")


def _join_options(options: Sequence[object]) -> str:
    texts = [str(o) for o in options]
    if len(texts) <= 1:
        return "".join(texts)
    return ", ".join(texts[:-1]) + " and " + texts[-1]


def _slot_spec(task: TaskDef, entity: str) -> EntitySlotSpec:
    return task.entity_specs.get(entity) or EntitySlotSpec(name=entity)


def _call_backend(rt: TurnRuntime, function: str, task_name: str, entity: Optional[str], value) -> BackendResult:
    request = BackendRequest(
        session_id=rt.ctx.session_id,
        task=task_name,
        entity=entity,
        value=value,
        collected=rt.ctx.entity_history.collected(task_name),
    )
    try:
        return dispatch(function, request, rt.registry, timeout=rt.backend_timeout)
    except UnknownHandler:
        logger.error("no backend registered for %r (task %s)", function, task_name)
        return BackendResult(success=False, message="", faulted=True)


def _emit_apology(rt: TurnRuntime) -> None:
    rt.emit("apology")
    rt.asked_entity = None


def _emit_prompt(rt: TurnRuntime, task: TaskDef, entity: str) -> None:
    spec = _slot_spec(task, entity)
    if spec.prompt:
        rt.emit("prompt:%s:%s" % (task.name, entity), spec.prompt, entity=_display(entity))
    else:
        rt.emit("ask_entity", entity=_display(entity))
    definition = rt.config.entities.get(entity)
    if definition is not None and definition.suggest_value and definition.picklist:
        rt.emit("suggest_options", options=", ".join(definition.picklist))
        rt.presented_options = tuple(definition.picklist)
    rt.tree.mark_slot_asked(rt.tree.cursor.leaf_id, entity)
    rt.asked_entity = entity
    rt.asked_task = task.name


def _emit_failure(rt: TurnRuntime, leaf, entity: str, quiet: bool = False) -> None:
    """Say the right thing after a slot just took a failed outcome."""
    if quiet:
        return
    slot = leaf.slot(entity)
    operator = leaf.operator or ""
    if operator == "VERIFY":
        rt.emit("verify_failed", entity=_display(entity))
    elif operator == "INSERT":
        if slot is not None and slot.status != FAILED:
            rt.emit("extract_retry", entity=_display(entity))  # a re-ask follows
        else:
            rt.emit("verify_failed", entity=_display(entity))
    # API and INFORM failures cascade silently: the tree falls through to
    # an alternative branch or the task failure response speaks


def _record_history(rt: TurnRuntime, task_name: str, entity: str, value) -> None:
    definition = rt.config.entities.get(entity)
    rt.ctx.entity_history.record(
        EntityRecord(
            entity_name=entity,
            value=value,
            task_name=task_name,
            turn=rt.multi.global_turn,
            semantic_type=definition.semantic_type if definition else None,
        )
    )


def _commit_value(
    rt: TurnRuntime,
    task: TaskDef,
    leaf,
    entity: str,
    value,
    confirmed: bool = False,
    quiet: bool = False,
) -> str:
    """Push one value into the current slot, through its backend if any.

    Returns one of the COMMIT_* statuses. ``confirmed`` skips the
    confirmation question (the user already said yes); ``quiet`` is for
    history pre-fills, which on any hiccup silently fall back to asking.
    """
    spec = _slot_spec(task, entity)
    if spec.confirm and not confirmed:
        rt.multi.pending_confirmation = PendingConfirmation(task=task.name, entity=entity, value=value)
        rt.emit("confirm_entity", entity=_display(entity), value=str(value))
        rt.asked_entity = entity
        rt.asked_task = task.name
        return COMMIT_CONFIRM
    message = ""
    if spec.function:
        result = _call_backend(rt, spec.function, task.name, entity, value)
        if result.faulted:
            slot = leaf.slot(entity)
            if slot is not None:
                slot.attempts += 1  # fault: no failed transition, slot stays open
            if not quiet:
                _emit_apology(rt)
            return COMMIT_FAULT
        message = result.message
        if not result.success:
            rt.tree.record_slot_outcome(leaf.id, entity, False)
            _emit_failure(rt, leaf, entity, quiet=quiet)
            return COMMIT_REJECTED
    rt.tree.record_slot_outcome(leaf.id, entity, True, value=value)
    _record_history(rt, task.name, entity, value)
    if not quiet and spec.response:
        rt.emit(
            "response:%s:%s" % (task.name, entity),
            spec.response,
            entity=_display(entity),
            value=str(value),
            info=message,
        )
    return COMMIT_ACCEPTED


def _drain_inform(rt: TurnRuntime, task: TaskDef, leaf, entity: str) -> bool:
    """INFORM leaves need no user turn: call the backend now.

    Returns True when the turn must stop (backend fault, apology emitted).
    """
    spec = _slot_spec(task, entity)
    if spec.function:
        result = _call_backend(rt, spec.function, task.name, entity, None)
        if result.faulted:
            slot = leaf.slot(entity)
            if slot is not None:
                slot.attempts += 1
            _emit_apology(rt)
            return True
        if not result.success:
            rt.tree.record_slot_outcome(leaf.id, entity, False)
            return False
        message = result.message
    else:
        message = ""
    rt.tree.record_slot_outcome(leaf.id, entity, True, value=message or True)
    _record_history(rt, task.name, entity, message or True)
    if spec.response:
        rt.emit("response:%s:%s" % (task.name, entity), spec.response, entity=_display(entity), info=message, value=message)
    return False


def _try_prefill(rt: TurnRuntime, task: TaskDef, leaf, entity: str) -> Optional[str]:
    """Fill from an earlier task's record for the same entity name.

    Returns a COMMIT_* status when a pre-fill was attempted, None when the
    slot should be asked normally. Values collected by this same task
    never pre-fill it (a repeat run re-asks everything on purpose).
    """
    slot = leaf.slot(entity)
    if slot is None or slot.prefill_attempted or slot.status in (FILLED_OK, FAILED):
        return None
    record = rt.ctx.entity_history.lookup(entity)
    if record is None or record.task_name == task.name:
        return None
    slot.prefill_attempted = True
    spec = _slot_spec(task, entity)
    if spec.confirm:
        return _commit_value(rt, task, leaf, entity, record.value)  # asks "is X correct?"
    status = _commit_value(rt, task, leaf, entity, record.value, quiet=True)
    if status in (COMMIT_REJECTED, COMMIT_FAULT):
        return None  # fall back to asking the user
    return status


def _handle_leaf(rt: TurnRuntime) -> bool:
    """One landing on a leaf: resolve, commit, or ask. True ends the turn."""
    cursor = rt.tree.cursor
    task = rt.tasks[cursor.task]
    leaf = rt.tree.node(cursor.leaf_id)
    entity = cursor.entity

    if leaf.operator == "INFORM":
        return _drain_inform(rt, task, leaf, entity)

    # positional pick against options the bot listed last turn
    if rt.multi.presented_options and rt.multi.asked_entity == entity:
        choice = resolve_choice(rt.single.utterance, rt.multi.presented_options)
        if choice is not None:
            rt.multi.presented_options = ()
            status = _commit_value(rt, task, leaf, entity, choice)
            if status in (COMMIT_CONFIRM, COMMIT_FAULT):
                return True
            return False

    prefill = _try_prefill(rt, task, leaf, entity)
    if prefill == COMMIT_CONFIRM:
        return True
    if prefill == COMMIT_ACCEPTED:
        return False

    unfilled = [
        s.entity_name
        for s in leaf.slots
        if s.status not in (FILLED_OK, FAILED)
    ]
    requests = []
    for name in unfilled:
        definition = rt.config.entities.get(name)
        requests.append(SlotRequest(name, definition.semantic_type if definition else None))
    # a whole-utterance value only answers the question we actually asked;
    # it must not be filled from an intent statement or a stray remark
    usable = [
        c for c in rt.candidates
        if c.semantic_type != "USER_UTT" or c.source_entity == rt.multi.asked_entity
    ]
    resolutions = resolve_slots(requests, usable)

    progressed = False
    for resolution in resolutions:
        if resolution.status == AMBIGUOUS:
            rt.multi.pending_disambiguation = PendingDisambiguation(
                task=task.name, entity=resolution.entity_name, options=tuple(resolution.options)
            )
            rt.emit(
                "disambiguate",
                entity=_display(resolution.entity_name),
                options=_join_options(resolution.options),
            )
            rt.asked_entity = resolution.entity_name
            rt.asked_task = task.name
            return True
        if resolution.status != ASSIGNED:
            continue
        _consume_candidate(rt, resolution.entity_name, resolution.value, resolution.raw_text)
        status = _commit_value(rt, task, leaf, resolution.entity_name, resolution.value)
        if status in (COMMIT_CONFIRM, COMMIT_FAULT):
            return True
        progressed = True
        if status == COMMIT_REJECTED:
            break  # leaf state changed; let traversal decide what is next

    if progressed:
        return False
    _emit_prompt(rt, task, entity)
    return True


def _consume_candidate(rt: TurnRuntime, entity: str, value, raw_text: str) -> None:
    for i, candidate in enumerate(rt.candidates):
        if candidate.normalized_value == value and candidate.raw_text == raw_text:
            if candidate.source_entity is None or candidate.source_entity == entity:
                del rt.candidates[i]
                return


def _emit_finish(rt: TurnRuntime, task: TaskDef, success: bool) -> None:
    variants = task.finish_response.success if success else task.finish_response.failure
    info = ""
    if success and task.task_finish_function:
        result = _call_backend(rt, task.task_finish_function, task.name, None, None)
        if result.faulted:
            logger.warning("finish function %r faulted for task %s", task.task_finish_function, task.name)
        else:
            info = result.message
    if variants:
        key = "finish_%s:%s" % ("ok" if success else "fail", task.name)
        rt.emit(key, variants, info=info)


def _advance(rt: TurnRuntime) -> None:
    """Drive traversal until the turn has something to wait on."""
    tasks = rt.tasks
    for _ in range(_ADVANCE_GUARD):
        if rt.tree.cursor is None:
            rt.emit("anything_else")
            return
        before_task = rt.tree.cursor.task
        result = rt.tree.traverse_next_leaf(tasks)
        if result.status == AT_LEAF:
            _emit_descent_intros(rt, before_task)
            if _handle_leaf(rt):
                return
            continue
        finished = rt.tree.cursor.task
        taskdef = tasks[finished]
        if result.status == COMPLETE:
            _emit_finish(rt, taskdef, success=True)
            was_unstacked = not rt.tree.task_stack
            popped = rt.tree.finish_or_pop(tasks)
            if was_unstacked and taskdef.repeat and taskdef.repeat_response:
                rt.multi.pending_repeat_offer = PendingRepeatOffer(task=finished)
                rt.emit("repeat:%s" % finished, taskdef.repeat_response)
                return
            if popped.status == IDLE:
                rt.emit("anything_else")
                return
            continue
        if result.status == TASK_FAILED:
            _emit_finish(rt, taskdef, success=False)
            popped = rt.tree.finish_or_pop(tasks)
            if popped.status == IDLE:
                rt.emit("anything_else")
                return
            continue
        raise RuntimeError("unexpected traversal status %r" % result.status)
    raise RuntimeError("traversal failed to converge")


def _emit_descent_intros(rt: TurnRuntime, before_task: str) -> None:
    """Announce each sub-task the traversal just descended into."""
    cursor_task = rt.tree.cursor.task
    if cursor_task == before_task:
        return
    stack_tasks = [c.task for c in rt.tree.task_stack]
    chain: List[str] = []
    if before_task in stack_tasks:
        chain = stack_tasks[stack_tasks.index(before_task) + 1 :]
    chain.append(cursor_task)
    for name in chain:
        taskdef = rt.tasks.get(name)
        if taskdef is not None and taskdef.description:
            rt.emit("subtask_intro", description=taskdef.description)


# --- the actions themselves -------------------------------------------------

def _action_greeting(rt: TurnRuntime) -> None:
    rt.emit("greeting", bot_name=rt.config.bot_name)


def _action_goodbye(rt: TurnRuntime) -> None:
    rt.emit("goodbye", bot_name=rt.config.bot_name)


def _start_task(rt: TurnRuntime, task_name: str, acknowledge: bool = True) -> None:
    task = rt.tasks.get(task_name)
    if task is None:
        rt.emit("clarify")
        return
    try:
        rt.tree.add_task(task_name, rt.tasks)
    except TaskAlreadyComplete:
        rt.emit("task_already_done")
        return
    rt.multi.clear_pending()  # a question asked for the old task is moot now
    if acknowledge and task.description:
        rt.emit("task_acknowledge", description=task.description)
    # add_task already landed somewhere; announce descents it made, then
    # let _advance finish the job from the current cursor
    _emit_descent_intros(rt, task_name)
    _advance(rt)


def _action_new_task(rt: TurnRuntime) -> None:
    _start_task(rt, rt.single.intent or "")


def _action_switch_task(rt: TurnRuntime) -> None:
    _start_task(rt, rt.single.intent or "")


def _action_continue_task(rt: TurnRuntime) -> None:
    pending = rt.multi.pending_disambiguation
    if pending is not None:
        cursor = rt.tree.cursor
        if cursor is None or cursor.task != pending.task or cursor.entity != pending.entity:
            rt.multi.pending_disambiguation = None  # stale; fall through
        else:
            choice = resolve_choice(rt.single.utterance, pending.options)
            if choice is None:
                if any(c.semantic_type != "USER_UTT" for c in rt.candidates):
                    # fresh entity info beats the stale option list
                    rt.multi.pending_disambiguation = None
                    _advance(rt)
                    return
                rt.emit("disambiguate", entity=_display(pending.entity), options=_join_options(pending.options))
                rt.asked_entity = pending.entity
                return
            rt.multi.pending_disambiguation = None
            # the answer names the pick; it is not also fresh info for later slots
            rt.candidates[:] = [c for c in rt.candidates if c.normalized_value != choice]
            task = rt.tasks[pending.task]
            leaf = rt.tree.node(cursor.leaf_id)
            status = _commit_value(rt, task, leaf, pending.entity, choice)
            if status in (COMMIT_CONFIRM, COMMIT_FAULT):
                return
            _advance(rt)
            return
    if rt.tree.cursor is None:
        rt.emit("clarify")
        return
    _advance(rt)


def _action_answer_faq(rt: TurnRuntime) -> None:
    answer = rt.single.faq_answer or ""
    rt.emit("faq", (answer,))
    if rt.tree.cursor is not None and rt.tree.cursor.entity is not None:
        task = rt.tasks[rt.tree.cursor.task]
        _emit_prompt(rt, task, rt.tree.cursor.entity)
    elif rt.tree.cursor is not None:
        _advance(rt)
    else:
        rt.emit("anything_else")


def _action_handle_yes(rt: TurnRuntime) -> None:
    confirmation = rt.multi.pending_confirmation
    if confirmation is not None:
        rt.multi.pending_confirmation = None
        cursor = rt.tree.cursor
        if cursor is None or cursor.task != confirmation.task:
            rt.emit("clarify")
            return
        task = rt.tasks[confirmation.task]
        leaf = rt.tree.node(cursor.leaf_id)
        status = _commit_value(rt, task, leaf, confirmation.entity, confirmation.value, confirmed=True)
        if status in (COMMIT_CONFIRM, COMMIT_FAULT):
            return
        _advance(rt)
        return
    offer = rt.multi.pending_repeat_offer
    if offer is not None:
        rt.multi.pending_repeat_offer = None
        rt.tree.reset_task(offer.task, rt.tasks)
        rt.tree.add_task(offer.task, rt.tasks)
        _advance(rt)
        return
    _action_fallback_clarify(rt)


def _action_handle_no(rt: TurnRuntime) -> None:
    confirmation = rt.multi.pending_confirmation
    if confirmation is not None:
        rt.multi.pending_confirmation = None
        cursor = rt.tree.cursor
        if cursor is None or cursor.task != confirmation.task:
            rt.emit("clarify")
            return
        leaf = rt.tree.node(cursor.leaf_id)
        rt.tree.record_slot_outcome(leaf.id, confirmation.entity, False)
        _emit_failure(rt, leaf, confirmation.entity)
        _advance(rt)
        return
    offer = rt.multi.pending_repeat_offer
    if offer is not None:
        rt.multi.pending_repeat_offer = None
        rt.emit("anything_else")
        return
    _action_fallback_clarify(rt)


def _action_confirm_entity(rt: TurnRuntime) -> None:
    """Explicit confirmation request; normally reached through commits."""
    cursor = rt.tree.cursor
    if cursor is None or cursor.entity is None:
        rt.emit("clarify")
        return
    _action_continue_task(rt)


def _action_disambiguate(rt: TurnRuntime) -> None:
    pending = rt.multi.pending_disambiguation
    if pending is None:
        _action_fallback_clarify(rt)
        return
    rt.emit("disambiguate", entity=_display(pending.entity), options=_join_options(pending.options))
    rt.asked_entity = pending.entity


def _action_finish_task(rt: TurnRuntime) -> None:
    if rt.tree.cursor is None:
        rt.emit("anything_else")
        return
    _advance(rt)


def _action_fail_task(rt: TurnRuntime) -> None:
    if rt.tree.cursor is None:
        rt.emit("anything_else")
        return
    _quit_current_task(rt)


def _action_quit_turn_limit(rt: TurnRuntime) -> None:
    _quit_current_task(rt)


def _quit_current_task(rt: TurnRuntime) -> None:
    cursor = rt.tree.cursor
    if cursor is None:
        rt.emit("anything_else")
        return
    taskdef = rt.tasks[cursor.task]
    _emit_finish(rt, taskdef, success=False)
    rt.tree.mark_task_exhausted(cursor.task)
    popped = rt.tree.finish_or_pop(rt.tasks)
    if popped.status == IDLE:
        rt.emit("anything_else")
        return
    _advance(rt)


def _action_fallback_clarify(rt: TurnRuntime) -> None:
    if rt.multi.pending_confirmation is not None:
        pending = rt.multi.pending_confirmation
        rt.emit("confirm_entity", entity=_display(pending.entity), value=str(pending.value))
        rt.asked_entity = pending.entity
        return
    if rt.multi.pending_repeat_offer is not None:
        offer = rt.multi.pending_repeat_offer
        taskdef = rt.tasks.get(offer.task)
        if taskdef is not None and taskdef.repeat_response:
            rt.emit("repeat:%s" % offer.task, taskdef.repeat_response)
            return
        rt.emit("clarify")
        return
    if rt.tree.cursor is None:
        rt.emit("clarify")
        return
    asked = rt.multi.asked_entity
    cursor = rt.tree.cursor
    if asked and cursor.leaf_id is not None and cursor.entity == asked:
        if rt.multi.presented_options and resolve_choice(rt.single.utterance, rt.multi.presented_options) is not None:
            # "the last one" and friends; the leaf handler commits the pick
            _advance(rt)
            return
        # a non-answer to a slot question counts as a failed attempt
        leaf = rt.tree.node(cursor.leaf_id)
        rt.tree.record_slot_outcome(leaf.id, asked, False)
        _emit_failure(rt, leaf, asked)
    _advance(rt)


_ACTIONS = {
    "greeting": _action_greeting,
    "new_task": _action_new_task,
    "new_task_with_info": _action_new_task,
    "continue_task": _action_continue_task,
    "confirm_entity": _action_confirm_entity,
    "handle_yes": _action_handle_yes,
    "handle_no": _action_handle_no,
    "disambiguate": _action_disambiguate,
    "answer_faq": _action_answer_faq,
    "finish_task": _action_finish_task,
    "fail_task": _action_fail_task,
    "quit_task_turn_limit": _action_quit_turn_limit,
    "switch_task": _action_switch_task,
    "fallback_clarify": _action_fallback_clarify,
    "goodbye": _action_goodbye,
}


def execute_action(name: str, rt: TurnRuntime) -> None:
    handler = _ACTIONS.get(name)
    if handler is None:
        raise UnknownAction("execute_action", "unknown action %r" % name)
    handler(rt)
