"""The per-turn pipeline and the session-facing engine.

Every utterance goes through the same stages, no matter the task: NLU,
typed entity extraction scoped to what the conversation expects, state
snapshot, policy action selection, action execution, template rendering,
cross-turn state update, and a single commit to the context store. A turn
either fully applies or not at all: the context is loaded fresh, mutated
in memory, and saved once at the end, and any mid-turn error falls back
to an apology rendered against the untouched stored state.
"""

import datetime
import logging
import uuid
from dataclasses import dataclass
from typing import Callable, List, Optional, Set

from taskbot.backends import BackendRegistry
from taskbot.config.model import BotConfig
from taskbot.dialogue.actions import TurnRuntime, execute_action
from taskbot.dialogue.nlg import ResponseEvent, render_response
from taskbot.dialogue.policy import PolicyTreeDef, default_policy, select_action
from taskbot.dialogue.states import SingleTurnState, TreeView, build_snapshot
from taskbot.entities.extract import extract_candidates
from taskbot.errors import VersionMismatch
from taskbot.nlu.intent import IntentIndex, IntentMatcher, run_nlu
from taskbot.store import ContextStore, DialogueContext
from taskbot.tree.nodes import FAILED, FILLED_OK

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TurnResult:
    session_id: str
    response: str
    action: str
    turn: int
    active_task: Optional[str]
    finished_tasks: List[str]


class Engine:
    """One bot: fixed config, pluggable store, backends, and intent model."""

    def __init__(
        self,
        config: BotConfig,
        store: ContextStore,
        registry: Optional[BackendRegistry] = None,
        backend_timeout: float = 5.0,
        matcher: Optional[IntentMatcher] = None,
        clock: Optional[Callable[[], datetime.datetime]] = None,
    ) -> None:
        self.config = config
        self.store = store
        self.registry = registry if registry is not None else BackendRegistry()
        self.backend_timeout = backend_timeout
        self.index = IntentIndex.from_config(config)
        self.matcher = matcher
        self.policy: PolicyTreeDef = config.policy or default_policy()
        self.version = config.version_hash()
        self._clock = clock or (lambda: datetime.datetime.now(datetime.timezone.utc))

    # --- session lifecycle ---------------------------------------------------

    def start_session(self, session_id: Optional[str] = None) -> "tuple[str, str]":
        sid = session_id or uuid.uuid4().hex
        ctx = DialogueContext.fresh(sid, self.version, now=self._clock())
        greeting = render_response(
            [ResponseEvent("greeting", bindings={"bot_name": self.config.bot_name})],
            self.config.templates,
            ctx.rotation,
        )
        ctx.multi_turn.last_action = "greeting"
        self.store.save(ctx)
        return sid, greeting

    def delete_session(self, session_id: str) -> None:
        self.store.delete(session_id)

    def tree_snapshot(self, session_id: str) -> dict:
        return self.store.load(session_id).tree.snapshot()

    # --- the turn pipeline -----------------------------------------------------

    def _expected_types(self, ctx: DialogueContext) -> Set[str]:
        leaf = ctx.tree.current_leaf()
        if leaf is not None:
            types: Set[str] = set()
            for slot in leaf.slots:
                if slot.status in (FILLED_OK, FAILED):
                    continue
                definition = self.config.entities.get(slot.entity_name)
                if definition is not None and definition.semantic_type:
                    types.add(definition.semantic_type)
            return types
        return {e.semantic_type for e in self.config.entities.values() if e.semantic_type}

    def process_turn(self, session_id: str, utterance: str) -> TurnResult:
        ctx = self.store.load(session_id)
        if ctx.config_version != self.version:
            raise VersionMismatch(
                "session %s was created under config %s, engine runs %s"
                % (session_id, ctx.config_version, self.version)
            )

        nlu = run_nlu(utterance, self.index, self.matcher)
        candidates = extract_candidates(
            utterance, self._expected_types(ctx), self.config.entities, ctx.today
        )
        single = SingleTurnState(
            utterance=utterance,
            tokens=nlu.tokens,
            intent=nlu.intent,
            suppressed_intent=nlu.suppressed_intent,
            got_entity_info=bool(candidates),
            faq_answer=nlu.faq_answer,
            polarity=nlu.polarity,
            negation=bool(nlu.negations),
            is_greeting=nlu.is_greeting,
            is_goodbye=nlu.is_goodbye,
        )

        exceeded = False
        active = ctx.tree.active_task()
        if active is not None:
            taskdef = self.config.user_tasks().get(active)
            if taskdef is not None:
                exceeded = ctx.tree.tick_and_check_turn_limit(active, taskdef.max_turns)

        cursor = ctx.tree.cursor
        view = TreeView(
            active=cursor is not None,
            task=cursor.task if cursor else None,
            current_entity=cursor.entity if cursor else None,
            stack_depth=len(ctx.tree.task_stack),
            turn_limit_exceeded=exceeded,
        )
        snapshot = build_snapshot(single, ctx.multi_turn, view)
        action = select_action(self.policy, snapshot)

        rt = TurnRuntime(
            config=self.config,
            ctx=ctx,
            single=single,
            candidates=list(candidates),
            registry=self.registry,
            backend_timeout=self.backend_timeout,
        )
        degraded = False
        try:
            execute_action(action, rt)
            response = render_response(rt.events, self.config.templates, ctx.rotation)
        except Exception:
            logger.exception("turn degraded (session %s, action %s)", session_id, action)
            degraded = True
            ctx = self.store.load(session_id)  # discard half-applied effects
            response = render_response(
                [ResponseEvent("apology")], self.config.templates, ctx.rotation
            )

        multi = ctx.multi_turn
        multi.global_turn += 1
        multi.last_action = action
        if not degraded:
            multi.asked_entity = rt.asked_entity
            multi.asked_task = rt.asked_task
            multi.presented_options = rt.presented_options

        if not response.strip():
            response = render_response(
                [ResponseEvent("clarify")], self.config.templates, ctx.rotation
            )

        self.store.save(ctx)
        return TurnResult(
            session_id=session_id,
            response=response,
            action=action,
            turn=multi.global_turn,
            active_task=ctx.tree.active_task(),
            finished_tasks=ctx.tree.finished_tasks(),
        )
