"""YAML config loading.

Three files describe a bot: tasks (with an optional Bot header and FAQ list),
entities, and response templates. A fourth optional file overrides the
built-in action policy. Loading is strict: unknown keys, wrong value kinds,
and dangling references all fail here rather than surfacing mid-conversation.
"""

import logging
from typing import Dict, Optional, Tuple

import yaml

from taskbot.config.model import (
    DEFAULT_INTENT_THRESHOLD,
    DEFAULT_MAX_TURNS,
    DEFAULT_TEMPLATES,
    SEMANTIC_TYPES,
    And,
    BotConfig,
    EntityDef,
    EntitySlotSpec,
    FaqEntry,
    FinishResponse,
    GroupLeaf,
    TaskDef,
    TaskRef,
    compile_success_expression,
)
from taskbot.config.validate import validate_config
from taskbot.errors import ParseError, SchemaError

logger = logging.getLogger(__name__)

_TASK_KEYS = {
    "description",
    "samples",
    "entities",
    "entity_groups",
    "success",
    "finish_response",
    "task_finish_function",
    "repeat",
    "repeat_response",
    "max_turns",
}
_SLOT_KEYS = {"function", "confirm", "prompt", "response"}
_BOT_KEYS = {"text_bot", "bot_name", "intent_threshold"}
_ENTITY_KEYS = {"type", "methods", "suggest_value"}
_METHOD_KEYS = {"ner", "pattern", "fuzzy_matching", "user_utterance"}


def load_yaml(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return yaml.safe_load(fh)
    except OSError as exc:
        raise ParseError(path, str(exc))
    except yaml.YAMLError as exc:
        detail = str(exc)
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            detail = "line %d, column %d: %s" % (mark.line + 1, mark.column + 1, getattr(exc, "problem", detail))
        raise ParseError(path, detail)


def _require_mapping(value, location: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise SchemaError(location, "expected a mapping, got %s" % type(value).__name__)
    return value


def _check_keys(mapping: dict, allowed: set, location: str) -> None:
    unknown = [k for k in mapping if k not in allowed]
    if unknown:
        raise SchemaError(location, "unknown key(s) %s (allowed: %s)" % (", ".join(map(repr, unknown)), ", ".join(sorted(allowed))))


def _as_str_tuple(value, location: str) -> Tuple[str, ...]:
    """Normalize an optional string-or-list field to a tuple of strings."""
    if value is None:
        return ()
    if isinstance(value, str):
        return (value,)
    if isinstance(value, list):
        out = []
        for i, item in enumerate(value):
            if not isinstance(item, str):
                raise SchemaError(f"{location}[{i}]", "expected a string, got %s" % type(item).__name__)
            out.append(item)
        return tuple(out)
    raise SchemaError(location, "expected a string or list of strings")


def _as_bool(value, location: str, default: bool = False) -> bool:
    if value is None:
        return default
    if not isinstance(value, bool):
        raise SchemaError(location, "expected a boolean, got %r" % (value,))
    return value


def _parse_slot(name: str, raw, location: str) -> EntitySlotSpec:
    raw = _require_mapping(raw, location)
    _check_keys(raw, _SLOT_KEYS, location)
    function = raw.get("function")
    if function is not None and not isinstance(function, str):
        raise SchemaError(f"{location}.function", "expected a string")
    return EntitySlotSpec(
        name=name,
        function=function,
        confirm=_as_bool(raw.get("confirm"), f"{location}.confirm"),
        prompt=_as_str_tuple(raw.get("prompt"), f"{location}.prompt"),
        response=_as_str_tuple(raw.get("response"), f"{location}.response"),
    )


def _parse_groups(raw, location: str):
    raw = _require_mapping(raw, location)
    groups: Dict[str, Tuple[str, ...]] = {}
    minimums: Dict[str, int] = {}
    for gname, gval in raw.items():
        gloc = f"{location}.{gname}"
        if isinstance(gval, dict):
            _check_keys(gval, {"members", "min_required"}, gloc)
            members = _as_str_tuple(gval.get("members"), f"{gloc}.members")
            min_req = gval.get("min_required")
            if min_req is not None:
                if not isinstance(min_req, int) or isinstance(min_req, bool):
                    raise SchemaError(f"{gloc}.min_required", "expected an integer")
                minimums[gname] = min_req
        else:
            members = _as_str_tuple(gval, gloc)
        if not members:
            raise SchemaError(gloc, "entity group has no members")
        groups[gname] = members
    return groups, minimums


def _parse_task(name: str, raw, location: str) -> TaskDef:
    raw = _require_mapping(raw, location)
    _check_keys(raw, _TASK_KEYS, location)

    description = raw.get("description", "")
    if description is None:
        description = ""
    if not isinstance(description, str):
        raise SchemaError(f"{location}.description", "expected a string")

    entities_raw = _require_mapping(raw.get("entities"), f"{location}.entities")
    entity_specs = {
        ename: _parse_slot(ename, eval_, f"{location}.entities.{ename}")
        for ename, eval_ in entities_raw.items()
    }

    groups, minimums = _parse_groups(raw.get("entity_groups"), f"{location}.entity_groups")

    success = None
    if raw.get("success") is not None:
        success = compile_success_expression(raw["success"], f"{location}.success")
        if isinstance(success, (GroupLeaf, TaskRef)):
            # normalize: the tree layer always sees a combinator at the top
            success = And((success,))

    finish_raw = _require_mapping(raw.get("finish_response"), f"{location}.finish_response")
    _check_keys(finish_raw, {"success", "failure"}, f"{location}.finish_response")
    finish = FinishResponse(
        success=_as_str_tuple(finish_raw.get("success"), f"{location}.finish_response.success"),
        failure=_as_str_tuple(finish_raw.get("failure"), f"{location}.finish_response.failure"),
    )

    max_turns = raw.get("max_turns", DEFAULT_MAX_TURNS)
    if not isinstance(max_turns, int) or isinstance(max_turns, bool) or max_turns < 1:
        raise SchemaError(f"{location}.max_turns", "expected a positive integer")

    tff = raw.get("task_finish_function")
    if tff is not None and not isinstance(tff, str):
        raise SchemaError(f"{location}.task_finish_function", "expected a string")

    return TaskDef(
        name=name,
        description=description,
        samples=_as_str_tuple(raw.get("samples"), f"{location}.samples"),
        entity_specs=entity_specs,
        entity_groups=groups,
        group_min_required=minimums,
        success=success,
        finish_response=finish,
        task_finish_function=tff,
        repeat=_as_bool(raw.get("repeat"), f"{location}.repeat"),
        repeat_response=_as_str_tuple(raw.get("repeat_response"), f"{location}.repeat_response"),
        max_turns=max_turns,
    )


def _parse_faqs(raw, location: str) -> Tuple[FaqEntry, ...]:
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise SchemaError(location, "expected a list of question/answer entries")
    entries = []
    for i, item in enumerate(raw):
        iloc = f"{location}[{i}]"
        item = _require_mapping(item, iloc)
        _check_keys(item, {"question", "answer"}, iloc)
        question = item.get("question")
        answer = item.get("answer")
        if not isinstance(question, str) or not question.strip():
            raise SchemaError(f"{iloc}.question", "expected a non-empty string")
        if not isinstance(answer, str) or not answer.strip():
            raise SchemaError(f"{iloc}.answer", "expected a non-empty string")
        entries.append(FaqEntry(question=question, answer=answer))
    return tuple(entries)


def _parse_entity(name: str, raw, location: str) -> EntityDef:
    raw = _require_mapping(raw, location)
    _check_keys(raw, _ENTITY_KEYS, location)

    semantic_type = raw.get("type")
    if semantic_type is not None:
        if not isinstance(semantic_type, str) or semantic_type not in SEMANTIC_TYPES:
            raise SchemaError(f"{location}.type", "unknown entity type %r (expected one of %s)" % (semantic_type, ", ".join(SEMANTIC_TYPES)))

    methods_raw = _require_mapping(raw.get("methods"), f"{location}.methods")
    _check_keys(methods_raw, _METHOD_KEYS, f"{location}.methods")
    picklist: Tuple[str, ...] = ()
    if "fuzzy_matching" in methods_raw:
        picklist = _as_str_tuple(methods_raw["fuzzy_matching"], f"{location}.methods.fuzzy_matching")

    return EntityDef(
        name=name,
        semantic_type=semantic_type,
        methods=tuple(methods_raw.keys()),
        picklist=picklist,
        suggest_value=_as_bool(raw.get("suggest_value"), f"{location}.suggest_value"),
    )


def _parse_templates(raw, location: str) -> Dict[str, Tuple[str, ...]]:
    raw = _require_mapping(raw, location)
    out: Dict[str, Tuple[str, ...]] = {}
    for name, value in raw.items():
        variants = _as_str_tuple(value, f"{location}.{name}")
        if not variants:
            raise SchemaError(f"{location}.{name}", "template has no variants")
        out[name] = variants
    return out


def load_bot_config(
    task_path: str,
    entity_path: str,
    template_path: Optional[str] = None,
    policy_path: Optional[str] = None,
) -> BotConfig:
    """Load and validate a bot from its YAML files.

    Raises ParseError for unreadable or malformed YAML, SchemaError for
    structural problems (unknown keys, wrong kinds, dangling references).
    The returned config passes :func:`validate_config` with zero errors.
    """
    # deferred: the policy module pulls in the condition DSL, which is not
    # needed by callers that only parse configs
    from taskbot.dialogue.policy import compile_policy, default_policy

    task_doc = _require_mapping(load_yaml(task_path), task_path)
    _check_keys(task_doc, {"Bot", "Task", "FAQ"}, task_path)

    bot_raw = _require_mapping(task_doc.get("Bot"), f"{task_path}:Bot")
    _check_keys(bot_raw, _BOT_KEYS, f"{task_path}:Bot")
    bot_name = bot_raw.get("bot_name", "this service")
    if not isinstance(bot_name, str):
        raise SchemaError(f"{task_path}:Bot.bot_name", "expected a string")
    text_bot = _as_bool(bot_raw.get("text_bot"), f"{task_path}:Bot.text_bot", default=True)

    threshold = bot_raw.get("intent_threshold", DEFAULT_INTENT_THRESHOLD)
    if isinstance(threshold, bool) or not isinstance(threshold, (int, float)):
        raise SchemaError(f"{task_path}:Bot.intent_threshold", "expected a number")
    if not 0.0 <= float(threshold) <= 1.0:
        raise SchemaError(f"{task_path}:Bot.intent_threshold", "must be between 0 and 1")

    tasks_raw = _require_mapping(task_doc.get("Task"), f"{task_path}:Task")
    tasks = {
        tname: _parse_task(tname, tval, f"{task_path}:Task.{tname}")
        for tname, tval in tasks_raw.items()
    }

    faqs = _parse_faqs(task_doc.get("FAQ"), f"{task_path}:FAQ")

    entity_doc = _require_mapping(load_yaml(entity_path), entity_path)
    _check_keys(entity_doc, {"Entity"}, entity_path)
    entities_raw = _require_mapping(entity_doc.get("Entity"), f"{entity_path}:Entity")
    entities = {
        ename: _parse_entity(ename, eval_, f"{entity_path}:Entity.{ename}")
        for ename, eval_ in entities_raw.items()
    }

    templates = dict(DEFAULT_TEMPLATES)
    if template_path is not None:
        template_doc = _require_mapping(load_yaml(template_path), template_path)
        _check_keys(template_doc, {"Template"}, template_path)
        templates.update(_parse_templates(template_doc.get("Template"), f"{template_path}:Template"))

    if policy_path is not None:
        policy_doc = _require_mapping(load_yaml(policy_path), policy_path)
        _check_keys(policy_doc, {"Policy"}, policy_path)
        if policy_doc.get("Policy") is None:
            raise SchemaError(f"{policy_path}:Policy", "policy file has no Policy section")
        policy = compile_policy(policy_doc["Policy"], location=f"{policy_path}:Policy")
    else:
        policy = default_policy()

    config = BotConfig(
        bot_name=bot_name,
        text_bot=text_bot,
        tasks=tasks,
        entities=entities,
        templates=templates,
        faqs=faqs,
        policy=policy,
        intent_threshold=float(threshold),
    )

    report = validate_config(config)
    if not report.ok:
        first = "; ".join("%s: %s" % (path, msg) for path, msg in report.errors[:3])
        more = "" if len(report.errors) <= 3 else " (+%d more)" % (len(report.errors) - 3)
        raise SchemaError(task_path, "invalid configuration: %s%s" % (first, more))
    for path, msg in report.warnings:
        logger.warning("config warning at %s: %s", path, msg)
    return config
