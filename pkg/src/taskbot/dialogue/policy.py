"""Policy decision trees: configurable action selection.

A policy is a tree of condition nodes with ordered children; leaves name
dialogue actions. Selection is a depth-first, left-to-right search that
prunes subtrees whose condition is false and returns the first leaf it
reaches. Compilation validates condition syntax, state paths, action names,
and that some action is reachable no matter what the snapshot says.
"""

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Tuple

import yaml

from taskbot.dialogue import conditions
from taskbot.dialogue.conditions import ConditionExpr
from taskbot.dialogue.states import KNOWN_PATHS
from taskbot.errors import NoActionReached, SchemaError, UnknownAction


@dataclass(frozen=True)
class ActionLeaf:
    action: str


@dataclass(frozen=True)
class ConditionNode:
    source: str
    condition: ConditionExpr
    children: Tuple[object, ...]  # ActionLeaf | ConditionNode


@dataclass(frozen=True)
class PolicyTreeDef:
    roots: Tuple[object, ...]

    def serialize(self) -> list:
        return [_serialize_node(n) for n in self.roots]


def _serialize_node(node):
    if isinstance(node, ActionLeaf):
        return {"action": node.action}
    return {"cond": node.source, "children": [_serialize_node(c) for c in node.children]}


def _compile_node(raw, location: str, known_actions: Optional[frozenset]):
    if not isinstance(raw, dict):
        raise SchemaError(location, "expected a mapping with 'action' or 'cond'")
    keys = set(raw)
    if keys == {"action"}:
        action = raw["action"]
        if not isinstance(action, str) or not action:
            raise SchemaError(f"{location}.action", "expected an action name")
        if known_actions is not None and action not in known_actions:
            raise UnknownAction(f"{location}.action", "unknown action %r" % action)
        return ActionLeaf(action)
    if keys == {"cond", "children"}:
        source = raw["cond"]
        if not isinstance(source, str):
            raise SchemaError(f"{location}.cond", "expected a condition string")
        expr = conditions.parse_condition(source)
        conditions.validate_paths(expr, KNOWN_PATHS, f"{location}.cond")
        children_raw = raw["children"]
        if not isinstance(children_raw, list) or not children_raw:
            raise SchemaError(f"{location}.children", "expected a non-empty list of nodes")
        children = tuple(
            _compile_node(child, f"{location}.children[{i}]", known_actions)
            for i, child in enumerate(children_raw)
        )
        return ConditionNode(source, expr, children)
    raise SchemaError(location, "node must have exactly 'action', or 'cond' plus 'children'; got keys %s" % sorted(keys))


def _has_guaranteed_leaf(nodes: Iterable) -> bool:
    for node in nodes:
        if isinstance(node, ActionLeaf):
            return True
        if conditions.fold_constant(node.condition) is True and _has_guaranteed_leaf(node.children):
            return True
    return False


def compile_policy(raw, location: str = "Policy", known_actions: Optional[frozenset] = None) -> PolicyTreeDef:
    """Compile a policy from its YAML structure.

    ``raw`` is a list of nodes (tried in order) or a single node. When
    ``known_actions`` is None the engine's registered action set is used.
    Raises NoActionReached if no root-to-leaf path is guaranteed true, i.e.
    some snapshot could fall off the bottom of the tree.
    """
    if known_actions is None:
        from taskbot.dialogue.actions import ACTION_NAMES

        known_actions = ACTION_NAMES
    if isinstance(raw, dict):
        raw = [raw]
    if not isinstance(raw, list) or not raw:
        raise SchemaError(location, "expected a policy node or list of nodes")
    roots = tuple(_compile_node(node, f"{location}[{i}]", known_actions) for i, node in enumerate(raw))
    policy = PolicyTreeDef(roots)
    if not _has_guaranteed_leaf(policy.roots):
        raise NoActionReached(location, "no root-to-leaf path is guaranteed; add a catch-all 'true' branch")
    return policy


def select_action(policy: PolicyTreeDef, snapshot: Mapping[str, object]) -> str:
    """Return the first action leaf reached by depth-first search."""

    def search(nodes) -> Optional[str]:
        for node in nodes:
            if isinstance(node, ActionLeaf):
                return node.action
            if conditions.evaluate(node.condition, snapshot):
                found = search(node.children)
                if found is not None:
                    return found
        return None

    action = search(policy.roots)
    if action is None:
        raise NoActionReached("Policy", "no action matched the current state")
    return action


#: Shipped policy. Priorities: answers to pending yes/no questions and
#: disambiguations come first, then FAQ while a task is active, then task
#: switching and creation, then slot progress, then the turn-limit quit,
#: then greetings/goodbyes, then the fallback.
DEFAULT_POLICY_YAML = """
- cond: multi.expecting_yes_no && single.polarity == 'positive'
  children:
    - action: handle_yes
- cond: multi.expecting_yes_no && single.polarity == 'negative'
  children:
    - action: handle_no
- cond: multi.pending_disambiguation
  children:
    - action: continue_task
- cond: tree.active
  children:
    - cond: single.faq_hit
      children:
        - action: answer_faq
    - cond: single.got_intent && !tree.intent_is_current
      children:
        - action: switch_task
    - cond: single.got_intent && tree.intent_is_current
      children:
        - action: continue_task
    - cond: single.got_entity_info
      children:
        - action: continue_task
    - cond: tree.turn_limit_exceeded
      children:
        - action: quit_task_turn_limit
- cond: '!tree.active'
  children:
    - cond: single.got_intent_and_info
      children:
        - action: new_task_with_info
    - cond: single.got_intent
      children:
        - action: new_task
    - cond: single.faq_hit
      children:
        - action: answer_faq
    - cond: single.is_greeting
      children:
        - action: greeting
- cond: single.is_goodbye
  children:
    - action: goodbye
- action: fallback_clarify
"""

_default_policy: Optional[PolicyTreeDef] = None


def default_policy() -> PolicyTreeDef:
    global _default_policy
    if _default_policy is None:
        _default_policy = compile_policy(yaml.safe_load(DEFAULT_POLICY_YAML), "default-policy")
    return _default_policy
