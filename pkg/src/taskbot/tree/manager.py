"""The per-session and-or task tree and its operations.

Every started task hangs as a TaskRoot under one Or root. A task's subtree
mirrors its success expression: And/Or combinators over entity-group leaves
and references to other tasks. A cursor marks the leaf (and entity within
it) the conversation is currently collecting; switching tasks saves the
cursor on a stack and resuming pops it.

Success and exhaustion are boolean duals: an And succeeds when all children
succeed and is dead once any child is dead; an Or succeeds on any success
and is dead only when every child is dead. Leaves succeed when enough
members are filled and die when enough members failed that the minimum is
unreachable. References succeed or die with their target task, which is
shared, never copied, so one completed sub-task satisfies every referrer.
"""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

from taskbot.config.model import And, GroupLeaf, Or, SuccessExpr, TaskDef, TaskRef
from taskbot.errors import (
    NoActiveTask,
    NotCurrentLeaf,
    TaskAlreadyComplete,
    TaskNotRepeatable,
    UnknownTask,
    UnresolvedTask,
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

AT_LEAF = "leaf"
COMPLETE = "complete"
TASK_FAILED = "failed"
IDLE = "idle"


@dataclass
class Cursor:
    task: str
    leaf_id: Optional[int] = None
    entity: Optional[str] = None

    def to_dict(self) -> dict:
        return {"task": self.task, "leaf": self.leaf_id, "entity": self.entity}

    @classmethod
    def from_dict(cls, raw: dict) -> "Cursor":
        return cls(task=raw["task"], leaf_id=raw.get("leaf"), entity=raw.get("entity"))


@dataclass
class TraversalResult:
    status: str  # leaf | complete | failed | idle
    cursor: Optional[Cursor] = None


class TaskTree:
    def __init__(self) -> None:
        self.nodes: Dict[int, TaskNode] = {}
        self._next_id = 0
        root = self._new_node(ROOT)
        self.root_id = root.id
        self.task_nodes: Dict[str, int] = {}
        self.cursor: Optional[Cursor] = None
        self.task_stack: List[Cursor] = []
        self.per_task_turns: Dict[str, int] = {}

    # --- construction -------------------------------------------------------

    def _new_node(self, kind: str, **kwargs) -> TaskNode:
        node = TaskNode(id=self._next_id, kind=kind, **kwargs)
        self._next_id += 1
        self.nodes[node.id] = node
        return node

    def node(self, node_id: int) -> TaskNode:
        return self.nodes[node_id]

    def _build_expr(self, expr: SuccessExpr, task: TaskDef, known_tasks) -> TaskNode:
        if isinstance(expr, (And, Or)):
            node = self._new_node(AND if isinstance(expr, And) else OR)
            children = tuple(self._build_expr(c, task, known_tasks) for c in expr.children)
            node.children = tuple(c.id for c in children)
            for child in children:
                child.parent = node.id
            return node
        if isinstance(expr, GroupLeaf):
            members = task.entity_groups[expr.group_name]
            node = self._new_node(
                LEAF,
                group_name=expr.group_name,
                operator=expr.operator,
                min_required=task.min_required(expr.group_name),
            )
            node.slots = [LeafSlotState(entity_name=m) for m in members]
            return node
        if isinstance(expr, TaskRef):
            if expr.task_name not in known_tasks:
                raise UnresolvedTask(expr.task_name)
            return self._new_node(REF, ref_target=expr.task_name)
        raise TypeError("not a success expression: %r" % (expr,))

    def build_task_subtree(self, task: TaskDef, known_tasks) -> int:
        """Attach a TaskRoot for ``task`` under root; returns its node id."""
        if task.success is None:
            raise UnresolvedTask(task.name)
        expr = task.success
        if not isinstance(expr, (And, Or)):
            expr = And((expr,))  # single leaf or ref still needs a combinator above it
        task_root = self._new_node(TASK_ROOT, task_name=task.name, parent=self.root_id)
        child = self._build_expr(expr, task, known_tasks)
        child.parent = task_root.id
        task_root.children = (child.id,)
        root = self.nodes[self.root_id]
        root.children = root.children + (task_root.id,)
        self.task_nodes[task.name] = task_root.id
        return task_root.id

    # --- success / exhaustion -----------------------------------------------

    def _effective_flags(self, node: TaskNode) -> Tuple[bool, bool]:
        """(success, exhausted) with Ref nodes reading their shared target."""
        if node.kind == REF:
            target_id = self.task_nodes.get(node.ref_target)
            if target_id is None:
                return (False, False)  # not started yet: unfinished
            target = self.nodes[target_id]
            return (target.success, target.exhausted)
        return (node.success, node.exhausted)

    def _recompute_node(self, node: TaskNode) -> None:
        """Refresh one node's flags from its children (or slots)."""
        if node.kind == LEAF:
            node.success = node.filled_count() >= node.min_required
            if node.success:
                node.exhausted = False
            else:
                # dead once enough members failed that the minimum is unreachable
                node.exhausted = node.failed_count() > len(node.slots) - node.min_required
            return
        if node.kind == REF:
            node.success, node.exhausted = self._effective_flags(node)
            return
        if node.kind == ROOT:
            return  # root's own flags are never consulted
        flags = [self._effective_flags(self.nodes[c]) for c in node.children]
        if node.kind == OR:
            node.success = any(s for s, _ in flags)
            node.exhausted = (not node.success) and all(e for _, e in flags)
        else:  # And, TaskRoot (single child)
            node.success = all(s for s, _ in flags)
            node.exhausted = (not node.success) and any(e for _, e in flags)

    def _recompute_subtree(self, node_id: int) -> None:
        node = self.nodes[node_id]
        if node.kind not in (LEAF, REF):
            for child in node.children:
                self._recompute_subtree(child)
        self._recompute_node(node)

    def evaluate_success(self, node_id: int) -> bool:
        """Recompute a node's success from current child state and propagate
        the refreshed flags up to (not including) root."""
        node = self.nodes[node_id]
        self._recompute_node(node)
        parent = node.parent
        while parent is not None and parent != self.root_id:
            parent_node = self.nodes[parent]
            self._recompute_node(parent_node)
            parent = parent_node.parent
        return node.success

    # --- slot outcomes --------------------------------------------------------

    def record_slot_outcome(self, leaf_id: int, entity_name: str, ok: bool, value=None) -> None:
        if self.cursor is None or self.cursor.leaf_id != leaf_id:
            raise NotCurrentLeaf(leaf_id)
        leaf = self.nodes[leaf_id]
        slot = leaf.slot(entity_name)
        if slot is None:
            raise NotCurrentLeaf("%s has no member %r" % (leaf.label(), entity_name))
        if ok:
            slot.status = FILLED_OK
            slot.accepted_value = value
        else:
            slot.attempts += 1
            if slot.attempts > RETRY_LIMITS.get(leaf.operator, 0):
                slot.status = FAILED
        self.evaluate_success(leaf_id)

    def mark_slot_asked(self, leaf_id: int, entity_name: str) -> None:
        slot = self.nodes[leaf_id].slot(entity_name)
        if slot is not None and slot.status == UNASKED:
            slot.status = ASKED

    # --- traversal ------------------------------------------------------------

    def _find_candidate(self, node_id: int) -> Optional[int]:
        """First unfinished leaf or ref under node_id, depth-first."""
        node = self.nodes[node_id]
        success, exhausted = self._effective_flags(node)
        if success or exhausted:
            return None
        if node.kind in (LEAF, REF):
            return node.id
        for child in node.children:
            found = self._find_candidate(child)
            if found is not None:
                return found
        return None

    def _push_cursor(self, cursor: Cursor) -> None:
        # a task appears at most once in the stack; re-entering it later
        # abandons any older saved spot
        self.task_stack = [c for c in self.task_stack if c.task != cursor.task]
        self.task_stack.append(cursor)

    def _drop_from_stack(self, task_name: str) -> None:
        self.task_stack = [c for c in self.task_stack if c.task != task_name]

    def traverse_next_leaf(self, tasks: Mapping[str, TaskDef]) -> TraversalResult:
        """Move the cursor to the next leaf needing work in the current task.

        Skips successful and exhausted subtrees. A reference to a finished
        task is skipped outright (shared sub-task reuse); a reference to an
        unfinished one pushes the cursor and descends, making the target the
        current task. Returns COMPLETE or TASK_FAILED when the current task
        has no work left.
        """
        if self.cursor is None:
            raise NoActiveTask()
        while True:
            task_name = self.cursor.task
            root_id = self.task_nodes[task_name]
            self._recompute_subtree(root_id)
            task_root = self.nodes[root_id]
            if task_root.success:
                return TraversalResult(COMPLETE, self.cursor)
            if task_root.exhausted:
                return TraversalResult(TASK_FAILED, self.cursor)
            found = self._find_candidate(root_id)
            if found is None:
                # not successful yet no reachable work: the task is dead
                task_root.exhausted = True
                return TraversalResult(TASK_FAILED, self.cursor)
            node = self.nodes[found]
            if node.kind == REF:
                target = node.ref_target
                if target not in self.task_nodes:
                    if target not in tasks:
                        raise UnresolvedTask(target)
                    self.build_task_subtree(tasks[target], tasks)
                self._push_cursor(Cursor(task=task_name))
                self.cursor = Cursor(task=target)
                continue
            entity = None
            for slot in node.slots:
                if slot.status not in (FILLED_OK, FAILED):
                    entity = slot.entity_name
                    break
            self.cursor = Cursor(task=task_name, leaf_id=found, entity=entity)
            return TraversalResult(AT_LEAF, self.cursor)

    def add_task(self, task_name: str, tasks: Mapping[str, TaskDef]) -> TraversalResult:
        """Start (or restart, or switch to) a task and land on its first leaf."""
        task = tasks.get(task_name)
        if task is None or task.is_polarity:
            raise UnknownTask(task_name)
        existing = self.task_nodes.get(task_name)
        if existing is not None:
            self._recompute_subtree(existing)
            node = self.nodes[existing]
            if node.success:
                if not task.repeat:
                    raise TaskAlreadyComplete(task_name)
                self._reset_subtree(existing)
                self.per_task_turns[task_name] = 0
            elif node.exhausted:
                # a previously failed task may be attempted again
                self._reset_subtree(existing)
                self.per_task_turns[task_name] = 0
        else:
            self.build_task_subtree(task, tasks)
        if self.cursor is not None and self.cursor.task != task_name:
            current_root = self.nodes[self.task_nodes[self.cursor.task]]
            if not (current_root.success or current_root.exhausted):
                self._push_cursor(self.cursor)
        self._drop_from_stack(task_name)
        self.cursor = Cursor(task=task_name)
        return self.traverse_next_leaf(tasks)

    def finish_or_pop(self, tasks: Mapping[str, TaskDef]) -> TraversalResult:
        """After a task completes or fails: resume the interrupted task if
        any, re-traversing it since shared state may have moved meanwhile."""
        if not self.task_stack:
            self.cursor = None
            return TraversalResult(IDLE, None)
        self.cursor = self.task_stack.pop()
        return self.traverse_next_leaf(tasks)

    # --- resets, quits, turn accounting ---------------------------------------

    def _reset_subtree(self, node_id: int, seen: Optional[set] = None) -> None:
        if seen is None:
            seen = set()
        node = self.nodes[node_id]
        node.success = False
        node.exhausted = False
        if node.kind == LEAF:
            node.slots = [LeafSlotState(entity_name=s.entity_name) for s in node.slots]
            return
        if node.kind == REF:
            # completed shared targets are deliberately left alone, but a
            # dead one would block every retry of this task forever
            target_id = self.task_nodes.get(node.ref_target)
            if target_id is not None and node.ref_target not in seen:
                target = self.nodes[target_id]
                if target.exhausted and not target.success:
                    seen.add(node.ref_target)
                    self._reset_subtree(target_id, seen)
                    self.per_task_turns[node.ref_target] = 0
            return
        for child in node.children:
            self._reset_subtree(child, seen)

    def reset_task(self, task_name: str, tasks: Mapping[str, TaskDef]) -> None:
        task = tasks.get(task_name)
        if task is None:
            raise UnknownTask(task_name)
        if not task.repeat:
            raise TaskNotRepeatable(task_name)
        root_id = self.task_nodes.get(task_name)
        if root_id is not None:
            self._reset_subtree(root_id)
        self.per_task_turns[task_name] = 0

    def mark_task_exhausted(self, task_name: str) -> None:
        root_id = self.task_nodes.get(task_name)
        if root_id is None:
            raise UnknownTask(task_name)
        node = self.nodes[root_id]
        node.success = False
        node.exhausted = True

    def tick_and_check_turn_limit(self, task_name: str, max_turns: int) -> bool:
        """Count one attributed turn; True means the limit is now exceeded."""
        count = self.per_task_turns.get(task_name, 0) + 1
        self.per_task_turns[task_name] = count
        return count > max_turns

    # --- views ------------------------------------------------------------------

    def active_task(self) -> Optional[str]:
        return self.cursor.task if self.cursor else None

    def current_leaf(self) -> Optional[TaskNode]:
        if self.cursor is None or self.cursor.leaf_id is None:
            return None
        return self.nodes.get(self.cursor.leaf_id)

    def task_success(self, task_name: str) -> bool:
        root_id = self.task_nodes.get(task_name)
        return bool(root_id is not None and self.nodes[root_id].success)

    def finished_tasks(self) -> List[str]:
        return [name for name, nid in self.task_nodes.items() if self.nodes[nid].success]

    def snapshot(self) -> dict:
        """Read-only projection for visualization; stable ids, no mutation."""
        nodes = []
        current_leaf = self.cursor.leaf_id if self.cursor else None
        for node_id in sorted(self.nodes):
            node = self.nodes[node_id]
            nodes.append(
                {
                    "id": node.id,
                    "kind": node.kind,
                    "label": node.label(),
                    "success": node.success,
                    "exhausted": node.exhausted,
                    "current": node.id == current_leaf,
                    "ref": node.ref_target,
                    "children": list(node.children),
                }
            )
        return {
            "nodes": nodes,
            "cursor": self.cursor.to_dict() if self.cursor else None,
            "stack": [c.task for c in self.task_stack],
        }

    # --- persistence --------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "next_id": self._next_id,
            "root_id": self.root_id,
            "nodes": [self.nodes[i].to_dict() for i in sorted(self.nodes)],
            "task_nodes": dict(self.task_nodes),
            "cursor": self.cursor.to_dict() if self.cursor else None,
            "stack": [c.to_dict() for c in self.task_stack],
            "per_task_turns": dict(self.per_task_turns),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "TaskTree":
        tree = cls.__new__(cls)
        tree.nodes = {}
        for node_raw in raw["nodes"]:
            node = TaskNode.from_dict(node_raw)
            tree.nodes[node.id] = node
        tree._next_id = raw["next_id"]
        tree.root_id = raw["root_id"]
        tree.task_nodes = dict(raw["task_nodes"])
        tree.cursor = Cursor.from_dict(raw["cursor"]) if raw.get("cursor") else None
        tree.task_stack = [Cursor.from_dict(c) for c in raw.get("stack") or []]
        tree.per_task_turns = dict(raw.get("per_task_turns") or {})
        return tree
