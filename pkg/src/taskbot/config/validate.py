"""Referential-integrity validation over a compiled BotConfig.

The loader runs this and refuses configs with errors, so a successfully
loaded config is guaranteed internally consistent. The CLI `validate`
command surfaces the full report, warnings included.
"""

from typing import Dict, Set

from taskbot.config.model import (
    BotConfig,
    Or,
    And,
    SuccessExpr,
    TaskDef,
    ValidationReport,
    iter_group_leaves,
    iter_task_refs,
)


def _walk_or_nodes(expr: SuccessExpr):
    if isinstance(expr, (And, Or)):
        if isinstance(expr, Or):
            yield expr
        for child in expr.children:
            yield from _walk_or_nodes(child)


def _check_task(task: TaskDef, config: BotConfig, report: ValidationReport) -> None:
    loc = f"Task.{task.name}"

    for ename in task.entity_specs:
        if ename not in config.entities:
            report.error(f"{loc}.entities.{ename}", "entity is not defined in the entity config")

    for gname, members in task.entity_groups.items():
        for member in members:
            if member not in task.entity_specs:
                report.error(f"{loc}.entity_groups.{gname}", "member %r is not declared under entities" % member)
        min_req = task.group_min_required.get(gname)
        if min_req is not None and not 1 <= min_req <= len(members):
            report.error(
                f"{loc}.entity_groups.{gname}.min_required",
                "must be between 1 and %d, got %d" % (len(members), min_req),
            )

    if task.repeat_response and not task.repeat:
        report.error(f"{loc}.repeat_response", "only repeatable tasks may define a repeat_response")

    if task.is_polarity:
        if task.success is not None:
            report.warn(f"{loc}.success", "polarity entries do not use a success expression")
        return

    if task.description == "polarity":
        report.warn(f"{loc}.description", "description 'polarity' is reserved for tasks named positive or negative")

    if task.success is None:
        report.warn(f"{loc}.success", "task has no success expression and can never complete")
        return

    user_tasks = config.user_tasks()
    for leaf in iter_group_leaves(task.success):
        if leaf.group_name not in task.entity_groups:
            report.error(f"{loc}.success", "%s names unknown entity group %r" % (leaf.operator, leaf.group_name))
    for ref in iter_task_refs(task.success):
        if ref not in user_tasks:
            report.error(f"{loc}.success", "TASK names unknown task %r" % ref)

    for node in _walk_or_nodes(task.success):
        if len(node.children) == 1:
            report.warn(f"{loc}.success", "OR with a single child behaves like its child")


def _check_entity(name: str, config: BotConfig, report: ValidationReport) -> None:
    entity = config.entities[name]
    loc = f"Entity.{name}"
    if entity.semantic_type == "PICKLIST" and not entity.picklist:
        report.error(f"{loc}.methods.fuzzy_matching", "PICKLIST entities need fuzzy_matching candidates")
    if entity.semantic_type == "USER_UTT" and "user_utterance" not in entity.methods:
        report.error(f"{loc}.methods", "USER_UTT entities need the user_utterance method")
    if entity.picklist and entity.semantic_type not in (None, "PICKLIST"):
        report.warn(f"{loc}.methods.fuzzy_matching", "fuzzy candidates are only consulted for PICKLIST entities")


def _check_cycles(config: BotConfig, report: ValidationReport) -> None:
    """Reject TASK reference cycles (a task may not require itself)."""
    user_tasks = config.user_tasks()
    edges: Dict[str, list] = {
        name: [ref for ref in iter_task_refs(t.success) if ref in user_tasks] if t.success else []
        for name, t in user_tasks.items()
    }
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {name: WHITE for name in edges}

    def visit(name: str, trail: list) -> None:
        color[name] = GRAY
        trail.append(name)
        for dep in edges[name]:
            if color[dep] == GRAY:
                cycle = trail[trail.index(dep):] + [dep]
                report.error("Task.%s.success" % name, "task reference cycle: %s" % " -> ".join(cycle))
            elif color[dep] == WHITE:
                visit(dep, trail)
        trail.pop()
        color[name] = BLACK

    for name in edges:
        if color[name] == WHITE:
            visit(name, [])


def validate_config(config: BotConfig) -> ValidationReport:
    report = ValidationReport()

    if not config.tasks:
        report.warn("Task", "configuration defines no tasks")

    for task in config.tasks.values():
        _check_task(task, config, report)
    for name in config.entities:
        _check_entity(name, config, report)
    _check_cycles(config, report)

    referenced: Set[str] = set()
    for task in config.user_tasks().values():
        if task.success is not None:
            referenced.update(iter_task_refs(task.success))
    for name, task in config.user_tasks().items():
        if not task.samples and name not in referenced:
            report.warn(f"Task.{name}.samples", "task has no samples and is never referenced; users cannot reach it")

    return report
