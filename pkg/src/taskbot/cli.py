"""Command line entry points.

    taskbot serve    -- run the HTTP service
    taskbot chat     -- talk to a bot in the terminal (no HTTP)
    taskbot validate -- load a config and report problems
    taskbot viz      -- dump a task's and-or structure as DOT

Exit codes: 0 success, 1 invalid configuration or unknown task,
2 usage errors (bad flags, unreadable files).
"""

import logging
import sys
from typing import Optional

import click

from taskbot.backends import BackendRegistry
from taskbot.config.loader import load_bot_config
from taskbot.config.model import And, BotConfig, GroupLeaf, Or, TaskRef
from taskbot.errors import ParseError, SchemaError, TaskbotError
from taskbot.store import make_store


def _load(task_config: str, entity_config: str, templates: Optional[str], policy: Optional[str]) -> BotConfig:
    try:
        return load_bot_config(task_config, entity_config, templates, policy)
    except (ParseError, SchemaError) as exc:
        click.echo("error: %s" % exc, err=True)
        sys.exit(1)


def _registry(demo_backends: bool) -> BackendRegistry:
    if demo_backends:
        from taskbot.demo import build_demo_registry

        return build_demo_registry()
    return BackendRegistry()


_CONFIG_FLAGS = [
    click.option("--task-config", required=True, type=click.Path(exists=True, dir_okay=False)),
    click.option("--entity-config", required=True, type=click.Path(exists=True, dir_okay=False)),
    click.option("--templates", default=None, type=click.Path(exists=True, dir_okay=False)),
    click.option("--policy", default=None, type=click.Path(exists=True, dir_okay=False)),
]


def _with_config_flags(command):
    for flag in reversed(_CONFIG_FLAGS):
        command = flag(command)
    return command


@click.group()
@click.option("--log-level", default="INFO", show_default=True)
def main(log_level: str):
    logging.basicConfig(level=getattr(logging, log_level.upper(), logging.INFO))


@main.command()
@_with_config_flags
@click.option("--store", "store_mode", type=click.Choice(["memory", "kv"]), default="memory", show_default=True)
@click.option("--kv-addr", default="127.0.0.1:6400", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True)
@click.option("--backend-timeout", default=5.0, show_default=True)
@click.option("--demo-backends/--no-demo-backends", default=True, show_default=True)
def serve(task_config, entity_config, templates, policy, store_mode, kv_addr, host, port, backend_timeout, demo_backends):
    """Run the HTTP service."""
    import uvicorn

    from taskbot.dialogue.orchestrator import Engine
    from taskbot.service import build_app

    config = _load(task_config, entity_config, templates, policy)
    try:
        store = make_store(store_mode, kv_addr)
    except TaskbotError as exc:
        click.echo("error: %s" % exc, err=True)
        sys.exit(1)
    engine = Engine(config, store, registry=_registry(demo_backends), backend_timeout=backend_timeout)
    uvicorn.run(build_app(engine), host=host, port=port, log_level="warning")


@main.command()
@_with_config_flags
@click.option("--store", "store_mode", type=click.Choice(["memory", "kv"]), default="memory", show_default=True)
@click.option("--kv-addr", default="127.0.0.1:6400", show_default=True)
@click.option("--backend-timeout", default=5.0, show_default=True)
@click.option("--demo-backends/--no-demo-backends", default=True, show_default=True)
def chat(task_config, entity_config, templates, policy, store_mode, kv_addr, backend_timeout, demo_backends):
    """Terminal chat against the engine, no HTTP in between."""
    from taskbot.dialogue.orchestrator import Engine

    config = _load(task_config, entity_config, templates, policy)
    try:
        store = make_store(store_mode, kv_addr)
    except TaskbotError as exc:
        click.echo("error: %s" % exc, err=True)
        sys.exit(1)
    engine = Engine(config, store, registry=_registry(demo_backends), backend_timeout=backend_timeout)
    session_id, greeting = engine.start_session()
    click.echo("bot> %s" % greeting)
    click.echo("(/quit to leave, /tree to dump the task tree)")
    while True:
        try:
            line = input("you> ").strip()
        except (EOFError, KeyboardInterrupt):
            click.echo("")
            break
        if not line:
            continue
        if line == "/quit":
            break
        if line == "/tree":
            snapshot = engine.tree_snapshot(session_id)
            for node in snapshot["nodes"]:
                flags = "".join(
                    marker
                    for flag, marker in ((node["success"], "+"), (node["exhausted"], "x"), (node["current"], "*"))
                    if flag
                )
                click.echo("  #%d %s %s %s" % (node["id"], node["kind"], node["label"], flags))
            continue
        result = engine.process_turn(session_id, line)
        click.echo("bot> %s" % result.response)


@main.command()
@_with_config_flags
def validate(task_config, entity_config, templates, policy):
    """Load and validate a configuration; exit 1 on errors."""
    config = _load(task_config, entity_config, templates, policy)
    click.echo(
        "configuration OK: %d tasks, %d entities, %d FAQs"
        % (len(config.tasks), len(config.entities), len(config.faqs))
    )


@main.command()
@_with_config_flags
@click.argument("task")
def viz(task_config, entity_config, templates, policy, task):
    """Print a task's static and-or structure in DOT format."""
    config = _load(task_config, entity_config, templates, policy)
    taskdef = config.tasks.get(task)
    if taskdef is None:
        click.echo("error: unknown task %r (have: %s)" % (task, ", ".join(sorted(config.tasks))), err=True)
        sys.exit(1)

    lines = ["digraph %s {" % task, '  rankdir="TB";', '  node [shape=box, fontname="sans-serif"];']
    counter = [0]

    def emit(expr, parent: Optional[str]) -> None:
        node_id = "n%d" % counter[0]
        counter[0] += 1
        if isinstance(expr, And):
            label, shape = "AND", "ellipse"
        elif isinstance(expr, Or):
            label, shape = "OR", "ellipse"
        elif isinstance(expr, GroupLeaf):
            label, shape = "%s %s" % (expr.operator, expr.group_name), "box"
        elif isinstance(expr, TaskRef):
            label, shape = "TASK %s" % expr.task_name, "box"
        else:
            label, shape = repr(expr), "box"
        lines.append('  %s [label="%s", shape=%s];' % (node_id, label, shape))
        if parent is not None:
            lines.append("  %s -> %s;" % (parent, node_id))
        for child in getattr(expr, "children", ()):
            emit(child, node_id)

    root_id = "task"
    lines.append('  %s [label="%s", shape=folder];' % (root_id, task))
    if taskdef.success is not None:
        emit(taskdef.success, root_id)
    lines.append("}")
    click.echo("\n".join(lines))


if __name__ == "__main__":
    main()
