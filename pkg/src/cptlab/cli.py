"""Command-line front door: validation reports, ASCII tree/table dumps,
scripted elicitation replay, and the HTTP service.

Exit codes: 0 clean, 1 I/O or parse errors, 2 validation findings,
3 script domain errors.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import store
from .elicit import EditorState, begin_edit, commit, validate as validate_net
from .errors import CptError, StoreError, error_name
from .model import Network
from .views import (
    PLACEHOLDER_LABEL,
    LEAF_ROW,
    PrefixContext,
    Selection,
    TableViewState,
    TreeViewState,
    build_cptree,
    build_scpt,
    reorder_parents,
    toggle_shrink,
)


@click.group()
@click.version_option()
def main() -> None:
    """Workbench for conditional probability tables."""


def _load(path: str, check_probabilities: bool = True) -> Network:
    try:
        return store.load(path, check_probabilities=check_probabilities)
    except OSError as exc:
        click.echo(f"error: cannot read {path}: {exc}", err=True)
        sys.exit(1)
    except StoreError as exc:
        click.echo(f"error: {error_name(exc)}: {exc}", err=True)
        sys.exit(1)


@main.command()
@click.argument("file")
@click.option("--tol", default=1e-6, show_default=True,
              help="Allowed deviation of column sums from 1.")
def validate(file: str, tol: float) -> None:
    """Report sum violations and never-elicited columns in FILE."""
    net = _load(file, check_probabilities=False)
    report = validate_net(net, tol=tol)
    for violation in report.sum_violations:
        deviation = violation.actual_sum - 1.0
        click.echo(f"{violation.node}[{violation.column}]: "
                   f"sum is {violation.actual_sum!r} (off by {deviation:.3e})")
    for gap in report.unspecified:
        click.echo(f"{gap.node}[{gap.column}]: never elicited")
    if not report.is_clean:
        sys.exit(2)


@main.command()
@click.argument("file")
@click.argument("node")
@click.option("--depth", type=int, default=None,
              help="Expand the tree down to this parent level only.")
def tree(file: str, node: str, depth: int | None) -> None:
    """Dump NODE's probability tree; collapsed levels end in …."""
    net = _load(file)
    try:
        lines = render_tree(net, node, depth)
    except CptError as exc:
        click.echo(f"error: {error_name(exc)}: {exc}", err=True)
        sys.exit(1)
    click.echo("\n".join(lines))


@main.command()
@click.argument("file")
@click.argument("node")
@click.option("--shrink", "shrinks", multiple=True, metavar="CTX",
              help="Prefix context to collapse, as comma-separated outcome "
                   "names or indexes of the leading parents, e.g. "
                   "'absent' or 'absent,present'. Repeatable.")
def table(file: str, node: str, shrinks: tuple[str, ...]) -> None:
    """Dump NODE's shrinkable CPT with … placeholders."""
    net = _load(file)
    try:
        state = TableViewState()
        for raw in shrinks:
            toggle_shrink(net, state, _parse_context(net, node, raw))
        lines = render_table(net, node, state)
    except CptError as exc:
        click.echo(f"error: {error_name(exc)}: {exc}", err=True)
        sys.exit(1)
    click.echo("\n".join(lines))


@main.command()
@click.argument("file")
@click.argument("script")
@click.option("-o", "--output", required=True,
              help="Where to write the resulting document.")
def apply(file: str, script: str, output: str) -> None:
    """Replay an elicitation SCRIPT (.cpts.jsonl) against FILE."""
    net = _load(file)
    try:
        steps = _read_script(script)
    except OSError as exc:
        click.echo(f"error: cannot read {script}: {exc}", err=True)
        sys.exit(1)
    try:
        run_script(net, steps)
    except CptError as exc:
        click.echo(f"error: {error_name(exc)}: {exc}", err=True)
        sys.exit(3)
    except ScriptError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)
    except (KeyError, TypeError) as exc:
        click.echo(f"error: malformed script step: {exc}", err=True)
        sys.exit(1)
    store.save(net, output)


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--preload", multiple=True,
              help="Document to load at startup. Repeatable.")
def serve(port: int, host: str, preload: tuple[str, ...]) -> None:
    """Run the HTTP editor service."""
    import uvicorn

    from .service import create_app

    app = create_app()
    for path in preload:
        net = _load(path)
        network_id = app.state.registry.register(net)
        click.echo(f"{path}: network {network_id}")
    uvicorn.run(app, host=host, port=port)


# --- rendering --------------------------------------------------------------


def render_tree(net: Network, node_id: str,
                depth: int | None = None) -> list[str]:
    """Two-space-indented dump; leaf rows carry distribution and status."""
    cpt = net.cpt(node_id)
    parent_count = len(net.node(node_id).parents)
    if depth is None:
        depth = parent_count
    state = TreeViewState(expanded={
        context for context in _contexts_up_to(net, node_id, depth - 1)
        if context.depth >= 1})
    root = build_cptree(net, node_id, state)
    lines: list[str] = []

    def walk(tree_node, indent: int) -> None:
        pad = "  " * indent
        if tree_node.kind == LEAF_ROW:
            probs = " ".join(repr(p)
                             for p in cpt.column(tree_node.column_index))
            status = cpt.status[tree_node.column_index]
            lines.append(f"{pad}{tree_node.label} | {probs} | {status}")
            return
        marker = f" {PLACEHOLDER_LABEL}" if tree_node.collapsed else ""
        lines.append(f"{pad}{tree_node.label}{marker}")
        if not tree_node.collapsed:
            for child in tree_node.children:
                walk(child, indent + 1)

    walk(root, 0)
    return lines


def render_table(net: Network, node_id: str,
                 state: TableViewState) -> list[str]:
    """Pipe-separated dump; spanned header labels fill their first column."""
    grid = build_scpt(net, node_id, state)
    spec = net.node(node_id)
    lines = []
    for depth, row in enumerate(grid.header_rows):
        fields = []
        for cell in row:
            fields.append(cell.label)
            fields.extend([""] * (cell.span - 1))
        parent_name = net.node(spec.parents[depth]).name
        lines.append(" | ".join([parent_name] + fields))
    for index, outcome in enumerate(grid.row_labels):
        fields = [
            PLACEHOLDER_LABEL if column.is_placeholder
            else repr(column.probabilities[index])
            for column in grid.value_columns
        ]
        lines.append(" | ".join([outcome] + fields))
    status_fields = [
        PLACEHOLDER_LABEL if column.is_placeholder else column.status
        for column in grid.value_columns
    ]
    lines.append(" | ".join(["status"] + status_fields))
    return lines


def _contexts_up_to(net: Network, node_id: str,
                    max_depth: int) -> list[PrefixContext]:
    contexts = [PrefixContext(node_id)]
    cards = net.cpt(node_id).parent_cardinalities
    frontier = contexts[:]
    for cardinality in cards[:max(max_depth, 0)]:
        frontier = [context.extended(i)
                    for context in frontier for i in range(cardinality)]
        contexts.extend(frontier)
    return contexts


def _parse_context(net: Network, node_id: str, raw: str) -> PrefixContext:
    spec = net.node(node_id)
    outcomes: list[int] = []
    tokens = [token.strip() for token in raw.split(",")] if raw else []
    if len(tokens) > len(spec.parents):
        raise click.ClickException(
            f"context {raw!r} is deeper than the parent list")
    for position, token in enumerate(tokens):
        parent = net.node(spec.parents[position])
        if token.isdigit():
            outcomes.append(int(token))
        else:
            outcomes.append(parent.outcome_index(token))
    return PrefixContext(node_id, tuple(outcomes))


# --- script replay ---------------------------------------------------------------


class ScriptError(Exception):
    """A structurally valid script step that cannot be executed."""


def _read_script(path: str) -> list[dict]:
    steps = []
    for line_number, line in enumerate(
            Path(path).read_text("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            step = json.loads(line)
        except json.JSONDecodeError as exc:
            click.echo(f"error: {path}:{line_number}: {exc.msg}", err=True)
            sys.exit(1)
        if not isinstance(step, dict) or "op" not in step:
            click.echo(f"error: {path}:{line_number}: "
                       f"each step must be an object with an 'op' field",
                       err=True)
            sys.exit(1)
        steps.append(step)
    return steps


def run_script(net: Network, steps: list[dict]) -> Network:
    """Replay steps through the elicitation engine, mutating ``net``."""
    editor: EditorState | None = None
    for number, step in enumerate(steps, start=1):
        op = step["op"]
        if op == "select":
            contexts = [PrefixContext(step["node"], tuple(outcomes))
                        for outcomes in step["contexts"]]
            editor = begin_edit(net, step["node"],
                                Selection(frozenset(contexts)))
        elif op == "set":
            _require_editor(editor, number, op)
            editor.set_probability(step["outcome"], step["target"])
        elif op == "lock":
            _require_editor(editor, number, op)
            editor.set_lock(step["outcome"], True)
        elif op == "unlock":
            _require_editor(editor, number, op)
            editor.set_lock(step["outcome"], False)
        elif op == "commit":
            _require_editor(editor, number, op)
            commit(net, editor)
        elif op == "reorder":
            reorder_parents(net, step["node"], step["permutation"])
            editor = None
        else:
            raise ScriptError(f"step {number}: unknown op {op!r}")
    return net


def _require_editor(editor: EditorState | None, number: int, op: str) -> None:
    if editor is None:
        raise ScriptError(
            f"step {number}: {op!r} needs a preceding 'select' step")


if __name__ == "__main__":
    main()
