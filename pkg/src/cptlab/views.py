"""View models for CPT navigation: probability tree, shrinkable table,
prefix contexts, branch selection, and parent reordering.

A prefix context assigns the first d parents under the node's current parent
order. Because columns are numbered prefix-major, every context covers one
contiguous column range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

from .errors import EmptySelection, InvalidContext, InvalidPermutation
from .model import Cpt, Network

PLACEHOLDER_LABEL = "…"

NAME_NODE = "nameNode"
OUTCOME_NODE = "outcomeNode"
LEAF_ROW = "leafRow"


@dataclass(frozen=True)
class PrefixContext:
    """Assignment to the first ``len(outcomes)`` parents of one node."""

    node: str
    outcomes: tuple[int, ...] = ()

    @property
    def depth(self) -> int:
        return len(self.outcomes)

    def extended(self, outcome: int) -> PrefixContext:
        return PrefixContext(self.node, self.outcomes + (outcome,))


@dataclass(frozen=True)
class Selection:
    """One or more prefix contexts on a single node, selected together."""

    contexts: frozenset[PrefixContext]

    @classmethod
    def of(cls, *contexts: PrefixContext) -> Selection:
        return cls(frozenset(contexts))


def check_context(net: Network, context: PrefixContext) -> None:
    """Raise unless the context fits the node's current parent order."""
    spec = net.node(context.node)
    cards = net.cpt(context.node).parent_cardinalities
    if context.depth > len(spec.parents):
        raise InvalidContext(
            f"context depth {context.depth} exceeds "
            f"{len(spec.parents)} parents of {context.node!r}")
    for value, cardinality in zip(context.outcomes, cards):
        if not 0 <= value < cardinality:
            raise InvalidContext(
                f"outcome index {value} outside [0, {cardinality}) "
                f"in context for {context.node!r}")


def resolve_context(net: Network, context: PrefixContext) -> set[int]:
    """Column indexes of all full assignments extending the context."""
    check_context(net, context)
    cpt = net.cpt(context.node)
    cards = cpt.parent_cardinalities
    suffix = math.prod(cards[context.depth:])
    prefix = 0
    for value, cardinality in zip(context.outcomes, cards):
        prefix = prefix * cardinality + value
    return set(range(prefix * suffix, (prefix + 1) * suffix))


def resolve_selection(net: Network, selection: Selection) -> set[int]:
    """Union of the column sets of all selected contexts."""
    if not selection.contexts:
        raise EmptySelection("selection contains no contexts")
    nodes = {c.node for c in selection.contexts}
    if len(nodes) > 1:
        raise InvalidContext(
            f"selection spans multiple nodes: {sorted(nodes)}")
    columns: set[int] = set()
    for context in selection.contexts:
        columns |= resolve_context(net, context)
    return columns


# --- probability tree -----------------------------------------------------------


@dataclass
class CptTreeNode:
    """A node of the probability tree.

    Name and outcome levels strictly alternate; outcome nodes at full depth
    are leaf rows carrying their CPT column index. ``collapsed`` marks an
    outcome node whose subtree is currently hidden (the children stay in the
    model so selection state survives a collapse).
    """

    kind: str
    label: str
    context: PrefixContext
    children: list[CptTreeNode] = field(default_factory=list)
    collapsed: bool = False
    column_index: int | None = None


@dataclass
class TreeViewState:
    """Per-session expansion and selection state of one node's tree."""

    expanded: set[PrefixContext] = field(default_factory=set)
    selection: Selection | None = None


def toggle_expand(net: Network, state: TreeViewState,
                  context: PrefixContext) -> TreeViewState:
    """Flip whether the subtree under an outcome node is open."""
    check_context(net, context)
    if context.depth == 0:
        raise InvalidContext("the root name node is always visible")
    state.expanded.symmetric_difference_update({context})
    return state


def build_cptree(net: Network, node_id: str,
                 state: TreeViewState | None = None) -> CptTreeNode:
    """Tree view of a node's CPT under its current parent order.

    Each parent contributes a name level and an outcome level; a root-to-leaf
    path is a full parent assignment. Subtrees under outcome nodes whose
    context is not in ``state.expanded`` are flagged collapsed.
    """
    spec = net.node(node_id)
    cpt = net.cpts[node_id]
    expanded = state.expanded if state is not None else set()
    if not spec.parents:
        return CptTreeNode(
            kind=LEAF_ROW, label=spec.name,
            context=PrefixContext(node_id), column_index=0)

    def outcome_node(depth: int, context: PrefixContext,
                     label: str) -> CptTreeNode:
        if depth == len(spec.parents):
            return CptTreeNode(
                kind=LEAF_ROW, label=label, context=context,
                column_index=cpt.column_index(context.outcomes))
        node = CptTreeNode(
            kind=OUTCOME_NODE, label=label, context=context,
            collapsed=context not in expanded)
        node.children.append(name_node(depth, context))
        return node

    def name_node(depth: int, context: PrefixContext) -> CptTreeNode:
        parent_spec = net.node(spec.parents[depth])
        node = CptTreeNode(kind=NAME_NODE, label=parent_spec.name,
                           context=context)
        for index, outcome in enumerate(parent_spec.outcomes):
            node.children.append(
                outcome_node(depth + 1, context.extended(index), outcome))
        return node

    return name_node(0, PrefixContext(node_id))


def tree_leaves(root: CptTreeNode) -> list[CptTreeNode]:
    """All leaf rows of a tree, left to right."""
    if root.kind == LEAF_ROW:
        return [root]
    leaves: list[CptTreeNode] = []
    for child in root.children:
        leaves.extend(tree_leaves(child))
    return leaves


# --- shrinkable table --------------------------------------------------------


@dataclass
class TableViewState:
    """Set of prefix contexts whose covered column ranges are collapsed."""

    shrunk: set[PrefixContext] = field(default_factory=set)


def toggle_shrink(net: Network, state: TableViewState,
                  context: PrefixContext) -> TableViewState:
    """Flip whether a header cell's covered range is collapsed."""
    check_context(net, context)
    if context.depth == 0:
        raise InvalidContext("only header cells (depth >= 1) can shrink")
    state.shrunk.symmetric_difference_update({context})
    return state


@dataclass
class HeaderCell:
    label: str
    span: int
    context: PrefixContext
    is_placeholder: bool = False


@dataclass
class ValueColumn:
    column_index: int | None
    probabilities: list[float] | None
    status: str | None
    is_placeholder: bool = False


@dataclass
class ScptGrid:
    """Renderable shrinkable-CPT grid: stacked header rows over value columns."""

    header_rows: list[list[HeaderCell]]
    value_columns: list[ValueColumn]
    row_labels: list[str]


def build_scpt(net: Network, node_id: str,
               state: TableViewState | None = None) -> ScptGrid:
    """Table view of a node's CPT with shrunk ranges collapsed.

    A shrunk header cell keeps its own label but its covered range collapses
    to a single placeholder column in every row below it; shrunk contexts
    nested under an already-shrunk ancestor have no further visible effect.
    """
    spec = net.node(node_id)
    cpt = net.cpts[node_id]
    shrunk = state.shrunk if state is not None else set()
    depth_count = len(spec.parents)
    header_rows: list[list[HeaderCell]] = [[] for _ in range(depth_count)]
    value_columns: list[ValueColumn] = []

    def emit_placeholders(context: PrefixContext, below_depth: int) -> None:
        for depth in range(below_depth, depth_count):
            header_rows[depth].append(HeaderCell(
                label=PLACEHOLDER_LABEL, span=1, context=context,
                is_placeholder=True))
        value_columns.append(ValueColumn(
            column_index=None, probabilities=None, status=None,
            is_placeholder=True))

    def walk(context: PrefixContext) -> int:
        depth = context.depth
        if depth == depth_count:
            column = cpt.column_index(context.outcomes)
            value_columns.append(ValueColumn(
                column_index=column, probabilities=cpt.column(column),
                status=cpt.status[column]))
            return 1
        parent_spec = net.node(spec.parents[depth])
        total = 0
        for index, outcome in enumerate(parent_spec.outcomes):
            child = context.extended(index)
            if child in shrunk:
                header_rows[depth].append(
                    HeaderCell(label=outcome, span=1, context=child))
                emit_placeholders(child, depth + 1)
                total += 1
            else:
                span = walk(child)
                header_rows[depth].append(
                    HeaderCell(label=outcome, span=span, context=child))
                total += span
        return total

    walk(PrefixContext(node_id))
    return ScptGrid(header_rows=header_rows, value_columns=value_columns,
                    row_labels=list(spec.outcomes))


# --- parent reordering -------------------------------------------------------------


def reorder_parents(net: Network, node_id: str,
                    permutation: Sequence[int]) -> Network:
    """Physically permute a node's parent order and CPT columns.

    ``permutation[i]`` is the old position of the parent that moves to new
    position i. Distributions keyed by parent identity are unchanged; each
    column's status travels with it.
    """
    spec = net.node(node_id)
    cpt = net.cpts[node_id]
    n = len(spec.parents)
    if sorted(permutation) != list(range(n)):
        raise InvalidPermutation(
            f"{list(permutation)} is not a permutation of [0, {n})")
    if list(permutation) == list(range(n)):
        return net

    old_cards = cpt.parent_cardinalities
    new_cards = [old_cards[p] for p in permutation]
    old_strides = _strides(old_cards)
    column_map = []
    for new_index in range(cpt.column_count):
        digits = _digits(new_index, new_cards)
        old_index = 0
        for position, digit in zip(permutation, digits):
            old_index += digit * old_strides[position]
        column_map.append(old_index)

    cpt.values = [[row[old] for old in column_map] for row in cpt.values]
    cpt.status = [cpt.status[old] for old in column_map]
    cpt.parent_cardinalities = new_cards
    net.nodes[node_id] = replace(
        spec, parents=tuple(spec.parents[p] for p in permutation))
    return net


def _strides(cards: Sequence[int]) -> list[int]:
    strides = [1] * len(cards)
    for i in range(len(cards) - 2, -1, -1):
        strides[i] = strides[i + 1] * cards[i + 1]
    return strides


def _digits(index: int, cards: Sequence[int]) -> list[int]:
    digits = [0] * len(cards)
    for i in range(len(cards) - 1, -1, -1):
        digits[i] = index % cards[i]
        index //= cards[i]
    return digits
