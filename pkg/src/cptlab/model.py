"""Network structure and CPT storage with canonical column indexing.

A CPT is a dense m x C matrix: rows are child outcomes, columns are parent
outcome combinations. Columns are numbered in mixed radix with the first
parent most significant, so the column range covered by any prefix of parent
assignments is contiguous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .errors import (
    ArityMismatch,
    CycleDetected,
    DuplicateEdge,
    DuplicateNode,
    DuplicateOutcome,
    EmptyOutcomes,
    IndexOutOfRange,
    InvalidDistribution,
    OutcomeOutOfRange,
    UnknownNode,
)

DEFAULT = "default"
ELICITED = "elicited"
STATUSES = (DEFAULT, ELICITED)

#: Tolerance on column sums for committed mutations.
DISTRIBUTION_TOLERANCE = 1e-9

DEFAULT_OUTCOMES = ("State0", "State1")


def check_distribution(probs: Sequence[float], size: int,
                       tol: float = DISTRIBUTION_TOLERANCE) -> list[float]:
    """Validate a probability vector and return a defensive copy."""
    if len(probs) != size:
        raise InvalidDistribution(
            f"expected {size} probabilities, got {len(probs)}")
    for p in probs:
        if not (0.0 <= p <= 1.0):
            raise InvalidDistribution(f"probability {p!r} outside [0, 1]")
    total = sum(probs)
    if abs(total - 1.0) > tol:
        raise InvalidDistribution(f"probabilities sum to {total!r}, not 1")
    return [float(p) for p in probs]


@dataclass(frozen=True)
class NodeSpec:
    """A chance node: ordered outcomes plus an ordered parent list."""

    id: str
    name: str
    outcomes: tuple[str, ...]
    parents: tuple[str, ...] = ()

    @property
    def outcome_count(self) -> int:
        return len(self.outcomes)

    def outcome_index(self, name: str) -> int:
        try:
            return self.outcomes.index(name)
        except ValueError:
            raise OutcomeOutOfRange(
                f"node {self.id!r} has no outcome named {name!r}") from None


@dataclass
class Cpt:
    """Conditional probability table of one node.

    ``values[r][c]`` is P(outcome r | parent combination c); ``status[c]``
    records whether column c was ever elicited or still holds defaults.
    """

    child_cardinality: int
    parent_cardinalities: list[int]
    values: list[list[float]]
    status: list[str]

    @classmethod
    def uniform(cls, child_cardinality: int) -> Cpt:
        p = 1.0 / child_cardinality
        return cls(
            child_cardinality=child_cardinality,
            parent_cardinalities=[],
            values=[[p] for _ in range(child_cardinality)],
            status=[DEFAULT],
        )

    @property
    def column_count(self) -> int:
        return math.prod(self.parent_cardinalities)

    def column_index(self, assignment: Sequence[int]) -> int:
        """Mixed-radix column number of a full parent assignment.

        The first parent is the most significant digit.
        """
        cards = self.parent_cardinalities
        if len(assignment) != len(cards):
            raise ArityMismatch(
                f"assignment has {len(assignment)} entries, "
                f"CPT has {len(cards)} parents")
        index = 0
        for value, cardinality in zip(assignment, cards):
            if not 0 <= value < cardinality:
                raise OutcomeOutOfRange(
                    f"outcome index {value} outside [0, {cardinality})")
            index = index * cardinality + value
        return index

    def index_to_assignment(self, index: int) -> tuple[int, ...]:
        """Inverse of :meth:`column_index`."""
        if not 0 <= index < self.column_count:
            raise IndexOutOfRange(
                f"column {index} outside [0, {self.column_count})")
        digits = []
        for cardinality in reversed(self.parent_cardinalities):
            digits.append(index % cardinality)
            index //= cardinality
        return tuple(reversed(digits))

    def column(self, index: int) -> list[float]:
        """Copy of column ``index`` as a probability vector."""
        if not 0 <= index < self.column_count:
            raise IndexOutOfRange(
                f"column {index} outside [0, {self.column_count})")
        return [row[index] for row in self.values]

    def column_sum(self, index: int) -> float:
        return sum(row[index] for row in self.values)


@dataclass
class Network:
    """A DAG of chance nodes, each backed by a CPT.

    All structural edits keep every node's CPT shape consistent with its
    outcomes and parents, so a network is valid at any point.
    """

    nodes: dict[str, NodeSpec] = field(default_factory=dict)
    cpts: dict[str, Cpt] = field(default_factory=dict)

    def node(self, node_id: str) -> NodeSpec:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNode(f"no node with id {node_id!r}") from None

    def cpt(self, node_id: str) -> Cpt:
        self.node(node_id)
        return self.cpts[node_id]

    # --- structure edits ---------------------------------------------------

    def create_node(self, name: str, outcomes: Sequence[str] | None = None,
                    node_id: str | None = None) -> NodeSpec:
        """Add a parentless node with a uniform single-column CPT."""
        if not name:
            raise ValueError("node name must be non-empty")
        if outcomes is None:
            outcomes = DEFAULT_OUTCOMES
        elif len(outcomes) == 0:
            raise EmptyOutcomes(f"node {name!r} needs at least one outcome")
        seen = set()
        for outcome in outcomes:
            if not outcome:
                raise ValueError("outcome names must be non-empty")
            if outcome in seen:
                raise DuplicateOutcome(
                    f"outcome {outcome!r} appears twice on node {name!r}")
            seen.add(outcome)
        if node_id is None:
            node_id = name.strip().lower().replace(" ", "_")
        if node_id in self.nodes:
            raise DuplicateNode(f"node id {node_id!r} already exists")
        spec = NodeSpec(id=node_id, name=name, outcomes=tuple(outcomes))
        self.nodes[node_id] = spec
        self.cpts[node_id] = Cpt.uniform(len(outcomes))
        return spec

    def add_parent(self, child: str, parent: str) -> Cpt:
        """Append ``parent`` as the child's last (least significant) dimension.

        Every existing column is replicated once per outcome of the new
        parent, so all conditional distributions are preserved; replicated
        columns inherit the source column's status.
        """
        child_spec = self.node(child)
        parent_spec = self.node(parent)
        if parent in child_spec.parents:
            raise DuplicateEdge(f"{parent!r} is already a parent of {child!r}")
        if child == parent or child in self._ancestors(parent):
            raise CycleDetected(
                f"edge {parent!r} -> {child!r} would close a cycle")
        cardinality = parent_spec.outcome_count
        cpt = self.cpts[child]
        cpt.values = [
            [value for value in row for _ in range(cardinality)]
            for row in cpt.values
        ]
        cpt.status = [s for s in cpt.status for _ in range(cardinality)]
        cpt.parent_cardinalities.append(cardinality)
        self.nodes[child] = replace(
            child_spec, parents=child_spec.parents + (parent,))
        return cpt

    def _ancestors(self, node_id: str) -> set[str]:
        seen: set[str] = set()
        stack = list(self.node(node_id).parents)
        while stack:
            current = stack.pop()
            if current in seen:
                continue
            seen.add(current)
            stack.extend(self.nodes[current].parents)
        return seen

    # --- CPT access ----------------------------------------------------------

    def get_distribution(self, node_id: str,
                         assignment: Sequence[int]) -> list[float]:
        """The conditional distribution at a full parent assignment."""
        return self.cpt(node_id).column(
            self.cpt(node_id).column_index(assignment))

    def set_columns(self, node_id: str, columns: Iterable[int],
                    distribution: Sequence[float], status: str) -> None:
        """Overwrite every listed column with one distribution and status."""
        if status not in STATUSES:
            raise ValueError(f"unknown status {status!r}")
        cpt = self.cpt(node_id)
        targets = sorted(set(columns))
        for column in targets:
            if not 0 <= column < cpt.column_count:
                raise IndexOutOfRange(
                    f"column {column} outside [0, {cpt.column_count})")
        probs = check_distribution(distribution, cpt.child_cardinality)
        for column in targets:
            for row, p in zip(cpt.values, probs):
                row[column] = p
            cpt.status[column] = status

    # --- identity-keyed lookups ------------------------------------------------

    def assignment_for(self, node_id: str,
                       by_parent: Mapping[str, int]) -> tuple[int, ...]:
        """Positional assignment (current parent order) from a parent-id map."""
        spec = self.node(node_id)
        if set(by_parent) != set(spec.parents):
            missing = set(spec.parents) - set(by_parent)
            extra = set(by_parent) - set(spec.parents)
            raise ArityMismatch(
                f"assignment keys do not match parents of {node_id!r} "
                f"(missing {sorted(missing)}, extra {sorted(extra)})")
        return tuple(by_parent[p] for p in spec.parents)

    def distribution_for(self, node_id: str,
                         by_parent: Mapping[str, int]) -> list[float]:
        """Distribution at an assignment keyed by parent identity."""
        return self.get_distribution(
            node_id, self.assignment_for(node_id, by_parent))
