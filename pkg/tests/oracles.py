"""Brute-force reference implementations the fast paths are checked against."""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

from cptlab import Network, PrefixContext
from cptlab.model import Cpt


def all_assignments(cards: Sequence[int]) -> list[tuple[int, ...]]:
    """Every full assignment in lexicographic order."""
    return list(itertools.product(*[range(c) for c in cards]))


def brute_force_context_columns(cpt: Cpt,
                                prefix: Sequence[int]) -> set[int]:
    """Columns of all assignments extending a prefix, by full enumeration."""
    prefix = tuple(prefix)
    return {
        cpt.column_index(assignment)
        for assignment in all_assignments(cpt.parent_cardinalities)
        if assignment[:len(prefix)] == prefix
    }


def all_contexts(net: Network, node_id: str, min_depth: int = 0,
                 max_depth: int | None = None) -> list[PrefixContext]:
    """Every prefix context of a node, shallowest first."""
    cards = net.cpts[node_id].parent_cardinalities
    if max_depth is None:
        max_depth = len(cards)
    contexts = []
    for depth in range(min_depth, max_depth + 1):
        for outcomes in itertools.product(*[range(c) for c in cards[:depth]]):
            contexts.append(PrefixContext(node_id, outcomes))
    return contexts


def shapes_up_to(max_parents: int,
                 max_cardinality: int) -> Iterable[list[int]]:
    """All parent cardinality shapes with the given bounds."""
    for n in range(max_parents + 1):
        for cards in itertools.product(range(1, max_cardinality + 1),
                                       repeat=n):
            yield list(cards)
