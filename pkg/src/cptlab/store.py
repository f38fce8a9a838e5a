"""Canonical, deterministic persistence of networks as ``.cptn`` documents.

A document is UTF-8 JSON with a fixed key order (formatVersion, nodes, cpts),
nodes sorted by id, floats printed as the shortest decimal that round-trips,
and a trailing newline: structurally equal networks serialize to identical
bytes. Loading validates the schema strictly and never renormalizes.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .errors import DocumentSyntaxError, InvariantViolation, SchemaError
from .model import Cpt, Network, NodeSpec, STATUSES

FORMAT_VERSION = 1

#: Column-sum tolerance at load time; looser than the runtime 1e-9 so files
#: written at six significant figures still load.
LOAD_TOLERANCE = 1e-6

FILE_EXTENSION = ".cptn"


def document(net: Network) -> dict[str, Any]:
    """Canonical plain-data form of a network (insertion order is key order)."""
    nodes = []
    for node_id in sorted(net.nodes):
        spec = net.nodes[node_id]
        nodes.append({
            "id": spec.id,
            "name": spec.name,
            "outcomes": list(spec.outcomes),
            "parents": list(spec.parents),
        })
    cpts: dict[str, Any] = {}
    for node_id in sorted(net.cpts):
        cpt = net.cpts[node_id]
        cpts[node_id] = {
            "parentOrder": list(net.nodes[node_id].parents),
            "values": [float(v) for row in cpt.values for v in row],
            "status": list(cpt.status),
        }
    return {"formatVersion": FORMAT_VERSION, "nodes": nodes, "cpts": cpts}


def serialize(net: Network) -> bytes:
    text = json.dumps(document(net), ensure_ascii=False, allow_nan=False,
                      indent=2)
    return (text + "\n").encode("utf-8")


def parse(data: bytes | str, *, check_probabilities: bool = True) -> Network:
    """Load a document, tolerating any key order and whitespace.

    Unknown fields, duplicate keys, and non-finite numbers are rejected;
    columns whose sums drift beyond ``LOAD_TOLERANCE`` are errors, never
    silently fixed. ``check_probabilities=False`` skips the entry-range and
    column-sum checks so a validator can load a broken file to diagnose it;
    the schema and structure checks still apply.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DocumentSyntaxError(f"not valid UTF-8: {exc}") from None
    else:
        text = data
    try:
        raw = json.loads(text, object_pairs_hook=_strict_object,
                         parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise DocumentSyntaxError(
            f"line {exc.lineno}: {exc.msg}", line=exc.lineno) from None
    return _network_from_document(raw, check_probabilities)


def load(path: str | Path, *, check_probabilities: bool = True) -> Network:
    return parse(Path(path).read_bytes(),
                 check_probabilities=check_probabilities)


def save(net: Network, path: str | Path) -> None:
    Path(path).write_bytes(serialize(net))


# --- document decoding ------------------------------------------------------


def _strict_object(pairs: list[tuple[str, Any]]) -> dict[str, Any]:
    obj: dict[str, Any] = {}
    for key, value in pairs:
        if key in obj:
            raise SchemaError("<document>", f"duplicate key {key!r}")
        obj[key] = value
    return obj


def _reject_constant(name: str) -> Any:
    raise SchemaError("<document>", f"non-finite number {name}")


def _require_fields(obj: Any, path: str, fields: tuple[str, ...]) -> None:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected a JSON object")
    unknown = sorted(set(obj) - set(fields))
    if unknown:
        raise SchemaError(path, f"unknown field(s): {', '.join(unknown)}")
    missing = sorted(set(fields) - set(obj))
    if missing:
        raise SchemaError(path, f"missing field(s): {', '.join(missing)}")


def _string(value: Any, path: str, allow_empty: bool = False) -> str:
    if not isinstance(value, str):
        raise SchemaError(path, f"expected a string, got {type(value).__name__}")
    if not value and not allow_empty:
        raise SchemaError(path, "must be non-empty")
    return value


def _number(value: Any, path: str) -> float:
    if type(value) not in (int, float):
        raise SchemaError(path, f"expected a number, got {type(value).__name__}")
    return float(value)


def _network_from_document(raw: Any, check_probabilities: bool) -> Network:
    _require_fields(raw, "<document>", ("formatVersion", "nodes", "cpts"))
    version = raw["formatVersion"]
    if type(version) is not int or version != FORMAT_VERSION:
        raise SchemaError("formatVersion",
                          f"unsupported format version {version!r}")
    if not isinstance(raw["nodes"], list):
        raise SchemaError("nodes", "expected a list")
    if not isinstance(raw["cpts"], dict):
        raise SchemaError("cpts", "expected an object")

    specs = _parse_nodes(raw["nodes"])
    _check_parent_refs(specs)
    _check_acyclic(specs)
    cpts = _parse_cpts(raw["cpts"], specs, check_probabilities)

    net = Network()
    for node_id, (spec, _) in specs.items():
        cpt, order = cpts[node_id]
        net.nodes[node_id] = NodeSpec(
            id=spec["id"], name=spec["name"],
            outcomes=tuple(spec["outcomes"]), parents=tuple(order))
        net.cpts[node_id] = cpt
    return net


def _parse_nodes(entries: list[Any]) -> dict[str, tuple[dict[str, Any], list[str]]]:
    specs: dict[str, tuple[dict[str, Any], list[str]]] = {}
    for i, entry in enumerate(entries):
        path = f"nodes[{i}]"
        _require_fields(entry, path, ("id", "name", "outcomes", "parents"))
        node_id = _string(entry["id"], f"{path}.id")
        _string(entry["name"], f"{path}.name")
        if node_id in specs:
            raise SchemaError(f"{path}.id", f"duplicate node id {node_id!r}")
        outcomes = entry["outcomes"]
        if not isinstance(outcomes, list) or not outcomes:
            raise SchemaError(f"{path}.outcomes", "expected a non-empty list")
        seen: set[str] = set()
        for j, outcome in enumerate(outcomes):
            name = _string(outcome, f"{path}.outcomes[{j}]")
            if name in seen:
                raise SchemaError(f"{path}.outcomes[{j}]",
                                  f"duplicate outcome {name!r}")
            seen.add(name)
        parents = entry["parents"]
        if not isinstance(parents, list):
            raise SchemaError(f"{path}.parents", "expected a list")
        seen.clear()
        for j, parent in enumerate(parents):
            ref = _string(parent, f"{path}.parents[{j}]")
            if ref == node_id:
                raise SchemaError(f"{path}.parents[{j}]",
                                  f"node {node_id!r} cannot be its own parent")
            if ref in seen:
                raise SchemaError(f"{path}.parents[{j}]",
                                  f"duplicate parent {ref!r}")
            seen.add(ref)
        specs[node_id] = (entry, list(parents))
    return specs


def _check_parent_refs(
        specs: dict[str, tuple[dict[str, Any], list[str]]]) -> None:
    for node_id, (_, parents) in specs.items():
        for parent in parents:
            if parent not in specs:
                raise InvariantViolation(
                    "nodes", f"node {node_id!r} references "
                             f"unknown parent {parent!r}")


def _check_acyclic(
        specs: dict[str, tuple[dict[str, Any], list[str]]]) -> None:
    WHITE, GREY, BLACK = 0, 1, 2
    state = {node_id: WHITE for node_id in specs}

    def visit(start: str) -> None:
        stack: list[tuple[str, int]] = [(start, 0)]
        state[start] = GREY
        while stack:
            node_id, cursor = stack[-1]
            parents = specs[node_id][1]
            if cursor == len(parents):
                stack.pop()
                state[node_id] = BLACK
                continue
            stack[-1] = (node_id, cursor + 1)
            parent = parents[cursor]
            if state[parent] == GREY:
                raise InvariantViolation(
                    "nodes", f"parent cycle through {parent!r}")
            if state[parent] == WHITE:
                state[parent] = GREY
                stack.append((parent, 0))

    for node_id in specs:
        if state[node_id] == WHITE:
            visit(node_id)


def _parse_cpts(raw: dict[str, Any],
                specs: dict[str, tuple[dict[str, Any], list[str]]],
                check_probabilities: bool = True,
                ) -> dict[str, tuple[Cpt, list[str]]]:
    """CPT plus effective parent order per node id."""
    for node_id in raw:
        if node_id not in specs:
            raise SchemaError(f"cpts.{node_id}", "no node with this id")
    for node_id in specs:
        if node_id not in raw:
            raise InvariantViolation("cpts", f"missing CPT for node {node_id!r}")

    cpts: dict[str, tuple[Cpt, list[str]]] = {}
    for node_id, (entry, declared_parents) in specs.items():
        path = f"cpts.{node_id}"
        body = raw[node_id]
        _require_fields(body, path, ("parentOrder", "values", "status"))
        order = body["parentOrder"]
        if (not isinstance(order, list)
                or sorted(map(str, order)) != sorted(declared_parents)):
            raise SchemaError(
                f"{path}.parentOrder",
                f"must be a permutation of the node's parents "
                f"{sorted(declared_parents)}")
        order = [_string(p, f"{path}.parentOrder") for p in order]
        cards = [len(specs[p][0]["outcomes"]) for p in order]
        m = len(entry["outcomes"])
        column_count = 1
        for c in cards:
            column_count *= c

        values = body["values"]
        if not isinstance(values, list) or len(values) != m * column_count:
            raise SchemaError(
                f"{path}.values",
                f"expected {m * column_count} values "
                f"({m} outcomes x {column_count} columns)")
        flat = [_number(v, f"{path}.values[{i}]") for i, v in enumerate(values)]
        if check_probabilities:
            for i, v in enumerate(flat):
                if not 0.0 <= v <= 1.0:
                    raise InvariantViolation(
                        f"{path}.values[{i}]",
                        f"probability {v!r} outside [0, 1]")

        status = body["status"]
        if not isinstance(status, list) or len(status) != column_count:
            raise SchemaError(f"{path}.status",
                              f"expected {column_count} entries")
        for i, s in enumerate(status):
            if s not in STATUSES:
                raise SchemaError(f"{path}.status[{i}]",
                                  f"unknown status {s!r}")

        rows = [flat[r * column_count:(r + 1) * column_count]
                for r in range(m)]
        if check_probabilities:
            for column in range(column_count):
                total = sum(row[column] for row in rows)
                if abs(total - 1.0) > LOAD_TOLERANCE:
                    raise InvariantViolation(
                        f"{path}.values",
                        f"column {column} sums to {total!r}, not 1")
        cpts[node_id] = (
            Cpt(child_cardinality=m, parent_cardinalities=cards,
                values=rows, status=list(status)),
            order,
        )
    return cpts
