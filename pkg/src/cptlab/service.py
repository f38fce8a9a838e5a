"""HTTP facade over the engine: networks, per-client view states, and
elicitation sessions.

All probability math happens server-side; clients send targets and render
responses. Mutations are serialized per network behind an integer version
echoed in an ``If-Match`` header (optimistic concurrency); editor states are
server-side and ephemeral, commits are the durable boundary.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from typing import Any

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from . import store
from .elicit import (
    EditorState,
    PERCENTAGE,
    TEXT,
    begin_edit,
    commit,
    format_label,
    validate,
)
from .errors import CptError, StoreError, UnknownNode, error_name
from .model import Network
from .views import (
    CptTreeNode,
    PrefixContext,
    ScptGrid,
    Selection,
    TableViewState,
    TreeViewState,
    build_cptree,
    build_scpt,
    reorder_parents,
    toggle_expand,
    toggle_shrink,
)


class ApiError(Exception):
    def __init__(self, status: int, name: str, detail: str,
                 path: str | None = None):
        super().__init__(detail)
        self.status = status
        self.name = name
        self.detail = detail
        self.path = path


@dataclass
class NetworkSession:
    network: Network
    version: int = 1
    lock: threading.RLock = field(default_factory=threading.RLock)
    tree_states: dict[tuple[str, str], TreeViewState] = field(
        default_factory=dict)
    table_states: dict[tuple[str, str], TableViewState] = field(
        default_factory=dict)


@dataclass
class EditorRecord:
    editor_id: str
    network_id: str
    state: EditorState


class Registry:
    """All live networks and editors of one service process."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.sessions: dict[str, NetworkSession] = {}
        self.editors: dict[str, EditorRecord] = {}

    def register(self, net: Network) -> str:
        with self._lock:
            network_id = uuid.uuid4().hex[:12]
            self.sessions[network_id] = NetworkSession(network=net)
            return network_id

    def session(self, network_id: str) -> NetworkSession:
        try:
            return self.sessions[network_id]
        except KeyError:
            raise ApiError(404, "UnknownNetwork",
                           f"no network {network_id!r}") from None

    def add_editor(self, network_id: str, state: EditorState) -> EditorRecord:
        with self._lock:
            record = EditorRecord(uuid.uuid4().hex[:12], network_id, state)
            self.editors[record.editor_id] = record
            return record

    def editor(self, editor_id: str) -> EditorRecord:
        try:
            return self.editors[editor_id]
        except KeyError:
            raise ApiError(404, "UnknownEditor",
                           f"no editor {editor_id!r}") from None

    def drop_editors(self, network_id: str, node_id: str) -> None:
        with self._lock:
            self.editors = {
                editor_id: record
                for editor_id, record in self.editors.items()
                if not (record.network_id == network_id
                        and record.state.node == node_id)
            }


def create_app(registry: Registry | None = None) -> FastAPI:
    app = FastAPI(title="cptlab", docs_url=None, redoc_url=None)
    registry = registry if registry is not None else Registry()
    app.state.registry = registry

    @app.exception_handler(ApiError)
    async def on_api_error(_: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status,
            content={"error": exc.name, "detail": exc.detail,
                     "path": exc.path})

    @app.exception_handler(CptError)
    async def on_domain_error(_: Request, exc: CptError) -> JSONResponse:
        wrapped = _domain_error(exc)
        return JSONResponse(
            status_code=wrapped.status,
            content={"error": wrapped.name, "detail": wrapped.detail,
                     "path": wrapped.path})

    # --- networks ---------------------------------------------------------

    @app.post("/api/networks", status_code=201)
    async def load_network(request: Request) -> dict[str, Any]:
        try:
            net = store.parse(await request.body())
        except StoreError as exc:
            raise ApiError(400, error_name(exc), str(exc),
                           path=getattr(exc, "path", None)) from None
        network_id = registry.register(net)
        return {"id": network_id, "version": registry.session(network_id).version}

    @app.get("/api/networks/{network_id}")
    def get_network(network_id: str) -> Response:
        session = registry.session(network_id)
        return Response(content=store.serialize(session.network),
                        media_type="application/json")

    @app.get("/api/networks/{network_id}/validation")
    def get_validation(network_id: str, tol: float = 1e-6) -> dict[str, Any]:
        session = registry.session(network_id)
        if tol <= 0:
            raise ApiError(422, "InvalidTolerance", "tol must be positive")
        report = validate(session.network, tol=tol)
        return {
            "sumViolations": [
                {"node": v.node, "column": v.column, "actualSum": v.actual_sum}
                for v in report.sum_violations
            ],
            "unspecified": [
                {"node": u.node, "column": u.column}
                for u in report.unspecified
            ],
            "clean": report.is_clean,
        }

    # --- navigation views -----------------------------------------------------

    @app.get("/api/networks/{network_id}/nodes/{node_id}/tree")
    def get_tree(network_id: str, node_id: str,
                 client: str = "default") -> dict[str, Any]:
        session = registry.session(network_id)
        state = session.tree_states.get((client, node_id), TreeViewState())
        return _tree_json(build_cptree(session.network, node_id, state))

    @app.post("/api/networks/{network_id}/nodes/{node_id}/tree/toggle")
    async def post_tree_toggle(network_id: str, node_id: str, request: Request,
                               client: str = "default") -> dict[str, Any]:
        session = registry.session(network_id)
        body = await _json_body(request)
        context = _context_from_wire(body.get("context"), node_id)
        with session.lock:
            _check_version(session, request, required=False)
            state = session.tree_states.setdefault(
                (client, node_id), TreeViewState())
            toggle_expand(session.network, state, context)
            session.version += 1
            return {
                "version": session.version,
                "tree": _tree_json(
                    build_cptree(session.network, node_id, state)),
            }

    @app.get("/api/networks/{network_id}/nodes/{node_id}/table")
    def get_table(network_id: str, node_id: str,
                  client: str = "default") -> dict[str, Any]:
        session = registry.session(network_id)
        state = session.table_states.get((client, node_id), TableViewState())
        return _grid_json(build_scpt(session.network, node_id, state))

    @app.post("/api/networks/{network_id}/nodes/{node_id}/table/toggle")
    async def post_table_toggle(network_id: str, node_id: str,
                                request: Request,
                                client: str = "default") -> dict[str, Any]:
        session = registry.session(network_id)
        body = await _json_body(request)
        context = _context_from_wire(body.get("context"), node_id)
        with session.lock:
            _check_version(session, request, required=False)
            state = session.table_states.setdefault(
                (client, node_id), TableViewState())
            toggle_shrink(session.network, state, context)
            session.version += 1
            return {
                "version": session.version,
                "table": _grid_json(
                    build_scpt(session.network, node_id, state)),
            }

    @app.post("/api/networks/{network_id}/nodes/{node_id}/reorder")
    async def post_reorder(network_id: str, node_id: str,
                           request: Request) -> dict[str, Any]:
        session = registry.session(network_id)
        body = await _json_body(request)
        permutation = body.get("permutation")
        if not isinstance(permutation, list) or not all(
                isinstance(p, int) for p in permutation):
            raise ApiError(422, "InvalidPermutation",
                           "body must carry a 'permutation' list of integers")
        with session.lock:
            _check_version(session, request, required=True)
            reorder_parents(session.network, node_id, permutation)
            session.version += 1
            _reset_node_views(session, node_id)
            registry.drop_editors(network_id, node_id)
            return {"version": session.version}

    # --- editors ----------------------------------------------------------------

    @app.post("/api/networks/{network_id}/nodes/{node_id}/editors",
              status_code=201)
    async def post_editor(network_id: str, node_id: str,
                          request: Request) -> dict[str, Any]:
        session = registry.session(network_id)
        body = await _json_body(request)
        raw_contexts = body.get("contexts")
        if not isinstance(raw_contexts, list):
            raise ApiError(422, "EmptySelection",
                           "body must carry a 'contexts' list")
        selection = Selection(frozenset(
            _context_from_wire(raw, node_id) for raw in raw_contexts))
        with session.lock:
            state = begin_edit(session.network, node_id, selection)
            record = registry.add_editor(network_id, state)
            return _editor_json(record)

    @app.post("/api/editors/{editor_id}/probability")
    async def post_probability(editor_id: str,
                               request: Request) -> dict[str, Any]:
        record = registry.editor(editor_id)
        session = registry.session(record.network_id)
        body = await _json_body(request)
        outcome = body.get("outcome")
        target = body.get("target")
        if not isinstance(outcome, int) or type(target) not in (int, float):
            raise ApiError(422, "OutcomeOutOfRange",
                           "body must carry integer 'outcome' and "
                           "numeric 'target'")
        with session.lock:
            record.state.set_probability(outcome, float(target))
            return _editor_json(record)

    @app.post("/api/editors/{editor_id}/lock")
    async def post_lock(editor_id: str, request: Request) -> dict[str, Any]:
        record = registry.editor(editor_id)
        session = registry.session(record.network_id)
        body = await _json_body(request)
        outcome = body.get("outcome")
        if not isinstance(outcome, int):
            raise ApiError(422, "OutcomeOutOfRange",
                           "body must carry an integer 'outcome'")
        with session.lock:
            record.state.toggle_lock(outcome)
            return _editor_json(record)

    @app.post("/api/editors/{editor_id}/commit")
    async def post_commit(editor_id: str, request: Request) -> dict[str, Any]:
        record = registry.editor(editor_id)
        session = registry.session(record.network_id)
        with session.lock:
            _check_version(session, request, required=True)
            commit(session.network, record.state)
            session.version += 1
            return {"version": session.version}

    return app


# --- wire helpers -----------------------------------------------------------


async def _json_body(request: Request) -> dict[str, Any]:
    try:
        body = await request.json()
    except Exception:
        raise ApiError(400, "SyntaxError",
                       "request body is not valid JSON") from None
    if not isinstance(body, dict):
        raise ApiError(400, "SchemaError", "request body must be an object")
    return body


def _check_version(session: NetworkSession, request: Request,
                   required: bool) -> None:
    header = request.headers.get("if-match")
    if header is None:
        if required:
            raise ApiError(428, "VersionRequired",
                           "this mutation needs an If-Match version header")
        return
    try:
        expected = int(header.strip().strip('"'))
    except ValueError:
        raise ApiError(400, "SchemaError",
                       f"If-Match must be an integer, got {header!r}") from None
    if expected != session.version:
        raise ApiError(
            409, "VersionConflict",
            f"expected version {expected}, current is {session.version}")


def _context_from_wire(raw: Any, node_id: str) -> PrefixContext:
    if (not isinstance(raw, dict) or "node" not in raw
            or "outcomes" not in raw):
        raise ApiError(422, "InvalidContext",
                       "context must be {node, outcomes: [indexes]}")
    if raw["node"] != node_id:
        raise ApiError(422, "InvalidContext",
                       f"context node {raw['node']!r} does not match "
                       f"{node_id!r}")
    outcomes = raw["outcomes"]
    if not isinstance(outcomes, list) or not all(
            isinstance(o, int) for o in outcomes):
        raise ApiError(422, "InvalidContext",
                       "context outcomes must be a list of integers")
    return PrefixContext(node_id, tuple(outcomes))


def _domain_error(exc: CptError) -> ApiError:
    if isinstance(exc, UnknownNode):
        return ApiError(404, "UnknownNode", str(exc))
    return ApiError(422, error_name(exc), str(exc))


def _reset_node_views(session: NetworkSession, node_id: str) -> None:
    for states in (session.tree_states, session.table_states):
        for key in [key for key in states if key[1] == node_id]:
            del states[key]


def _context_json(context: PrefixContext) -> dict[str, Any]:
    return {"node": context.node, "outcomes": list(context.outcomes)}


def _tree_json(node: CptTreeNode) -> dict[str, Any]:
    return {
        "kind": node.kind,
        "label": node.label,
        "context": _context_json(node.context),
        "collapsed": node.collapsed,
        "columnIndex": node.column_index,
        "children": [_tree_json(child) for child in node.children],
    }


def _grid_json(grid: ScptGrid) -> dict[str, Any]:
    return {
        "headerRows": [
            [
                {
                    "label": cell.label,
                    "span": cell.span,
                    "context": _context_json(cell.context),
                    "isPlaceholder": cell.is_placeholder,
                }
                for cell in row
            ]
            for row in grid.header_rows
        ],
        "valueColumns": [
            {
                "columnIndex": column.column_index,
                "probabilities": column.probabilities,
                "status": column.status,
                "isPlaceholder": column.is_placeholder,
            }
            for column in grid.value_columns
        ],
        "rowLabels": grid.row_labels,
    }


def _editor_json(record: EditorRecord) -> dict[str, Any]:
    state = record.state
    return {
        "editorId": record.editor_id,
        "networkId": record.network_id,
        "node": state.node,
        "columns": list(state.columns),
        "probs": list(state.probs),
        "locked": list(state.locked),
        "mixed": state.mixed,
        "outcomes": list(state.outcome_names),
        "labels": {
            TEXT: [format_label(name, p, TEXT)
                   for name, p in zip(state.outcome_names, state.probs)],
            PERCENTAGE: [format_label(name, p, PERCENTAGE)
                         for name, p in zip(state.outcome_names, state.probs)],
        },
    }
