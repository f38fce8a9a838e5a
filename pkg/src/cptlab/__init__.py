"""cptlab: a workbench for conditional probability tables.

Navigate large CPTs through a probability tree or a shrinkable table, and
elicit discrete distributions with lock-aware pie and bar editors.
"""

from . import elicit, errors, model, store, views
from .elicit import (
    EditorState,
    ValidationReport,
    begin_edit,
    commit,
    validate,
)
from .model import Cpt, Network, NodeSpec
from .store import load, parse, save, serialize
from .views import (
    PrefixContext,
    Selection,
    build_cptree,
    build_scpt,
    reorder_parents,
    resolve_context,
    resolve_selection,
)

__version__ = "0.1.0"

__all__ = [
    "Cpt",
    "EditorState",
    "Network",
    "NodeSpec",
    "PrefixContext",
    "Selection",
    "ValidationReport",
    "begin_edit",
    "build_cptree",
    "build_scpt",
    "commit",
    "elicit",
    "errors",
    "load",
    "model",
    "parse",
    "reorder_parents",
    "resolve_context",
    "resolve_selection",
    "save",
    "serialize",
    "store",
    "validate",
    "views",
]
