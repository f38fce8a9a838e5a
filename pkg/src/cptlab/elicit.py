"""Graphical probability assessment: lock-aware proportional renormalization,
editing sessions over multi-context selections, pie and bar chart geometry,
label formatting, and whole-network validation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidContext, OutcomeLocked, OutcomeOutOfRange
from .model import (
    DEFAULT,
    DISTRIBUTION_TOLERANCE,
    ELICITED,
    Network,
    check_distribution,
)
from .views import Selection, resolve_selection

#: Radial offset fraction for locked pie sectors (drawn slightly outside).
LOCKED_OFFSET_FRACTION = 0.08
#: Labels sit just outside the pie at this fraction of the radius.
LABEL_RADIUS_FRACTION = 1.15
#: Minimum angular separation between adjacent visible labels.
LABEL_GAP_DEGREES = 12.0

#: Columns whose entries differ by more than this make a selection "mixed".
MIXED_TOLERANCE = 1e-12
#: Below this remaining unlocked mass, scaling degenerates to an equal split.
DEGENERATE_MASS = 1e-12

TEXT = "text"
PERCENTAGE = "percentage"
LABEL_MODES = (TEXT, PERCENTAGE)


@dataclass
class EditorState:
    """A live editing session over one or more CPT columns.

    Holds the working distribution, per-outcome lock flags, and the target
    column set; nothing is written back to the network until :func:`commit`.
    """

    node: str
    columns: tuple[int, ...]
    probs: list[float]
    locked: list[bool]
    mixed: bool
    outcome_names: tuple[str, ...]

    @property
    def outcome_count(self) -> int:
        return len(self.probs)

    def locked_mass(self) -> float:
        return sum(p for p, flag in zip(self.probs, self.locked) if flag)

    def _check_outcome(self, k: int) -> None:
        if not 0 <= k < len(self.probs):
            raise OutcomeOutOfRange(
                f"outcome {k} outside [0, {len(self.probs)})")

    def set_probability(self, k: int, target: float) -> EditorState:
        """Set outcome k to ``target``, rescaling the unlocked remainder.

        The target is clamped to the mass not held by locked outcomes. The
        other unlocked probabilities scale proportionally; when they hold no
        mass to scale, the freed mass splits equally among them. Locked
        entries are never touched.
        """
        self._check_outcome(k)
        if self.locked[k]:
            raise OutcomeLocked(f"outcome {k} is locked")
        available = 1.0 - self.locked_mass()
        if available < 0.0:
            available = 0.0
        others = [j for j in range(len(self.probs))
                  if j != k and not self.locked[j]]
        if not others:
            self.probs[k] = available
            return self
        target = min(max(target, 0.0), available)
        rest_before = available - self.probs[k]
        rest_after = available - target
        if rest_after < 0.0:
            rest_after = 0.0
        if rest_before > DEGENERATE_MASS:
            scale = rest_after / rest_before
            for j in others:
                self.probs[j] = min(max(self.probs[j] * scale, 0.0), 1.0)
        else:
            share = rest_after / len(others)
            for j in others:
                self.probs[j] = share
        self.probs[k] = target
        return self

    def toggle_lock(self, k: int) -> EditorState:
        """Flip the lock flag of outcome k; probabilities are unchanged."""
        self._check_outcome(k)
        self.locked[k] = not self.locked[k]
        return self

    def set_lock(self, k: int, locked: bool) -> EditorState:
        """Force the lock flag of outcome k; probabilities are unchanged."""
        self._check_outcome(k)
        self.locked[k] = bool(locked)
        return self


def begin_edit(net: Network, node_id: str, selection: Selection) -> EditorState:
    """Open an editor on the columns covered by a selection.

    The working distribution starts from the lowest-index selected column;
    ``mixed`` reports whether any other selected column disagrees with it.
    Stored columns may drift from unit sum up to the (looser) load tolerance;
    the working copy is normalized in that case so the editor always holds a
    committable distribution.
    """
    spec = net.node(node_id)
    for context in selection.contexts:
        if context.node != node_id:
            raise InvalidContext(
                f"selection targets {context.node!r}, editor is on {node_id!r}")
    columns = sorted(resolve_selection(net, selection))
    cpt = net.cpts[node_id]
    base = cpt.column(columns[0])
    mixed = any(
        abs(value - reference) > MIXED_TOLERANCE
        for column in columns[1:]
        for value, reference in zip(cpt.column(column), base))
    total = sum(base)
    if total > 0.0 and abs(total - 1.0) > DISTRIBUTION_TOLERANCE:
        base = [min(p / total, 1.0) for p in base]
    return EditorState(
        node=node_id, columns=tuple(columns), probs=base,
        locked=[False] * len(base), mixed=mixed,
        outcome_names=spec.outcomes)


def commit(net: Network, editor: EditorState) -> Network:
    """Write the working distribution to every target column as elicited."""
    check_distribution(editor.probs, editor.outcome_count)
    net.set_columns(editor.node, editor.columns, editor.probs, ELICITED)
    return net


# --- chart geometry --------------------------------------------------------


def format_label(name: str, probability: float, mode: str) -> str:
    """Outcome label text: the bare name, or name plus percentage."""
    if mode == TEXT:
        return name
    if mode == PERCENTAGE:
        return f"{name} {100.0 * probability:.1f}%"
    raise ValueError(f"unknown label mode {mode!r}")


@dataclass(frozen=True)
class PieSector:
    """Geometry of one pie sector, angles in degrees clockwise from 12 o'clock."""

    name: str
    probability: float
    locked: bool
    start_angle: float
    sweep_angle: float
    handle_angle: float
    label_anchor_angle: float
    label: str
    label_visible: bool
    locked_offset: float


@dataclass
class PieLayout:
    sectors: list[PieSector]
    label_radius_fraction: float = LABEL_RADIUS_FRACTION


def pie_layout(editor: EditorState, label_mode: str = TEXT,
               label_gap_degrees: float = LABEL_GAP_DEGREES) -> PieLayout:
    """Pie-chart geometry for an editor's working distribution.

    Sectors tile the circle in outcome order. Labels anchor at mid-sector;
    when an anchor falls within ``label_gap_degrees`` of the most recently
    displayed one, that label is hidden. Locked sectors are offset radially.
    """
    sectors: list[PieSector] = []
    start = 0.0
    last_visible_anchor: float | None = None
    for k, probability in enumerate(editor.probs):
        sweep = 360.0 * probability
        anchor = start + sweep / 2.0
        visible = (last_visible_anchor is None
                   or anchor - last_visible_anchor >= label_gap_degrees)
        if visible:
            last_visible_anchor = anchor
        locked = editor.locked[k]
        name = editor.outcome_names[k]
        sectors.append(PieSector(
            name=name,
            probability=probability,
            locked=locked,
            start_angle=start,
            sweep_angle=sweep,
            handle_angle=start + sweep,
            label_anchor_angle=anchor,
            label=format_label(name, probability, label_mode),
            label_visible=visible,
            locked_offset=LOCKED_OFFSET_FRACTION if locked else 0.0,
        ))
        start += sweep
    return PieLayout(sectors=sectors)


def angle_to_target(layout: PieLayout, k: int, pointer_angle: float) -> float:
    """Target probability for dragging sector k's handle to a pointer angle.

    The new sweep is the clockwise distance from the sector's start to the
    pointer, clamped to the arc not claimed by locked sectors.
    """
    if not 0 <= k < len(layout.sectors):
        raise OutcomeOutOfRange(
            f"outcome {k} outside [0, {len(layout.sectors)})")
    locked_mass = sum(s.probability for s in layout.sectors if s.locked)
    max_sweep = max(360.0 * (1.0 - locked_mass), 0.0)
    sweep = (pointer_angle - layout.sectors[k].start_angle) % 360.0
    return min(sweep, max_sweep) / 360.0


@dataclass(frozen=True)
class BarItem:
    """One horizontal bar; lengths are fractions of the 0-to-1 scale."""

    name: str
    probability: float
    locked: bool
    length_fraction: float
    handle_position: float
    label: str


@dataclass
class BarLayout:
    bars: list[BarItem]
    axis_ticks: tuple[float, ...] = field(
        default=tuple(i / 10 for i in range(11)))


def bar_layout(editor: EditorState, label_mode: str = TEXT) -> BarLayout:
    """Bar-graph geometry: bar lengths equal the probabilities exactly."""
    bars = [
        BarItem(
            name=editor.outcome_names[k],
            probability=p,
            locked=editor.locked[k],
            length_fraction=p,
            handle_position=p,
            label=format_label(editor.outcome_names[k], p, label_mode),
        )
        for k, p in enumerate(editor.probs)
    ]
    return BarLayout(bars=bars)


def fraction_to_target(layout: BarLayout, k: int, fraction: float) -> float:
    """Target probability for dragging bar k's handle to an axis fraction."""
    if not 0 <= k < len(layout.bars):
        raise OutcomeOutOfRange(f"outcome {k} outside [0, {len(layout.bars)})")
    locked_mass = sum(b.probability for b in layout.bars if b.locked)
    return min(max(fraction, 0.0), max(1.0 - locked_mass, 0.0))


# --- validation ----------------------------------------------------------------


@dataclass(frozen=True)
class SumViolation:
    node: str
    column: int
    actual_sum: float


@dataclass(frozen=True)
class UnspecifiedColumn:
    node: str
    column: int


@dataclass
class ValidationReport:
    """Columns that fail the sum check or were never elicited."""

    sum_violations: list[SumViolation]
    unspecified: list[UnspecifiedColumn]

    @property
    def is_clean(self) -> bool:
        return not self.sum_violations and not self.unspecified


def validate(net: Network, tol: float = 1e-6) -> ValidationReport:
    """Scan every CPT column of the network for inconsistencies and gaps."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    sum_violations: list[SumViolation] = []
    unspecified: list[UnspecifiedColumn] = []
    for node_id in sorted(net.nodes):
        cpt = net.cpts[node_id]
        for column in range(cpt.column_count):
            total = cpt.column_sum(column)
            if abs(total - 1.0) > tol:
                sum_violations.append(SumViolation(node_id, column, total))
            if cpt.status[column] == DEFAULT:
                unspecified.append(UnspecifiedColumn(node_id, column))
    return ValidationReport(sum_violations=sum_violations,
                            unspecified=unspecified)
