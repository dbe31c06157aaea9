"""Non-linear workspace history with undo/redo and shareable persisted states.

Each action stores a full snapshot of the workspace state in a new node of a
rooted tree (states are small configuration documents, so snapshots are
cheaper than reconstructing from diffs and make undo trivially correct).
Undoing and then applying a new action forks a branch; redo follows the most
recently visited child.

Share persistence is an embedded SQLite store (write-ahead journaling) keyed
by unguessable random ids.
"""

from __future__ import annotations

import datetime as dt
import secrets
import sqlite3
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from .cohort import EMPTY_FILTER, Facet, FilterSpec, NO_SPLIT, SplitSpec
from .model import BloodComponent, descriptor

SCHEMA_VERSION = 1


class ActionError(ValueError):
    """Raised when an action is invalid against the current state."""


class ChartKind(str, Enum):
    HEATMAP = "heatmap"
    DUMBBELL = "dumbbell"
    DOTPLOT = "dotplot"
    COST_PLACEHOLDER_NONE = "cost_placeholder_none"


@dataclass(frozen=True)
class ChartConfig:
    """Configuration of one chart in the workspace; fields depend on kind."""

    chart_id: str
    kind: ChartKind
    facet: Facet | None = None
    split: SplitSpec = NO_SPLIT
    component: BloodComponent | None = None
    x_attr: str | None = None
    y_attr: str | None = None
    sort_key: str | None = None
    context_keys: tuple[str, ...] = ()
    zero_exclusion: bool = False

    def __post_init__(self) -> None:
        if not self.chart_id:
            raise ValueError("chart_id must be non-empty")
        object.__setattr__(self, "kind", ChartKind(self.kind))
        if self.facet is not None:
            object.__setattr__(self, "facet", Facet(self.facet))
        if self.component is not None:
            object.__setattr__(self, "component", BloodComponent(self.component))
        object.__setattr__(self, "context_keys", tuple(self.context_keys))
        for key in self.context_keys:
            if descriptor(key) is None:
                raise ValueError(f"unknown context attribute {key!r}")
        kind = self.kind
        if kind is ChartKind.HEATMAP:
            self._require(facet=True, component=True)
            self._forbid("x_attr", "y_attr", "sort_key")
        elif kind is ChartKind.DUMBBELL:
            self._require(facet=True)
            if self.sort_key not in ("pre", "post", "gap"):
                raise ValueError(f"dumbbell sort_key must be pre/post/gap, got {self.sort_key!r}")
            self._forbid("component", "x_attr", "y_attr")
            self._forbid_extras()
        elif kind is ChartKind.DOTPLOT:
            self._require(facet=True)
            if self.x_attr is None or self.y_attr is None:
                raise ValueError("dotplot requires x_attr and y_attr")
            self._forbid("component", "sort_key")
            self._forbid_extras()
        else:
            if self.facet is not None:
                raise ValueError(f"{kind.value} chart takes no facet")
            self._forbid("component", "x_attr", "y_attr", "sort_key")
            self._forbid_extras()

    def _require(self, facet: bool = False, component: bool = False) -> None:
        if facet and self.facet is None:
            raise ValueError(f"{self.kind.value} chart requires a facet")
        if component and self.component is None:
            raise ValueError(f"{self.kind.value} chart requires a component")

    def _forbid(self, *names: str) -> None:
        for name in names:
            if getattr(self, name) is not None:
                raise ValueError(f"{self.kind.value} chart does not take {name}")

    def _forbid_extras(self) -> None:
        if self.split != NO_SPLIT:
            raise ValueError(f"{self.kind.value} chart does not take a split")
        if self.context_keys:
            raise ValueError(f"{self.kind.value} chart does not take context_keys")
        if self.zero_exclusion:
            raise ValueError(f"{self.kind.value} chart does not take zero_exclusion")


@dataclass(frozen=True)
class WorkspaceState:
    """Full serialized analysis session: charts, filter, annotations, mode."""

    charts: tuple[ChartConfig, ...] = ()
    filter: FilterSpec = EMPTY_FILTER
    annotations: tuple[tuple[str, str], ...] = ()
    view_mode: bool = False
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self) -> None:
        object.__setattr__(self, "charts", tuple(self.charts))
        ids = [c.chart_id for c in self.charts]
        if len(ids) != len(set(ids)):
            raise ValueError("chart ids must be unique")
        annotations = tuple(sorted(dict(self.annotations).items()))
        object.__setattr__(self, "annotations", annotations)
        for chart_id, _ in annotations:
            if chart_id not in ids:
                raise ValueError(f"annotation references unknown chart {chart_id!r}")

    def chart(self, chart_id: str) -> ChartConfig | None:
        for c in self.charts:
            if c.chart_id == chart_id:
                return c
        return None

    def annotation(self, chart_id: str) -> str | None:
        return dict(self.annotations).get(chart_id)


EMPTY_STATE = WorkspaceState()


@dataclass(frozen=True)
class AddChart:
    config: ChartConfig

    @property
    def label(self) -> str:
        return f"add {self.config.kind.value} chart {self.config.chart_id}"

    def apply(self, state: WorkspaceState) -> WorkspaceState:
        if state.chart(self.config.chart_id) is not None:
            raise ActionError(f"chart {self.config.chart_id!r} already exists")
        return replace(state, charts=state.charts + (self.config,))


@dataclass(frozen=True)
class RemoveChart:
    chart_id: str

    @property
    def label(self) -> str:
        return f"remove chart {self.chart_id}"

    def apply(self, state: WorkspaceState) -> WorkspaceState:
        if state.chart(self.chart_id) is None:
            raise ActionError(f"chart {self.chart_id!r} does not exist")
        return replace(
            state,
            charts=tuple(c for c in state.charts if c.chart_id != self.chart_id),
            annotations=tuple((cid, t) for cid, t in state.annotations if cid != self.chart_id),
        )


@dataclass(frozen=True)
class UpdateChart:
    config: ChartConfig

    @property
    def label(self) -> str:
        return f"configure chart {self.config.chart_id}"

    def apply(self, state: WorkspaceState) -> WorkspaceState:
        if state.chart(self.config.chart_id) is None:
            raise ActionError(f"chart {self.config.chart_id!r} does not exist")
        return replace(
            state,
            charts=tuple(self.config if c.chart_id == self.config.chart_id else c for c in state.charts),
        )


@dataclass(frozen=True)
class SetFilter:
    filter: FilterSpec

    @property
    def label(self) -> str:
        return "set filter"

    def apply(self, state: WorkspaceState) -> WorkspaceState:
        return replace(state, filter=self.filter)


@dataclass(frozen=True)
class Annotate:
    chart_id: str
    text: str

    @property
    def label(self) -> str:
        return f"annotate chart {self.chart_id}"

    def apply(self, state: WorkspaceState) -> WorkspaceState:
        if state.chart(self.chart_id) is None:
            raise ActionError(f"chart {self.chart_id!r} does not exist")
        kept = tuple((cid, t) for cid, t in state.annotations if cid != self.chart_id)
        if self.text:
            kept = kept + ((self.chart_id, self.text),)
        return replace(state, annotations=kept)


@dataclass(frozen=True)
class SetViewMode:
    enabled: bool

    @property
    def label(self) -> str:
        return f"view mode {'on' if self.enabled else 'off'}"

    def apply(self, state: WorkspaceState) -> WorkspaceState:
        return replace(state, view_mode=self.enabled)


Action = AddChart | RemoveChart | UpdateChart | SetFilter | Annotate | SetViewMode


@dataclass(frozen=True)
class ProvenanceNode:
    node_id: str
    parent_id: str | None
    state: WorkspaceState
    label: str
    created_at: dt.datetime = field(compare=False, default_factory=lambda: dt.datetime.now(dt.timezone.utc))


class ProvenanceTree:
    """Rooted tree of workspace snapshots with a movable current pointer.

    Undo moves to the parent, redo to the most recently visited child; both
    are no-ops at the respective boundary. Applying an action adds a child of
    the current node, preserving any existing siblings (branching history).
    """

    def __init__(self) -> None:
        root = ProvenanceNode("n0", None, EMPTY_STATE, "init")
        self.nodes: dict[str, ProvenanceNode] = {root.node_id: root}
        self.children: dict[str, list[str]] = {root.node_id: []}
        self.current_id: str = root.node_id
        self._last_visited: dict[str, str] = {}
        self._next = 1

    @property
    def root_id(self) -> str:
        return "n0"

    @property
    def current(self) -> ProvenanceNode:
        return self.nodes[self.current_id]

    @property
    def state(self) -> WorkspaceState:
        return self.current.state

    def apply(self, action: Action) -> str:
        """Apply an action to the current state in a new child node.

        Raises ActionError (and leaves the tree unchanged) if the action is
        invalid against the current state.
        """
        new_state = action.apply(self.state)
        node_id = f"n{self._next}"
        self._next += 1
        node = ProvenanceNode(node_id, self.current_id, new_state, action.label)
        self.nodes[node_id] = node
        self.children[node_id] = []
        self.children[self.current_id].append(node_id)
        self._last_visited[self.current_id] = node_id
        self.current_id = node_id
        return node_id

    def undo(self) -> str:
        parent_id = self.current.parent_id
        if parent_id is not None:
            self._last_visited[parent_id] = self.current_id
            self.current_id = parent_id
        return self.current_id

    def redo(self) -> str:
        child_id = self._last_visited.get(self.current_id)
        if child_id is not None and child_id in self.children[self.current_id]:
            self.current_id = child_id
        return self.current_id


def init_workspace() -> ProvenanceTree:
    """A fresh tree holding only the empty root state."""
    return ProvenanceTree()


def apply_action(tree: ProvenanceTree, action: Action) -> str:
    return tree.apply(action)


def undo(tree: ProvenanceTree) -> str:
    return tree.undo()


def redo(tree: ProvenanceTree) -> str:
    return tree.redo()


def annotate(tree: ProvenanceTree, chart_id: str, text: str) -> str:
    """Set (or clear, with empty text) the annotation of an existing chart."""
    return tree.apply(Annotate(chart_id, text))


class StateNotFoundError(KeyError):
    """Raised when a share id does not exist in the store."""


# 16 random bytes = 128 bits, comfortably unguessable.
_SHARE_ID_BYTES = 16


def new_share_id() -> str:
    return secrets.token_urlsafe(_SHARE_ID_BYTES)


class StateStore:
    """Embedded key-value store of serialized workspace states.

    Backed by a single SQLite file in WAL mode: concurrent reads, serialized
    atomic writes, durable across restarts. Use ":memory:" for tests.
    """

    def __init__(self, path: str | Path = ":memory:"):
        self.path = str(path)
        self._conn = sqlite3.connect(self.path, check_same_thread=False)
        if self.path != ":memory:":
            self._conn.execute("PRAGMA journal_mode=WAL")
        self._conn.execute(
            "CREATE TABLE IF NOT EXISTS shared_states ("
            " id TEXT PRIMARY KEY,"
            " body TEXT NOT NULL,"
            " created_at TEXT NOT NULL)"
        )
        self._conn.commit()

    def save(self, state: WorkspaceState) -> str:
        """Persist a state under a fresh unguessable id and return the id."""
        from .wire import canonical_state_json

        body = canonical_state_json(state)
        while True:
            share_id = new_share_id()
            try:
                with self._conn:
                    self._conn.execute(
                        "INSERT INTO shared_states (id, body, created_at) VALUES (?, ?, ?)",
                        (share_id, body, dt.datetime.now(dt.timezone.utc).isoformat()),
                    )
            except sqlite3.IntegrityError:
                continue
            return share_id

    def load(self, share_id: str, as_view_mode: bool = False) -> WorkspaceState:
        """Fetch a stored state; optionally force view_mode on the returned
        copy without touching the stored record."""
        from .wire import state_from_json

        row = self._conn.execute("SELECT body FROM shared_states WHERE id = ?", (share_id,)).fetchone()
        if row is None:
            raise StateNotFoundError(share_id)
        state = state_from_json(row[0])
        if as_view_mode and not state.view_mode:
            state = replace(state, view_mode=True)
        return state

    def close(self) -> None:
        self._conn.close()

    def __enter__(self) -> StateStore:
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def save_state(store: StateStore, state: WorkspaceState) -> str:
    return store.save(state)


def load_state(store: StateStore, share_id: str, as_view_mode: bool = False) -> WorkspaceState:
    return store.load(share_id, as_view_mode)
