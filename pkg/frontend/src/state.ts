/** Client-side workspace state and its branching provenance history.
 *
 * Every persistent mutation goes through an action applied to the current
 * state, snapshotting the whole state into a new tree node (undo walks to
 * the parent, redo to the most recently visited child). Transient UI state
 * (hover, active brush, pending annotation text) never enters these
 * snapshots.
 */

import { emptyFilter } from "./filters.js";
import type { ChartConfigDoc, FilterDoc, WorkspaceStateDoc } from "./types.js";

export const SCHEMA_VERSION = 1;

export function emptyState(): WorkspaceStateDoc {
  return {
    schema_version: SCHEMA_VERSION,
    charts: [],
    filter: emptyFilter(),
    annotations: {},
    view_mode: false,
  };
}

export interface Action {
  label: string;
  apply(state: WorkspaceStateDoc): WorkspaceStateDoc;
}

function clone(state: WorkspaceStateDoc): WorkspaceStateDoc {
  return structuredClone(state);
}

export function addChart(config: ChartConfigDoc): Action {
  return {
    label: `add ${config.kind} chart ${config.chart_id}`,
    apply(state) {
      if (state.charts.some((c) => c.chart_id === config.chart_id)) {
        throw new Error(`chart ${config.chart_id} already exists`);
      }
      const next = clone(state);
      next.charts.push(structuredClone(config));
      return next;
    },
  };
}

export function removeChart(chartId: string): Action {
  return {
    label: `remove chart ${chartId}`,
    apply(state) {
      if (!state.charts.some((c) => c.chart_id === chartId)) {
        throw new Error(`chart ${chartId} does not exist`);
      }
      const next = clone(state);
      next.charts = next.charts.filter((c) => c.chart_id !== chartId);
      delete next.annotations[chartId];
      return next;
    },
  };
}

export function updateChart(config: ChartConfigDoc): Action {
  return {
    label: `configure chart ${config.chart_id}`,
    apply(state) {
      if (!state.charts.some((c) => c.chart_id === config.chart_id)) {
        throw new Error(`chart ${config.chart_id} does not exist`);
      }
      const next = clone(state);
      next.charts = next.charts.map((c) => (c.chart_id === config.chart_id ? structuredClone(config) : c));
      return next;
    },
  };
}

export function setFilter(filter: FilterDoc): Action {
  return {
    label: "set filter",
    apply(state) {
      const next = clone(state);
      next.filter = structuredClone(filter);
      return next;
    },
  };
}

export function annotate(chartId: string, text: string): Action {
  return {
    label: `annotate chart ${chartId}`,
    apply(state) {
      if (!state.charts.some((c) => c.chart_id === chartId)) {
        throw new Error(`chart ${chartId} does not exist`);
      }
      const next = clone(state);
      if (text) {
        next.annotations[chartId] = text;
      } else {
        delete next.annotations[chartId];
      }
      return next;
    },
  };
}

export function setViewMode(enabled: boolean): Action {
  return {
    label: `view mode ${enabled ? "on" : "off"}`,
    apply(state) {
      const next = clone(state);
      next.view_mode = enabled;
      return next;
    },
  };
}

export interface ProvenanceNode {
  id: string;
  parentId: string | null;
  label: string;
  state: WorkspaceStateDoc;
}

export class ProvenanceTree {
  readonly nodes = new Map<string, ProvenanceNode>();
  readonly children = new Map<string, string[]>();
  currentId: string;
  private lastVisited = new Map<string, string>();
  private counter = 1;

  constructor(rootState: WorkspaceStateDoc = emptyState()) {
    const root: ProvenanceNode = { id: "n0", parentId: null, label: "init", state: rootState };
    this.nodes.set(root.id, root);
    this.children.set(root.id, []);
    this.currentId = root.id;
  }

  get rootId(): string {
    return "n0";
  }

  get state(): WorkspaceStateDoc {
    return this.nodes.get(this.currentId)!.state;
  }

  /** Apply an action in a new child node; throws (tree untouched) if invalid. */
  apply(action: Action): string {
    const nextState = action.apply(this.state);
    const id = `n${this.counter++}`;
    this.nodes.set(id, { id, parentId: this.currentId, label: action.label, state: nextState });
    this.children.set(id, []);
    this.children.get(this.currentId)!.push(id);
    this.lastVisited.set(this.currentId, id);
    this.currentId = id;
    return id;
  }

  undo(): string {
    const parentId = this.nodes.get(this.currentId)!.parentId;
    if (parentId !== null) {
      this.lastVisited.set(parentId, this.currentId);
      this.currentId = parentId;
    }
    return this.currentId;
  }

  redo(): string {
    const childId = this.lastVisited.get(this.currentId);
    if (childId !== undefined && this.children.get(this.currentId)!.includes(childId)) {
      this.currentId = childId;
    }
    return this.currentId;
  }

  get canUndo(): boolean {
    return this.nodes.get(this.currentId)!.parentId !== null;
  }

  get canRedo(): boolean {
    return this.lastVisited.has(this.currentId);
  }
}

function sortedReplacer(_key: string, value: unknown): unknown {
  if (value && typeof value === "object" && !Array.isArray(value)) {
    return Object.fromEntries(Object.entries(value as Record<string, unknown>).sort(([a], [b]) => (a < b ? -1 : 1)));
  }
  return value;
}

/** Canonical one-line JSON; equal states stringify identically. */
export function canonicalState(state: WorkspaceStateDoc): string {
  return JSON.stringify(state, sortedReplacer);
}
