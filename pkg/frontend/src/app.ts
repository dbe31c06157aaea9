/** Application shell: filter panel, chart grid, case detail, provenance
 * toolbar, and the read-only shared View Mode.
 *
 * Every number on screen comes from an API response field; the client never
 * aggregates case data itself. Persistent-state mutations all flow through
 * provenance actions; chart data is re-queried only when a chart's query
 * envelope actually changed (so flipping the zero-exclusion scale or editing
 * an annotation never refetches), and stale responses are discarded by
 * version tagging.
 */

import { ApiClient } from "./api.js";
import { renderCaseDetail, renderCaseList } from "./caselist.js";
import { renderDotPlot } from "./charts/dotplot.js";
import { renderDumbbell } from "./charts/dumbbell.js";
import { renderHeatmap } from "./charts/heatmap.js";
import { el } from "./dom.js";
import { brushToFilter, describePredicate, emptyFilter, mergeFilters } from "./filters.js";
import {
  addChart,
  annotate,
  emptyState,
  ProvenanceTree,
  removeChart,
  setFilter,
  updateChart,
  type Action,
} from "./state.js";
import type {
  BrushRect,
  CaseDoc,
  ChartConfigDoc,
  DotPlotRowDoc,
  DumbbellRowDoc,
  FilterDoc,
  HeatmapRowDoc,
  ProcedureEntry,
  Urgency,
  WorkspaceStateDoc,
} from "./types.js";

export interface Route {
  shareId: string | null;
  mode: "view" | "edit";
}

export function parseRoute(pathname: string, search: string): Route {
  const match = pathname.match(/^\/share\/([^/]+)\/?$/);
  const mode = new URLSearchParams(search).get("mode") === "view" ? "view" : "edit";
  return { shareId: match ? match[1]! : null, mode };
}

export function shareUrl(base: string, shareId: string): string {
  return `${base}/share/${shareId}?mode=view`;
}

/** The query envelope a chart needs; null for kinds that query nothing. */
export function envelopeFor(chart: ChartConfigDoc, filter: FilterDoc): { path: string; body: unknown } | null {
  if (chart.kind === "heatmap") {
    return {
      path: "/api/query/heatmap",
      body: {
        filter,
        facet: chart.facet,
        split: chart.split,
        component: chart.component,
        context: chart.context_keys,
      },
    };
  }
  if (chart.kind === "dumbbell") {
    return { path: "/api/query/dumbbell", body: { filter, facet: chart.facet, sort: chart.sort_key } };
  }
  if (chart.kind === "dotplot") {
    return { path: "/api/query/dotplot", body: { filter, facet: chart.facet, x: chart.x_attr, y: chart.y_attr } };
  }
  return null;
}

const CONTEXT_DEFAULTS = ["drg_weight", "avg_prbc_per_case", "b12_rate", "preop_hgb", "ecmo_rate"];
const NUMERIC_ATTRS = [
  "prbc_units",
  "ffp_units",
  "platelet_units",
  "cryo_units",
  "cell_salvage_ml",
  "preop_hgb",
  "postop_hgb",
  "drg_weight",
];
const SPLIT_FLAGS = ["vent_over_24h", "amicar", "txa", "b12", "death", "ecmo"];
const CASE_PAGE_SIZE = 15;

interface ChartCache {
  key: string;
  rows: unknown;
}

export class App {
  readonly tree: ProvenanceTree;
  private readonly cache = new Map<string, ChartCache>();
  private casesCache: { key: string; page: unknown } | null = null;
  private fetchVersion = 0;
  private procedures: ProcedureEntry[] = [];
  private casePage = 0;
  private selectedCase: CaseDoc | null = null;
  private shareLink: string | null = null;
  readonly editable: boolean;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    initialState: WorkspaceStateDoc = emptyState(),
    editable = true,
  ) {
    this.tree = new ProvenanceTree(initialState);
    this.editable = editable && !initialState.view_mode;
  }

  static async fromRoute(root: HTMLElement, api: ApiClient, route: Route): Promise<App> {
    let state = emptyState();
    let editable = route.mode !== "view";
    if (route.shareId !== null) {
      state = await api.loadState(route.shareId, route.mode);
      editable = editable && !state.view_mode;
    }
    return new App(root, api, state, editable);
  }

  get state(): WorkspaceStateDoc {
    return this.tree.state;
  }

  async start(): Promise<void> {
    if (this.editable) {
      this.procedures = await this.api.procedures();
    }
    this.render();
    await this.refresh();
  }

  async applyAction(action: Action): Promise<void> {
    this.tree.apply(action);
    this.render();
    await this.refresh();
  }

  async undo(): Promise<void> {
    this.tree.undo();
    this.render();
    await this.refresh();
  }

  async redo(): Promise<void> {
    this.tree.redo();
    this.render();
    await this.refresh();
  }

  /** Rectangle brush completion: conjoin the fragment into the filter. */
  async applyBrush(rect: BrushRect): Promise<void> {
    const fragment = brushToFilter(rect);
    await this.applyAction(setFilter(mergeFilters(this.state.filter, fragment)));
  }

  async share(): Promise<string> {
    const shareId = await this.api.saveState(this.state);
    this.shareLink = shareUrl(globalThis.location?.origin ?? "", shareId);
    this.render();
    return this.shareLink;
  }

  private nextChartId(): string {
    let n = 1;
    while (this.state.charts.some((c) => c.chart_id === `c${n}`)) {
      n += 1;
    }
    return `c${n}`;
  }

  /** Fetch data for charts whose envelope changed; drop stale responses. */
  async refresh(): Promise<void> {
    const version = ++this.fetchVersion;
    const jobs: Promise<void>[] = [];
    for (const chart of this.state.charts) {
      const envelope = envelopeFor(chart, this.state.filter);
      if (envelope === null) {
        continue;
      }
      const key = JSON.stringify(envelope.body);
      const cached = this.cache.get(chart.chart_id);
      if (cached && cached.key === key) {
        continue;
      }
      jobs.push(
        this.fetchChart(chart, envelope.path, envelope.body, key).then((rows) => {
          if (version === this.fetchVersion && rows !== null) {
            this.cache.set(chart.chart_id, { key, rows });
            this.renderChartBody(chart.chart_id);
          }
        }),
      );
    }
    const casesKey = JSON.stringify({ filter: this.state.filter, page: this.casePage });
    if (!this.casesCache || this.casesCache.key !== casesKey) {
      jobs.push(
        this.api
          .cases({ filter: this.state.filter, page: this.casePage, page_size: CASE_PAGE_SIZE })
          .then((page) => {
            if (version === this.fetchVersion) {
              this.casesCache = { key: casesKey, page };
              this.renderCasePanel();
            }
          })
          .catch(() => undefined),
      );
    }
    await Promise.all(jobs);
  }

  private async fetchChart(chart: ChartConfigDoc, path: string, body: unknown, _key: string): Promise<unknown> {
    try {
      if (path.endsWith("heatmap")) {
        return (await this.api.heatmap(body)).rows;
      }
      if (path.endsWith("dumbbell")) {
        return (await this.api.dumbbell(body)).rows;
      }
      return (await this.api.dotplot(body)).rows;
    } catch {
      return null;
    }
  }

  // -- rendering --------------------------------------------------------------

  render(): void {
    const page = el("div", { class: this.editable ? "app" : "app view-mode" });
    page.append(this.renderToolbar());
    const main = el("div", { class: "main" });
    if (this.editable) {
      main.append(this.renderFilterPanel());
    } else {
      main.append(this.renderFilterSummary());
    }
    const grid = el("div", { class: "chart-grid", "data-chart-grid": "true" });
    for (const chart of this.state.charts) {
      grid.append(this.renderChartCard(chart));
    }
    if (this.editable) {
      grid.append(this.renderAddControls());
    }
    main.append(grid);
    page.append(main);
    page.append(el("div", { class: "case-panel", "data-case-panel": "true" }));
    this.root.replaceChildren(page);
    for (const chart of this.state.charts) {
      this.renderChartBody(chart.chart_id);
    }
    this.renderCasePanel();
  }

  private renderToolbar(): HTMLElement {
    const bar = el("div", { class: "toolbar" }, el("strong", {}, "PBM analytics"));
    if (!this.editable) {
      bar.append(el("span", { class: "view-badge", "data-view-badge": "true" }, "read-only view"));
      return bar;
    }
    bar.append(
      el(
        "button",
        { "data-edit": "undo", disabled: !this.tree.canUndo, onclick: () => void this.undo() },
        "Undo",
      ),
      el(
        "button",
        { "data-edit": "redo", disabled: !this.tree.canRedo, onclick: () => void this.redo() },
        "Redo",
      ),
      el("button", { "data-edit": "share", onclick: () => void this.share() }, "Share"),
    );
    if (this.shareLink !== null) {
      bar.append(el("input", { class: "share-link", "data-share-link": "true", readonly: true, value: this.shareLink }));
    }
    return bar;
  }

  private renderFilterSummary(): HTMLElement {
    const f = this.state.filter;
    const parts: string[] = [];
    if (f.procedures.length) {
      parts.push(`procedures: ${f.procedures.join(", ")}`);
    }
    if (f.urgency !== null) {
      parts.push(`urgency: ${f.urgency.join(", ")}`);
    }
    for (const p of f.range_predicates) {
      parts.push(describePredicate(p));
    }
    return el(
      "div",
      { class: "filter-summary", "data-filter-summary": "true" },
      parts.length ? `Filters: ${parts.join("; ")}` : "Filters: none",
    );
  }

  private renderFilterPanel(): HTMLElement {
    const f = this.state.filter;
    const panel = el("div", { class: "filter-panel", "data-filter-panel": "true" }, el("h3", {}, "Filters"));

    const procedures = el("div", { class: "procedure-filter" }, el("h4", {}, "Procedures"));
    for (const entry of this.procedures.slice(0, 15)) {
      const checked = f.procedures.includes(entry.code);
      procedures.append(
        el(
          "label",
          { class: "procedure-option" },
          el("input", {
            type: "checkbox",
            "data-edit": `procedure-${entry.code}`,
            checked,
            onchange: () => {
              const next = checked ? f.procedures.filter((p) => p !== entry.code) : [...f.procedures, entry.code];
              void this.applyAction(setFilter({ ...structuredClone(f), procedures: next.sort() }));
            },
          }),
          ` ${entry.code} (${entry.count})`,
        ),
      );
    }
    panel.append(procedures);

    const urgency = el("div", { class: "urgency-filter" }, el("h4", {}, "Urgency"));
    for (const u of ["elective", "urgent", "emergent"] as Urgency[]) {
      const active = f.urgency === null || f.urgency.includes(u);
      urgency.append(
        el(
          "label",
          {},
          el("input", {
            type: "checkbox",
            "data-edit": `urgency-${u}`,
            checked: active,
            onchange: () => {
              const current = f.urgency ?? (["elective", "urgent", "emergent"] as Urgency[]);
              const next = active ? current.filter((x) => x !== u) : [...current, u];
              const value = next.length === 3 ? null : next.sort();
              void this.applyAction(setFilter({ ...structuredClone(f), urgency: value }));
            },
          }),
          ` ${u}`,
        ),
      );
    }
    panel.append(urgency);

    if (f.range_predicates.length) {
      const preds = el("div", { class: "predicate-list" }, el("h4", {}, "Value filters"));
      f.range_predicates.forEach((p, index) => {
        preds.append(
          el(
            "div",
            { class: "predicate" },
            describePredicate(p),
            el(
              "button",
              {
                "data-edit": `remove-predicate-${index}`,
                onclick: () => {
                  const next = structuredClone(f);
                  next.range_predicates.splice(index, 1);
                  void this.applyAction(setFilter(next));
                },
              },
              "remove",
            ),
          ),
        );
      });
      panel.append(preds);
    }

    panel.append(
      el(
        "button",
        { "data-edit": "clear-filters", onclick: () => void this.applyAction(setFilter(emptyFilter())) },
        "Clear filters",
      ),
    );
    return panel;
  }

  private renderAddControls(): HTMLElement {
    const make = (kind: "heatmap" | "dumbbell" | "dotplot"): ChartConfigDoc => ({
      chart_id: this.nextChartId(),
      kind,
      facet: "by_surgeon",
      split: { kind: "none" },
      component: kind === "heatmap" ? "PRBC" : null,
      x_attr: kind === "dotplot" ? "prbc_units" : null,
      y_attr: kind === "dotplot" ? "postop_hgb" : null,
      sort_key: kind === "dumbbell" ? "pre" : null,
      context_keys: kind === "heatmap" ? [...CONTEXT_DEFAULTS] : [],
      zero_exclusion: false,
    });
    return el(
      "div",
      { class: "add-controls" },
      ...(["heatmap", "dumbbell", "dotplot"] as const).map((kind) =>
        el(
          "button",
          { "data-edit": `add-${kind}`, onclick: () => void this.applyAction(addChart(make(kind))) },
          `Add ${kind}`,
        ),
      ),
    );
  }

  private renderChartCard(chart: ChartConfigDoc): HTMLElement {
    const card = el("div", { class: "chart-card", "data-chart-card": chart.chart_id });
    const head = el("div", { class: "chart-head" }, el("strong", {}, `${chart.kind} · ${chart.facet ?? ""}`));
    if (this.editable) {
      head.append(...this.renderChartControls(chart));
      head.append(
        el(
          "button",
          { "data-edit": `remove-${chart.chart_id}`, onclick: () => void this.applyAction(removeChart(chart.chart_id)) },
          "Remove",
        ),
      );
    }
    card.append(head);
    card.append(el("div", { class: "chart-body", "data-chart-body": chart.chart_id }, "loading..."));
    card.append(this.renderAnnotation(chart.chart_id));
    return card;
  }

  private renderChartControls(chart: ChartConfigDoc): HTMLElement[] {
    const controls: HTMLElement[] = [];
    const facetSelect = el("select", {
      "data-edit": `facet-${chart.chart_id}`,
      onchange: (event) => {
        const facet = (event.target as HTMLSelectElement).value as ChartConfigDoc["facet"];
        void this.applyAction(updateChart({ ...structuredClone(chart), facet }));
      },
    });
    for (const facet of ["by_surgeon", "by_anesthesiologist", "by_year"]) {
      facetSelect.append(el("option", { value: facet, selected: chart.facet === facet }, facet));
    }
    controls.push(facetSelect);

    if (chart.kind === "heatmap") {
      const componentSelect = el("select", {
        "data-edit": `component-${chart.chart_id}`,
        onchange: (event) => {
          const component = (event.target as HTMLSelectElement).value as ChartConfigDoc["component"];
          void this.applyAction(updateChart({ ...structuredClone(chart), component }));
        },
      });
      for (const component of ["PRBC", "FFP", "PLT", "CRYO", "CELL_SALVAGE"]) {
        componentSelect.append(el("option", { value: component, selected: chart.component === component }, component));
      }
      controls.push(componentSelect);

      const splitSelect = el("select", {
        "data-edit": `split-${chart.chart_id}`,
        onchange: (event) => {
          const value = (event.target as HTMLSelectElement).value;
          const split =
            value === "none" ? ({ kind: "none" } as const) : ({ kind: "boolean_attribute", attribute: value } as const);
          void this.applyAction(updateChart({ ...structuredClone(chart), split }));
        },
      });
      splitSelect.append(el("option", { value: "none", selected: chart.split.kind === "none" }, "no split"));
      for (const flag of SPLIT_FLAGS) {
        splitSelect.append(
          el(
            "option",
            { value: flag, selected: chart.split.kind === "boolean_attribute" && chart.split.attribute === flag },
            `split: ${flag}`,
          ),
        );
      }
      controls.push(splitSelect);

      controls.push(
        el(
          "label",
          { class: "zero-toggle" },
          el("input", {
            type: "checkbox",
            "data-edit": `zero-exclusion-${chart.chart_id}`,
            checked: chart.zero_exclusion,
            onchange: () =>
              void this.applyAction(
                updateChart({ ...structuredClone(chart), zero_exclusion: !chart.zero_exclusion }),
              ),
          }),
          " exclude zero bin from scale",
        ),
      );
    }
    if (chart.kind === "dumbbell") {
      const sortSelect = el("select", {
        "data-edit": `sort-${chart.chart_id}`,
        onchange: (event) => {
          const sort = (event.target as HTMLSelectElement).value as ChartConfigDoc["sort_key"];
          void this.applyAction(updateChart({ ...structuredClone(chart), sort_key: sort }));
        },
      });
      for (const key of ["pre", "post", "gap"]) {
        sortSelect.append(el("option", { value: key, selected: chart.sort_key === key }, `sort: ${key}`));
      }
      controls.push(sortSelect);
    }
    if (chart.kind === "dotplot") {
      for (const axis of ["x", "y"] as const) {
        const attrSelect = el("select", {
          "data-edit": `${axis}-${chart.chart_id}`,
          onchange: (event) => {
            const value = (event.target as HTMLSelectElement).value;
            const next = structuredClone(chart);
            if (axis === "x") {
              next.x_attr = value;
            } else {
              next.y_attr = value;
            }
            void this.applyAction(updateChart(next));
          },
        });
        for (const attr of NUMERIC_ATTRS) {
          const current = axis === "x" ? chart.x_attr : chart.y_attr;
          attrSelect.append(el("option", { value: attr, selected: current === attr }, `${axis}: ${attr}`));
        }
        controls.push(attrSelect);
      }
    }
    return controls;
  }

  private renderAnnotation(chartId: string): HTMLElement {
    const text = this.state.annotations[chartId] ?? "";
    if (!this.editable) {
      return el("div", { class: "annotation readonly", "data-annotation": chartId }, text);
    }
    const input = el("textarea", { class: "annotation-input", "data-edit": `annotation-${chartId}`, rows: 2 });
    input.value = text;
    input.addEventListener("change", () => {
      void this.applyAction(annotate(chartId, input.value));
    });
    return el("div", { class: "annotation" }, input);
  }

  renderChartBody(chartId: string): void {
    const chart = this.state.charts.find((c) => c.chart_id === chartId);
    const body = this.root.querySelector(`[data-chart-body="${chartId}"]`);
    if (!chart || !body) {
      return;
    }
    const cached = this.cache.get(chartId);
    const envelope = envelopeFor(chart, this.state.filter);
    if (chart.kind === "cost_placeholder_none") {
      body.replaceChildren(el("p", { class: "chart-empty" }, "placeholder"));
      return;
    }
    if (!cached || envelope === null || cached.key !== JSON.stringify(envelope.body)) {
      return; // keep "loading..." until fresh rows arrive
    }
    if (chart.kind === "heatmap") {
      body.replaceChildren(renderHeatmap(cached.rows as HeatmapRowDoc[], chart.zero_exclusion));
    } else if (chart.kind === "dumbbell") {
      body.replaceChildren(renderDumbbell(cached.rows as DumbbellRowDoc[]));
    } else {
      body.replaceChildren(
        renderDotPlot(cached.rows as DotPlotRowDoc[], {
          xAttr: chart.x_attr!,
          yAttr: chart.y_attr!,
          editable: this.editable,
          onBrush: (rect) => void this.applyBrush(rect),
        }),
      );
    }
  }

  private renderCasePanel(): void {
    const panel = this.root.querySelector('[data-case-panel="true"]');
    if (!panel || !this.casesCache) {
      return;
    }
    const children: HTMLElement[] = [
      renderCaseList(this.casesCache.page as never, {
        onPage: (page) => {
          this.casePage = page;
          void this.refresh();
        },
        onSelect: (caseDoc) => {
          this.selectedCase = caseDoc;
          this.renderCasePanel();
        },
      }),
    ];
    if (this.selectedCase !== null) {
      children.push(renderCaseDetail(this.selectedCase));
    }
    panel.replaceChildren(...children);
  }
}
