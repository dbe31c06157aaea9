/** End-to-end behavior against the API double: view-mode traffic and
 * affordances, brush-to-filter round trips, and the zero-exclusion toggle. */

import { describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { App, envelopeFor, parseRoute } from "../src/app.js";
import { addChart, annotate, canonicalState, updateChart } from "../src/state.js";
import type { BrushRect, ChartConfigDoc } from "../src/types.js";
import { FakeBackend } from "./fakeBackend.js";

function heatmapConfig(id: string): ChartConfigDoc {
  return {
    chart_id: id,
    kind: "heatmap",
    facet: "by_surgeon",
    split: { kind: "none" },
    component: "PRBC",
    x_attr: null,
    y_attr: null,
    sort_key: null,
    context_keys: ["drg_weight", "avg_prbc_per_case", "ecmo_rate"],
    zero_exclusion: false,
  };
}

function dumbbellConfig(id: string): ChartConfigDoc {
  return {
    chart_id: id,
    kind: "dumbbell",
    facet: "by_surgeon",
    split: { kind: "none" },
    component: null,
    x_attr: null,
    y_attr: null,
    sort_key: "post",
    context_keys: [],
    zero_exclusion: false,
  };
}

function dotplotConfig(id: string): ChartConfigDoc {
  return {
    chart_id: id,
    kind: "dotplot",
    facet: "by_surgeon",
    split: { kind: "none" },
    component: null,
    x_attr: "prbc_units",
    y_attr: "postop_hgb",
    sort_key: null,
    context_keys: [],
    zero_exclusion: false,
  };
}

function mount(): HTMLElement {
  // Page-load semantics: a fresh mount replaces whatever was on screen.
  document.body.replaceChildren();
  const root = document.createElement("div");
  document.body.append(root);
  return root;
}

async function editApp(backend: FakeBackend): Promise<App> {
  const app = new App(mount(), new ApiClient("", backend.fetch));
  await app.start();
  return app;
}

describe("route parsing", () => {
  it("extracts share ids and the mode flag", () => {
    expect(parseRoute("/", "")).toEqual({ shareId: null, mode: "edit" });
    expect(parseRoute("/share/abc123", "?mode=view")).toEqual({ shareId: "abc123", mode: "view" });
    expect(parseRoute("/share/abc123", "?mode=edit")).toEqual({ shareId: "abc123", mode: "edit" });
  });
});

describe("editing workspace", () => {
  it("renders fetched rows into chart cards", async () => {
    const backend = new FakeBackend();
    const app = await editApp(backend);
    await app.applyAction(addChart(heatmapConfig("c1")));
    const table = document.querySelector('[data-chart-body="c1"] table.heatmap');
    expect(table).not.toBeNull();
    expect(table!.querySelectorAll("[data-heatmap-row]").length).toBe(3);
  });

  it("undo removes a chart from the view, redo restores it", async () => {
    const backend = new FakeBackend();
    const app = await editApp(backend);
    await app.applyAction(addChart(heatmapConfig("c1")));
    expect(document.querySelector('[data-chart-card="c1"]')).not.toBeNull();
    await app.undo();
    expect(document.querySelector('[data-chart-card="c1"]')).toBeNull();
    await app.redo();
    expect(document.querySelector('[data-chart-card="c1"]')).not.toBeNull();
  });

  it("flips the zero-exclusion scale without issuing a new query", async () => {
    const backend = new FakeBackend();
    const app = await editApp(backend);
    await app.applyAction(addChart(heatmapConfig("c1")));
    const before = backend.log.length;
    const beforeSources = [...document.querySelectorAll("[data-bin-cell]")].map((c) =>
      c.getAttribute("data-fill-source"),
    );
    expect(new Set(beforeSources)).toEqual(new Set(["all"]));

    const toggle = document.querySelector('[data-edit="zero-exclusion-c1"]') as HTMLInputElement;
    expect(toggle).not.toBeNull();
    toggle.click();
    await vi.waitFor(() => {
      const table = document.querySelector("table.heatmap");
      expect(table?.getAttribute("data-zero-exclusion")).toBe("true");
    });
    const afterSources = [...document.querySelectorAll("[data-bin-cell]")].map((c) =>
      c.getAttribute("data-fill-source"),
    );
    expect(new Set(afterSources)).toEqual(new Set(["zero", "transfused"]));
    expect(backend.log.length).toBe(before); // rendering changed, traffic did not
  });

  it("annotations persist through actions without refetching chart data", async () => {
    const backend = new FakeBackend();
    const app = await editApp(backend);
    await app.applyAction(addChart(heatmapConfig("c1")));
    const before = backend.log.length;
    await app.applyAction(annotate("c1", "over-transfusion widespread"));
    expect(backend.log.length).toBe(before);
    const input = document.querySelector('[data-edit="annotation-c1"]') as HTMLTextAreaElement;
    expect(input.value).toBe("over-transfusion widespread");
  });
});

describe("brush to filter round trip", () => {
  it("updates dependent charts to match a direct query with the equivalent filter", async () => {
    const backend = new FakeBackend();
    const app = await editApp(backend);
    await app.applyAction(addChart(dumbbellConfig("c1")));
    await app.applyAction(addChart(dotplotConfig("c2")));

    const brush: BrushRect = {
      x_attr: "prbc_units",
      y_attr: "postop_hgb",
      x_min: 1,
      x_max: 1e6,
      y_min: 0,
      y_max: 20,
    };
    await app.applyBrush(brush);

    // The dumbbell request after the brush must be byte-identical to the
    // envelope a direct client would send for the equivalent filter.
    const expected = envelopeFor(app.state.charts[0]!, app.state.filter)!;
    const dumbbellRequests = backend.log.filter((r) => r.url === "/api/query/dumbbell");
    expect(dumbbellRequests.at(-1)!.body).toBe(JSON.stringify(expected.body));
    expect(app.state.filter.range_predicates).toEqual([
      { attribute: "prbc_units", min: 1, max: 1e6 },
      { attribute: "postop_hgb", min: 0, max: 20 },
    ]);

    // And the rendered medians must equal the direct API response's medians.
    const direct = await new ApiClient("", backend.fetch).dumbbell(expected.body);
    const rendered = [...document.querySelectorAll('[data-chart-body="c1"] [data-median-line="post"]')].map((n) =>
      Number(n.getAttribute("data-value")),
    );
    expect(rendered).toEqual(direct.rows.map((r) => r.median_post));
  });

  it("clearing the brush predicates restores the pre-brush chart data", async () => {
    const backend = new FakeBackend();
    const app = await editApp(backend);
    await app.applyAction(addChart(dumbbellConfig("c1")));
    const baseline = [...document.querySelectorAll('[data-median-line="post"]')].map((n) =>
      n.getAttribute("data-value"),
    );
    await app.applyBrush({ x_attr: "prbc_units", y_attr: "postop_hgb", x_min: 1, x_max: 9, y_min: 0, y_max: 20 });
    await app.undo();
    const restored = [...document.querySelectorAll('[data-median-line="post"]')].map((n) =>
      n.getAttribute("data-value"),
    );
    expect(restored).toEqual(baseline);
  });
});

describe("view mode", () => {
  async function sharedWorkspace(backend: FakeBackend): Promise<string> {
    const app = await editApp(backend);
    await app.applyAction(addChart(heatmapConfig("c1")));
    await app.applyAction(addChart(dumbbellConfig("c2")));
    await app.applyAction(annotate("c1", "check the zero column"));
    return app.share();
  }

  it("issues only GET traffic and shows no editing affordances", async () => {
    const backend = new FakeBackend();
    const url = await sharedWorkspace(backend);
    const shareId = url.match(/\/share\/([^?]+)/)![1]!;

    const mark = backend.log.length;
    const viewApi = new ApiClient("", backend.fetch, true);
    const route = parseRoute(`/share/${shareId}`, "?mode=view");
    expect(route).toEqual({ shareId, mode: "view" });
    const view = await App.fromRoute(mount(), viewApi, route);
    await view.start();

    const traffic = backend.requestsSince(mark);
    expect(traffic.length).toBeGreaterThan(1); // state load plus chart queries
    expect(traffic.every((r) => r.method === "GET")).toBe(true);

    expect(view.editable).toBe(false);
    expect(view.state.view_mode).toBe(true);
    expect(document.querySelectorAll("[data-edit]").length).toBe(0);
    expect(document.querySelector("[data-view-badge]")).not.toBeNull();
    const note = document.querySelector('[data-annotation="c1"]');
    expect(note!.textContent).toBe("check the zero column");
    expect(note!.tagName).not.toBe("TEXTAREA");
  });

  it("reloading a share URL reproduces the chart set and annotations", async () => {
    const backend = new FakeBackend();
    const url = await sharedWorkspace(backend);
    const shareId = url.match(/\/share\/([^?]+)/)![1]!;
    const viewApi = new ApiClient("", backend.fetch, true);

    const first = await App.fromRoute(mount(), viewApi, parseRoute(`/share/${shareId}`, "?mode=view"));
    await first.start();
    const second = await App.fromRoute(mount(), viewApi, parseRoute(`/share/${shareId}`, "?mode=view"));
    await second.start();

    expect(canonicalState(second.state)).toBe(canonicalState(first.state));
    expect(second.state.charts.map((c) => c.chart_id)).toEqual(["c1", "c2"]);
    expect(second.state.annotations).toEqual({ c1: "check the zero column" });
  });

  it("view-mode chart numbers come from the API, never client aggregation", async () => {
    const backend = new FakeBackend();
    const url = await sharedWorkspace(backend);
    const shareId = url.match(/\/share\/([^?]+)/)![1]!;
    const viewApi = new ApiClient("", backend.fetch, true);
    const view = await App.fromRoute(mount(), viewApi, parseRoute(`/share/${shareId}`, "?mode=view"));
    await view.start();

    const envelope = envelopeFor(view.state.charts[1]!, view.state.filter)!;
    const direct = await viewApi.dumbbell(envelope.body);
    const rendered = [...document.querySelectorAll('[data-chart-body="c2"] [data-median-line="post"]')].map((n) =>
      Number(n.getAttribute("data-value")),
    );
    expect(rendered).toEqual(direct.rows.map((r) => r.median_post));
  });
});

describe("case detail panel", () => {
  it("clicking a case row opens its full detail", async () => {
    const backend = new FakeBackend();
    await editApp(backend);
    await vi.waitFor(() => {
      expect(document.querySelector("[data-case-row]")).not.toBeNull();
    });
    const row = document.querySelector('[data-case-row="C1"]') as HTMLElement;
    row.click();
    const detail = document.querySelector('[data-case-detail="C1"]');
    expect(detail).not.toBeNull();
    const text = detail!.textContent!;
    for (const fragment of ["RBC units", "procedures", "aminocaproic acid", "ECMO", "cell salvage"]) {
      expect(text).toContain(fragment);
    }
  });

  it("pagination requests the next page through the API", async () => {
    const backend = new FakeBackend();
    await editApp(backend);
    await vi.waitFor(() => {
      expect(document.querySelector('[data-pager="next"]')).not.toBeNull();
    });
    const before = backend.log.filter((r) => r.url.includes("/api/query/cases")).length;
    (document.querySelector('[data-pager="next"]') as HTMLElement).click();
    await vi.waitFor(() => {
      const calls = backend.log.filter((r) => r.url.includes("/api/query/cases"));
      expect(calls.length).toBe(before + 1);
      expect(JSON.parse(calls.at(-1)!.body!).page).toBe(1);
    });
  });
});

describe("chart configuration controls", () => {
  it("changing the dumbbell sort reorders via a fresh query", async () => {
    const backend = new FakeBackend();
    const app = await editApp(backend);
    await app.applyAction(addChart(dumbbellConfig("c1")));
    const before = backend.log.filter((r) => r.url === "/api/query/dumbbell").length;
    await app.applyAction(updateChart({ ...dumbbellConfig("c1"), sort_key: "gap" }));
    const after = backend.log.filter((r) => r.url === "/api/query/dumbbell").length;
    expect(after).toBe(before + 1);
    const body = JSON.parse(backend.log.filter((r) => r.url === "/api/query/dumbbell").at(-1)!.body!);
    expect(body.sort).toBe("gap");
  });
});
