/** Transfusion heatmap: one row per facet group (or split sub-row), a color
 * cell per usage bin, and context attribute columns on the left.
 *
 * Both normalizations arrive with every row, so flipping the zero-exclusion
 * scale is a pure re-render: with it off, all bins share one red scale fed
 * by fraction_all; with it on, nonzero bins use fraction_transfused and the
 * zero bin moves to its own gray scale.
 */

import { grayScale, redScale, SPLIT_FALSE_COLOR, SPLIT_TRUE_COLOR, textColorFor } from "../color.js";
import { el, svg } from "../dom.js";
import type { ContextSummaryDoc, HeatmapRowDoc } from "../types.js";

const RAW_POINT_LIMIT = 10;

function formatPct(fraction: number): string {
  return `${Math.round(fraction * 100)}%`;
}

function violinCell(kde: [number, number][]): SVGElement {
  const width = 84;
  const height = 26;
  const xs = kde.map(([x]) => x);
  const ds = kde.map(([, d]) => d);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const dMax = Math.max(...ds) || 1;
  const span = xMax - xMin || 1;
  const mid = height / 2;
  const top = kde.map(([x, d]) => {
    const px = ((x - xMin) / span) * width;
    const py = mid - (d / dMax) * (mid - 2);
    return `${px.toFixed(1)},${py.toFixed(1)}`;
  });
  const bottom = kde
    .slice()
    .reverse()
    .map(([x, d]) => {
      const px = ((x - xMin) / span) * width;
      const py = mid + (d / dMax) * (mid - 2);
      return `${px.toFixed(1)},${py.toFixed(1)}`;
    });
  return svg(
    "svg",
    { width, height, class: "context-violin", "data-context-kind": "violin" },
    svg("polygon", { points: [...top, ...bottom].join(" "), fill: "#7f9fc4", stroke: "#44618a", "stroke-width": "0.6" }),
  );
}

function dotStripCell(points: number[]): SVGElement {
  const width = 84;
  const height = 26;
  const min = Math.min(...points);
  const max = Math.max(...points);
  const span = max - min || 1;
  const node = svg("svg", { width, height, class: "context-dots", "data-context-kind": "dots" });
  for (const p of points) {
    node.append(
      svg("circle", {
        cx: (4 + ((p - min) / span) * (width - 8)).toFixed(1),
        cy: height / 2,
        r: 2.4,
        fill: "#44618a",
        "fill-opacity": "0.75",
      }),
    );
  }
  return node;
}

function contextCell(summary: ContextSummaryDoc, scalarMax: number): HTMLElement {
  if (summary.kind === "distribution") {
    if (summary.n === 0) {
      return el("td", { class: "context-cell empty", "data-context-kind": "empty" }, "-");
    }
    // Violin for well-populated groups; the raw points below the cutoff.
    const chart =
      summary.kde !== null && summary.n >= RAW_POINT_LIMIT
        ? violinCell(summary.kde)
        : dotStripCell(summary.points ?? []);
    const cell = el("td", { class: "context-cell", title: `n=${summary.n}, median=${summary.median}` });
    cell.append(chart);
    return cell;
  }
  if (summary.kind === "scalar") {
    if (summary.value === null) {
      return el("td", { class: "context-cell empty", "data-context-kind": "empty" }, "-");
    }
    const fraction = scalarMax > 0 ? summary.value / scalarMax : 0;
    const bar = el("div", { class: "context-bar", "data-context-kind": "bar" });
    bar.append(el("div", { class: "context-bar-fill", style: `width: ${(fraction * 100).toFixed(1)}%` }));
    bar.append(el("span", { class: "context-bar-label" }, summary.value.toFixed(2)));
    const cell = el("td", { class: "context-cell" });
    cell.append(bar);
    return cell;
  }
  const label = summary.fraction === null ? "-" : formatPct(summary.fraction);
  return el(
    "td",
    {
      class: "context-cell labeled",
      "data-context-kind": "rate",
      title: `${summary.numerator}/${summary.denominator}`,
    },
    label,
  );
}

function binCell(row: HeatmapRowDoc, index: number, zeroExclusion: boolean): HTMLElement {
  const count = row.counts[index] ?? 0;
  let fill: string | null = null;
  let source: "all" | "transfused" | "zero" | "blank" = "blank";
  let fraction: number | null = null;
  if (!zeroExclusion) {
    fraction = row.fraction_all === null ? null : (row.fraction_all[index] ?? 0);
    if (fraction !== null) {
      fill = redScale(fraction);
      source = "all";
    }
  } else if (index === 0) {
    fraction = row.zero_fraction;
    if (fraction !== null) {
      fill = grayScale(fraction);
      source = "zero";
    }
  } else {
    const ft = row.fraction_transfused;
    fraction = ft === null ? null : ft[index]!;
    if (fraction !== null) {
      fill = redScale(fraction);
      source = "transfused";
    }
  }
  const cell = el(
    "td",
    {
      class: `bin-cell${fill === null ? " blank" : ""}`,
      "data-bin-cell": row.bins[index]!,
      "data-fill-source": source,
      title: fraction === null ? `${count} cases` : `${count} cases (${formatPct(fraction)})`,
    },
    fraction === null ? "" : formatPct(fraction),
  );
  if (fill !== null) {
    cell.setAttribute("style", `background: ${fill}; color: ${textColorFor(fraction ?? 0)}`);
  }
  return cell;
}

function splitIndicator(subLabel: string | null): HTMLElement {
  if (subLabel === null) {
    return el("td", { class: "split-indicator none" });
  }
  const holds = subLabel === "true" || subLabel === "before";
  const color = holds ? SPLIT_TRUE_COLOR : SPLIT_FALSE_COLOR;
  return el("td", {
    class: "split-indicator",
    "data-split": subLabel,
    style: `background: ${color}`,
    title: subLabel,
  });
}

export function renderHeatmap(rows: HeatmapRowDoc[], zeroExclusion: boolean): HTMLElement {
  if (rows.length === 0) {
    return el("p", { class: "chart-empty" }, "No cases match the current filters.");
  }
  const contextKeys = rows[0]!.context.map((c) => c.attribute);
  const scalarMax = new Map<string, number>();
  for (const row of rows) {
    for (const { attribute, summary } of row.context) {
      if (summary.kind === "scalar" && summary.value !== null) {
        scalarMax.set(attribute, Math.max(scalarMax.get(attribute) ?? 0, summary.value));
      }
    }
  }
  const head = el(
    "tr",
    {},
    el("th", {}),
    el("th", {}, "group"),
    el("th", {}, "cases"),
    ...contextKeys.map((key) => el("th", { class: "context-head" }, key)),
    ...rows[0]!.bins.map((label) => el("th", { class: "bin-head" }, label)),
  );
  const body = rows.map((row) =>
    el(
      "tr",
      { "data-heatmap-row": `${row.group}${row.sub_label === null ? "" : ":" + row.sub_label}` },
      splitIndicator(row.sub_label),
      el("td", { class: "group-label" }, String(row.group), row.sub_label === null ? "" : ` (${row.sub_label})`),
      el("td", { class: "count" }, String(row.count)),
      ...row.context.map(({ attribute, summary }) => contextCell(summary, scalarMax.get(attribute) ?? 0)),
      ...row.bins.map((_, i) => binCell(row, i, zeroExclusion)),
    ),
  );
  const table = el("table", { class: "heatmap", "data-zero-exclusion": String(zeroExclusion) });
  table.append(el("thead", {}, head), el("tbody", {}, ...body));
  return table;
}
