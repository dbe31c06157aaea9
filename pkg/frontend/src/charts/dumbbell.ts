/** Dumbbell chart: one band per group, one pre/post hemoglobin pair per
 * case (pre dot green, post dot blue), solid median lines per endpoint,
 * dotted clinical reference lines across the chart. */

import { POSTOP_COLOR, PREOP_COLOR } from "../color.js";
import { el, svg } from "../dom.js";
import type { DumbbellRowDoc } from "../types.js";

const BAND_HEIGHT = 150;
const WIDTH = 660;
const MARGIN = { left: 96, right: 16, top: 8, bottom: 8 };

export function renderDumbbell(rows: DumbbellRowDoc[]): HTMLElement {
  if (rows.length === 0) {
    return el("p", { class: "chart-empty" }, "No cases with both hemoglobin values.");
  }
  const refs = rows[0]!.reference_lines;
  let lo = Math.min(refs.transfusion_trigger_hgb, ...rows.flatMap((r) => r.cases.map((c) => Math.min(c.preop_hgb, c.postop_hgb))));
  let hi = Math.max(refs.preop_target_hgb, ...rows.flatMap((r) => r.cases.map((c) => Math.max(c.preop_hgb, c.postop_hgb))));
  lo -= 0.5;
  hi += 0.5;
  const height = rows.length * BAND_HEIGHT + MARGIN.top + MARGIN.bottom;
  const chart = svg("svg", { width: WIDTH, height, class: "dumbbell", viewBox: `0 0 ${WIDTH} ${height}` });

  rows.forEach((row, bandIndex) => {
    const bandTop = MARGIN.top + bandIndex * BAND_HEIGHT;
    const y = (value: number) => bandTop + ((hi - value) / (hi - lo)) * (BAND_HEIGHT - 10) + 5;
    const plotLeft = MARGIN.left;
    const plotRight = WIDTH - MARGIN.right;
    const step = (plotRight - plotLeft) / (row.cases.length + 1);

    chart.append(
      svg("line", { x1: 0, x2: WIDTH, y1: bandTop, y2: bandTop, stroke: "#ddd" }),
      svg("text", { x: 8, y: bandTop + 16, class: "band-label", "font-size": 12 }, String(row.group)),
      svg("text", { x: 8, y: bandTop + 30, "font-size": 10, fill: "#666" }, `n=${row.cases.length}`),
    );
    for (const [value, color, name] of [
      [refs.preop_target_hgb, "#555", "preop target"],
      [refs.transfusion_trigger_hgb, "#555", "transfusion trigger"],
    ] as const) {
      chart.append(
        svg("line", {
          x1: plotLeft,
          x2: plotRight,
          y1: y(value),
          y2: y(value),
          stroke: color,
          "stroke-dasharray": "4 3",
          "data-reference-line": name,
        }),
      );
    }
    chart.append(
      svg("line", {
        x1: plotLeft,
        x2: plotRight,
        y1: y(row.median_pre),
        y2: y(row.median_pre),
        stroke: PREOP_COLOR,
        "stroke-width": 1.5,
        "data-median-line": "pre",
        "data-value": row.median_pre,
      }),
      svg("line", {
        x1: plotLeft,
        x2: plotRight,
        y1: y(row.median_post),
        y2: y(row.median_post),
        stroke: POSTOP_COLOR,
        "stroke-width": 1.5,
        "data-median-line": "post",
        "data-value": row.median_post,
      }),
    );
    row.cases.forEach((c, i) => {
      const x = plotLeft + step * (i + 1);
      chart.append(
        svg("line", { x1: x, x2: x, y1: y(c.preop_hgb), y2: y(c.postop_hgb), stroke: "#999", "stroke-width": 0.8 }),
        svg("circle", { cx: x, cy: y(c.preop_hgb), r: 2.6, fill: PREOP_COLOR, "data-dot": "pre" }),
        svg("circle", { cx: x, cy: y(c.postop_hgb), r: 2.6, fill: POSTOP_COLOR, "data-dot": "post" }),
      );
    });
  });

  const wrapper = el("div", { class: "dumbbell-wrap" });
  wrapper.append(chart);
  return wrapper;
}
