/** Dot plot for correlation views: one band per group, x/y points, the mean
 * of y as a horizontal line, and the 95% CI as a vertical segment. Supports
 * a rectangle brush that offers conversion into a filter fragment. */

import { el, svg } from "../dom.js";
import type { BrushRect, DotPlotRowDoc } from "../types.js";

const BAND_HEIGHT = 130;
const WIDTH = 660;
const MARGIN = { left: 96, right: 16, top: 8, bottom: 8 };

export interface DotPlotOptions {
  xAttr: string;
  yAttr: string;
  editable: boolean;
  onBrush?: (rect: BrushRect) => void;
}

interface Scales {
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
  plotLeft: number;
  plotRight: number;
}

/** Map a pixel-space rectangle inside one band back to data space. */
export function pixelRectToData(
  scales: Scales,
  bandTop: number,
  px0: number,
  px1: number,
  py0: number,
  py1: number,
): { x_min: number; x_max: number; y_min: number; y_max: number } {
  const { xMin, xMax, yMin, yMax, plotLeft, plotRight } = scales;
  const toX = (px: number) => xMin + ((px - plotLeft) / (plotRight - plotLeft)) * (xMax - xMin);
  const innerTop = bandTop + 5;
  const innerHeight = BAND_HEIGHT - 10;
  const toY = (py: number) => yMax - ((py - innerTop) / innerHeight) * (yMax - yMin);
  const xs = [toX(Math.min(px0, px1)), toX(Math.max(px0, px1))];
  const ys = [toY(Math.max(py0, py1)), toY(Math.min(py0, py1))];
  return { x_min: xs[0]!, x_max: xs[1]!, y_min: ys[0]!, y_max: ys[1]! };
}

export function renderDotPlot(rows: DotPlotRowDoc[], options: DotPlotOptions): HTMLElement {
  if (rows.length === 0) {
    return el("p", { class: "chart-empty" }, "No cases with both axis values.");
  }
  const allPoints = rows.flatMap((r) => r.points);
  const xMin = Math.min(...allPoints.map((p) => p.x));
  const xMax = Math.max(...allPoints.map((p) => p.x)) || 1;
  const yValues = allPoints.map((p) => p.y);
  const yMin = Math.min(...yValues);
  const yMax = Math.max(...yValues);
  const scales: Scales = {
    xMin,
    xMax: xMax === xMin ? xMin + 1 : xMax,
    yMin: yMin === yMax ? yMin - 1 : yMin,
    yMax: yMax === yMin ? yMax + 1 : yMax,
    plotLeft: MARGIN.left,
    plotRight: WIDTH - MARGIN.right,
  };
  const height = rows.length * BAND_HEIGHT + MARGIN.top + MARGIN.bottom;
  const chart = svg("svg", { width: WIDTH, height, class: "dotplot", viewBox: `0 0 ${WIDTH} ${height}` });

  const x = (value: number) =>
    scales.plotLeft + ((value - scales.xMin) / (scales.xMax - scales.xMin)) * (scales.plotRight - scales.plotLeft);

  rows.forEach((row, bandIndex) => {
    const bandTop = MARGIN.top + bandIndex * BAND_HEIGHT;
    const y = (value: number) => bandTop + ((scales.yMax - value) / (scales.yMax - scales.yMin)) * (BAND_HEIGHT - 10) + 5;
    chart.append(
      svg("line", { x1: 0, x2: WIDTH, y1: bandTop, y2: bandTop, stroke: "#ddd" }),
      svg("text", { x: 8, y: bandTop + 16, "font-size": 12 }, String(row.group)),
      svg("text", { x: 8, y: bandTop + 30, "font-size": 10, fill: "#666" }, `n=${row.points.length}`),
    );
    for (const p of row.points) {
      chart.append(
        svg("circle", { cx: x(p.x), cy: y(p.y), r: 2.4, fill: "#44618a", "fill-opacity": "0.65", "data-point": p.case_id }),
      );
    }
    chart.append(
      svg("line", {
        x1: scales.plotLeft,
        x2: scales.plotRight,
        y1: y(row.mean_y),
        y2: y(row.mean_y),
        stroke: "#b03030",
        "stroke-width": 1.5,
        "data-mean-line": String(row.group),
        "data-value": row.mean_y,
      }),
    );
    if (row.ci_low !== null && row.ci_high !== null) {
      const cx = (scales.plotLeft + scales.plotRight) / 2;
      chart.append(
        svg("line", {
          x1: cx,
          x2: cx,
          y1: y(row.ci_low),
          y2: y(row.ci_high),
          stroke: "#b03030",
          "stroke-width": 2,
          "data-ci-line": String(row.group),
        }),
      );
    }
  });

  const wrapper = el("div", { class: "dotplot-wrap" });
  wrapper.append(chart);

  if (options.editable && options.onBrush) {
    attachBrush(wrapper, chart, scales, options);
  }
  return wrapper;
}

function attachBrush(wrapper: HTMLElement, chart: SVGElement, scales: Scales, options: DotPlotOptions): void {
  let start: { x: number; y: number; bandTop: number } | null = null;
  let rectEl: SVGElement | null = null;

  const bandTopFor = (py: number) => {
    const index = Math.max(0, Math.floor((py - MARGIN.top) / BAND_HEIGHT));
    return MARGIN.top + index * BAND_HEIGHT;
  };
  const local = (event: PointerEvent) => {
    const bounds = chart.getBoundingClientRect();
    return { x: event.clientX - bounds.left, y: event.clientY - bounds.top };
  };

  chart.addEventListener("pointerdown", (event) => {
    const p = local(event as PointerEvent);
    start = { ...p, bandTop: bandTopFor(p.y) };
    rectEl?.remove();
    rectEl = svg("rect", { class: "brush-rect", fill: "#88aacc", "fill-opacity": "0.25", stroke: "#44618a" });
    chart.append(rectEl);
  });
  chart.addEventListener("pointermove", (event) => {
    if (!start || !rectEl) {
      return;
    }
    const p = local(event as PointerEvent);
    rectEl.setAttribute("x", String(Math.min(start.x, p.x)));
    rectEl.setAttribute("y", String(Math.min(start.y, p.y)));
    rectEl.setAttribute("width", String(Math.abs(p.x - start.x)));
    rectEl.setAttribute("height", String(Math.abs(p.y - start.y)));
  });
  chart.addEventListener("pointerup", (event) => {
    if (!start) {
      return;
    }
    const p = local(event as PointerEvent);
    const begun = start;
    start = null;
    if (Math.abs(p.x - begun.x) < 4 || Math.abs(p.y - begun.y) < 4) {
      rectEl?.remove();
      rectEl = null;
      return;
    }
    const dataRect = pixelRectToData(scales, begun.bandTop, begun.x, p.x, begun.y, p.y);
    const button = el(
      "button",
      {
        class: "brush-convert",
        "data-edit": "brush-convert",
        onclick: () => {
          options.onBrush?.({ x_attr: options.xAttr, y_attr: options.yAttr, ...dataRect });
          button.remove();
          rectEl?.remove();
          rectEl = null;
        },
      },
      "Convert brush to filter",
    );
    wrapper.append(button);
  });
}
