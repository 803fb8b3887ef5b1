// Parallel coordinates over the served feature rows, with reorderable
// axes and per-axis brushing. Brushing dims every line that falls outside
// any active brush range (the brushed subset stays highlighted).

import type { BrushRange } from "../state.js";
import type { FeatureRow } from "../types.js";
import { clear, linearScale, svgEl } from "./svg.js";

export interface ParallelOptions {
  width?: number;
  height?: number;
  axisOrder?: number[];
  brushes?: BrushRange[];
}

export function lineIsBrushed(
  row: FeatureRow,
  brushes: BrushRange[],
): boolean {
  return brushes.every(
    (brush) =>
      row.features[brush.axis] >= brush.lo && row.features[brush.axis] <= brush.hi,
  );
}

export function renderParallel(
  container: Element,
  rows: FeatureRow[],
  featureCount: number,
  options: ParallelOptions = {},
): SVGSVGElement {
  const width = options.width ?? 560;
  const height = options.height ?? 240;
  const order =
    options.axisOrder && options.axisOrder.length
      ? options.axisOrder
      : Array.from({ length: featureCount }, (_, i) => i);
  const brushes = options.brushes ?? [];

  const svg = svgEl("svg", {
    width,
    height,
    viewBox: `0 0 ${width} ${height}`,
    class: "parallel",
    "data-axis-order": order.join(","),
  });
  const axisX = linearScale(0, Math.max(1, order.length - 1), 40, width - 20);
  const scales = order.map((feature) => {
    const values = rows.map((row) => row.features[feature]);
    const lo = Math.min(...values, 0);
    const hi = Math.max(...values, 1);
    return linearScale(lo, hi, height - 24, 12);
  });

  rows.forEach((row) => {
    const points = order
      .map((feature, i) => `${axisX(i)},${scales[i](row.features[feature])}`)
      .join(" ");
    const brushed = lineIsBrushed(row, brushes);
    svg.append(
      svgEl("polyline", {
        points,
        fill: "none",
        stroke: row.kind === "attacked" ? "#f9a825" : "#1565c0",
        "stroke-opacity": brushed ? 0.85 : 0.08,
        "stroke-width": brushed ? 1.4 : 1,
        class: brushed ? "pc-line" : "pc-line pc-dimmed",
        "data-id": row.id,
      }),
    );
  });

  order.forEach((feature, i) => {
    const x = axisX(i);
    svg.append(
      svgEl("line", {
        x1: x, y1: 12, x2: x, y2: height - 24,
        stroke: "#37474f", class: "pc-axis", "data-feature": feature,
      }),
      svgEl("text", {
        x, y: height - 8, "text-anchor": "middle", "font-size": 10,
        class: "pc-axis-label", "data-feature": feature,
      }, `f${feature}`),
    );
    const brush = brushes.find((b) => b.axis === feature);
    if (brush) {
      const scale = scales[i];
      // clamp to the axis extent so out-of-domain ranges stay on the axis
      const top = Math.max(12, Math.min(scale(brush.lo), scale(brush.hi)));
      const bottom = Math.min(height - 24,
                              Math.max(scale(brush.lo), scale(brush.hi)));
      svg.append(
        svgEl("rect", {
          x: x - 5, y: Math.min(top, bottom), width: 10,
          height: Math.max(0, bottom - top),
          fill: "rgba(21, 101, 192, 0.25)", stroke: "#1565c0",
          class: "pc-brush", "data-feature": feature,
        }),
      );
    }
  });

  clear(container);
  container.append(svg);
  return svg;
}

/** Move an axis to a new slot, returning the updated order. */
export function moveAxis(
  order: number[],
  feature: number,
  toSlot: number,
): number[] {
  const next = order.filter((f) => f !== feature);
  next.splice(Math.max(0, Math.min(toSlot, next.length)), 0, feature);
  return next;
}
