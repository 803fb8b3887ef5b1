// Feature scatter plot: two chosen features of the served feature rows.

import type { FeatureRow } from "../types.js";
import { clear, linearScale, svgEl } from "./svg.js";

const CLASS_PALETTE = [
  "#1565c0", "#c62828", "#2e7d32", "#6a1b9a", "#ef6c00",
  "#00838f", "#9e9d24", "#4e342e", "#37474f", "#ad1457",
];

export function renderScatter(
  container: Element,
  rows: FeatureRow[],
  featureX: number,
  featureY: number,
  size = 280,
): SVGSVGElement {
  const svg = svgEl("svg", {
    width: size,
    height: size,
    viewBox: `0 0 ${size} ${size}`,
    class: "scatter",
    "data-feature-x": featureX,
    "data-feature-y": featureY,
  });
  const xs = rows.map((row) => row.features[featureX]);
  const ys = rows.map((row) => row.features[featureY]);
  const sx = linearScale(Math.min(...xs, 0), Math.max(...xs, 1), 24, size - 8);
  const sy = linearScale(Math.min(...ys, 0), Math.max(...ys, 1), size - 20, 8);
  svg.append(
    svgEl("line", { x1: 24, y1: size - 20, x2: size - 8, y2: size - 20,
                    stroke: "#455a64" }),
    svgEl("line", { x1: 24, y1: 8, x2: 24, y2: size - 20, stroke: "#455a64" }),
    svgEl("text", { x: size / 2, y: size - 4, "text-anchor": "middle",
                    "font-size": 10 }, `feature ${featureX}`),
    svgEl("text", { x: 8, y: size / 2, "font-size": 10,
                    transform: `rotate(-90 8 ${size / 2})`,
                    "text-anchor": "middle" }, `feature ${featureY}`),
  );
  rows.forEach((row, i) => {
    const marker = svgEl(row.kind === "attacked" ? "rect" : "circle", {
      class: `scatter-point scatter-${row.kind}`,
      fill: CLASS_PALETTE[row.label % CLASS_PALETTE.length],
      stroke: row.predicted === row.label ? "none" : "#000",
      "stroke-width": row.predicted === row.label ? 0 : 1.2,
      "data-id": row.id,
      "data-fx": row.features[featureX],
      "data-fy": row.features[featureY],
    });
    if (marker.tagName === "circle") {
      marker.setAttribute("cx", String(sx(xs[i])));
      marker.setAttribute("cy", String(sy(ys[i])));
      marker.setAttribute("r", "3.5");
    } else {
      marker.setAttribute("x", String(sx(xs[i]) - 3));
      marker.setAttribute("y", String(sy(ys[i]) - 3));
      marker.setAttribute("width", "6");
      marker.setAttribute("height", "6");
    }
    svg.append(marker);
  });
  clear(container);
  container.append(svg);
  return svg;
}
