// Attack-path visualizations: the (x, y) walk of the best candidate drawn
// over an enlarged target image, plus per-coordinate time series whose
// markers are colored by how much the written pixel value rose or fell
// between iterations.

import type { ImagePayload, TraceStep } from "../types.js";
import { renderImage } from "./imageView.js";
import { htmlEl, linearScale, svgEl } from "./svg.js";

function deltaColor(delta: number, span: number): string {
  if (span === 0 || delta === 0) return "#757575";
  const strength = Math.min(1, Math.abs(delta) / span);
  const channel = Math.round(120 + 120 * strength);
  // brighter red = value rose, brighter blue = value fell
  return delta > 0 ? `rgb(${channel}, 40, 40)` : `rgb(40, 60, ${channel})`;
}

export function renderAttackPathOverlay(
  container: Element,
  image: ImagePayload,
  path: TraceStep[],
  scale = 16,
): SVGSVGElement {
  const svg = renderImage(image, scale, "attack-path-overlay");
  const vertices = path.map((step) => [step.pixels[0].x, step.pixels[0].y]);
  const points = vertices
    .map(([x, y]) => `${(x + 0.5) * scale},${(y + 0.5) * scale}`)
    .join(" ");
  svg.append(
    svgEl("polyline", {
      points,
      fill: "none",
      stroke: "#ff6f00",
      "stroke-width": 2,
      class: "attack-path",
      "data-vertices": JSON.stringify(vertices),
    }),
  );
  path.forEach((step, i) => {
    const [x, y] = vertices[i];
    svg.append(
      svgEl("circle", {
        cx: (x + 0.5) * scale,
        cy: (y + 0.5) * scale,
        r: step.success ? 4 : 2.5,
        fill: step.success ? "#ffd600" : "#ff6f00",
        class: "attack-path-point",
        "data-iteration": step.iteration,
      }),
    );
  });
  container.append(svg);
  return svg;
}

export function renderCoordinateSeries(
  container: Element,
  path: TraceStep[],
  image: ImagePayload,
  width = 260,
  height = 90,
): HTMLElement {
  const wrap = htmlEl("div", { class: "coordinate-series" });
  const values = path.map((step) => step.pixels[0].values[0]);
  const deltas = values.map((v, i) => (i === 0 ? 0 : v - values[i - 1]));
  const maxDelta = Math.max(1, ...deltas.map(Math.abs));
  const axes: ["x" | "y", number][] = [
    ["x", image.width - 1],
    ["y", image.height - 1],
  ];
  for (const [axis, maximum] of axes) {
    const svg = svgEl("svg", {
      width,
      height,
      viewBox: `0 0 ${width} ${height}`,
      class: `series series-${axis}`,
    });
    const sx = linearScale(1, Math.max(2, path.length), 18, width - 6);
    const sy = linearScale(0, Math.max(1, maximum), height - 14, 8);
    let previous: [number, number] | null = null;
    path.forEach((step, i) => {
      const coordinate = axis === "x" ? step.pixels[0].x : step.pixels[0].y;
      const px = sx(step.iteration);
      const py = sy(coordinate);
      if (step.success) {
        svg.append(
          svgEl("rect", {
            x: px - 5,
            y: 0,
            width: 10,
            height,
            fill: "#fff59d",
            class: "success-band",
          }),
        );
      }
      if (previous) {
        svg.append(
          svgEl("line", {
            x1: previous[0],
            y1: previous[1],
            x2: px,
            y2: py,
            stroke: "#90a4ae",
            "stroke-width": 1,
          }),
        );
      }
      svg.append(
        svgEl("circle", {
          cx: px,
          cy: py,
          r: 3,
          fill: deltaColor(deltas[i], maxDelta),
          class: "series-point",
          "data-axis": axis,
          "data-iteration": step.iteration,
          "data-coordinate": coordinate,
          "data-value-delta": deltas[i],
        }),
      );
      previous = [px, py];
    });
    wrap.append(
      htmlEl("figure", {}, svg, htmlEl("figcaption", {}, `${axis} coordinate`)),
    );
  }
  container.append(wrap);
  return wrap;
}
