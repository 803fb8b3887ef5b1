// Line charts for the evolving statistics and a pixel grid for the
// per-class success matrix.

import { clear, htmlEl, linearScale, svgEl } from "./svg.js";

export function renderCurves(
  container: Element,
  iterations: number[],
  series: Record<string, (number | null)[]>,
  title: string,
  width = 320,
  height = 160,
): SVGSVGElement {
  const names = Object.keys(series);
  const palette = ["#1565c0", "#c62828", "#2e7d32", "#6a1b9a", "#ef6c00"];
  const all = names.flatMap((name) =>
    series[name].filter((v): v is number => v !== null),
  );
  const top = Math.max(1, ...all);
  const sx = linearScale(
    iterations[0] ?? 0,
    iterations[iterations.length - 1] ?? 1,
    34,
    width - 10,
  );
  const sy = linearScale(0, top, height - 22, 10);
  const svg = svgEl("svg", {
    width, height, viewBox: `0 0 ${width} ${height}`, class: "curves",
  });
  svg.append(
    svgEl("text", { x: width / 2, y: 10, "text-anchor": "middle",
                    "font-size": 10, "font-weight": "bold" }, title),
    svgEl("line", { x1: 34, y1: height - 22, x2: width - 10, y2: height - 22,
                    stroke: "#455a64" }),
    svgEl("line", { x1: 34, y1: 10, x2: 34, y2: height - 22,
                    stroke: "#455a64" }),
  );
  names.forEach((name, i) => {
    const points = iterations
      .map((iteration, t) => {
        const value = series[name][t];
        return value === null ? null : `${sx(iteration)},${sy(value)}`;
      })
      .filter((p): p is string => p !== null)
      .join(" ");
    svg.append(
      svgEl("polyline", {
        points, fill: "none", stroke: palette[i % palette.length],
        "stroke-width": 1.6, class: "curve", "data-series": name,
      }),
    );
  });
  clear(container);
  container.append(svg);
  return svg;
}

export function renderClassMatrix(
  container: Element,
  matrix: number[][],
  classNames: string[],
  perClassSample: number,
): HTMLTableElement {
  const table = htmlEl("table", { class: "class-matrix" });
  table.append(htmlEl(
    "caption", {},
    `breached objects per class and iteration (of ${perClassSample} sampled)`,
  ));
  const peak = Math.max(1, ...matrix.flat());
  matrix.forEach((row, c) => {
    const tr = htmlEl("tr", {}, htmlEl("th", {}, classNames[c] ?? String(c)));
    row.forEach((value, t) => {
      tr.append(
        htmlEl("td", {
          class: "class-matrix-cell",
          "data-class": c,
          "data-iteration": t + 1,
          "data-value": value,
          style: `background: rgba(198, 40, 40, ${(0.9 * value / peak).toFixed(3)})`,
          title: `${classNames[c] ?? c} @ ${t + 1}: ${value}`,
        }),
      );
    });
    table.append(tr);
  });
  clear(container);
  container.append(table);
  return table;
}
