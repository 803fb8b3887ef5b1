// Confusion matrix as a color-scaled grid; every cell shows the served
// count verbatim.

import { clear, htmlEl } from "./svg.js";

export function renderConfusion(
  container: Element,
  confusion: number[][],
  classNames: string[],
  caption = "confusion matrix",
): HTMLTableElement {
  const maxValue = Math.max(1, ...confusion.flat());
  const table = htmlEl("table", { class: "confusion" });
  table.append(htmlEl("caption", {}, caption));
  const header = htmlEl("tr", {}, htmlEl("th", {}, "truth \\ predicted"));
  classNames.forEach((name) => header.append(htmlEl("th", {}, name)));
  table.append(header);
  confusion.forEach((row, truth) => {
    const tr = htmlEl("tr", {}, htmlEl("th", {}, classNames[truth] ?? String(truth)));
    row.forEach((value, predicted) => {
      const intensity = value / maxValue;
      tr.append(
        htmlEl(
          "td",
          {
            class: "confusion-cell",
            "data-truth": truth,
            "data-predicted": predicted,
            "data-value": value,
            style: `background: rgba(21, 101, 192, ${(0.85 * intensity).toFixed(3)})`,
          },
          String(value),
        ),
      );
    });
    table.append(tr);
  });
  clear(container);
  container.append(table);
  return table;
}
