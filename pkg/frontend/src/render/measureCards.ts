// Measure cards. The headline line is the server's display string,
// reproduced character for character (context symbol, arity and value
// included); the client adds no arithmetic of its own.

import type { MeasureValues } from "../types.js";
import { clear, htmlEl } from "./svg.js";

export function renderMeasureCards(
  container: Element,
  display: string[],
  general: MeasureValues,
): HTMLElement {
  const wrap = htmlEl("div", { class: "measure-cards" });
  for (const line of display) {
    const name = line.slice(0, line.indexOf("("));
    const value = general[name];
    wrap.append(
      htmlEl(
        "article",
        { class: "measure-card", "data-measure": name, "data-display": line },
        htmlEl("h4", {}, name),
        htmlEl("p", { class: "measure-display" }, line),
        htmlEl(
          "p",
          { class: "measure-value" },
          value === null || value === undefined ? "—" : String(value),
        ),
      ),
    );
  }
  clear(container);
  container.append(wrap);
  return wrap;
}
