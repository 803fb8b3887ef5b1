// Model view: training controls, the flow tree, and the model statistics
// bars (feature importance and node usage).

import type { ApiClient } from "../api.js";
import type { ViewState } from "../state.js";
import type { ModelPayload, RunPayload } from "../types.js";
import { renderTree } from "../render/treeView.js";
import { clear, htmlEl, svgEl } from "../render/svg.js";

export class ModelView {
  model: ModelPayload | null = null;
  lastRun: RunPayload | null = null;

  constructor(
    private root: Element,
    private api: ApiClient,
    private state: ViewState,
  ) {}

  async train(params: Record<string, unknown>): Promise<void> {
    if (!this.state.datasetId) throw new Error("load a dataset first");
    this.model = await this.api.trainModel({
      dataset_id: this.state.datasetId,
      params,
    });
    this.state.modelId = this.model.model_id;
    this.render();
  }

  showRun(run: RunPayload): void {
    this.lastRun = run;
    this.render();
  }

  render(): void {
    clear(this.root);
    if (!this.model) {
      this.root.append(htmlEl("p", { class: "placeholder" },
                              "train a model to inspect it"));
      return;
    }
    const m = this.model;
    this.root.append(
      htmlEl(
        "header", {},
        htmlEl("h3", {}, `${m.name}`),
        htmlEl(
          "p", {},
          `accuracy ${m.accuracy === null ? "—" : m.accuracy.toFixed(4)}, ` +
          `depth ${m.tree.depth}, ${m.tree.nodes.length} nodes`,
        ),
      ),
    );
    const treeHost = htmlEl("div", { class: "tree-host" });
    renderTree(treeHost, this.lastRun?.tree ?? m.tree,
               this.lastRun?.flows ?? []);
    this.root.append(treeHost);
    this.root.append(
      this.bars("feature importance", m.feature_importance, 1),
      this.bars("feature usage in nodes",
                m.feature_usage.map((v) => v),
                Math.max(1, ...m.feature_usage)),
    );
  }

  private bars(title: string, values: number[], top: number): HTMLElement {
    const width = 300;
    const height = 90;
    const bar = width / Math.max(1, values.length);
    const svg = svgEl("svg", {
      width, height, viewBox: `0 0 ${width} ${height}`, class: "stat-bars",
    });
    values.forEach((value, i) => {
      const h = top === 0 ? 0 : (value / top) * (height - 20);
      svg.append(
        svgEl("rect", {
          x: i * bar + 1, y: height - 14 - h,
          width: Math.max(1, bar - 2), height: h,
          fill: "#1565c0", "data-feature": i, "data-value": value,
        }),
      );
    });
    return htmlEl("figure", { class: "model-stats" }, svg,
                  htmlEl("figcaption", {}, title));
  }
}
