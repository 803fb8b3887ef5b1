// Results view: scatter plot, confusion matrices, parallel coordinates
// with axis reordering and brushing, evolving-statistics curves, the
// per-class success matrix, and the measure cards.

import type { ApiClient } from "../api.js";
import type { ViewState } from "../state.js";
import type { CampaignDetail, DatasetSummary, RunPayload } from "../types.js";
import { renderConfusion } from "../render/confusionView.js";
import { renderClassMatrix, renderCurves } from "../render/lineChart.js";
import { renderMeasureCards } from "../render/measureCards.js";
import { moveAxis, renderParallel } from "../render/parallelView.js";
import { renderScatter } from "../render/scatterView.js";
import { clear, htmlEl } from "../render/svg.js";

export class ResultsView {
  run: RunPayload | null = null;
  campaign: CampaignDetail | null = null;
  summary: DatasetSummary | null = null;

  constructor(
    private root: Element,
    private api: ApiClient,
    private state: ViewState,
  ) {}

  async refresh(): Promise<void> {
    if (!this.state.datasetId || !this.state.modelId) return;
    const spec: Record<string, unknown> = {
      dataset_id: this.state.datasetId,
      model_id: this.state.modelId,
    };
    if (this.state.flowSelection.targets) {
      spec.target_ids = this.state.targetIds;
    }
    if (this.state.flowSelection.attacks && this.state.campaignId) {
      spec.campaign_ids = [this.state.campaignId];
    }
    if (this.state.flowSelection.testSubset > 0) {
      spec.test_indices = Array.from(
        { length: this.state.flowSelection.testSubset }, (_, i) => i,
      );
    }
    this.run = await this.api.runTest(spec);
    if (this.state.campaignId) {
      this.campaign = await this.api.campaign(
        this.state.datasetId, this.state.campaignId,
      );
    }
    this.render();
  }

  setScatterFeatures(x: number, y: number): void {
    this.state.scatterX = x;
    this.state.scatterY = y;
    this.render();
  }

  reorderAxis(feature: number, slot: number): void {
    const count = this.run?.feature_count ?? 0;
    const order = this.state.axisOrder.length
      ? this.state.axisOrder
      : Array.from({ length: count }, (_, i) => i);
    this.state.axisOrder = moveAxis(order, feature, slot);
    this.render();
  }

  brush(axis: number, lo: number, hi: number): void {
    this.state.brushes = this.state.brushes
      .filter((b) => b.axis !== axis)
      .concat([{ axis, lo, hi }]);
    this.render();
  }

  clearBrushes(): void {
    this.state.brushes = [];
    this.render();
  }

  render(): void {
    clear(this.root);
    if (!this.run) {
      this.root.append(htmlEl("p", { class: "placeholder" },
                              "run a test to see results"));
      return;
    }
    const classNames = this.summary?.class_names ??
      (this.run.original?.confusion ?? []).map((_, i) => `class ${i}`);
    const visible = new Set(this.state.visiblePlots);

    if (visible.has("scatter")) {
      const host = htmlEl("section", { class: "pane scatter-pane" });
      renderScatter(host, this.run.feature_rows, this.state.scatterX,
                    this.state.scatterY);
      this.root.append(host);
    }

    if (visible.has("confusion")) {
      const host = htmlEl("section", { class: "pane confusion-pane" });
      if (this.run.original) {
        const original = htmlEl("div", {});
        renderConfusion(original, this.run.original.confusion, classNames,
                        "original data");
        host.append(original);
      }
      if (this.run.attacking) {
        const attacked = htmlEl("div", {});
        renderConfusion(attacked, this.run.attacking.confusion, classNames,
                        "attacked data");
        host.append(attacked);
      }
      this.root.append(host);
    }

    if (visible.has("parallel")) {
      const host = htmlEl("section", { class: "pane parallel-pane" });
      renderParallel(host, this.run.feature_rows, this.run.feature_count, {
        axisOrder: this.state.axisOrder,
        brushes: this.state.brushes,
      });
      this.root.append(host);
    }

    if (visible.has("curves") && this.campaign?.evolving) {
      const host = htmlEl("section", { class: "pane curves-pane" });
      const evolving = this.campaign.evolving;
      renderCurves(
        host,
        evolving.iterations,
        {
          "breach rate": evolving.breach_rate,
          "adversarial impact": evolving.adversarial_impact_rate,
        },
        "evolving statistics",
      );
      const successes = htmlEl("div", {});
      renderCurves(
        successes,
        evolving.iterations,
        { "cumulative successes": evolving.cumulative_successes },
        "cumulative successes",
      );
      host.append(successes);
      const matrix = htmlEl("div", {});
      renderClassMatrix(matrix, evolving.per_class_breaches, classNames,
                        this.campaign.targets?.length ?? 0);
      host.append(matrix);
      this.root.append(host);
    }

    if (visible.has("cards") && this.run.measures) {
      const host = htmlEl("section", { class: "pane cards-pane" });
      renderMeasureCards(host, this.run.measures.display,
                         this.run.measures.values.general);
      this.root.append(host);
    }
  }
}
