// Data view: dataset loading, summary, browsing, and target selection.
// Selecting images populates the attack generation view's target list;
// the candidate pair slots hold one correctly and one incorrectly
// classified object.

import type { ApiClient } from "../api.js";
import type { ViewState } from "../state.js";
import type { DatasetSummary } from "../types.js";
import { renderImage } from "../render/imageView.js";
import { clear, htmlEl } from "../render/svg.js";

export interface DataViewHooks {
  onTargetsChanged(targetIds: number[]): void;
  onDatasetLoaded(summary: DatasetSummary): void;
}

export class DataView {
  summary: DatasetSummary | null = null;
  candidatePair: { correct: number | null; wrong: number | null } = {
    correct: null,
    wrong: null,
  };

  constructor(
    private root: Element,
    private api: ApiClient,
    private state: ViewState,
    private hooks: DataViewHooks,
  ) {}

  async load(request: Record<string, unknown>): Promise<void> {
    this.summary = await this.api.loadDataset(request);
    this.state.datasetId = this.summary.dataset_id;
    this.hooks.onDatasetLoaded(this.summary);
    this.render();
  }

  async pickCandidatePair(modelId: string): Promise<void> {
    if (!this.summary) return;
    const { targets } = await this.api.selectTargets({
      dataset_id: this.summary.dataset_id,
      model_id: modelId,
      strategy: "random",
      count: Math.min(40, this.summary.test_count),
      seed: 1,
    });
    this.candidatePair = {
      correct: targets.find((t) => t.correct)?.object_id ?? null,
      wrong: targets.find((t) => !t.correct)?.object_id ?? null,
    };
    this.render();
  }

  toggleTarget(objectId: number): void {
    const at = this.state.targetIds.indexOf(objectId);
    if (at >= 0) this.state.targetIds.splice(at, 1);
    else this.state.targetIds.push(objectId);
    this.hooks.onTargetsChanged([...this.state.targetIds]);
    this.render();
  }

  render(): void {
    clear(this.root);
    if (!this.summary) {
      this.root.append(htmlEl("p", { class: "placeholder" },
                              "load a dataset to begin"));
      return;
    }
    const s = this.summary;
    const head = htmlEl(
      "header", {},
      htmlEl("h3", {}, `${s.name} (${s.source_format})`),
      htmlEl(
        "p", { class: "dataset-numbers" },
        `${s.train_count} train / ${s.test_count} test, ` +
        `${s.image_shape[1]}x${s.image_shape[0]}x${s.image_shape[2]}`,
      ),
      htmlEl(
        "p", { class: "dataset-classes" },
        s.class_names
          .map((name, c) => `${name}: ${s.per_class_test[c]}`)
          .join(", "),
      ),
    );
    const grid = htmlEl("div", { class: "thumb-grid" });
    s.thumbnails.forEach((thumb, i) => {
      const index = thumb.index ?? i;
      const selected = this.state.targetIds.includes(index);
      const cell = htmlEl("button", {
        class: selected ? "thumb selected-target" : "thumb",
        "data-index": index,
        title: `test image ${index}` +
          (thumb.label !== undefined ? ` (${s.class_names[thumb.label]})` : ""),
      });
      cell.append(renderImage(thumb, 4));
      cell.addEventListener("click", () => this.toggleTarget(index));
      grid.append(cell);
    });
    const pair = htmlEl(
      "p", { class: "candidate-pair" },
      `candidate pair - correct: ${this.candidatePair.correct ?? "-"}, ` +
      `misclassified: ${this.candidatePair.wrong ?? "-"}`,
    );
    this.root.append(head, grid, pair);
  }
}
