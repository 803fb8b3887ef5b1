// Attack generation view: the parameter form, live progress from the SSE
// stream, and the three perturbed-data representations (first image,
// animation over all runs, pop-up grid of all). Successful attacks carry
// a highlighted background.

import { ApiClient, SseEventLog, consumeEventStream } from "../api.js";
import type { ViewState } from "../state.js";
import type { CampaignDetail, TracePayload } from "../types.js";
import { renderAttackPathOverlay, renderCoordinateSeries } from "../render/attackPath.js";
import { renderImage } from "../render/imageView.js";
import { clear, htmlEl } from "../render/svg.js";

export interface AttackFormValues {
  pop_size: number;
  iterations: number;
  num_pixels: number;
  num_attacks: number;
  target_class: number | null;
  seed: number;
  early_stop: boolean;
  bounds: { x: [number, number]; y: [number, number]; values: [number, number][] } | null;
}

export const DEFAULT_FORM: AttackFormValues = {
  pop_size: 40,
  iterations: 30,
  num_pixels: 1,
  num_attacks: 1,
  target_class: null,
  seed: 0,
  early_stop: true,
  bounds: null,
};

export class AttackView {
  form: AttackFormValues = { ...DEFAULT_FORM };
  log = new SseEventLog();
  detail: CampaignDetail | null = null;
  animationFrame = 0;
  animationTimer: ReturnType<typeof setInterval> | null = null;
  framesPerSecond = 4;

  constructor(
    private root: Element,
    private api: ApiClient,
    private state: ViewState,
    private onFinished: (campaignId: string) => void,
  ) {}

  /** Ordered frames: run index first, then iteration. */
  animationFrames(): { trace: TracePayload; stepIndex: number }[] {
    const frames: { trace: TracePayload; stepIndex: number }[] = [];
    for (const trace of this.detail?.traces ?? []) {
      trace.path.forEach((_, stepIndex) => frames.push({ trace, stepIndex }));
    }
    return frames;
  }

  async start(): Promise<void> {
    if (!this.state.datasetId || !this.state.modelId) {
      throw new Error("select a dataset and model first");
    }
    if (this.state.targetIds.length === 0) {
      throw new Error("select at least one target in the data view");
    }
    this.log = new SseEventLog();
    const { campaign_id } = await this.api.startAttack({
      dataset_id: this.state.datasetId,
      model_id: this.state.modelId,
      target_ids: this.state.targetIds,
      config: this.form,
    });
    this.state.campaignId = campaign_id;
    this.renderProgress();
    const response = await fetch(
      this.api.eventsUrl(this.state.datasetId, campaign_id),
    );
    await consumeEventStream(response, this.log);
    this.detail = await this.api.campaign(this.state.datasetId, campaign_id);
    this.onFinished(campaign_id);
    this.render();
  }

  async cancel(): Promise<void> {
    if (this.state.datasetId && this.state.campaignId) {
      await this.api.cancelAttack(this.state.datasetId, this.state.campaignId);
    }
  }

  pauseAnimation(): void {
    if (this.animationTimer !== null) {
      clearInterval(this.animationTimer);
      this.animationTimer = null;
    }
  }

  playAnimation(onFrame: (frame: number) => void): void {
    this.pauseAnimation();
    const frames = this.animationFrames();
    if (!frames.length) return;
    this.animationTimer = setInterval(() => {
      this.animationFrame = (this.animationFrame + 1) % frames.length;
      onFrame(this.animationFrame);
    }, 1000 / this.framesPerSecond);
  }

  scrubTo(frame: number): void {
    const frames = this.animationFrames();
    if (!frames.length) return;
    this.animationFrame = Math.max(0, Math.min(frame, frames.length - 1));
  }

  renderProgress(): void {
    const row = this.root.querySelector(".attack-progress");
    if (!row) return;
    const n = this.log.iterationEvents().length;
    row.textContent = this.log.terminal
      ? `${this.log.terminal.type} after ${n} iteration events`
      : `${n} iteration events...`;
  }

  render(): void {
    clear(this.root);
    const form = htmlEl(
      "form", { class: "attack-form" },
      ...(
        [
          ["pop_size", "population size"],
          ["iterations", "iterations"],
          ["num_pixels", "pixels per attack"],
          ["num_attacks", "number of attacks"],
          ["seed", "seed"],
        ] as const
      ).map(([key, label]) =>
        htmlEl(
          "label", {}, `${label} `,
          htmlEl("input", {
            type: "number", name: key, value: this.form[key],
          }),
        ),
      ),
      htmlEl(
        "label", {}, "attack target (blank = untargeted) ",
        htmlEl("input", {
          type: "text", name: "target_class",
          value: this.form.target_class === null ? "" : this.form.target_class,
        }),
      ),
      htmlEl(
        "label", {}, "bounds x0,x1,y0,y1,lo,hi ",
        htmlEl("input", { type: "text", name: "bounds", value: "" }),
      ),
      htmlEl(
        "label", {},
        htmlEl("input", { type: "checkbox", name: "early_stop",
                          checked: this.form.early_stop }),
        " stop at first success",
      ),
    );
    form.addEventListener("change", (event) => {
      const input = event.target as HTMLInputElement;
      this.applyField(input.name, input.type === "checkbox"
        ? input.checked : input.value);
    });
    const progress = htmlEl("p", { class: "attack-progress" },
                            "no campaign started");
    this.root.append(form, progress);

    if (!this.detail?.traces?.length) return;
    const traces = this.detail.traces;

    // (i) static view of the first perturbed image
    const first = traces[0];
    const firstPane = htmlEl(
      "figure",
      { class: first.succeeded ? "perturbed success" : "perturbed" },
      renderImage(first.final_image, 10, "first-perturbed"),
      htmlEl("figcaption", {},
             `first perturbed object (run ${first.run_index})`),
    );

    // attack-path overlay and the coordinate time series for run 0
    const pathPane = htmlEl("div", { class: "attack-path-pane" });
    if (first.path.length) {
      const target = this.detail.targets?.[first.target_ordinal];
      if (target) {
        renderAttackPathOverlay(pathPane, target.image, first.path);
        renderCoordinateSeries(pathPane, first.path, target.image);
      }
    }

    // (ii) animation across all perturbed objects
    const animPane = htmlEl("div", { class: "animation-pane" });
    const frameHost = htmlEl("div", { class: "animation-frame" });
    const renderFrame = (frameIndex: number): void => {
      const frames = this.animationFrames();
      if (!frames.length) return;
      const { trace, stepIndex } = frames[frameIndex];
      const step = trace.path[stepIndex];
      clear(frameHost);
      frameHost.className = "animation-frame" +
        (step.success ? " success" : "");
      frameHost.append(
        renderImage(trace.final_image, 8),
        htmlEl("p", {},
               `run ${trace.run_index}, iteration ${step.iteration}`),
      );
    };
    const play = htmlEl("button", { type: "button" }, "play");
    const pause = htmlEl("button", { type: "button" }, "pause");
    const scrub = htmlEl("input", {
      type: "range", min: 0,
      max: Math.max(0, this.animationFrames().length - 1), value: 0,
    });
    play.addEventListener("click", () => this.playAnimation(renderFrame));
    pause.addEventListener("click", () => this.pauseAnimation());
    scrub.addEventListener("input", () => {
      this.scrubTo(Number(scrub.value));
      renderFrame(this.animationFrame);
    });
    animPane.append(frameHost, play, pause, scrub);
    if (this.animationFrames().length) renderFrame(0);

    // (iii) pop-up grid of all perturbed objects
    const popup = htmlEl("dialog", { class: "perturbed-grid" });
    const grid = htmlEl("div", { class: "thumb-grid" });
    traces.forEach((trace) => {
      grid.append(
        htmlEl(
          "figure",
          { class: trace.succeeded ? "perturbed success" : "perturbed",
            "data-run": trace.run_index },
          renderImage(trace.final_image, 6),
          htmlEl("figcaption", {},
                 trace.succeeded
                   ? `run ${trace.run_index}: breached at ` +
                     `${trace.success_iteration}`
                   : `run ${trace.run_index}: held`),
        ),
      );
    });
    popup.append(grid);
    const open = htmlEl("button", { type: "button" }, "show all perturbed");
    open.addEventListener("click", () => popup.setAttribute("open", ""));

    this.root.append(firstPane, pathPane, animPane, open, popup);
  }

  applyField(name: string, value: string | boolean): void {
    switch (name) {
      case "early_stop":
        this.form.early_stop = Boolean(value);
        break;
      case "target_class":
        this.form.target_class = value === "" ? null : Number(value);
        break;
      case "bounds": {
        const text = String(value).trim();
        if (!text) {
          this.form.bounds = null;
          break;
        }
        const parts = text.split(",").map(Number);
        const values: [number, number][] = [];
        for (let i = 4; i + 1 < parts.length; i += 2) {
          values.push([parts[i], parts[i + 1]]);
        }
        this.form.bounds = {
          x: [parts[0], parts[1]],
          y: [parts[2], parts[3]],
          values,
        };
        break;
      }
      default:
        (this.form as unknown as Record<string, number>)[name] = Number(value);
    }
  }
}
