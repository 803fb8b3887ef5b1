// View wiring against a stubbed API: state propagation from the data view
// into attack targets, model rendering, and the no-client-arithmetic rule
// for results (every rendered number is a payload field).

import { beforeEach, describe, expect, it } from "vitest";

import type { ApiClient } from "../src/api.js";
import { defaultState } from "../src/state.js";
import { DataView } from "../src/views/dataView.js";
import { ModelView } from "../src/views/modelView.js";
import { ResultsView } from "../src/views/resultsView.js";
import type {
  CampaignDetail,
  DatasetSummary,
  ModelPayload,
  RunPayload,
} from "../src/types.js";

import campaignFixture from "./fixtures/campaign_detail.json";
import modelFixture from "./fixtures/model_payload.json";
import runFixture from "./fixtures/run_payload.json";
import summaryFixture from "./fixtures/dataset_summary.json";

const summary = summaryFixture as unknown as DatasetSummary;
const model = modelFixture as unknown as ModelPayload;
const run = runFixture as unknown as RunPayload;
const campaign = campaignFixture as unknown as CampaignDetail;

beforeEach(() => {
  document.body.innerHTML = "";
});

function host(): HTMLElement {
  const element = document.createElement("div");
  document.body.append(element);
  return element;
}

function stubApi(): ApiClient {
  return {
    loadDataset: async () => summary,
    trainModel: async () => model,
    runTest: async () => run,
    campaign: async () => campaign,
    selectTargets: async () => ({
      targets: [
        { object_id: 0, correct: true },
        { object_id: 4, correct: false },
      ],
    }),
  } as unknown as ApiClient;
}

describe("data view", () => {
  it("loads a dataset, renders grayscale thumbnails, and tracks targets", async () => {
    const state = defaultState();
    const changes: number[][] = [];
    const view = new DataView(host(), stubApi(), state, {
      onTargetsChanged: (ids) => changes.push(ids),
      onDatasetLoaded: () => undefined,
    });
    await view.load({ format: "idx" });
    expect(state.datasetId).toBe(summary.dataset_id);
    const buttons = document.querySelectorAll(".thumb");
    expect(buttons.length).toBe(summary.thumbnails.length);
    expect(
      document.querySelectorAll('.thumb svg[data-channels="1"]').length,
    ).toBe(summary.thumbnails.length);
    (buttons[2] as HTMLButtonElement).click();
    expect(state.targetIds).toContain(2);
    expect(changes.at(-1)).toEqual(state.targetIds);
    expect(document.querySelector(".selected-target")).not.toBeNull();
    // the displayed per-class counts are the service's numbers verbatim
    const classesLine = document.querySelector(".dataset-classes")!.textContent!;
    summary.class_names.forEach((name, c) => {
      expect(classesLine).toContain(`${name}: ${summary.per_class_test[c]}`);
    });
  });

  it("fills the candidate pair with one correct and one misclassified object", async () => {
    const state = defaultState();
    const view = new DataView(host(), stubApi(), state, {
      onTargetsChanged: () => undefined,
      onDatasetLoaded: () => undefined,
    });
    await view.load({ format: "idx" });
    await view.pickCandidatePair("m0000");
    expect(view.candidatePair.correct).toBe(0);
    expect(view.candidatePair.wrong).toBe(4);
  });
});

describe("model view", () => {
  it("renders structure and statistics from the payload", async () => {
    const state = defaultState();
    state.datasetId = summary.dataset_id;
    const view = new ModelView(host(), stubApi(), state);
    await view.train({ seed: 1 });
    expect(state.modelId).toBe(model.model_id);
    expect(document.querySelectorAll(".tree-node").length).toBe(
      model.tree.nodes.length,
    );
    const bars = document.querySelectorAll(".stat-bars");
    expect(bars.length).toBe(2);
  });
});

describe("results view", () => {
  it("renders only payload numbers (confusion, cards) and honours plot toggles", async () => {
    const state = defaultState();
    state.datasetId = summary.dataset_id;
    state.modelId = model.model_id;
    state.campaignId = campaign.campaign_id;
    state.targetIds = [0];
    const view = new ResultsView(host(), stubApi(), state);
    view.summary = summary;
    await view.refresh();

    const cells = [...document.querySelectorAll(".confusion-cell")];
    expect(cells.length).toBeGreaterThan(0);
    for (const cell of cells) {
      const truth = Number(cell.getAttribute("data-truth"));
      const predicted = Number(cell.getAttribute("data-predicted"));
      const table = cell.closest("table")!;
      const source = table.querySelector("caption")!.textContent ===
        "original data" ? run.original! : run.attacking!;
      expect(cell.textContent).toBe(String(source.confusion[truth][predicted]));
    }
    const displays = [...document.querySelectorAll(".measure-display")].map(
      (node) => node.textContent,
    );
    expect(displays).toEqual(run.measures!.display);

    state.visiblePlots = ["scatter"];
    view.render();
    expect(document.querySelector(".cards-pane")).toBeNull();
    expect(document.querySelector(".scatter-pane")).not.toBeNull();
  });

  it("toggling the data-flow selection re-requests with the new spec", async () => {
    const calls: Record<string, unknown>[] = [];
    const api = stubApi();
    const tracked = {
      ...api,
      runTest: async (spec: Record<string, unknown>) => {
        calls.push(spec);
        return run;
      },
    } as unknown as ApiClient;
    const state = defaultState();
    state.datasetId = summary.dataset_id;
    state.modelId = model.model_id;
    state.targetIds = [0, 1];
    const view = new ResultsView(host(), tracked, state);
    view.summary = summary;
    await view.refresh();
    expect(calls.at(-1)).toMatchObject({ target_ids: [0, 1] });
    state.flowSelection = { targets: false, attacks: false, testSubset: 5 };
    await view.refresh();
    expect(calls.at(-1)).not.toHaveProperty("target_ids");
    expect(calls.at(-1)).toMatchObject({ test_indices: [0, 1, 2, 3, 4] });
  });

  it("scatter feature selection and brushes re-render from state", async () => {
    const state = defaultState();
    state.datasetId = summary.dataset_id;
    state.modelId = model.model_id;
    state.targetIds = [0];
    const view = new ResultsView(host(), stubApi(), state);
    view.summary = summary;
    await view.refresh();
    view.setScatterFeatures(3, 7);
    const scatter = document.querySelector(".scatter")!;
    expect(scatter.getAttribute("data-feature-x")).toBe("3");
    expect(scatter.getAttribute("data-feature-y")).toBe("7");
    view.brush(0, -1e9, 1e9);
    expect(document.querySelectorAll(".pc-brush").length).toBe(1);
    view.reorderAxis(5, 0);
    expect(
      document.querySelector(".parallel")!.getAttribute("data-axis-order"),
    ).toMatch(/^5,/);
  });
});
