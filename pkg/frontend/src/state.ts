// View state shared by the four views, round-trippable through the URL so
// a session can be reopened at the same place.

export interface BrushRange {
  axis: number;
  lo: number;
  hi: number;
}

export interface ViewState {
  datasetId: string | null;
  modelId: string | null;
  campaignId: string | null;
  targetIds: number[];
  scatterX: number;
  scatterY: number;
  axisOrder: number[];
  brushes: BrushRange[];
  flowSelection: { targets: boolean; attacks: boolean; testSubset: number };
  visiblePlots: string[];
}

export function defaultState(): ViewState {
  return {
    datasetId: null,
    modelId: null,
    campaignId: null,
    targetIds: [],
    scatterX: 0,
    scatterY: 1,
    axisOrder: [],
    brushes: [],
    flowSelection: { targets: true, attacks: true, testSubset: 0 },
    visiblePlots: ["scatter", "confusion", "parallel", "curves", "cards"],
  };
}

export function stateToParams(state: ViewState): URLSearchParams {
  const params = new URLSearchParams();
  if (state.datasetId) params.set("dataset", state.datasetId);
  if (state.modelId) params.set("model", state.modelId);
  if (state.campaignId) params.set("campaign", state.campaignId);
  if (state.targetIds.length) params.set("targets", state.targetIds.join(","));
  params.set("sx", String(state.scatterX));
  params.set("sy", String(state.scatterY));
  if (state.axisOrder.length) params.set("axes", state.axisOrder.join(","));
  if (state.brushes.length) {
    params.set(
      "brush",
      state.brushes.map((b) => `${b.axis}:${b.lo}:${b.hi}`).join(";"),
    );
  }
  params.set(
    "flow",
    [
      state.flowSelection.targets ? "t" : "",
      state.flowSelection.attacks ? "a" : "",
      String(state.flowSelection.testSubset),
    ].join("|"),
  );
  params.set("plots", state.visiblePlots.join(","));
  return params;
}

export function stateFromParams(params: URLSearchParams): ViewState {
  const state = defaultState();
  state.datasetId = params.get("dataset");
  state.modelId = params.get("model");
  state.campaignId = params.get("campaign");
  const targets = params.get("targets");
  if (targets) state.targetIds = targets.split(",").map(Number);
  state.scatterX = Number(params.get("sx") ?? 0);
  state.scatterY = Number(params.get("sy") ?? 1);
  const axes = params.get("axes");
  if (axes) state.axisOrder = axes.split(",").map(Number);
  const brush = params.get("brush");
  if (brush) {
    state.brushes = brush.split(";").map((part) => {
      const [axis, lo, hi] = part.split(":").map(Number);
      return { axis, lo, hi };
    });
  }
  const flow = params.get("flow");
  if (flow) {
    const [targetsFlag, attacksFlag, subset] = flow.split("|");
    state.flowSelection = {
      targets: targetsFlag === "t",
      attacks: attacksFlag === "a",
      testSubset: Number(subset ?? 0),
    };
  }
  const plots = params.get("plots");
  if (plots) state.visiblePlots = plots.split(",");
  return state;
}

/** Drop selections that reference ids the client no longer knows. */
export function reconcile(
  state: ViewState,
  known: { models: string[]; campaigns: string[]; testCount: number },
): ViewState {
  const next = { ...state, targetIds: [...state.targetIds] };
  if (next.modelId && !known.models.includes(next.modelId)) next.modelId = null;
  if (next.campaignId && !known.campaigns.includes(next.campaignId)) {
    next.campaignId = null;
  }
  next.targetIds = next.targetIds.filter(
    (id) => id >= 0 && id < known.testCount,
  );
  return next;
}
