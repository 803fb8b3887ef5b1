// Application shell: the four-view layout, shared state, and URL
// round-tripping so a reopened tab lands on the same selections.

import { ApiClient } from "./api.js";
import { defaultState, reconcile, stateFromParams, stateToParams } from "./state.js";
import { htmlEl } from "./render/svg.js";
import { AttackView } from "./views/attackView.js";
import { DataView } from "./views/dataView.js";
import { ModelView } from "./views/modelView.js";
import { ResultsView } from "./views/resultsView.js";

export function bootstrap(root: HTMLElement, apiBase = ""): {
  dataView: DataView;
  attackView: AttackView;
  modelView: ModelView;
  resultsView: ResultsView;
  syncUrl: () => void;
} {
  const api = new ApiClient(apiBase);
  const state = window.location.search.length > 1
    ? stateFromParams(new URLSearchParams(window.location.search))
    : defaultState();

  const dataPane = htmlEl("section", { id: "data-view", class: "view" },
                          htmlEl("h2", {}, "Data"));
  const attackPane = htmlEl("section", { id: "attack-view", class: "view" },
                            htmlEl("h2", {}, "Attack Generation"));
  const modelPane = htmlEl("section", { id: "model-view", class: "view" },
                           htmlEl("h2", {}, "Model"));
  const resultsPane = htmlEl("section", { id: "results-view", class: "view" },
                             htmlEl("h2", {}, "Results"));
  const left = htmlEl("div", { class: "left-column" },
                      dataPane, attackPane, modelPane);
  root.append(htmlEl("main", { class: "console" }, left, resultsPane));

  const dataBody = htmlEl("div", {});
  const attackBody = htmlEl("div", {});
  const modelBody = htmlEl("div", {});
  const resultsBody = htmlEl("div", {});
  dataPane.append(dataBody);
  attackPane.append(attackBody);
  modelPane.append(modelBody);
  resultsPane.append(resultsBody);

  const syncUrl = (): void => {
    const query = stateToParams(state).toString();
    window.history.replaceState(null, "", `?${query}`);
  };

  const modelView = new ModelView(modelBody, api, state);
  const resultsView = new ResultsView(resultsBody, api, state);
  const attackView = new AttackView(attackBody, api, state, () => {
    void resultsView.refresh();
    syncUrl();
  });
  const dataView = new DataView(dataBody, api, state, {
    onTargetsChanged: () => syncUrl(),
    onDatasetLoaded: (summary) => {
      resultsView.summary = summary;
      reconcile(state, {
        models: summary.models.map((m) => m.model_id),
        campaigns: summary.campaigns,
        testCount: summary.test_count,
      });
      syncUrl();
    },
  });

  dataView.render();
  attackView.render();
  modelView.render();
  resultsView.render();
  return { dataView, attackView, modelView, resultsView, syncUrl };
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  bootstrap(document.getElementById("app")!);
}
