// Secondary acceptance criteria, asserted against payloads frozen from
// the real backend (see scripts/generate_fixtures.py).

import { describe, expect, it } from "vitest";

import { SseEventLog } from "../src/api.js";
import { renderConfusion } from "../src/render/confusionView.js";
import { renderMeasureCards } from "../src/render/measureCards.js";
import { renderAttackPathOverlay } from "../src/render/attackPath.js";
import { renderTree } from "../src/render/treeView.js";
import type { CampaignDetail, RunPayload } from "../src/types.js";

import campaignFixture from "./fixtures/campaign_detail.json";
import runFixture from "./fixtures/run_payload.json";
// @ts-expect-error bundler raw-text import
import sseFixture from "./fixtures/attack_events.sse.txt?raw";

const run = runFixture as unknown as RunPayload;
const campaign = campaignFixture as unknown as CampaignDetail;

function host(): HTMLElement {
  const element = document.createElement("div");
  document.body.append(element);
  return element;
}

describe("criterion 10: rendering is faithful to the served session", () => {
  it("tree edge widths are proportional to served flow counts within 1px", () => {
    const maxEdgeWidth = 12;
    const svg = renderTree(host(), run.tree, run.flows, { maxEdgeWidth });
    const maxCount = Math.max(
      ...run.flows.flatMap((flow) => Object.values(flow.counts)),
    );
    const unit = maxEdgeWidth / maxCount;
    const lines = [...svg.querySelectorAll("line.tree-edge")];
    expect(lines.length).toBeGreaterThan(0);
    let checkedFlow = 0;
    for (const line of lines) {
      const width = Number(line.getAttribute("stroke-width"));
      const count = Number(line.getAttribute("data-count"));
      if (count === 0) {
        // zero-flow edges render as a visible hairline
        expect(width).toBeGreaterThan(0);
        expect(width).toBeLessThanOrEqual(1);
        continue;
      }
      expect(Math.abs(width - count * unit)).toBeLessThanOrEqual(1);
      checkedFlow += 1;
    }
    // every served flow edge (and category) is drawn
    const servedStrokes = run.flows.reduce(
      (n, flow) => n + Object.keys(flow.counts).length,
      0,
    );
    expect(checkedFlow).toBe(servedStrokes);
  });

  it("confusion matrix cells equal the payload", () => {
    const classNames = ["class-0", "class-1", "class-2"];
    const table = renderConfusion(
      host(),
      run.original!.confusion,
      classNames,
    );
    run.original!.confusion.forEach((row, truth) => {
      row.forEach((value, predicted) => {
        const cell = table.querySelector(
          `td[data-truth="${truth}"][data-predicted="${predicted}"]`,
        )!;
        expect(cell.textContent).toBe(String(value));
        expect(Number(cell.getAttribute("data-value"))).toBe(value);
      });
    });
  });

  it("measure cards reproduce the exact context display strings", () => {
    const cards = renderMeasureCards(
      host(),
      run.measures!.display,
      run.measures!.values.general,
    );
    const rendered = [...cards.querySelectorAll(".measure-display")].map(
      (node) => node.textContent,
    );
    expect(rendered).toEqual(run.measures!.display);
    // the context arity convention is visible verbatim
    expect(rendered[0]).toContain("(⊛ 1 object, 2 attacks)");
  });

  it("attack-path overlay vertices equal the trace's per-iteration coordinates", () => {
    const trace = campaign.traces![0];
    const target = campaign.targets![trace.target_ordinal];
    const svg = renderAttackPathOverlay(host(), target.image, trace.path);
    const polyline = svg.querySelector("polyline.attack-path")!;
    const vertices = JSON.parse(polyline.getAttribute("data-vertices")!);
    expect(vertices).toEqual(
      trace.path.map((step) => [step.pixels[0].x, step.pixels[0].y]),
    );
    // and the drawn points use the same coordinates, scaled to pixel centers
    const scale = 16;
    const points = (polyline.getAttribute("points") ?? "").split(" ");
    expect(points).toEqual(
      trace.path.map(
        (step) =>
          `${(step.pixels[0].x + 0.5) * scale},${(step.pixels[0].y + 0.5) * scale}`,
      ),
    );
  });
});

describe("criterion 11: progress streaming into the event log", () => {
  const sseText: string = sseFixture;

  it("a 2-run x 5-iteration campaign yields exactly 10 ordered events then the terminal", () => {
    const log = new SseEventLog();
    log.feed(sseText);
    const iterations = log.iterationEvents();
    expect(iterations).toHaveLength(10);
    expect(iterations.map((e) => [e.run, e.iteration])).toEqual([
      [0, 1], [0, 2], [0, 3], [0, 4], [0, 5],
      [1, 1], [1, 2], [1, 3], [1, 4], [1, 5],
    ]);
    expect(log.isOrderedPerRun()).toBe(true);
    expect(log.terminal).not.toBeNull();
    expect(log.terminal!.type).toBe("done");
    expect(log.terminal!.records).toHaveLength(2);
  });

  it("parses the same events when the stream arrives in odd chunks", () => {
    const log = new SseEventLog();
    for (let i = 0; i < sseText.length; i += 7) {
      log.feed(sseText.slice(i, i + 7));
    }
    expect(log.iterationEvents()).toHaveLength(10);
    expect(log.terminal!.type).toBe("done");
  });
});
