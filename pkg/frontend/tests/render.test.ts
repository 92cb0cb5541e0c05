import { describe, expect, it, vi } from "vitest";

import type { GameApi } from "../src/api.js";
import { ApiError } from "../src/api.js";
import { renderDashboard } from "../src/dashboard.js";
import { polylinePoints } from "../src/sparkline.js";
import { renderedLeafContexts, renderTree } from "../src/tree.js";
import { INSTRUCTION_TEXT, renderInstructions } from "../src/ui.js";
import type { AnalysisPayload, EstimatedTree } from "../src/types.js";

const TREE3: EstimatedTree = {
  contexts: ["2", "00", "01", "10", "11", "20", "21"],
  q: {
    "2": [0.25, 0.75, 0],
    "00": [0, 0, 1],
    "01": [0, 0, 1],
    "10": [0, 0, 1],
    "11": [0, 0, 1],
    "20": [0.25, 0.75, 0],
    "21": [0.25, 0.75, 0],
  },
  counts: {},
  c: 1,
  L: 4,
  n: 250,
};

function analysisPayload(): AnalysisPayload {
  const windows = [1, 2, 3, 4, 5, 6].map((index) => ({
    index,
    start: 1 + (index - 1) * 150,
    end: 250 + (index - 1) * 150,
    pcp: 0.7 + index / 100,
    normalized: (0.7 + index / 100) / (5 / 6),
    logit: 1.5,
    strategy: {
      label: (index % 2 ? "matching" : "maximizing") as "matching",
      density_matching: 3.2,
      density_maximizing: 1.1,
      threshold: 0.708,
    },
    tree: TREE3,
    lr: {
      statistic: 10.5,
      df_nominal: 12,
      df_realized: 10,
      p_value: index / 10,
      k_prime: 1,
      k: 1,
      reject: index === 1,
      alpha: 0.05,
      degenerate: false,
    },
  }));
  return {
    session_id: "abc",
    model: "model3",
    n_trials: 1000,
    window_length: 250,
    window_step: 150,
    scores: { matching: 0.75, maximizing: 5 / 6 },
    windows,
    cpcp: [0.5, 0.6, 0.7],
  };
}

describe("sparkline", () => {
  it("builds polyline points over the full box", () => {
    expect(polylinePoints([0, 1], 100, 40)).toBe("0.0,40.0 100.0,0.0");
    expect(polylinePoints([0.5], 100, 40)).toBe("50.0,20.0");
    expect(polylinePoints([], 100, 40)).toBe("");
  });
});

describe("context tree rendering", () => {
  it("renders exactly the server-reported contexts as leaves", () => {
    const el = renderTree(TREE3, document);
    expect(new Set(renderedLeafContexts(el))).toEqual(new Set(TREE3.contexts));
  });

  it("renders a root-only tree", () => {
    const el = renderTree(
      { contexts: ["eps"], q: { eps: [0.3, 0.3, 0.4] }, counts: {}, c: 1, L: 2, n: 100 },
      document,
    );
    expect(renderedLeafContexts(el)).toEqual(["eps"]);
  });

  it("keeps branches collapsible", () => {
    const el = renderTree(TREE3, document);
    const branches = el.querySelectorAll("details");
    expect(branches.length).toBeGreaterThan(0);
  });
});

describe("instructions screen", () => {
  it("shows the instruction text verbatim and only complete models", () => {
    const root = document.createElement("div");
    const onStart = vi.fn();
    renderInstructions(
      root,
      [
        { name: "model1", complete: false },
        { name: "model3", complete: true },
      ],
      onStart,
    );
    const text = root.querySelector("[data-testid=instruction-text]");
    expect(text?.textContent).toBe(INSTRUCTION_TEXT);
    expect(text?.textContent).toContain("You are a goalkeeper and you must predict");
    const options = [...root.querySelectorAll("option")].map((o) => o.value);
    expect(options).toEqual(["model3"]);
    (root.querySelector("[data-testid=start-button]") as HTMLButtonElement).click();
    expect(onStart).toHaveBeenCalledWith("model3");
  });
});

describe("dashboard", () => {
  const apiWith = (overrides: Partial<GameApi>): GameApi =>
    ({
      createSession: vi.fn(),
      guess: vi.fn(),
      resume: vi.fn(),
      state: vi.fn(),
      analysis: vi.fn(),
      exportJsonl: vi.fn(),
      ...overrides,
    }) as GameApi;

  it("renders one row per window with PCP to four decimals", async () => {
    const root = document.createElement("div");
    const payload = analysisPayload();
    await renderDashboard(root, apiWith({ analysis: async () => payload }), "abc");
    const rows = root.querySelectorAll("[data-testid=window-row]");
    expect(rows.length).toBe(6);
    const pcps = [...root.querySelectorAll("[data-testid=window-pcp]")].map(
      (el) => el.textContent,
    );
    expect(pcps).toEqual(payload.windows.map((w) => w.pcp.toFixed(4)));
    const badges = [...root.querySelectorAll("[data-testid=strategy-badge]")].map(
      (el) => el.textContent,
    );
    expect(badges).toEqual([
      "matching",
      "maximizing",
      "matching",
      "maximizing",
      "matching",
      "maximizing",
    ]);
    const verdicts = [...root.querySelectorAll("[data-testid=lr-verdict]")].map(
      (el) => el.textContent ?? "",
    );
    expect(verdicts[0]).toContain("depends on own past");
    expect(verdicts[1]).toContain("independent of own past");
    // tree section fidelity for the first window
    const treeLeaves = renderedLeafContexts(
      root.querySelector("[data-testid=tree-window-1]") as HTMLElement,
    );
    expect(new Set(treeLeaves)).toEqual(new Set(TREE3.contexts));
  });

  it("shows guidance instead of charts before the first window", async () => {
    const root = document.createElement("div");
    const api = apiWith({
      analysis: async () => {
        throw new ApiError(409, "NotEnoughTrials: 100 trials recorded");
      },
    });
    await renderDashboard(root, api, "abc");
    const guidance = root.querySelector("[data-testid=dashboard-guidance]");
    expect(guidance?.textContent).toContain("250 recorded trials");
    expect(root.querySelectorAll("[data-testid=window-row]").length).toBe(0);
  });
});
