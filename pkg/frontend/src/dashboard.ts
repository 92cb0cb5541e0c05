// Post-session results dashboard.  Read-only: every number shown comes from
// the analysis payload; nothing is recomputed client-side.

import { ApiError, type GameApi } from "./api.js";
import { curveSvg } from "./sparkline.js";
import { renderTree } from "./tree.js";
import type { AnalysisPayload, WindowAnalysis } from "./types.js";

export async function renderDashboard(
  root: HTMLElement,
  api: GameApi,
  sessionId: string,
): Promise<void> {
  const doc = root.ownerDocument;
  root.innerHTML = "";
  let payload: AnalysisPayload;
  try {
    payload = await api.analysis(sessionId);
  } catch (error) {
    const guidance = doc.createElement("p");
    guidance.dataset.testid = "dashboard-guidance";
    guidance.textContent =
      error instanceof ApiError && error.status === 409
        ? "Not enough trials yet: the first analysis window needs 250 recorded trials. Keep playing!"
        : `Could not load the analysis: ${String(error)}`;
    root.appendChild(guidance);
    return;
  }

  const heading = doc.createElement("h2");
  heading.textContent = `Results for session ${payload.session_id} (${payload.n_trials} trials)`;
  root.appendChild(heading);

  const curve = doc.createElement("div");
  curve.innerHTML = curveSvg(payload.cpcp, [
    { label: "maximizing", value: payload.scores.maximizing },
    { label: "matching", value: payload.scores.matching },
  ]);
  root.appendChild(curve);

  const table = doc.createElement("table");
  table.dataset.testid = "windows-table";
  table.innerHTML =
    "<thead><tr><th>window</th><th>trials</th><th>PCP</th>" +
    "<th>normalized</th><th>strategy</th><th>own-past test</th></tr></thead>";
  const body = doc.createElement("tbody");
  for (const window of payload.windows) {
    body.appendChild(windowRow(window, doc));
  }
  table.appendChild(body);
  root.appendChild(table);

  const treesHeading = doc.createElement("h3");
  treesHeading.textContent = "Estimated context trees per window";
  root.appendChild(treesHeading);
  for (const window of payload.windows) {
    const section = doc.createElement("section");
    section.dataset.testid = `tree-window-${window.index}`;
    const label = doc.createElement("h4");
    label.textContent =
      `window ${window.index}: penalty c=${window.tree.c}, ` +
      `${window.tree.contexts.length} contexts`;
    section.appendChild(label);
    section.appendChild(renderTree(window.tree, doc));
    root.appendChild(section);
  }
}

function windowRow(window: WindowAnalysis, doc: Document): HTMLElement {
  const row = doc.createElement("tr");
  row.dataset.testid = "window-row";

  const cells = [
    String(window.index),
    `${window.start}–${window.end}`,
    window.pcp.toFixed(4),
    window.normalized.toFixed(4),
  ];
  for (const [i, text] of cells.entries()) {
    const td = doc.createElement("td");
    td.textContent = text;
    if (i === 2) td.dataset.testid = "window-pcp";
    row.appendChild(td);
  }

  const strategy = doc.createElement("td");
  const badge = doc.createElement("span");
  badge.className = `badge badge-${window.strategy.label}`;
  badge.dataset.testid = "strategy-badge";
  badge.textContent = window.strategy.label;
  strategy.appendChild(badge);
  row.appendChild(strategy);

  const lr = doc.createElement("td");
  lr.dataset.testid = "lr-verdict";
  lr.textContent = window.lr.reject
    ? `depends on own past (p=${window.lr.p_value.toFixed(4)})`
    : `independent of own past (p=${window.lr.p_value.toFixed(4)})`;
  row.appendChild(lr);
  return row;
}
