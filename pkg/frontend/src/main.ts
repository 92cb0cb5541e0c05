// Bootstrap: instruction screen -> live session -> completion -> dashboard.
// The app is a pure view/controller over the HTTP API; no client randomness
// touches the experiment.

import { api as liveApi, type GameApi } from "./api.js";
import { renderDashboard } from "./dashboard.js";
import { TrialLoopController, type ControllerOptions } from "./state.js";
import { renderGame, renderInstructions, showToast } from "./ui.js";

export interface App {
  controller: TrialLoopController | null;
  start(model: string, seed?: number): Promise<TrialLoopController>;
  showDashboard(sessionId: string): Promise<void>;
}

export function initApp(
  root: HTMLElement,
  api: GameApi = liveApi,
  options: ControllerOptions = {},
): App {
  const doc = root.ownerDocument;
  const gameRoot = doc.createElement("div");
  const toastRoot = doc.createElement("div");
  root.innerHTML = "";
  root.appendChild(gameRoot);
  root.appendChild(toastRoot);

  const app: App = {
    controller: null,

    async start(model: string, seed?: number) {
      const created = await api.createSession(model, seed);
      const controller = new TrialLoopController(
        api,
        created.session_id,
        created.max_trials,
        {
          onChange: () => renderGame(gameRoot, controller),
          onToast: (message) => showToast(toastRoot, message),
        },
        options,
      );
      app.controller = controller;
      renderGame(gameRoot, controller);
      return controller;
    },

    async showDashboard(sessionId: string) {
      await renderDashboard(gameRoot, api, sessionId);
    },
  };

  doc.addEventListener("keydown", (event) => {
    const controller = app.controller;
    if (!controller) return;
    if (controller.handleKey(event.key)) event.preventDefault();
  });

  return app;
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  const app = initApp(root);

  const route = async () => {
    const match = window.location.hash.match(/^#\/results\/(.+)$/);
    if (match) {
      await app.showDashboard(match[1]);
    }
  };
  window.addEventListener("hashchange", () => void route());
  if (window.location.hash) {
    await route();
    return;
  }

  const models = await fetch(`${(globalThis.GOALKEEPER_API ?? "")}/models`)
    .then((r) => r.json() as Promise<{ models: Array<{ name: string; complete: boolean }> }>)
    .then((data) => data.models)
    .catch(() => [{ name: "model3", complete: true }, { name: "model4", complete: true }]);
  renderInstructions(root.ownerDocument.getElementById("app")!, models, (model) => {
    void app.start(model);
  });
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void boot();
}
