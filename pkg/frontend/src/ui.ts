// Screens and in-game rendering: instruction page, schematic goal mouth with
// three zones, trial feedback, break and completion screens, toasts.

import { sparklineSvg } from "./sparkline.js";
import type { TrialLoopController } from "./state.js";
import { DIRECTION_NAMES } from "./types.js";

export const INSTRUCTION_TEXT =
  "You are a goalkeeper and you must predict before each kick in which " +
  "region of the goal the ball will be kicked. The penalty taker may kick " +
  "the ball toward the left, the center or the right of the goal. Your " +
  "task is to defend the maximum of penalties. Attention, goalkeeper: the " +
  "penalty taker is not influenced by your choices. During the experiment " +
  "use the left, down and right arrows on the keyboard to choose the left, " +
  "center and right side of the goal, respectively. During the game you " +
  "will have two rest breaks that will be informed.\n" +
  "Have fun and improve your performance. The more penalties you defend, " +
  "the better you will be ranked.";

export function renderInstructions(
  root: HTMLElement,
  models: Array<{ name: string; complete: boolean }>,
  onStart: (model: string) => void,
): void {
  const doc = root.ownerDocument;
  root.innerHTML = "";
  const screen = doc.createElement("div");
  screen.dataset.testid = "instructions";

  const text = doc.createElement("p");
  text.dataset.testid = "instruction-text";
  text.style.whiteSpace = "pre-line";
  text.textContent = INSTRUCTION_TEXT;
  screen.appendChild(text);

  const select = doc.createElement("select");
  select.dataset.testid = "model-select";
  for (const model of models) {
    if (!model.complete) continue;
    const option = doc.createElement("option");
    option.value = model.name;
    option.textContent = model.name;
    select.appendChild(option);
  }
  screen.appendChild(select);

  const button = doc.createElement("button");
  button.dataset.testid = "start-button";
  button.textContent = "Start";
  button.addEventListener("click", () => onStart(select.value));
  screen.appendChild(button);
  root.appendChild(screen);
}

export function renderGame(root: HTMLElement, controller: TrialLoopController): void {
  const doc = root.ownerDocument;
  root.innerHTML = "";
  const screen = doc.createElement("div");
  screen.dataset.testid = "game";

  const status = doc.createElement("div");
  status.dataset.testid = "status-line";
  status.textContent =
    `trial ${controller.trial}/${controller.maxTrials}  ·  ` +
    `defended ${controller.score}`;
  screen.appendChild(status);

  const goal = doc.createElement("div");
  goal.className = "goal-mouth";
  const outcome = controller.lastOutcome;
  for (let zone = 0; zone < 3; zone += 1) {
    const cell = doc.createElement("div");
    cell.className = "goal-zone";
    cell.dataset.zone = String(zone);
    const marks: string[] = [];
    if (outcome && outcome.kick === zone) marks.push("ball");
    if (controller.lastGuess === zone) marks.push("keeper");
    cell.dataset.marks = marks.join("+");
    cell.textContent = `${DIRECTION_NAMES[zone]}${marks.length ? " (" + marks.join(" + ") + ")" : ""}`;
    goal.appendChild(cell);
  }
  screen.appendChild(goal);

  const feedback = doc.createElement("div");
  feedback.dataset.testid = "feedback";
  if (outcome) {
    feedback.className = outcome.correct ? "feedback-correct" : "feedback-wrong";
    feedback.textContent = outcome.correct
      ? `Defended! The ball went ${DIRECTION_NAMES[outcome.kick]}.`
      : `Goal. The ball went ${DIRECTION_NAMES[outcome.kick]}, you dove ` +
        `${DIRECTION_NAMES[controller.lastGuess ?? 0]}.`;
  } else {
    feedback.textContent = "Use the arrow keys: left, down (center), right.";
  }
  screen.appendChild(feedback);

  const spark = doc.createElement("div");
  spark.dataset.testid = "sparkline";
  spark.innerHTML = sparklineSvg(controller.cpcp());
  screen.appendChild(spark);

  if (controller.phase === "break") {
    const pause = doc.createElement("div");
    pause.dataset.testid = "break-screen";
    const message = doc.createElement("p");
    message.textContent =
      `Rest break after trial ${controller.trial}. Breathe, stretch, ` +
      "and continue when ready.";
    pause.appendChild(message);
    const resume = doc.createElement("button");
    resume.dataset.testid = "resume-button";
    resume.textContent = "Resume";
    resume.addEventListener("click", () => void controller.resume());
    pause.appendChild(resume);
    screen.appendChild(pause);
  }

  if (controller.phase === "finished") {
    const done = doc.createElement("div");
    done.dataset.testid = "completion-screen";
    const message = doc.createElement("p");
    message.dataset.testid = "final-score";
    message.textContent =
      `Session complete: ${controller.score} of ${controller.maxTrials} ` +
      "penalties defended.";
    done.appendChild(message);
    const results = doc.createElement("button");
    results.dataset.testid = "results-button";
    results.textContent = "View results";
    results.addEventListener("click", () => {
      const win = doc.defaultView;
      if (win) win.location.hash = `#/results/${controller.sessionId}`;
    });
    done.appendChild(results);
    screen.appendChild(done);
  }

  root.appendChild(screen);
}

export function showToast(root: HTMLElement, message: string): void {
  const doc = root.ownerDocument;
  let area = root.querySelector<HTMLElement>("[data-testid=toasts]");
  if (!area) {
    area = doc.createElement("div");
    area.dataset.testid = "toasts";
    area.className = "toasts";
    root.appendChild(area);
  }
  const toast = doc.createElement("div");
  toast.className = "toast";
  toast.textContent = message;
  area.appendChild(toast);
  setTimeout(() => toast.remove(), 4000);
}
