// Trial loop state machine: exactly one guess per trial, one request in
// flight at a time, keys dropped while busy, feedback lock between trials,
// break gating, and idempotent retry on network failures (the server replays
// a recorded trial when it sees the same trial index and direction again).

import { ApiError, type GameApi } from "./api.js";
import type { GuessOutcome } from "./types.js";
import { KEY_TO_DIRECTION } from "./types.js";

export type Phase = "ready" | "inflight" | "locked" | "break" | "finished";

export interface ControllerHooks {
  onChange?: (controller: TrialLoopController) => void;
  onToast?: (message: string) => void;
}

export interface ControllerOptions {
  feedbackLockMs?: number;
  retryDelayMs?: number;
  maxRetries?: number;
}

const sleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export class TrialLoopController {
  phase: Phase = "ready";
  trial = 0;
  score = 0;
  hits: boolean[] = [];
  lastOutcome: GuessOutcome | null = null;
  lastGuess: number | null = null;

  private readonly feedbackLockMs: number;
  private readonly retryDelayMs: number;
  private readonly maxRetries: number;

  constructor(
    private readonly api: GameApi,
    readonly sessionId: string,
    readonly maxTrials: number,
    private readonly hooks: ControllerHooks = {},
    options: ControllerOptions = {},
  ) {
    this.feedbackLockMs = options.feedbackLockMs ?? 600;
    this.retryDelayMs = options.retryDelayMs ?? 250;
    this.maxRetries = options.maxRetries ?? 5;
  }

  /** Returns true when the key was consumed as a guess. */
  handleKey(key: string): boolean {
    const direction = KEY_TO_DIRECTION[key];
    if (direction === undefined) return false;
    if (this.phase !== "ready") return false; // depth-0 input queue: drop
    void this.submit(direction);
    return true;
  }

  async submit(direction: number): Promise<void> {
    if (this.phase !== "ready") return;
    this.phase = "inflight";
    this.lastGuess = direction;
    this.emit();
    const expected = this.trial + 1;
    let outcome: GuessOutcome;
    try {
      outcome = await this.guessWithRetry(direction, expected);
    } catch (error) {
      this.phase = "ready";
      this.toast(error);
      await this.resync();
      return;
    }
    this.applyOutcome(outcome);
  }

  private async guessWithRetry(direction: number, trial: number): Promise<GuessOutcome> {
    let attempt = 0;
    for (;;) {
      try {
        return await this.api.guess(this.sessionId, direction, trial);
      } catch (error) {
        if (error instanceof ApiError) throw error; // protocol error: no retry
        attempt += 1;
        if (attempt > this.maxRetries) throw error;
        await sleep(this.retryDelayMs); // transport failure: same trial resent
      }
    }
  }

  private applyOutcome(outcome: GuessOutcome): void {
    this.lastOutcome = outcome;
    this.trial = outcome.trial;
    this.score = outcome.score;
    this.hits.push(outcome.correct);
    const next: Phase = outcome.finished ? "finished" : outcome.break ? "break" : "ready";
    if (this.feedbackLockMs > 0 && next === "ready") {
      this.phase = "locked";
      this.emit();
      setTimeout(() => {
        if (this.phase === "locked") {
          this.phase = "ready";
          this.emit();
        }
      }, this.feedbackLockMs);
      return;
    }
    this.phase = next;
    this.emit();
  }

  async resume(): Promise<void> {
    if (this.phase !== "break") return;
    try {
      await this.api.resume(this.sessionId);
      this.phase = "ready";
      this.emit();
    } catch (error) {
      this.toast(error);
    }
  }

  /** Pull the server state after a protocol error so the views re-align. */
  private async resync(): Promise<void> {
    try {
      const state = await this.api.state(this.sessionId);
      this.trial = state.trial;
      this.score = state.score;
      this.phase = state.status === "finished"
        ? "finished"
        : state.break_pending
          ? "break"
          : "ready";
      this.emit();
    } catch {
      // keep local state; the next interaction will retry
    }
  }

  /** Client-side running hit ratio for the sparkline (display only). */
  cpcp(): number[] {
    const out: number[] = [];
    let hits = 0;
    for (let i = 0; i < this.hits.length; i += 1) {
      if (this.hits[i]) hits += 1;
      out.push(hits / (i + 1));
    }
    return out;
  }

  private emit(): void {
    this.hooks.onChange?.(this);
  }

  private toast(error: unknown): void {
    const message = error instanceof Error ? error.message : String(error);
    this.hooks.onToast?.(message);
  }
}
