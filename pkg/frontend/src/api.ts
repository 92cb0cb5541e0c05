// Thin typed client over the game service HTTP endpoints.

import type { AnalysisPayload, GuessOutcome, SessionView } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

declare global {
  // Base URL override for tests and static deployments.
  // eslint-disable-next-line no-var
  var GOALKEEPER_API: string | undefined;
}

export function apiBase(): string {
  if (typeof globalThis.GOALKEEPER_API === "string") {
    return globalThis.GOALKEEPER_API;
  }
  if (typeof window !== "undefined") {
    const param = new URLSearchParams(window.location.search).get("api");
    if (param) return param;
  }
  return "";
}

async function request<T>(
  method: string,
  path: string,
  body?: unknown,
): Promise<T> {
  const response = await fetch(apiBase() + path, {
    method,
    headers: body === undefined ? {} : { "Content-Type": "application/json" },
    body: body === undefined ? undefined : JSON.stringify(body),
  });
  const text = await response.text();
  if (!response.ok) {
    let detail = text;
    try {
      const parsed = JSON.parse(text);
      detail = parsed.detail ?? parsed.error ?? text;
    } catch {
      // plain-text error body; keep as is
    }
    throw new ApiError(response.status, String(detail));
  }
  return JSON.parse(text) as T;
}

export interface GameApi {
  createSession(model: string, seed?: number): Promise<{ session_id: string; max_trials: number }>;
  guess(sessionId: string, direction: number, trial: number): Promise<GuessOutcome>;
  resume(sessionId: string): Promise<SessionView>;
  state(sessionId: string): Promise<SessionView>;
  analysis(sessionId: string): Promise<AnalysisPayload>;
  exportJsonl(sessionId: string): Promise<string>;
}

export const api: GameApi = {
  createSession: (model, seed) =>
    request("POST", "/sessions", seed === undefined ? { model } : { model, seed }),
  guess: (sessionId, direction, trial) =>
    request("POST", `/sessions/${sessionId}/guess`, { direction, trial }),
  resume: (sessionId) => request("POST", `/sessions/${sessionId}/resume`),
  state: (sessionId) => request("GET", `/sessions/${sessionId}`),
  analysis: (sessionId) => request("GET", `/sessions/${sessionId}/analysis`),
  exportJsonl: async (sessionId) => {
    const response = await fetch(`${apiBase()}/sessions/${sessionId}/export`);
    if (!response.ok) throw new ApiError(response.status, await response.text());
    return response.text();
  },
};
