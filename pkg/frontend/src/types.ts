// Payload shapes mirrored from the game service. The session view never
// carries model probabilities; everything here is client-safe.

export interface SessionView {
  session_id: string;
  model: string;
  trial: number;
  score: number;
  status: "active" | "break" | "finished";
  break_pending: boolean;
  max_trials: number;
}

export interface GuessOutcome {
  kick: number;
  correct: boolean;
  trial: number;
  score: number;
  break: boolean;
  finished: boolean;
}

export interface StrategyBadge {
  label: "undermatching" | "matching" | "maximizing";
  density_matching: number;
  density_maximizing: number;
  threshold: number;
}

export interface EstimatedTree {
  contexts: string[];
  q: Record<string, number[]>;
  counts: Record<string, number[]>;
  c: number;
  L: number;
  n: number;
}

export interface LrVerdict {
  statistic: number;
  df_nominal: number;
  df_realized: number;
  p_value: number;
  k_prime: number;
  k: number;
  reject: boolean;
  alpha: number;
  degenerate: boolean;
}

export interface WindowAnalysis {
  index: number;
  start: number;
  end: number;
  pcp: number;
  normalized: number;
  logit: number;
  strategy: StrategyBadge;
  tree: EstimatedTree;
  lr: LrVerdict;
}

export interface AnalysisPayload {
  session_id: string;
  model: string;
  n_trials: number;
  window_length: number;
  window_step: number;
  scores: { matching: number; maximizing: number };
  windows: WindowAnalysis[];
  cpcp: number[];
}

export const DIRECTION_NAMES = ["left", "center", "right"] as const;

export const KEY_TO_DIRECTION: Record<string, number> = {
  ArrowLeft: 0,
  ArrowDown: 1,
  ArrowRight: 2,
};
