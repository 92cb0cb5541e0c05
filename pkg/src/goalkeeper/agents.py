"""Synthetic goalkeeper policies.

Agents observe the kicker sequence up to the previous trial (plus, for the
self-dependent kind, their own previous guesses) and emit one guess per trial.
They provide ground truth for the estimator, the independence test and the
strategy classifier.

Randomness discipline: every stochastic agent draws from its own stream with
a fixed number of uniforms per trial (one for matching / maximizing /
uniform, two for undermatching and self-dependent), so outputs are
reproducible and replicates parallelize by stream id.  Trials whose past is
still shorter than the belief tree's height fall back to a uniform guess.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ctm, rng
from .errors import BadDistribution, IncompleteModel

KINDS = ("matching", "maximizing", "uniform", "undermatching", "self")


@dataclass(frozen=True)
class AgentSpec:
    """Agent kind plus parameters.

    kind: matching | maximizing | uniform | undermatching | self
    epsilon: uniform-mix weight for undermatching
    rho: probability of repeating the previous own guess for self
    belief: context tree model the agent assumes; None means "use the model
        passed to run_agent" (the fixed-tree agent is matching with an
        explicit belief)
    """

    kind: str
    epsilon: float = 0.0
    rho: float = 0.0
    belief: ctm.ContextTreeModel | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise BadDistribution(f"unknown agent kind {self.kind!r}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise BadDistribution(f"epsilon {self.epsilon} outside [0, 1]")
        if not 0.0 <= self.rho <= 1.0:
            raise BadDistribution(f"rho {self.rho} outside [0, 1]")


def parse_agent_spec(text: str) -> AgentSpec:
    """Parse CLI syntax: matching | maximizing | uniform | under:eps=0.2 |
    self:rho=0.5 | tree:model=<preset-or-file>."""
    head, _, tail = text.partition(":")
    params = {}
    if tail:
        for item in tail.split(","):
            k, _, v = item.partition("=")
            if not v:
                raise BadDistribution(f"bad agent parameter {item!r}")
            params[k] = v
    if head in ("matching", "maximizing", "uniform"):
        return AgentSpec(kind=head)
    if head in ("under", "undermatching"):
        return AgentSpec(kind="undermatching", epsilon=float(params.get("eps", 0.1)))
    if head in ("self", "self-dependent"):
        return AgentSpec(kind="self", rho=float(params.get("rho", 0.5)))
    if head in ("tree", "fixed-tree"):
        if "model" not in params:
            raise BadDistribution("tree agent needs model=<preset-or-file>")
        return AgentSpec(kind="matching", belief=ctm.resolve_model(params["model"]))
    raise BadDistribution(f"unknown agent kind {head!r}")


def _belief_tables(model: ctm.ContextTreeModel):
    contexts, table = ctm._context_index_table(model)
    cum = np.cumsum(
        np.array([model.transitions[c] for c in contexts], dtype=np.float64), axis=1
    )
    argmax = np.array(
        [int(np.argmax(model.transitions[c])) for c in contexts], dtype=np.int64
    )
    return table, cum, argmax


def run_agent(
    spec: AgentSpec,
    x,
    model: ctm.ContextTreeModel | None = None,
    seed: int = 0,
    stream: int = 0,
    history=(),
) -> np.ndarray:
    """Play one session: guess y[t] before seeing x[t].

    ``history`` is an optional prefix of earlier kicker symbols the agent may
    condition on, used when a window is cut out of a longer run.
    """
    belief = spec.belief if spec.belief is not None else model
    if spec.kind != "uniform":
        if belief is None:
            raise IncompleteModel(f"{spec.kind} agent needs a belief model")
        if isinstance(belief, ctm.PartialTemplate):
            raise IncompleteModel(f"{belief.name} is a template; complete it first")
    x = np.asarray(x, dtype=np.int64)
    n = len(x)
    if spec.kind == "uniform":
        A = 3 if belief is None else belief.alphabet_size
        u = rng.Stream(seed, stream).floats(n)
        return np.minimum((u * A).astype(np.int64), A - 1)

    A = belief.alphabet_size
    h = belief.height
    table, cum, argmax = _belief_tables(belief)
    table_list = table.tolist()
    cum_rows = [tuple(row) for row in cum]
    past = list(history) + x.tolist()
    offset = len(history)

    # self with rho == 0 follows the matching code path exactly (same draws)
    kind = "matching" if spec.kind == "self" and spec.rho == 0.0 else spec.kind
    per_trial = 2 if kind in ("undermatching", "self") else 1
    u = rng.Stream(seed, stream).floats(per_trial * n)
    y = np.empty(n, dtype=np.int64)
    last = A - 1
    mod = A ** h if h > 0 else 1

    def draw(row, uv):
        s = 0
        while s < last and uv >= row[s]:
            s += 1
        return s

    uniform_row = tuple((k + 1) / A for k in range(A))
    code = 0
    code_valid = h == 0
    for t in range(n):
        pos = offset + t  # symbols of `past` known before this trial
        if h > 0:
            if pos >= h:
                if not code_valid:
                    code = 0
                    for s in past[pos - h: pos]:
                        code = code * A + s
                    code_valid = True
                row_idx = table_list[code]
                informed = True
            else:
                informed = False
        else:
            row_idx = table_list[0]
            informed = True

        base = per_trial * t
        if kind == "matching":
            row = cum_rows[row_idx] if informed else uniform_row
            y[t] = draw(row, u[base])
        elif kind == "maximizing":
            y[t] = argmax[row_idx] if informed else draw(uniform_row, u[base])
        elif kind == "undermatching":
            if u[base] < spec.epsilon or not informed:
                y[t] = draw(uniform_row, u[base + 1])
            else:
                y[t] = draw(cum_rows[row_idx], u[base + 1])
        elif kind == "self":
            if t >= 1 and u[base] < spec.rho:
                y[t] = y[t - 1]
            else:
                row = cum_rows[row_idx] if informed else uniform_row
                y[t] = draw(row, u[base + 1])
        if h > 0 and code_valid:
            code = (code * A + past[pos]) % mod
    return y


def run_matching_block(
    model: ctm.ContextTreeModel,
    x_block: np.ndarray,
    seed: int,
    streams,
) -> np.ndarray:
    """Vectorized matching agents, one stream per row of x_block."""
    return _run_block(model, x_block, seed, streams, maximizing=False)


def run_maximizing_block(
    model: ctm.ContextTreeModel,
    x_block: np.ndarray,
    seed: int,
    streams,
) -> np.ndarray:
    """Vectorized maximizing agents (mode guess, ties to the lowest symbol)."""
    return _run_block(model, x_block, seed, streams, maximizing=True)


def _run_block(model, x_block, seed, streams, maximizing):
    if isinstance(model, ctm.PartialTemplate):
        raise IncompleteModel(f"{model.name} is a template; complete it first")
    A = model.alphabet_size
    h = model.height
    table, cum, argmax = _belief_tables(model)
    x_block = np.asarray(x_block, dtype=np.int64)
    R, n = x_block.shape
    keys = rng.stream_keys_np(seed, np.asarray(list(streams), dtype=np.uint64))
    u = rng.uniform_block_np(keys, 0, n)
    y = np.empty((R, n), dtype=np.int64)
    codes = np.zeros(R, dtype=np.int64)
    mod = A ** h if h > 0 else 1
    for t in range(n):
        informed = h == 0 or t >= h
        if informed:
            rows = cum[table[codes]]
            if maximizing:
                y[:, t] = argmax[table[codes]]
            else:
                sym = (u[:, t, None] >= rows).sum(axis=1)
                y[:, t] = np.minimum(sym, A - 1)
        else:
            y[:, t] = np.minimum((u[:, t] * A).astype(np.int64), A - 1)
        if h > 0:
            codes = (codes * A + x_block[:, t]) % mod
    return y


def pcp_of(x: np.ndarray, y: np.ndarray) -> float:
    """Fraction of trials where the guess equals the kick."""
    x = np.asarray(x)
    y = np.asarray(y)
    return float((x == y).mean())
