"""Context tree models: representation, validation, simulation and exact
chain-level quantities.

A context is stored as a tuple of symbols written oldest-first, so the tuple
(0, 1) is the context "01": the symbol before last was 0, the last symbol 1.
The root (empty) context is the empty tuple and prints as "eps".

The four built-in kicker sources are exposed through :func:`preset_model`.
Sources 3 and 4 are fully determined by their published description and ship
complete; sources 1 and 2 are only partially specified, so their presets are
templates that must be completed from a config file before simulation.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from pathlib import Path

import numpy as np

from . import rng
from .errors import (
    BadDistribution,
    ConfigError,
    IncompleteModel,
    NotComplete,
    NotConverged,
    NotSuffixFree,
    PastTooShort,
    Reducible,
    UnknownPreset,
)

Context = tuple[int, ...]

MAX_ALPHABET = 10
BURN_IN_STEPS = 100
SUM_TOL = 1e-12
_POWER_TOL = 1e-12
_POWER_CAP = 100_000
_DENSE_LIMIT = 81  # direct linear solve up to 3^4 states


def context_to_str(ctx: Context) -> str:
    return "eps" if len(ctx) == 0 else "".join(str(s) for s in ctx)


def context_from_str(text: str) -> Context:
    text = text.strip()
    if text in ("eps", ""):
        return ()
    if not text.isdigit():
        raise ConfigError(f"bad context string {text!r}")
    return tuple(int(ch) for ch in text)


@dataclass(frozen=True)
class ContextTree:
    """A suffix-free set of contexts over a finite alphabet."""

    contexts: frozenset[Context]
    alphabet_size: int

    @property
    def height(self) -> int:
        return max((len(c) for c in self.contexts), default=0)

    def sorted_contexts(self) -> list[Context]:
        return sorted(self.contexts, key=lambda c: (len(c), c))

    def as_strings(self) -> list[str]:
        return [context_to_str(c) for c in self.sorted_contexts()]


def check_suffix_free(contexts: list[Context]) -> None:
    seen = set()
    for c in contexts:
        if c in seen:
            raise NotSuffixFree(f"context {context_to_str(c)} listed twice")
        seen.add(c)
    for u in seen:
        for w in seen:
            if u is not w and len(u) < len(w) and w[len(w) - len(u):] == u:
                raise NotSuffixFree(
                    f"context {context_to_str(u)} is a suffix of {context_to_str(w)}"
                )


def check_complete(contexts: set[Context], alphabet_size: int) -> None:
    """Every infinite past must end in exactly one context.

    Equivalently: walking from the root, each node is either a context or has
    all one-symbol extensions present (as nodes or subtrees).
    """
    height = max((len(c) for c in contexts), default=0)

    def covered(w: Context) -> bool:
        if w in contexts:
            return True
        if len(w) >= height:
            return False
        return all(covered((b,) + w) for b in range(alphabet_size))

    if not covered(()):
        # report one uncovered past for the error message
        def find_hole(w: Context) -> Context:
            if len(w) >= height:
                return w
            for b in range(alphabet_size):
                child = (b,) + w
                if child not in contexts and not covered(child):
                    return find_hole(child)
            return w

        hole = find_hole(())
        raise NotComplete(f"no context covers pasts ending in {context_to_str(hole)!r}")


@dataclass(frozen=True)
class ContextTreeModel:
    """A context tree plus one transition distribution per context."""

    tree: ContextTree
    transitions: dict[Context, tuple[float, ...]]
    name: str = "model"

    @property
    def alphabet_size(self) -> int:
        return self.tree.alphabet_size

    @property
    def height(self) -> int:
        return self.tree.height

    def distribution(self, ctx: Context) -> tuple[float, ...]:
        return self.transitions[ctx]


@dataclass(frozen=True)
class PartialTemplate:
    """A model known only at some contexts; must be completed before use."""

    name: str
    alphabet_size: int
    known: dict[Context, tuple[float, ...]]
    note: str = ""


@dataclass(frozen=True)
class StationarySummary:
    """Stationary law of the induced chain on length-h pasts plus the exact
    per-symbol quantities derived from it."""

    state_probs: dict[Context, float]
    context_probs: dict[Context, float]
    entropy_rate: float       # bits per symbol
    maximizing_score: float   # expected hit rate always guessing the mode
    matching_score: float     # expected hit rate sampling the source's law


def build_model(
    contexts,
    alphabet_size: int,
    name: str = "model",
) -> ContextTreeModel:
    """Validate and assemble a model from (context, probability-vector) pairs.

    Raises NotSuffixFree / NotComplete / BadDistribution with the offending
    context in the message.
    """
    if not 2 <= alphabet_size <= MAX_ALPHABET:
        raise BadDistribution(f"alphabet size {alphabet_size} outside 2..{MAX_ALPHABET}")
    pairs = [(tuple(c), tuple(float(v) for v in vec)) for c, vec in contexts]
    ctx_list = [c for c, _ in pairs]
    for c in ctx_list:
        for s in c:
            if not 0 <= s < alphabet_size:
                raise BadDistribution(
                    f"context {context_to_str(c)} has symbol {s} outside alphabet"
                )
    check_suffix_free(ctx_list)
    check_complete(set(ctx_list), alphabet_size)
    transitions: dict[Context, tuple[float, ...]] = {}
    for c, vec in pairs:
        if len(vec) != alphabet_size:
            raise BadDistribution(
                f"context {context_to_str(c)}: vector has length {len(vec)}, "
                f"expected {alphabet_size}"
            )
        if any(v < 0.0 or v > 1.0 for v in vec):
            raise BadDistribution(
                f"context {context_to_str(c)}: entries outside [0, 1]: {vec}"
            )
        if abs(sum(vec) - 1.0) > SUM_TOL:
            raise BadDistribution(
                f"context {context_to_str(c)}: probabilities sum to {sum(vec)!r}"
            )
        transitions[c] = vec
    tree = ContextTree(frozenset(ctx_list), alphabet_size)
    return ContextTreeModel(tree=tree, transitions=transitions, name=name)


def context_lookup(model: ContextTreeModel, past) -> Context:
    """The unique context that is a suffix of ``past`` (oldest-first)."""
    past = tuple(past)
    contexts = model.tree.contexts
    if () in contexts:
        return ()
    n = len(past)
    for l in range(1, model.height + 1):
        if l > n:
            break
        suffix = past[n - l:]
        if suffix in contexts:
            return suffix
    raise PastTooShort(
        f"no context of {model.name} matches a past of length {n} "
        f"(tree height {model.height})"
    )


# --- simulation ---------------------------------------------------------------

def _context_index_table(model: ContextTreeModel) -> tuple[list[Context], np.ndarray]:
    """Map every length-h past (encoded base-A) to its context index."""
    h = model.height
    A = model.alphabet_size
    contexts = model.tree.sorted_contexts()
    pos = {c: i for i, c in enumerate(contexts)}
    if h == 0:
        return contexts, np.zeros(1, dtype=np.int64)
    table = np.empty(A ** h, dtype=np.int64)
    for code, past in enumerate(product(range(A), repeat=h)):
        table[code] = pos[context_lookup(model, past)]
    return contexts, table


def _cumulative_rows(model: ContextTreeModel, contexts: list[Context]) -> np.ndarray:
    rows = np.array([model.transitions[c] for c in contexts], dtype=np.float64)
    return np.cumsum(rows, axis=1)


def simulate_block(
    model: ContextTreeModel,
    n: int,
    seed: int,
    streams,
) -> np.ndarray:
    """Simulate one sequence of length n per stream id; shape (len(streams), n).

    Each stream burns in independently: the length-h past is drawn uniformly,
    100 steps are discarded, then n symbols are emitted.  Counter layout is
    h + 100 + n uniforms per stream, so results are reproducible and
    independent of how streams are batched.
    """
    if isinstance(model, PartialTemplate):
        raise IncompleteModel(f"{model.name} is a template; complete it first")
    if n < 1:
        raise BadDistribution(f"n must be >= 1, got {n}")
    h = model.height
    A = model.alphabet_size
    contexts, table = _context_index_table(model)
    cum = _cumulative_rows(model, contexts)
    stream_arr = np.asarray(list(streams), dtype=np.uint64)
    keys = rng.stream_keys_np(seed, stream_arr)
    R = len(stream_arr)

    if R <= 8:
        # few long sequences: a plain loop beats per-step numpy dispatch
        out = np.empty((R, n), dtype=np.int64)
        cum_rows = [tuple(row) for row in cum]
        table_list = table.tolist()
        for r in range(R):
            u = rng.uniform_block_np(keys[r: r + 1], 0, h + BURN_IN_STEPS + n)[0]
            out[r] = _simulate_scalar(u.tolist(), h, A, table_list, cum_rows, n)
        return out

    u = rng.uniform_block_np(keys, 0, h + BURN_IN_STEPS + n)
    codes = np.zeros(R, dtype=np.int64)
    if h > 0:
        for j in range(h):
            sym = np.minimum((u[:, j] * A).astype(np.int64), A - 1)
            codes = codes * A + sym
    mod = A ** h if h > 0 else 1
    out = np.empty((R, n), dtype=np.int64)
    for j in range(BURN_IN_STEPS + n):
        rows = cum[table[codes]]
        sym = (u[:, h + j, None] >= rows).sum(axis=1)
        np.minimum(sym, A - 1, out=sym)
        if j >= BURN_IN_STEPS:
            out[:, j - BURN_IN_STEPS] = sym
        if h > 0:
            codes = (codes * A + sym) % mod
    return out


def _simulate_scalar(u, h, A, table, cum_rows, n):
    """Single-stream walk; bit-identical to the vector path by construction."""
    code = 0
    for j in range(h):
        sym = int(u[j] * A)
        if sym > A - 1:
            sym = A - 1
        code = code * A + sym
    mod = A ** h if h > 0 else 1
    out = np.empty(n, dtype=np.int64)
    last = A - 1
    for j in range(BURN_IN_STEPS + n):
        row = cum_rows[table[code]]
        uj = u[h + j]
        sym = 0
        while sym < last and uj >= row[sym]:
            sym += 1
        if j >= BURN_IN_STEPS:
            out[j - BURN_IN_STEPS] = sym
        if h > 0:
            code = (code * A + sym) % mod
    return out


def simulate(model: ContextTreeModel, n: int, seed: int, stream: int = 0) -> np.ndarray:
    """Simulate n symbols; deterministic given (model, n, seed, stream)."""
    return simulate_block(model, n, seed, [stream])[0]


# --- stationary quantities ------------------------------------------------------

def _strongly_connected(adj: list[list[int]]) -> list[list[int]]:
    """Iterative Tarjan SCC; returns components as lists of state indices."""
    n = len(adj)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            for k in range(pi, len(adj[v])):
                w = adj[v][k]
                if index[w] == -1:
                    work[-1] = (v, k + 1)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
    return comps


def stationary_summary(model: ContextTreeModel) -> StationarySummary:
    """Solve the induced chain on length-h pasts and derive exact scores.

    The chain may be periodic (the presets are), so the iterative fallback
    averages with the identity (lazy chain) which shares the stationary law.
    Direct linear solve is used for small state spaces.
    """
    if isinstance(model, PartialTemplate):
        raise IncompleteModel(f"{model.name} is a template; complete it first")
    h = model.height
    A = model.alphabet_size

    if h == 0:
        p = np.array(model.transitions[()], dtype=np.float64)
        nz = p[p > 0]
        return StationarySummary(
            state_probs={(): 1.0},
            context_probs={(): 1.0},
            entropy_rate=float(-(nz * np.log2(nz)).sum()),
            maximizing_score=float(p.max()),
            matching_score=float((p ** 2).sum()),
        )

    states = list(product(range(A), repeat=h))
    idx = {s: i for i, s in enumerate(states)}
    n_states = len(states)
    contexts, table = _context_index_table(model)
    rows = np.array([model.transitions[c] for c in contexts], dtype=np.float64)

    adj: list[list[int]] = [[] for _ in range(n_states)]
    for i, s in enumerate(states):
        p = rows[table[i]]
        for a in range(A):
            if p[a] > 0.0:
                adj[i].append(idx[s[1:] + (a,)])

    comps = _strongly_connected(adj)
    comp_of = [0] * n_states
    for ci, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = ci
    recurrent = []
    for ci, comp in enumerate(comps):
        closed = all(comp_of[w] == ci for v in comp for w in adj[v])
        if closed:
            recurrent.append(comp)
    if len(recurrent) != 1:
        raise Reducible(
            f"{model.name}: chain on length-{h} pasts has {len(recurrent)} "
            "recurrent classes"
        )
    support = sorted(recurrent[0])
    sub_idx = {v: i for i, v in enumerate(support)}
    m = len(support)
    P = np.zeros((m, m), dtype=np.float64)
    for v in support:
        s = states[v]
        p = rows[table[v]]
        for a in range(A):
            if p[a] > 0.0:
                P[sub_idx[v], sub_idx[idx[s[1:] + (a,)]]] += p[a]

    if m <= _DENSE_LIMIT:
        M = P.T - np.eye(m)
        M[-1, :] = 1.0
        b = np.zeros(m)
        b[-1] = 1.0
        pi = np.linalg.solve(M, b)
        pi = np.clip(pi, 0.0, None)
        pi /= pi.sum()
    else:
        pi = np.full(m, 1.0 / m)
        for _ in range(_POWER_CAP):
            nxt = 0.5 * (pi @ P) + 0.5 * pi
            delta = np.abs(nxt - pi).max()
            pi = nxt
            if delta < _POWER_TOL:
                break
        else:
            raise NotConverged(
                f"{model.name}: stationary iteration missed {_POWER_TOL} "
                f"after {_POWER_CAP} steps"
            )
        pi /= pi.sum()

    state_probs = {states[v]: float(pi[sub_idx[v]]) for v in support}
    context_probs: dict[Context, float] = {}
    for v in support:
        c = contexts[table[v]]
        context_probs[c] = context_probs.get(c, 0.0) + float(pi[sub_idx[v]])

    entropy = 0.0
    maximizing = 0.0
    matching = 0.0
    for c, w in context_probs.items():
        p = np.array(model.transitions[c], dtype=np.float64)
        nz = p[p > 0]
        entropy += w * float(-(nz * np.log2(nz)).sum())
        maximizing += w * float(p.max())
        matching += w * float((p ** 2).sum())
    return StationarySummary(
        state_probs=state_probs,
        context_probs=context_probs,
        entropy_rate=entropy,
        maximizing_score=maximizing,
        matching_score=matching,
    )


# --- presets --------------------------------------------------------------------

def _source3_contexts() -> list[tuple[Context, tuple[float, ...]]]:
    stochastic = (0.25, 0.75, 0.0)
    to_two = (0.0, 0.0, 1.0)
    return [
        ((2,), stochastic),
        ((2, 0), stochastic),
        ((2, 1), stochastic),
        ((0, 0), to_two),
        ((1, 0), to_two),
        ((0, 1), to_two),
        ((1, 1), to_two),
    ]


def preset_model(name: str):
    """Built-in kicker sources.

    model3 and model4 are complete.  model1 and model2 come back as
    PartialTemplate: only the transitions at contexts 01 and 21 are pinned by
    their published description; the rest of the tree must be supplied via a
    config file (see models/model1.ctm.in).
    """
    if name == "model3":
        return build_model(_source3_contexts(), 3, name="model3")
    if name == "model4":
        entries = dict(_source3_contexts())
        entries[(0, 1)], entries[(2, 1)] = entries[(2, 1)], entries[(0, 1)]
        entries[(2,)] = (0.75, 0.25, 0.0)
        return build_model(list(entries.items()), 3, name="model4")
    if name == "model1":
        return PartialTemplate(
            name="model1",
            alphabet_size=3,
            known={(0, 1): (0.0, 0.0, 1.0), (2, 1): (1.0, 0.0, 0.0)},
            note=(
                "deterministic jumps at contexts 01 and 21; remaining tree "
                "and transitions must come from a completed config file"
            ),
        )
    if name == "model2":
        return PartialTemplate(
            name="model2",
            alphabet_size=3,
            known={(0, 1): (0.25, 0.0, 0.75), (2, 1): (0.75, 0.0, 0.25)},
            note=(
                "contexts 01 and 21 return to the pre-1 symbol w.p. 0.25, "
                "else jump to the complementary symbol; remaining tree and "
                "transitions must come from a completed config file"
            ),
        )
    raise UnknownPreset(f"unknown preset {name!r} (expected model1..model4)")


PRESET_NAMES = ("model1", "model2", "model3", "model4")


# --- config file format -----------------------------------------------------------
#
# One context per line:   context=01 p=0.25,0.00,0.75
# Root context written:   context=eps p=...
# Placeholder lines (templates):  context=? p=?   or   p=?

def parse_model_config(text: str, name: str = "model"):
    """Parse the text config format; returns a model or a template."""
    entries: list[tuple[Context, tuple[float, ...]]] = []
    has_placeholder = False
    alphabet_size = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        kv = {}
        for part in parts:
            if "=" not in part:
                raise ConfigError(f"line {lineno}: expected key=value, got {part!r}")
            k, v = part.split("=", 1)
            kv[k] = v
        if "context" not in kv or "p" not in kv:
            raise ConfigError(f"line {lineno}: need context= and p=")
        if kv["context"] == "?" or kv["p"] == "?":
            has_placeholder = True
            continue
        ctx = context_from_str(kv["context"])
        try:
            vec = tuple(float(v) for v in kv["p"].split(","))
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad probability list {kv['p']!r}") from exc
        if alphabet_size is None:
            alphabet_size = len(vec)
        elif len(vec) != alphabet_size:
            raise ConfigError(
                f"line {lineno}: vector length {len(vec)} != {alphabet_size}"
            )
        entries.append((ctx, vec))
    if alphabet_size is None:
        raise ConfigError("config defines no contexts")
    if has_placeholder:
        return PartialTemplate(
            name=name,
            alphabet_size=alphabet_size,
            known=dict(entries),
            note="config contains placeholder lines",
        )
    return build_model(entries, alphabet_size, name=name)


def format_model_config(model: ContextTreeModel) -> str:
    # repr keeps the shortest exact round-trip form so files re-load bit-equal
    lines = [
        f"context={context_to_str(c)} "
        "p=" + ",".join(repr(float(v)) for v in model.transitions[c])
        for c in model.tree.sorted_contexts()
    ]
    return "\n".join(lines) + "\n"


def load_model_file(path) -> ContextTreeModel | PartialTemplate:
    p = Path(path)
    return parse_model_config(p.read_text(encoding="utf-8"), name=p.stem.split(".")[0])


def complete_template(template: PartialTemplate, model: ContextTreeModel) -> ContextTreeModel:
    """Check a full model against a template's pinned entries and adopt it."""
    for ctx, vec in template.known.items():
        if ctx not in model.transitions:
            raise ConfigError(
                f"completion of {template.name} misses pinned context "
                f"{context_to_str(ctx)}"
            )
        got = model.transitions[ctx]
        if any(abs(a - b) > 1e-9 for a, b in zip(got, vec)):
            raise ConfigError(
                f"completion of {template.name} contradicts pinned context "
                f"{context_to_str(ctx)}: {got} != {vec}"
            )
    return ContextTreeModel(tree=model.tree, transitions=model.transitions,
                            name=template.name)


def resolve_model(spec: str, model_dir=None) -> ContextTreeModel:
    """Resolve a CLI/service model argument: preset name or config file path.

    Preset templates (model1/model2) raise IncompleteModel unless a completed
    config file of the same name exists in ``model_dir``.
    """
    if spec in PRESET_NAMES:
        preset = preset_model(spec)
        if isinstance(preset, ContextTreeModel):
            return preset
        if model_dir is not None:
            candidate = Path(model_dir) / f"{spec}.ctm"
            if candidate.exists():
                loaded = load_model_file(candidate)
                if isinstance(loaded, PartialTemplate):
                    raise IncompleteModel(f"{candidate} still has placeholders")
                return complete_template(preset, loaded)
        raise IncompleteModel(
            f"{spec} is only partially specified; supply a completed "
            f"config file ({spec}.ctm) in the model directory"
        )
    path = Path(spec)
    if path.exists():
        loaded = load_model_file(path)
        if isinstance(loaded, PartialTemplate):
            raise IncompleteModel(f"{path} contains placeholders")
        return loaded
    raise UnknownPreset(f"{spec!r} is neither a preset name nor a config file")
