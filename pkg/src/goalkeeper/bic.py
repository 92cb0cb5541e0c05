"""Penalized context tree selection for the goalkeeper's response process.

Given paired sequences (x, y) the estimator counts, for every observed
x-context u up to height L, how often each response symbol followed an
occurrence of u, then prunes the candidate tree bottom-up: a node stays
internal only when the product of its children's values strictly beats its
own penalized likelihood.  Counting convention: the context is read from
x positions t-l(u)+1 .. t and the predicted symbol is y at t+1 (1-based),
with t running from L for every node regardless of its depth.  Anchoring
all depths at the same start position keeps child counts summing exactly
to their parent's, so trees of different depths are scored on the same
trials; per-depth start positions would hand boundary samples to shallow
nodes only and bias the pruning around the sequence head.

All likelihood work happens in log space with the 0*log(0)=0 convention.
Degrees of freedom are count-based: one less than the number of response
symbols actually observed after the context.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .ctm import Context, ContextTree, context_from_str, context_to_str
from .errors import SampleTooShort

DEFAULT_MAX_HEIGHT = 4
DEFAULT_PENALTY_GRID = (0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0)
DEFAULT_HOLDOUT_FRACTION = 0.3


@dataclass(frozen=True)
class PairedSample:
    """Equal-length kicker and goalkeeper sequences."""

    x: np.ndarray
    y: np.ndarray
    alphabet_size: int = 3

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=np.int64))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=np.int64))
        if len(self.x) != len(self.y):
            raise SampleTooShort(
                f"x and y lengths differ: {len(self.x)} vs {len(self.y)}"
            )
        for label, arr in (("x", self.x), ("y", self.y)):
            if len(arr) and (arr.min() < 0 or arr.max() >= self.alphabet_size):
                raise SampleTooShort(
                    f"{label} contains symbols outside 0..{self.alphabet_size - 1}"
                )

    @property
    def n(self) -> int:
        return len(self.x)


@dataclass
class CandidateTree:
    """All admissible nodes (N^X >= 1) up to height L with their counts."""

    nodes: dict[Context, np.ndarray]
    L: int
    n: int
    alphabet_size: int
    min_count: int = 1

    def nx(self, w: Context) -> int:
        return int(self.nodes[w].sum())

    def df(self, w: Context) -> int:
        return int((self.nodes[w] >= 1).sum()) - 1

    def log_likelihood(self, w: Context) -> float:
        counts = self.nodes[w]
        total = counts.sum()
        out = 0.0
        for c in counts:
            if c > 0:
                out += c * math.log(c / total)
        return out

    def q_hat(self, w: Context) -> tuple[float, ...]:
        counts = self.nodes[w]
        total = counts.sum()
        return tuple(float(c) / float(total) for c in counts)

    def children(self, w: Context) -> list[Context]:
        return [(b,) + w for b in range(self.alphabet_size) if (b,) + w in self.nodes]


@dataclass
class EstimationResult:
    """Selected tree, its empirical transition family and bookkeeping."""

    tree: ContextTree
    q: dict[Context, tuple[float, ...]]
    counts: dict[Context, tuple[int, ...]]
    c: float
    L: int
    n: int
    penalized_log_likelihood: float
    log_likelihood: float
    tuning: dict = field(default_factory=dict)

    def contexts(self) -> list[Context]:
        return self.tree.sorted_contexts()

    def to_json(self) -> dict:
        return {
            "contexts": [context_to_str(c) for c in self.contexts()],
            "q": {context_to_str(c): list(self.q[c]) for c in self.contexts()},
            "counts": {
                context_to_str(c): list(self.counts[c]) for c in self.contexts()
            },
            "c": self.c,
            "L": self.L,
            "n": self.n,
            "alphabet_size": self.tree.alphabet_size,
            "penalized_log_likelihood": self.penalized_log_likelihood,
            "log_likelihood": self.log_likelihood,
            "tuning": self.tuning,
        }

    @classmethod
    def from_json(cls, data: dict) -> "EstimationResult":
        contexts = [context_from_str(s) for s in data["contexts"]]
        return cls(
            tree=ContextTree(frozenset(contexts), data["alphabet_size"]),
            q={context_from_str(k): tuple(v) for k, v in data["q"].items()},
            counts={context_from_str(k): tuple(v) for k, v in data["counts"].items()},
            c=data["c"],
            L=data["L"],
            n=data["n"],
            penalized_log_likelihood=data["penalized_log_likelihood"],
            log_likelihood=data["log_likelihood"],
            tuning=data.get("tuning", {}),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False) + "\n"


def count_statistics(sample: PairedSample, L: int, min_count: int = 1) -> CandidateTree:
    """Count N^{XY}(u, a) for every observed context u with len(u) <= L.

    A node is admissible when its count reaches min_count (default 1).  With
    min_count > 1 admissibility is applied per node; suffixes of an
    admissible node are not forced to stay admissible.
    """
    n = sample.n
    if L < 1 or n <= L:
        raise SampleTooShort(f"need n > L >= 1, got n={n}, L={L}")
    A = sample.alphabet_size
    x = sample.x.tolist()
    y = sample.y.tolist()
    nodes: dict[Context, np.ndarray] = {(): np.zeros(A, dtype=np.int64)}
    root = nodes[()]
    for j in range(L, n):
        a = y[j]
        root[a] += 1
        for l in range(1, L + 1):
            u = tuple(x[j - l: j])
            cell = nodes.get(u)
            if cell is None:
                cell = nodes[u] = np.zeros(A, dtype=np.int64)
            cell[a] += 1
    if min_count > 1:
        nodes = {
            w: cnt
            for w, cnt in nodes.items()
            if cnt.sum() >= min_count or w == ()
        }
    return CandidateTree(nodes=nodes, L=L, n=n, alphabet_size=A, min_count=min_count)


def bic_select(candidate: CandidateTree, c: float, n: int | None = None) -> EstimationResult:
    """Bottom-up pruning: keep a node as leaf unless its children's product
    value strictly exceeds its own penalized likelihood."""
    if c <= 0:
        raise SampleTooShort(f"penalty must be positive, got {c}")
    n = candidate.n if n is None else n
    log_n = math.log(n)
    nodes = candidate.nodes
    by_depth = sorted(nodes, key=len, reverse=True)
    log_v: dict[Context, float] = {}
    split: dict[Context, bool] = {}
    for w in by_depth:
        own = candidate.log_likelihood(w) - c * candidate.df(w) * log_n
        kids = candidate.children(w) if len(w) < candidate.L else []
        if not kids:
            log_v[w] = own
            split[w] = False
            continue
        kids_value = sum(log_v[k] for k in kids)
        if kids_value > own:
            log_v[w] = kids_value
            split[w] = True
        else:
            log_v[w] = own
            split[w] = False

    selected: list[Context] = []
    stack = [()]
    while stack:
        w = stack.pop()
        if split[w]:
            stack.extend(candidate.children(w))
        else:
            selected.append(w)

    q = {w: candidate.q_hat(w) for w in selected}
    counts = {w: tuple(int(v) for v in nodes[w]) for w in selected}
    raw = sum(candidate.log_likelihood(w) for w in selected)
    penalized = sum(
        candidate.log_likelihood(w) - c * candidate.df(w) * log_n for w in selected
    )
    return EstimationResult(
        tree=ContextTree(frozenset(selected), candidate.alphabet_size),
        q=q,
        counts=counts,
        c=c,
        L=candidate.L,
        n=n,
        penalized_log_likelihood=penalized,
        log_likelihood=raw,
    )


def predict_next(
    candidate: CandidateTree,
    selected: frozenset[Context],
    x,
    j: int,
) -> int:
    """Mode prediction of y[j] from the fitted tree; pasts that fall off the
    candidate back off to the deepest ancestor that was fitted."""
    best = candidate.nodes[()]
    for l in range(1, min(candidate.L, j) + 1):
        w = tuple(x[j - l: j])
        cell = candidate.nodes.get(w)
        if cell is None:
            break
        best = cell
        if w in selected:
            break
    return int(np.argmax(best))


def tune_penalty(
    sample: PairedSample,
    L: int,
    grid=DEFAULT_PENALTY_GRID,
    holdout_fraction: float = DEFAULT_HOLDOUT_FRACTION,
) -> tuple[float, EstimationResult]:
    """Choose the penalty by chronological holdout prediction error.

    The first 1 - holdout_fraction of the pairs are fitted, guesses on the
    remaining trials are scored, ties go to the larger penalty (smaller
    tree), and the winner is refitted on the full sample.
    """
    grid = sorted(set(float(g) for g in grid))
    if not grid:
        raise SampleTooShort("penalty grid is empty")
    n = sample.n
    n_train = int(n * (1.0 - holdout_fraction))
    if n_train <= L or n_train >= n:
        raise SampleTooShort(
            f"cannot split n={n} into train/holdout with L={L}"
        )
    train = PairedSample(sample.x[:n_train], sample.y[:n_train], sample.alphabet_size)
    candidate = count_statistics(train, L)
    x = sample.x.tolist()
    y = sample.y.tolist()
    errors: dict[float, float] = {}
    for c in grid:
        fit = bic_select(candidate, c)
        contexts = fit.tree.contexts
        wrong = 0
        for j in range(n_train, n):
            if predict_next(candidate, contexts, x, j) != y[j]:
                wrong += 1
        errors[c] = wrong / (n - n_train)
    best = min(errors.values())
    c_star = max(c for c in grid if errors[c] == best)
    final = bic_select(count_statistics(sample, L), c_star)
    final.tuning = {
        "grid": list(grid),
        "holdout_errors": {str(c): errors[c] for c in grid},
        "holdout_fraction": holdout_fraction,
        "n_train": n_train,
    }
    return c_star, final
