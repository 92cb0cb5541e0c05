"""Sliding-window performance metrics, strategy classification against
simulated score densities, and mode-context-tree summaries across players.

Strategy densities: 10000 kicker runs of one window length are played by a
matching and a maximizing agent; the two PCP samples get Gaussian kernel
density estimates (bandwidth 1.06 * sd * N^(-1/5)) evaluated on a 512-point
grid over [0, 1].  Each replicate's kicker sequence carries a prefix of tree
height so every scored trial has a resolvable context.  A window scores
"undermatching" below the 5th percentile of the matching sample, otherwise
whichever density is higher at its PCP (ties to matching).
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import agents, ctm
from .bic import PairedSample
from .errors import EmptyInput, EmptyRange

KDE_GRID_SIZE = 512
DEFAULT_WINDOW_LENGTH = 250
DEFAULT_WINDOW_STEP = 150
DEFAULT_REPLICATES = 10_000
DEFAULT_UNDERMATCHING_PERCENTILE = 5.0


@dataclass(frozen=True)
class WindowSpec:
    """Sliding windows of fixed length and step over n trials (1-based)."""

    length: int = DEFAULT_WINDOW_LENGTH
    step: int = DEFAULT_WINDOW_STEP
    n: int = 1000

    def __post_init__(self):
        if self.length < 1 or self.step < 1:
            raise EmptyRange(f"window length/step must be >= 1: {self}")

    def ranges(self) -> list[tuple[int, int]]:
        out = []
        start = 1
        while start + self.length - 1 <= self.n:
            out.append((start, start + self.length - 1))
            start += self.step
        return out

    def count(self) -> int:
        return len(self.ranges())


def pcp(sample: PairedSample, trial_range: tuple[int, int]) -> float:
    """Share of trials in [start, end] (1-based, inclusive) guessed right."""
    start, end = trial_range
    if start < 1 or end > sample.n or end < start:
        raise EmptyRange(f"range {trial_range} invalid for n={sample.n}")
    xs = sample.x[start - 1: end]
    ys = sample.y[start - 1: end]
    return float((xs == ys).mean())


def cpcp_curve(sample: PairedSample) -> np.ndarray:
    """Running share of correct guesses after each trial."""
    hits = (sample.x == sample.y).astype(np.float64)
    return np.cumsum(hits) / np.arange(1, sample.n + 1)


def normalized_logit(
    pcp_value: float,
    maximizing_score: float,
    window_length: int,
) -> float:
    """log(p'/(1-p')) of the maximizing-normalized PCP, clamped away from
    the boundaries by half a trial's worth."""
    normalized = pcp_value / maximizing_score
    lo = 1.0 / (2 * window_length)
    clamped = min(max(normalized, lo), 1.0 - lo)
    return math.log(clamped / (1.0 - clamped))


@dataclass
class StrategyDensities:
    """Simulated PCP samples and kernel density estimates per strategy."""

    model_name: str
    window_length: int
    replicates: int
    seed: int
    samples_matching: np.ndarray
    samples_maximizing: np.ndarray
    bandwidth_matching: float
    bandwidth_maximizing: float
    undermatching_percentile: float = DEFAULT_UNDERMATCHING_PERCENTILE
    grid: np.ndarray = field(init=False)
    density_matching: np.ndarray = field(init=False)
    density_maximizing: np.ndarray = field(init=False)
    undermatching_threshold: float = field(init=False)

    def __post_init__(self):
        self.grid = np.linspace(0.0, 1.0, KDE_GRID_SIZE)
        self.density_matching = _kde_on_grid(
            self.samples_matching, self.bandwidth_matching, self.grid
        )
        self.density_maximizing = _kde_on_grid(
            self.samples_maximizing, self.bandwidth_maximizing, self.grid
        )
        self.undermatching_threshold = float(
            np.percentile(self.samples_matching, self.undermatching_percentile)
        )

    def density_at(self, value: float, which: str) -> float:
        dens = self.density_matching if which == "matching" else self.density_maximizing
        return float(np.interp(value, self.grid, dens))

    def to_json(self) -> dict:
        return {
            "model": self.model_name,
            "window_length": self.window_length,
            "replicates": self.replicates,
            "seed": self.seed,
            "undermatching_percentile": self.undermatching_percentile,
            "bandwidth_matching": self.bandwidth_matching,
            "bandwidth_maximizing": self.bandwidth_maximizing,
            "samples_matching": [float(v) for v in self.samples_matching],
            "samples_maximizing": [float(v) for v in self.samples_maximizing],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json()) + "\n"

    @classmethod
    def from_json(cls, data: dict) -> "StrategyDensities":
        return cls(
            model_name=data["model"],
            window_length=data["window_length"],
            replicates=data["replicates"],
            seed=data["seed"],
            samples_matching=np.asarray(data["samples_matching"], dtype=np.float64),
            samples_maximizing=np.asarray(data["samples_maximizing"], dtype=np.float64),
            bandwidth_matching=data["bandwidth_matching"],
            bandwidth_maximizing=data["bandwidth_maximizing"],
            undermatching_percentile=data.get(
                "undermatching_percentile", DEFAULT_UNDERMATCHING_PERCENTILE
            ),
        )


@dataclass(frozen=True)
class StrategyClass:
    label: str  # undermatching | matching | maximizing
    pcp: float
    density_matching: float
    density_maximizing: float
    undermatching_threshold: float


def silverman_bandwidth(samples: np.ndarray) -> float:
    sd = float(np.std(samples, ddof=1))
    return max(1.06 * sd * len(samples) ** (-0.2), 1e-9)


def _kde_on_grid(samples: np.ndarray, bandwidth: float, grid: np.ndarray) -> np.ndarray:
    z = (grid[:, None] - samples[None, :]) / bandwidth
    out = np.exp(-0.5 * z * z).sum(axis=1)
    out /= len(samples) * bandwidth * math.sqrt(2.0 * math.pi)
    return out


def build_strategy_densities(
    model: ctm.ContextTreeModel,
    window_length: int = DEFAULT_WINDOW_LENGTH,
    replicates: int = DEFAULT_REPLICATES,
    seed: int = 0,
    undermatching_percentile: float = DEFAULT_UNDERMATCHING_PERCENTILE,
    threads: int = 1,
) -> StrategyDensities:
    """Simulate PCP samples for both strategies and fit their densities.

    Stream layout per replicate r: kicker 3r, matching agent 3r+1,
    maximizing agent 3r+2, so results are independent of chunking.
    """
    match_pcp = np.empty(replicates, dtype=np.float64)
    max_pcp = np.empty(replicates, dtype=np.float64)
    h = model.height
    m = window_length

    def run_chunk(lo: int, hi: int):
        reps = np.arange(lo, hi)
        x = ctm.simulate_block(model, h + m, seed, streams=3 * reps)
        y_match = agents.run_matching_block(model, x, seed, streams=3 * reps + 1)
        y_max = agents.run_maximizing_block(model, x, seed, streams=3 * reps + 2)
        match_pcp[lo:hi] = (x[:, h:] == y_match[:, h:]).mean(axis=1)
        max_pcp[lo:hi] = (x[:, h:] == y_max[:, h:]).mean(axis=1)

    chunk = max(256, -(-replicates // max(threads, 1)))
    bounds = [(lo, min(lo + chunk, replicates)) for lo in range(0, replicates, chunk)]
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda b: run_chunk(*b), bounds))
    else:
        for b in bounds:
            run_chunk(*b)

    return StrategyDensities(
        model_name=model.name,
        window_length=window_length,
        replicates=replicates,
        seed=seed,
        samples_matching=match_pcp,
        samples_maximizing=max_pcp,
        bandwidth_matching=silverman_bandwidth(match_pcp),
        bandwidth_maximizing=silverman_bandwidth(max_pcp),
        undermatching_percentile=undermatching_percentile,
    )


def classify_strategy(pcp_value: float, densities: StrategyDensities) -> StrategyClass:
    """Undermatching below the matching sample's lower percentile, otherwise
    the strategy whose density is higher at the observed PCP."""
    dm = densities.density_at(pcp_value, "matching")
    dx = densities.density_at(pcp_value, "maximizing")
    if pcp_value < densities.undermatching_threshold:
        label = "undermatching"
    elif dm >= dx:
        label = "matching"
    else:
        label = "maximizing"
    return StrategyClass(
        label=label,
        pcp=pcp_value,
        density_matching=dm,
        density_maximizing=dx,
        undermatching_threshold=densities.undermatching_threshold,
    )


def mode_context_tree(
    trees,
    L: int,
    alphabet_size: int | None = None,
) -> tuple[ctm.ContextTree, dict[ctm.Context, float]]:
    """Consensus tree across estimated trees.

    f(w) is the share of input trees having w as a context.  Bottom-up over
    the full tree of height L, a node's value is f(w) at depth L and
    max(f(w), mean of child values) above; w becomes a leaf when f(w) is at
    least the child mean (ties keep the shorter context).  The mean, rather
    than the sum, keeps deep trees from winning on leaf count alone.
    """
    tree_sets = [t.contexts if isinstance(t, ctm.ContextTree) else frozenset(t) for t in trees]
    if not tree_sets:
        raise EmptyInput("mode_context_tree needs at least one tree")
    if alphabet_size is None:
        sizes = {t.alphabet_size for t in trees if isinstance(t, ctm.ContextTree)}
        alphabet_size = sizes.pop() if len(sizes) == 1 else 3
    total = len(tree_sets)
    for ts in tree_sets:
        for w in ts:
            if len(w) > L:
                raise EmptyInput(
                    f"input tree has context {ctm.context_to_str(w)} deeper than L={L}"
                )

    freq: dict[ctm.Context, float] = {}

    def fill_freq(w: ctm.Context):
        freq[w] = sum(1 for ts in tree_sets if w in ts) / total
        if len(w) < L:
            for b in range(alphabet_size):
                fill_freq((b,) + w)

    fill_freq(())

    value: dict[ctm.Context, float] = {}
    is_leaf: dict[ctm.Context, bool] = {}

    def solve(w: ctm.Context) -> float:
        if len(w) == L:
            value[w] = freq[w]
            is_leaf[w] = True
            return value[w]
        child_mean = sum(solve((b,) + w) for b in range(alphabet_size)) / alphabet_size
        if freq[w] >= child_mean:
            value[w] = freq[w]
            is_leaf[w] = True
        else:
            value[w] = child_mean
            is_leaf[w] = False
        return value[w]

    solve(())
    selected: list[ctm.Context] = []
    stack = [()]
    while stack:
        w = stack.pop()
        if is_leaf[w]:
            selected.append(w)
        else:
            stack.extend((b,) + w for b in range(alphabet_size))
    return ctm.ContextTree(frozenset(selected), alphabet_size), freq


# --- per-session window analysis ---------------------------------------------------

@dataclass
class WindowResult:
    index: int
    start: int
    end: int
    pcp: float
    normalized: float
    logit: float
    strategy: StrategyClass | None


def analyze_windows(
    sample: PairedSample,
    model: ctm.ContextTreeModel,
    densities: StrategyDensities | None = None,
    spec: WindowSpec | None = None,
    maximizing_score: float | None = None,
) -> list[WindowResult]:
    """PCP, normalization and (optionally) strategy class per window."""
    if spec is None:
        spec = WindowSpec(n=sample.n)
    if maximizing_score is None:
        maximizing_score = ctm.stationary_summary(model).maximizing_score
    out = []
    for i, (start, end) in enumerate(spec.ranges(), start=1):
        value = pcp(sample, (start, end))
        out.append(
            WindowResult(
                index=i,
                start=start,
                end=end,
                pcp=value,
                normalized=value / maximizing_score,
                logit=normalized_logit(value, maximizing_score, spec.length),
                strategy=classify_strategy(value, densities) if densities else None,
            )
        )
    return out
