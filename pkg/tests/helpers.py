"""Shared independent oracles and builders for the test suite."""

import math
from itertools import product

import numpy as np

from goalkeeper import agents, ctm
from goalkeeper.bic import PairedSample
from goalkeeper.rng import Stream


def oracle_counts(x, y, w, L):
    """Independent re-count: x window ends at j-1, response y[j], j from L."""
    l = len(w)
    out = [0, 0, 0]
    for j in range(L, len(y)):
        if tuple(x[j - l: j]) == w:
            out[y[j]] += 1
    return out


def oracle_leaf_score(x, y, w, c, n, L):
    counts = oracle_counts(x, y, w, L)
    total = sum(counts)
    if total == 0:
        return 0.0
    log_l = sum(v * math.log(v / total) for v in counts if v > 0)
    df = sum(1 for v in counts if v >= 1) - 1
    return log_l - c * df * math.log(n)


def enumerate_complete_trees_h2():
    """All 9 complete suffix trees of height <= 2 over a 3-letter alphabet."""
    trees = [frozenset({()})]
    for choices in product([0, 1], repeat=3):
        tree = set()
        for b, split in zip(range(3), choices):
            if split:
                tree.update({(a, b) for a in range(3)})
            else:
                tree.add((b,))
        trees.append(frozenset(tree))
    return trees


def oracle_best_tree_score(x, y, c, L=2):
    n = len(x)
    return max(
        sum(oracle_leaf_score(x, y, w, c, n, L) for w in tree)
        for tree in enumerate_complete_trees_h2()
    )


def random_dependent_sample(seed, n=300):
    """Mixed family of samples: independent, noisy copy, depth-2 function."""
    s = Stream(seed, 502)
    kind = seed % 3
    x = np.minimum((s.floats(n) * 3).astype(np.int64), 2)
    if kind == 0:
        y = np.minimum((s.floats(n) * 3).astype(np.int64), 2)
    elif kind == 1:
        y = np.roll(x, 1)
        noise = s.floats(n) < 0.3
        y[noise] = np.minimum((s.floats(n)[noise] * 3).astype(np.int64), 2)
    else:
        y = (np.roll(x, 2) + np.roll(x, 1)) % 3
    return PairedSample(x, y)


def depth1_belief():
    """A height-1 response model; satisfies the k'=1 independence null."""
    return ctm.build_model(
        [
            ((0,), (0.2, 0.5, 0.3)),
            ((1,), (0.6, 0.2, 0.2)),
            ((2,), (0.1, 0.3, 0.6)),
        ],
        3,
        name="depth1-belief",
    )


def window_pcps(model, kind, n_windows, seed, window_length=250):
    """PCP of one agent per replicate window, context warm from trial one."""
    h = model.height
    reps = np.arange(n_windows)
    x = ctm.simulate_block(model, h + window_length, seed, streams=3 * reps)
    if kind == "matching":
        y = agents.run_matching_block(model, x, seed, streams=3 * reps + 1)
    elif kind == "maximizing":
        y = agents.run_maximizing_block(model, x, seed, streams=3 * reps + 2)
    elif kind == "uniform":
        from goalkeeper import rng

        keys = rng.stream_keys_np(seed, np.asarray(3 * reps + 1, dtype=np.uint64))
        u = rng.uniform_block_np(keys, 0, h + window_length)
        y = np.minimum((u * 3).astype(np.int64), 2)
    else:
        raise ValueError(kind)
    return (x[:, h:] == y[:, h:]).mean(axis=1)
