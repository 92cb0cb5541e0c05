"""Deterministic counter-based random numbers.

The generator is SplitMix64 run in counter mode: output ``i`` of stream ``s``
under seed ``q`` is

    mix64(key(q, s) + (i + 1) * GOLDEN)      with  key(q, s) = mix64(mix64(q) + s * GOLDEN)

where ``mix64`` is the SplitMix64 finalizer (xor-shift / multiply) and GOLDEN
is 2^64 / phi.  Being stateless in the counter, any output can be computed
independently, so Monte Carlo replicates keyed by stream id produce identical
numbers no matter how work is chunked or scheduled.

Two implementations are kept in lockstep: a Python-int scalar path (used by
the sequential ``Stream`` helper) and a numpy uint64 vector path (used by the
block simulators).  ``tests/test_rng.py`` pins their equality.
"""

from __future__ import annotations

import numpy as np

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

_U_GOLDEN = np.uint64(GOLDEN)
_U_M1 = np.uint64(_M1)
_U_M2 = np.uint64(_M2)
_SHIFT_30 = np.uint64(30)
_SHIFT_27 = np.uint64(27)
_SHIFT_31 = np.uint64(31)
_SHIFT_11 = np.uint64(11)
_INV_2_53 = 2.0 ** -53


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python integer (wraps mod 2^64)."""
    z &= MASK
    z = ((z ^ (z >> 30)) * _M1) & MASK
    z = ((z ^ (z >> 27)) * _M2) & MASK
    return z ^ (z >> 31)


def stream_key(seed: int, stream: int = 0) -> int:
    """Per-stream key; distinct streams of one seed are decorrelated."""
    return mix64((mix64(seed) + (stream & MASK) * GOLDEN) & MASK)


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _SHIFT_30)) * _U_M1
    z = (z ^ (z >> _SHIFT_27)) * _U_M2
    return z ^ (z >> _SHIFT_31)


def stream_keys_np(seed: int, streams: np.ndarray) -> np.ndarray:
    """Vector of per-stream keys (uint64)."""
    base = np.uint64(mix64(seed))
    return _mix64_np(base + streams.astype(np.uint64) * _U_GOLDEN)


def uniforms_np(keys: np.ndarray, counter: int) -> np.ndarray:
    """One uniform in [0, 1) per key, all at counter position ``counter``."""
    z = _mix64_np(keys + np.uint64(counter + 1) * _U_GOLDEN)
    return (z >> _SHIFT_11).astype(np.float64) * _INV_2_53


def uniform_block_np(keys: np.ndarray, start: int, count: int) -> np.ndarray:
    """Uniforms for counters start..start+count-1, shape (len(keys), count)."""
    counters = (np.arange(start + 1, start + count + 1, dtype=np.uint64)) * _U_GOLDEN
    z = _mix64_np(keys[:, None] + counters[None, :])
    return (z >> _SHIFT_11).astype(np.float64) * _INV_2_53


class Stream:
    """Sequential view of one (seed, stream) pair.

    Draws consume consecutive counters starting at 0; ``floats(n)`` and
    repeated ``next_float()`` calls see exactly the same values.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.key = stream_key(seed, stream)
        self._i = 0

    def next_u64(self) -> int:
        v = mix64((self.key + (self._i + 1) * GOLDEN) & MASK)
        self._i += 1
        return v

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * _INV_2_53

    def floats(self, n: int) -> np.ndarray:
        key = np.full(1, self.key, dtype=np.uint64)
        out = uniform_block_np(key, self._i, n)[0]
        self._i += n
        return out

    def next_symbol(self, cumulative: tuple[float, ...] | np.ndarray) -> int:
        """Sample an index from cumulative probabilities (last entry ~1)."""
        u = self.next_float()
        for i, c in enumerate(cumulative):
            if u < c:
                return i
        return len(cumulative) - 1
