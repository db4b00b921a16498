"""Counter-based random streams for reproducible, parallel path sampling.

Draw ``j`` of trace ``i`` under seed ``s`` is a pure function of ``(s, i, j)``:

    key_i  = mix64(s + (i + 1) * GOLDEN)
    word_j = mix64(key_i + (j + 1) * GOLDEN)

where ``mix64`` is the SplitMix64 output function (Steele, Lea & Flood,
"Fast splittable pseudorandom number generators", OOPSLA 2014). Per trace
this is exactly a SplitMix64 sequence seeded with ``key_i``. Uniforms are the
top 53 bits scaled to ``[0, 1)``. All arithmetic is modulo ``2**64``, so the
streams are identical on every platform, and since no state is shared
between traces any partition of the traces over workers yields the same
samples.
"""

from __future__ import annotations

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_SCALE = 2.0 ** -53


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def check_seed(seed: int) -> int:
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def trace_key(seed: int, trace: int) -> int:
    return mix64(seed + (trace + 1) * GOLDEN)


class TraceStream:
    """Sequential uniform draws for a single trace."""

    __slots__ = ("key", "counter")

    def __init__(self, seed: int, trace: int):
        self.key = trace_key(check_seed(seed), trace)
        self.counter = 0

    def next_u64(self) -> int:
        self.counter += 1
        return mix64(self.key + self.counter * GOLDEN)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * _SCALE


_G = np.uint64(GOLDEN)
_U30, _U27, _U31, _U11 = (np.uint64(s) for s in (30, 27, 31, 11))
_UM1, _UM2 = np.uint64(_M1), np.uint64(_M2)


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U30)) * _UM1
    z = (z ^ (z >> _U27)) * _UM2
    return z ^ (z >> _U31)


def trace_keys(seed: int, traces: np.ndarray) -> np.ndarray:
    """Vectorised :func:`trace_key` for an array of trace indices."""
    t = np.asarray(traces, dtype=np.uint64)
    return mix64_array(np.uint64(check_seed(seed)) + (t + np.uint64(1)) * _G)


def uniforms(keys: np.ndarray, counter: int) -> np.ndarray:
    """Draw number ``counter`` (1-based) of every trace whose key is in ``keys``."""
    words = mix64_array(keys + np.uint64((counter * GOLDEN) & MASK64))
    return (words >> _U11).astype(np.float64) * _SCALE
