"""Counter-based random streams for reproducible parallel Monte Carlo.

Every stream is a numpy Philox generator whose 128-bit key is derived from a
user seed and a tuple of integer ids (layer, replicate block, purpose, ...)
by a splitmix64 chain. Streams with distinct id tuples never collide, are
cheap to construct, and do not depend on how work is partitioned across
workers.
"""

from __future__ import annotations

import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF

# Replicates are grouped into blocks of this size for batch sampling; each
# block owns one stream, so reductions are independent of worker count.
BLOCK = 1024


def _mix(z: int) -> int:
    # splitmix64 finalizer
    z = (z + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def stream_key(seed: int, *ids: int) -> tuple[int, int]:
    """128-bit Philox key for the stream named by (seed, *ids)."""
    h = _mix(seed & _MASK)
    for i in ids:
        h = _mix(h ^ _mix((int(i) + 0x632BE59BD9B4E019) & _MASK))
    return h, _mix(h)


def stream(seed: int, *ids: int) -> np.random.Generator:
    """Independent generator keyed by (seed, *ids)."""
    k = np.array(stream_key(seed, *ids), dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=k))


def block_starts(n: int, block: int = BLOCK) -> list[tuple[int, int]]:
    """(start, stop) slices covering range(n) in blocks of fixed size."""
    return [(lo, min(lo + block, n)) for lo in range(0, n, block)]


def pairwise_sum(values: np.ndarray) -> float:
    """Deterministic pairwise reduction (numpy's summation is pairwise)."""
    return float(np.add.reduce(np.asarray(values, dtype=np.float64)))


def derive_seed(seed: int, *ids: int) -> int:
    """Child seed for an independent purpose (fresh draws, sweeps)."""
    return stream_key(seed, *ids)[0]
