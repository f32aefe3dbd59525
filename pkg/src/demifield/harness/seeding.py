"""Replicate seeding and a counter-based SplitMix64 stream.

Every replicate owns a 64-bit seed obtained from ``derive_seed``; its random
numbers are the SplitMix64 outputs ``mix(seed + (t+1) * GOLDEN)`` for
counters ``t = 0, 1, ...``.  Values therefore depend only on the replicate's
seed and never on how replicates are batched or distributed over workers.
"""

from __future__ import annotations

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1

GENERATOR_ID = "splitmix64-counter"
NORMAL_METHOD = "marsaglia-polar"


def derive_seed(master: int, replicate: int) -> int:
    z = (int(master) + (int(replicate) + 1) * GOLDEN) & MASK64
    z ^= z >> 30
    z = (z * MIX1) & MASK64
    z ^= z >> 27
    z = (z * MIX2) & MASK64
    z ^= z >> 31
    return z


def _mix(z: np.ndarray) -> np.ndarray:
    # uint64 arithmetic wraps modulo 2**64
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(MIX1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


def derive_seeds(master: int, start: int, count: int) -> np.ndarray:
    """Vectorised ``derive_seed(master, r)`` for ``r in [start, start+count)``."""
    r = np.arange(start, start + count, dtype=np.uint64)
    z = np.uint64(int(master) & MASK64) + (r + np.uint64(1)) * np.uint64(GOLDEN)
    return _mix(z)


def raw_stream(seeds: np.ndarray, start: int, count: int) -> np.ndarray:
    """64-bit outputs ``t = start..start+count-1`` for each seed; shape (R, count)."""
    seeds = np.asarray(seeds, dtype=np.uint64).reshape(-1, 1)
    t = np.arange(start + 1, start + count + 1, dtype=np.uint64).reshape(1, -1)
    return _mix(seeds + t * np.uint64(GOLDEN))


def uniforms(seeds: np.ndarray, start: int, count: int) -> np.ndarray:
    """Uniforms on the open interval (0, 1) with 53-bit resolution."""
    bits = raw_stream(seeds, start, count) >> np.uint64(11)
    return (bits.astype(np.float64) + 0.5) * 2.0 ** -53


def normals(seeds: np.ndarray, count: int) -> np.ndarray:
    """Standard normals by the polar method, ``count`` per seed; shape (R, count).

    Each attempt consumes two consecutive stream outputs.  A replicate keeps
    its first ``ceil(count/2)`` accepted attempts, so the result depends on
    nothing but the seed.
    """
    seeds = np.asarray(seeds, dtype=np.uint64).ravel()
    n_rep = seeds.size
    pairs = (count + 1) // 2
    if n_rep == 0 or count == 0:
        return np.zeros((n_rep, count))
    attempts = int(pairs * 1.35) + 16
    while True:
        u = uniforms(seeds, 0, 2 * attempts).reshape(n_rep, attempts, 2)
        v = 2.0 * u - 1.0
        s = v[..., 0] ** 2 + v[..., 1] ** 2
        accepted = (s < 1.0) & (s > 0.0)
        if (accepted.sum(axis=1) >= pairs).all():
            break
        attempts *= 2
    keep = accepted & (np.cumsum(accepted, axis=1) <= pairs)
    s_kept = s[keep].reshape(n_rep, pairs)
    v0 = v[..., 0][keep].reshape(n_rep, pairs)
    v1 = v[..., 1][keep].reshape(n_rep, pairs)
    factor = np.sqrt(-2.0 * np.log(s_kept) / s_kept)
    out = np.empty((n_rep, 2 * pairs))
    out[:, 0::2] = v0 * factor
    out[:, 1::2] = v1 * factor
    return out[:, :count]
