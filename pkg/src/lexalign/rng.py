"""Deterministic 64-bit RNG streams shared by every Monte Carlo component.

The generator is SplitMix64: state advances by the golden-gamma constant and
each output is the standard 3-round mix of the new state.  Because output t of
a stream seeded with s is ``fin(s + GAMMA*(t+1))``, whole key blocks can be
computed as a single vectorised numpy expression, and per-task sub-streams are
derived as ``mix(seed, task_index) = output(task_index)`` of the parent stream.
Task seeds are only ever mixed, never drawn from directly, so derived streams
never overlap their parents.

Everything here is pure integer arithmetic on uint64: results are identical
across platforms, thread counts and numpy versions.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_U_GAMMA = np.uint64(GAMMA)
_U_MIX1 = np.uint64(_MIX1)
_U_MIX2 = np.uint64(_MIX2)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U11 = np.uint64(11)

_DOUBLE_SCALE = 2.0 ** -53


def _fin(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def _fin_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U30)) * _U_MIX1
    z = (z ^ (z >> _U27)) * _U_MIX2
    return z ^ (z >> _U31)


def mix(seed: int, *task_indices: int) -> int:
    """Derive a sub-stream seed; mix(s, a, b) == mix(mix(s, a), b)."""
    s = seed & _MASK
    for t in task_indices:
        s = _fin((s + GAMMA * ((t & _MASK) + 1)) & _MASK)
    return s


def mix_array(seeds: np.ndarray, task_index: int) -> np.ndarray:
    """Vectorised mix(seed_i, task_index) over a uint64 seed array."""
    step = np.uint64((GAMMA * ((task_index & _MASK) + 1)) & _MASK)
    return _fin_array(seeds + step)


def keys(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Outputs [offset, offset+count) of the stream, as one vectorised block."""
    t = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    return _fin_array(np.uint64(seed & _MASK) + _U_GAMMA * t)


def key_block(seeds: np.ndarray, count: int, offset: int = 0) -> np.ndarray:
    """(len(seeds), count) outputs, one row per stream.  seeds must be uint64."""
    t = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    return _fin_array(seeds[:, None] + _U_GAMMA * t[None, :])


class SplitMix64:
    """Sequential view of one stream; next() == keys(seed, ...)[i] in order."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + GAMMA) & _MASK
        return _fin(self._state)

    def next_double(self) -> float:
        return (self.next_u64() >> 11) * _DOUBLE_SCALE


def doubles(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """count uniforms in [0, 1) from the stream's key block."""
    return (keys(seed, count, offset) >> _U11) * _DOUBLE_SCALE


def permutation(seed: int, n: int) -> np.ndarray:
    """Uniform random permutation of range(n) as argsort of n distinct keys.

    Duplicate keys (probability ~ n^2 / 2^64) trigger a redraw from the next
    key block of the same stream, so the distribution is exactly uniform.
    """
    offset = 0
    while True:
        k = keys(seed, n, offset)
        # duplicate keys force a redraw, so sort stability never matters
        order = np.argsort(k)
        if n < 2 or (np.diff(k[order]) != 0).all():
            return order
        offset += n


def nonidentity_permutations(seed: int, n_perms: int, n: int) -> np.ndarray:
    """(n_perms, n) int32 permutations, each drawn from stream mix(seed, i).

    Per-sample streams are consumed in blocks of n keys; a sample redraws from
    its own stream while it produces the identity (or a key collision), so the
    result is uniform over the n! - 1 non-identity permutations and is a pure
    function of (seed, i) regardless of batching or thread count.
    """
    if n_perms < 1:
        raise ValueError("n_perms must be >= 1")
    if n < 2:
        raise ValueError("no non-identity permutation exists for n < 2")
    # stream seed for sample i is mix(seed, i), i.e. output i of the parent stream
    seeds = key_block(np.array([seed & _MASK], dtype=np.uint64), n_perms)[0]
    out = np.empty((n_perms, n), dtype=np.int32)
    pending = np.arange(n_perms)
    offset = 0
    identity = np.arange(n)
    while pending.size:
        blk = key_block(seeds[pending], n, offset)
        order = np.argsort(blk, axis=1)
        srt = np.take_along_axis(blk, order, axis=1)
        ok_unique = (np.diff(srt, axis=1) != 0).all(axis=1) if n > 1 else np.ones(len(pending), bool)
        is_ident = (order == identity).all(axis=1)
        good = ok_unique & ~is_ident
        out[pending[good]] = order[good]
        pending = pending[~good]
        offset += n
    return out


def sample_without_replacement(seed: int, n_available: int, k: int) -> np.ndarray:
    """First k entries of a uniform permutation: grows by a prefix as k grows."""
    if k > n_available:
        raise ValueError(f"cannot sample {k} items from {n_available}")
    return permutation(seed, n_available)[:k]


def batch_permutations(seeds: np.ndarray, n: int) -> np.ndarray:
    """One uniform permutation of range(n) per stream, all drawn at once.

    Row i equals permutation(int(seeds[i]), n) exactly: both consume the same
    key block, and the rare key-collision rows are recomputed via the scalar
    path, which replays the stream from the start.
    """
    blk = key_block(seeds, n)
    order = np.argsort(blk, axis=1)
    if n > 1:
        srt = np.take_along_axis(blk, order, axis=1)
        bad = np.flatnonzero(~(np.diff(srt, axis=1) != 0).all(axis=1))
        for i in bad:  # pragma: no cover - ~2^-64 per key pair
            order[i] = permutation(int(seeds[i]), n)
    return order
