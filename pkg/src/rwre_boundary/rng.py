"""Counter-based site randomness.

Every random quantity in the package is a pure function of a 64-bit key and
an integer tuple, obtained by hashing the tuple with a SplitMix64-style
mixer.  Nothing is streamed: the disorder attached to a lattice site does
not depend on the order in which sites are visited, on how many steps a run
requests, or on how work is split across replicas.  Re-hashing the same
(key, site) returns bit-identical values, which is what makes the
boundary-crossing weight a true martingale in n on a single disorder
realization and lets independent processes agree on the same environment.

All arithmetic is modulo 2**64 on numpy uint64 arrays; the wraparound is
the point, so the mixing helpers suppress numpy's integer-overflow warning
locally rather than leaking it to callers.
"""

from __future__ import annotations

import numpy as np

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_MIX_A = _U64(0xBF58476D1CE4E5B9)
_MIX_B = _U64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1

# Stream tags keep unrelated uses of one master seed decorrelated.
STREAM_ENV = 0x454E56  # per-site disorder of one environment
STREAM_REPLICA = 0x524550  # per-replica sub-seeds
STREAM_RESAMPLE = 0x52534D  # fresh disorder for conditional-moment resampling
STREAM_GRID = 0x475244  # per-grid-point sub-seeds in sweeps


def _as_u64(a) -> np.ndarray:
    """Reinterpret an integer array as uint64 (two's complement for negatives)."""
    arr = np.asarray(a)
    if arr.dtype == np.uint64:
        return arr
    return arr.astype(np.int64).view(np.uint64)


def _scalar_u64(v: int) -> np.ndarray:
    return np.asarray(int(v) & _MASK, dtype=np.uint64)


def mix64(h: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer, elementwise on uint64 arrays."""
    with np.errstate(over="ignore"):
        h = (h ^ (h >> _U64(30))) * _MIX_A
        h = (h ^ (h >> _U64(27))) * _MIX_B
        return h ^ (h >> _U64(31))


def derive_key(seed: int, *words: int) -> int:
    """Derive an independent 64-bit sub-key from a seed and integer words."""
    with np.errstate(over="ignore"):
        h = mix64(_scalar_u64(seed) + _GOLDEN)
        for w in words:
            h = mix64((h ^ _scalar_u64(w)) + _GOLDEN)
    return int(h)


def subkeys(seed: int, stream: int, count: int) -> np.ndarray:
    """Vectorized derive_key(seed, stream, i) for i in range(count) -> uint64 (count,)."""
    with np.errstate(over="ignore"):
        h = mix64(_scalar_u64(seed) + _GOLDEN)
        h = mix64((h ^ _scalar_u64(stream)) + _GOLDEN)
        idx = np.arange(count, dtype=np.uint64)
        return mix64((h ^ idx) + _GOLDEN)


def to_unit(h: np.ndarray) -> np.ndarray:
    """Map uint64 hashes to float64 uniforms on [0, 1) using the top 53 bits."""
    return (h >> _U64(11)).astype(np.float64) * 2.0**-53


def coord_hash(keys, coords) -> np.ndarray:
    """Hash integer lattice coordinates under per-replica keys.

    keys: uint64 array, any shape broadcastable against the site axis
    (typically (R, 1) against m sites); coords: integer array (..., d).
    Returns uint64 of the broadcast shape.
    """
    coords = np.asarray(coords)
    h = _as_u64(keys)
    with np.errstate(over="ignore"):
        for j in range(coords.shape[-1]):
            h = mix64((h ^ _as_u64(coords[..., j])) + _GOLDEN)
    return h


def coord_uniform(keys, coords) -> np.ndarray:
    """One uniform [0, 1) variate per (key, site); see coord_hash for shapes."""
    return to_unit(coord_hash(keys, coords))


def replica_env_keys(master_seed: int, count: int) -> np.ndarray:
    """Environment keys for `count` independent replicas of one model.

    Each replica gets its own sub-seed (hash of the replica index) whose
    environment stream is then derived exactly as a standalone model with
    that seed would derive it.
    """
    reps = subkeys(master_seed, STREAM_REPLICA, count)
    with np.errstate(over="ignore"):
        return mix64((mix64(reps + _GOLDEN) ^ _scalar_u64(STREAM_ENV)) + _GOLDEN)


def resample_env_keys(model_seed: int, count: int) -> np.ndarray:
    """Environment keys for `count` fresh disorder fields used in resampling."""
    reps = subkeys(model_seed, STREAM_RESAMPLE, count)
    with np.errstate(over="ignore"):
        return mix64((mix64(reps + _GOLDEN) ^ _scalar_u64(STREAM_ENV)) + _GOLDEN)
