"""
Keyed, counter-based randomness for reproducible experiments.

A StreamKey names one logical random stream by a master seed and a path of
64-bit tags (generation index, entity index, trial kind, ...).  The key is
folded into a single 64-bit word with a splitmix64-style finalizer; the i-th
uniform of the stream is the finalizer applied to (word, i).  Nothing is
stateful, so trials can be evaluated in any order, vectorized, or on any
number of worker processes and still produce the same bits.
"""

# pylint: disable=invalid-name
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

logger = logging.getLogger("Sampling")

MASK64 = (1 << 64) - 1

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_SEED_SALT = np.uint64(0xD1B54A32D192ED03)
_COUNTER_SALT = np.uint64(0x8CB92BA72F3D8DD7)
_S30, _S27, _S31, _S11 = np.uint64(30), np.uint64(27), np.uint64(31), np.uint64(11)

# 53-bit resolution, the precision of a double
_UNIT = 1.0 / (1 << 53)

# trial kinds used as path tags across the codebase
TAG_RULE_A = 0xA1  # child-child edges, unordered pairs
TAG_RULE_B = 0xB1  # parent-child edges, per vertex
TAG_RULE_C = 0xC1  # child-to-parent's-neighbour edges, ordered pairs
TAG_XI = 0x51  # parent/child choice of the degree chain
TAG_Y = 0x52
TAG_W = 0x53
TAG_Z = 0x54
TAG_BLOCK = 0x5B  # replicate block of a Monte Carlo ensemble
TAG_REPLICATE = 0x5E


def _mix64(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer, elementwise on uint64 (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _MIX1
        z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


def _as_u64(values) -> np.ndarray:
    """Reduce python ints (possibly negative or > 64 bits) to uint64."""
    if isinstance(values, (int, np.integer)):
        return np.uint64(int(values) & MASK64)
    arr = np.asarray(values)
    if arr.dtype == np.uint64:
        return arr
    if arr.dtype.kind in "iu":
        return arr.astype(np.int64).astype(np.uint64)
    return np.array([int(v) & MASK64 for v in arr.ravel()], dtype=np.uint64).reshape(arr.shape)


def fold_words(words, tags) -> np.ndarray:
    """Append a tag to the path of every word (broadcasting)."""
    words = np.asarray(words, dtype=np.uint64)
    tags = _as_u64(tags)
    with np.errstate(over="ignore"):
        return _mix64(words ^ _mix64(tags + _GOLDEN))


@dataclass(frozen=True)
class StreamKey:
    """Identifies one random stream: (master_seed, path of 64-bit tags)."""

    master_seed: int
    path: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "master_seed", int(self.master_seed) & MASK64)
        object.__setattr__(self, "path", tuple(int(t) & MASK64 for t in self.path))

    @property
    def word(self) -> np.uint64:
        """The 64-bit word the whole key hashes to."""
        h = _mix64(np.uint64(self.master_seed) ^ _SEED_SALT)
        for tag in self.path:
            h = fold_words(h, tag)
        return np.uint64(h)


def derive_stream(key: StreamKey, extra_tags: Iterable[int]) -> StreamKey:
    """Child key with ``extra_tags`` appended to the path."""
    extra = tuple(extra_tags)
    if not extra:
        return key
    return StreamKey(key.master_seed, key.path + extra)


def child_words(key: StreamKey, indices) -> np.ndarray:
    """Words of ``derive_stream(key, [i])`` for every i, vectorized."""
    return fold_words(key.word, np.asarray(indices))


def uniforms_from_words(words, counters) -> np.ndarray:
    """The uniform in [0, 1) at ``counters`` of each word's stream."""
    words = np.asarray(words, dtype=np.uint64)
    counters = _as_u64(counters)
    with np.errstate(over="ignore"):
        z = _mix64(words ^ _mix64(counters * _GOLDEN + _COUNTER_SALT))
    return (z >> _S11).astype(np.float64) * _UNIT


def uniforms(key: StreamKey, counters) -> np.ndarray:
    """Uniforms of one stream at the given counters."""
    return uniforms_from_words(key.word, counters)


def _check_probability(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Probability must lie in [0, 1], got {p}.")
    return p


def bernoulli_many(key: StreamKey, counters, p: float) -> np.ndarray:
    """One Ber(p) trial per counter of the stream, as a boolean array."""
    p = _check_probability(p)
    return uniforms(key, counters) < p


def bernoulli_words(words, p: float) -> np.ndarray:
    """The first trial (counter 0) of each word's stream."""
    p = _check_probability(p)
    words = np.asarray(words, dtype=np.uint64)
    return uniforms_from_words(words, np.zeros(words.shape, dtype=np.uint64)) < p


def bernoulli(key: StreamKey, p: float) -> int:
    """A single Ber(p) draw: 1 with probability p."""
    return int(bernoulli_words(np.array([key.word]), p)[0])


def binomial_words(words, ns, p: float) -> np.ndarray:
    """
    Bin(n_i, p) for each (word_i, n_i) as a sum of the first n_i indexed trials.

    Two calls with the same word and different n share their first min(n, n')
    trials, so the result is non-decreasing in n path by path.

    :param words: uint64 stream words, one per draw.
    :param ns: trial counts, one per draw.
    :param p: success probability.
    :return: int64 array of success counts.
    """
    p = _check_probability(p)
    words = np.atleast_1d(np.asarray(words, dtype=np.uint64))
    ns = np.atleast_1d(np.asarray(ns, dtype=np.int64))
    words, ns = np.broadcast_arrays(words, ns)
    if np.any(ns < 0):
        raise ValueError("Binomial trial counts must be non-negative.")
    total = int(ns.sum())
    if total == 0 or p == 0.0:
        return np.zeros(ns.shape, dtype=np.int64)
    if p == 1.0:
        return ns.astype(np.int64).copy()
    owner = np.repeat(np.arange(ns.size), ns.ravel())
    starts = np.cumsum(ns.ravel()) - ns.ravel()
    counters = np.arange(total, dtype=np.int64) - np.repeat(starts, ns.ravel())
    hits = uniforms_from_words(words.ravel()[owner], counters) < p
    counts = np.bincount(owner, weights=hits, minlength=ns.size)
    return counts.astype(np.int64).reshape(ns.shape)


def generator(key: StreamKey) -> np.random.Generator:
    """A numpy Generator on a Philox (counter-based) bit generator keyed by ``key``."""
    return np.random.Generator(np.random.Philox(key=int(key.word)))


def binomial(key: StreamKey, n: int, p: float, coupled: bool = True) -> int:
    """
    An exact Bin(n, p) draw.

    With ``coupled`` (the default) the draw is the prefix-consistent sum of n
    indexed Bernoulli trials.  Callers that never compare draws across
    different n may pass ``coupled=False`` to use numpy's inversion sampler.
    """
    p = _check_probability(p)
    if n < 0:
        raise ValueError(f"Binomial trial count must be non-negative, got {n}.")
    if not coupled:
        return int(generator(key).binomial(int(n), p))
    return int(binomial_words(np.array([key.word]), np.array([n]), p)[0])


def replicate_blocks(reps: int, block_size: int) -> Sequence[Tuple[int, int, int]]:
    """Split ``reps`` replicates into (block index, start, stop) triples of a fixed size."""
    if reps < 0 or block_size < 1:
        raise ValueError(f"Invalid replicate split reps={reps}, block_size={block_size}.")
    return [
        (b, start, min(start + block_size, reps))
        for b, start in enumerate(range(0, reps, block_size))
    ]
