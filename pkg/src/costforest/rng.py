"""Deterministic random substream derivation.

A single user-facing seed drives every stochastic component. Each component
derives its own independent substream as ``make_rng(seed, tag, index...)``,
where ``tag`` is one of the stream constants below and the indices identify
the consumer (tree number, trial number, grid cell). The derivation is a
splitmix64-style mix, fixed across versions:

    h = 0
    for word in (seed, tag, index...):
        h = (h + word + 0x9E3779B97F4A7C15) mod 2**64
        h ^= h >> 30;  h = h * 0xBF58476D1CE4E5B9 mod 2**64
        h ^= h >> 27;  h = h * 0x94D049BB133111EB mod 2**64
        h ^= h >> 31

The mixed value seeds a PCG64 generator. Substreams are therefore
independent of thread scheduling and of how many sibling substreams exist.
"""

import numpy as np

_MASK64 = (1 << 64) - 1

# Stream tags. Never renumber: serialized seeds must replay identically.
STREAM_SAMPLES = 1      # per-tree subsample draws
STREAM_NODES = 2        # per-tree node-level feature sampling
STREAM_GA = 3           # genetic-algorithm evolution
STREAM_SPLIT = 4        # train/valid/test partition
STREAM_RESAMPLE = 5     # undersample / rejection sample
STREAM_TRIALS = 6       # Monte-Carlo theory trials
STREAM_CELLS = 7        # benchmark cells (algorithm x dataset x repetition)


def mix64(*words: int) -> int:
    """Mix integer words into one 64-bit value (splitmix64 finalizer chain)."""
    h = 0
    for w in words:
        h = (h + (w & _MASK64) + 0x9E3779B97F4A7C15) & _MASK64
        h ^= h >> 30
        h = (h * 0xBF58476D1CE4E5B9) & _MASK64
        h ^= h >> 27
        h = (h * 0x94D049BB133111EB) & _MASK64
        h ^= h >> 31
    return h


def make_rng(seed: int, *path: int) -> np.random.Generator:
    """Generator for the substream identified by ``(seed, *path)``."""
    return np.random.Generator(np.random.PCG64(mix64(seed, *path)))
