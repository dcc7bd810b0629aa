"""Reproducible random number streams.

All randomness in this package comes from the counter-based Philox 4x64
generator. Independent streams are derived by keying Philox with the pair
(master_seed, stream_index), so stream c is fully determined by (seed, c)
and never depends on how many other streams exist or the order in which
they are consumed. The generator name is recorded in all output metadata.
"""

from __future__ import annotations

import numpy as np

RNG_NAME = "philox4x64"

_MASK64 = 0xFFFFFFFFFFFFFFFF


def stream_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Return the generator for (seed, stream); same pair, same stream."""
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def as_rng(seed_or_rng) -> np.random.Generator:
    """Coerce an int seed (stream 0) or pass an existing Generator through."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return stream_rng(int(seed_or_rng))
