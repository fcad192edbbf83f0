"""Seeded random streams.

Every random draw in the package goes through a Philox-4x64 generator
(counter-based, documented in Salmon et al. 2011 and implemented by numpy's
``np.random.Philox``). Independent streams for one run are derived from the
run seed plus a fixed string tag, so the draw used for, say, the validation
split never depends on how many dropout masks were sampled before it.
"""

from __future__ import annotations

import zlib

import numpy as np


def generator(seed: int, stream: str = "") -> np.random.Generator:
    """Return a Philox generator for ``(seed, stream)``."""
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must fit in an unsigned 64-bit integer, got {seed}")
    tag = zlib.crc32(stream.encode("utf-8"))
    return np.random.Generator(np.random.Philox(key=np.array([seed, tag], dtype=np.uint64)))
