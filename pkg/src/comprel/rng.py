"""Deterministic random streams.

All randomness in the package flows through numpy's PCG64 generator, keyed
by a base seed plus a named stream. Independent consumers (weight init per
layer, per-epoch shuffles, the unknown-word vector) each get their own
stream, so adding a draw in one place never perturbs another. PCG64 is a
named, portable algorithm: the same seed yields the same bits on every
platform.
"""

from __future__ import annotations

import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(seed: int, *names: str | int) -> np.random.Generator:
    """Generator for the substream identified by `names` under `seed`."""
    keys = [int(seed) & _MASK64]
    for name in names:
        if isinstance(name, str):
            keys.append(zlib.crc32(name.encode("utf-8")))
        else:
            keys.append(int(name) & _MASK64)
    return np.random.default_rng(np.random.SeedSequence(keys))
