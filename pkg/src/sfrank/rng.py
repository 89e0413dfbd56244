"""Seed handling.

All randomness derives from a single integer master seed. Independent
streams for replications and sub-tasks are obtained with
``numpy.random.SeedSequence`` spawn keys: stream ``(i, j, ...)`` of master
seed ``s`` is ``SeedSequence(s, spawn_key=(i, j, ...))``. This is a
counter-based split: the stream for a given key does not depend on how many
other streams were created or in which order.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int | np.random.Generator | None, *key: int) -> np.random.Generator:
    """Return a PCG64 generator for ``seed`` and spawn ``key``.

    A ``Generator`` passed as ``seed`` is returned unchanged (``key`` must
    then be empty).
    """
    if isinstance(seed, np.random.Generator):
        if key:
            raise ValueError("cannot derive a keyed stream from a Generator")
        return seed
    if seed is None:
        raise ValueError("an explicit seed is required")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def child_seeds(rng: np.random.Generator, count: int) -> list[np.random.Generator]:
    """Spawn ``count`` independent generators from ``rng``'s bit generator."""
    return [np.random.Generator(np.random.PCG64(s)) for s in rng.bit_generator.seed_seq.spawn(count)]
