"""Seeded generators and labeled stream splitting.

Every sampler in the package takes a ``numpy.random.Generator`` explicitly.
Generators are built on the counter-based Philox bit generator from a single
64-bit seed; independent sub-streams are derived from ``(seed, label)`` so
that parallel Monte Carlo never shares state.
"""
from __future__ import annotations

import zlib

import numpy as np


def make_rng(seed: int | np.random.Generator | None = 0) -> np.random.Generator:
    """Return a Philox-backed generator for a 64-bit ``seed``.

    A ``Generator`` passed in is returned unchanged.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        seed = 0
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed) & (2**64 - 1))))


def stream(seed: int, label: str, index: int = 0) -> np.random.Generator:
    """Deterministic sub-stream ``label``/``index`` of the master ``seed``.

    Streams with different labels or indices are statistically independent
    (distinct SeedSequence spawn keys).
    """
    key = (zlib.crc32(label.encode("utf-8")), int(index))
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def spawn(rng: np.random.Generator, k: int) -> list[np.random.Generator]:
    """Split ``rng`` into ``k`` independent child generators."""
    return [np.random.Generator(np.random.Philox(s)) for s in rng.bit_generator.seed_seq.spawn(k)]
