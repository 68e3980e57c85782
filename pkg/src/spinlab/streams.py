"""Seeded random streams and deterministic chunked evaluation.

Every stochastic routine takes a ``numpy.random.Generator``. Work that is split
into chunks gets one derived stream per chunk, keyed by (seed, chunk index)
through ``SeedSequence.spawn_key``, and the chunk results are folded in chunk
order. Output is therefore fixed by (seed, chunk size) alone and does not
depend on how many workers ran the chunks.
"""

from __future__ import annotations

from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

import numpy as np

T = TypeVar("T")

DEFAULT_CHUNK = 1 << 18


def make_stream(seed: int, *path: int) -> np.random.Generator:
    """PCG64 generator for ``seed``, optionally derived along ``path``."""
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *path: int) -> int:
    """A 64-bit child seed, used when a sub-run needs its own integer seed."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def chunk_bounds(n: int, chunk_size: int = DEFAULT_CHUNK) -> list[tuple[int, int]]:
    if chunk_size < 1:
        raise ValueError("chunk_size must be positive")
    return [(start, min(start + chunk_size, n)) for start in range(0, n, chunk_size)]


def map_chunks(fn: Callable[[int, int, np.random.Generator], T], n: int, seed: int,
               chunk_size: int = DEFAULT_CHUNK, workers: int = 1) -> list[T]:
    """Run ``fn(start, stop, rng)`` over chunks of ``range(n)``, results in chunk order."""
    bounds = chunk_bounds(n, chunk_size)
    jobs = [(start, stop, make_stream(seed, i)) for i, (start, stop) in enumerate(bounds)]
    if workers <= 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    # numpy releases the GIL inside the heavy kernels, threads are enough
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))
