"""Deterministic chunked random streams.

Every Monte-Carlo routine splits its work into fixed-size chunks; chunk ``c``
draws from a generator seeded by ``SeedSequence(seed, spawn_key=(c,))``.
Results therefore depend only on ``(seed, count)`` and never on how many
worker threads are used.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 1 << 16
_SEED_MAX = 1 << 64


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed < _SEED_MAX:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(check_seed(seed), spawn_key=(chunk,)))


def worker_count() -> int:
    raw = os.environ.get("SCHUR_FOURIER_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def chunk_sizes(count: int, chunk: int = CHUNK) -> list[int]:
    if count <= 0:
        raise ValueError("count must be positive")
    full, rest = divmod(count, chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_chunks(seed: int, count: int, fn, chunk: int = CHUNK) -> list:
    """Apply ``fn(rng, size)`` to every chunk; results are returned in chunk order."""
    sizes = chunk_sizes(count, chunk)
    seed = check_seed(seed)

    def run(c):
        return fn(chunk_rng(seed, c), sizes[c])

    workers = min(worker_count(), len(sizes))
    if workers <= 1:
        return [run(c) for c in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(len(sizes))))


def draw(seed: int, count: int, fn, chunk: int = CHUNK) -> np.ndarray:
    """Concatenate chunked draws along the first axis."""
    parts = map_chunks(seed, count, fn, chunk)
    return parts[0] if len(parts) == 1 else np.concatenate(parts, axis=0)
