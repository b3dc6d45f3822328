"""Replicate ensembles split into fixed-size blocks.

Every block draws from its own streams, and results are concatenated in block
order. The block layout depends only on the replicate count, never on the
number of workers, so outputs are identical for any pool size.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence

import numpy as np

BLOCK_SIZE = 256


def blocks(n_reps: int, block_size: int = BLOCK_SIZE) -> list[tuple[int, int]]:
    """(block index, replicate count) pairs covering ``n_reps``."""
    out = []
    start = 0
    b = 0
    while start < n_reps:
        size = min(block_size, n_reps - start)
        out.append((b, size))
        start += size
        b += 1
    return out


def default_workers() -> int:
    env = os.environ.get("LEVYOU_WORKERS")
    return max(1, int(env)) if env else 1


def map_blocks(fn: Callable, n_reps: int, args: Sequence = (), workers: int | None = None,
               block_size: int = BLOCK_SIZE) -> list:
    """Apply ``fn(block_index, block_reps, *args)`` over all blocks, in block order.

    ``fn`` and ``args`` must be picklable when ``workers > 1``.
    """
    workers = default_workers() if workers is None else int(workers)
    jobs = blocks(n_reps, block_size)
    if workers <= 1 or len(jobs) <= 1:
        return [fn(b, size, *args) for b, size in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, b, size, *args) for b, size in jobs]
        return [f.result() for f in futures]


def concat(parts: list[np.ndarray]) -> np.ndarray:
    return np.concatenate(parts, axis=0) if parts else np.empty(0)
