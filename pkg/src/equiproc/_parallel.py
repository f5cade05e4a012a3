"""Deterministic fan-out of replications over an optional thread pool.

Replication ids are split into fixed-size blocks and results are merged in
block order, so every reduction is performed in the same order regardless of
the thread count.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

BLOCK = 2048


def replication_blocks(reps, block=BLOCK):
    ids = np.arange(int(reps), dtype=np.int64)
    return [ids[i : i + block] for i in range(0, len(ids), block)]


def map_blocks(worker, reps, threads=1, block=BLOCK):
    """Apply worker to each replication block, in order."""
    blocks = replication_blocks(reps, block)
    threads = 1 if threads is None else int(threads)
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(worker, blocks))
    return [worker(b) for b in blocks]


def merge_sums(parts):
    """Sum matching ndarray tuples across blocks, first to last."""
    acc = [np.array(a, dtype=float, copy=True) for a in parts[0]]
    for part in parts[1:]:
        for slot, arr in zip(acc, part):
            slot += arr
    return acc
