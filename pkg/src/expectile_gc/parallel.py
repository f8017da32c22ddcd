"""Order-preserving parallel map over independent tasks."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def resolve_threads(threads: int | None) -> int:
    if threads is None or threads <= 0:
        return os.cpu_count() or 1
    return int(threads)


def pmap(fn, items, threads: int | None = 1):
    """``list(map(fn, items))``, spread over worker processes when threads > 1.

    Results come back in input order, so the output never depends on the
    number of workers.
    """
    items = list(items)
    n = min(resolve_threads(threads), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * n))
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
