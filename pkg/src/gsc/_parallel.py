"""Replicate-chunk parallelism.

Replicate engines are order-insensitive by construction (replicate b's
randomness is a pure function of (seed, b) and results are stored by
index), so chunked execution gives bit-identical output for any worker
count, including 1.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

from .errors import ParameterError

_ENV_THREADS = "GSC_THREADS"


def default_threads() -> int:
    raw = os.environ.get(_ENV_THREADS, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ParameterError(f"{_ENV_THREADS} must be an integer, got {raw!r}") from None


def run_chunked(n: int, threads: int, work) -> None:
    """Call ``work(lo, hi)`` over a partition of range(n), possibly in
    worker threads.  ``work`` must write results by index only."""
    threads = max(1, int(threads))
    if threads == 1 or n < 2:
        work(0, n)
        return
    chunk = -(-n // threads)
    spans = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for future in [pool.submit(work, lo, hi) for lo, hi in spans]:
            future.result()
