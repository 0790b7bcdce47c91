"""Chunked thread fan-out with results collected in submission order."""

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count(requested=None):
    """Resolve the worker count: explicit argument, then ECHO_LAB_THREADS, then cpu count."""
    if requested is not None and int(requested) > 0:
        return int(requested)
    env = os.environ.get("ECHO_LAB_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"ECHO_LAB_THREADS must be an integer, got {env!r}") from None
        if value > 0:
            return value
    return os.cpu_count() or 1


def chunk_bounds(n, n_chunks):
    """Split range(n) into at most n_chunks contiguous, nearly equal slices."""
    n_chunks = max(1, min(n_chunks, n))
    base, extra = divmod(n, n_chunks)
    bounds = []
    start = 0
    for i in range(n_chunks):
        stop = start + base + (1 if i < extra else 0)
        bounds.append((start, stop))
        start = stop
    return bounds


def map_chunks(func, n, threads=None, min_chunk=1):
    """Call ``func(start, stop)`` on contiguous chunks and return results in chunk order.

    Chunk boundaries depend only on ``n`` and ``min_chunk``, never on the
    worker count, so any reduction over the returned list is reproducible.
    """
    n_chunks = max(1, n // max(1, min_chunk))
    n_chunks = min(n_chunks, 64)
    bounds = chunk_bounds(n, n_chunks)
    workers = thread_count(threads)
    if workers == 1 or len(bounds) == 1:
        return [func(a, b) for a, b in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(func, a, b) for a, b in bounds]
        return [f.result() for f in futures]
