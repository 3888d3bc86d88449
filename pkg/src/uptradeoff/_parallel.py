"""Order-preserving parallel map bounded by ``UPT_THREADS``."""

import concurrent.futures
import contextvars
import os


def worker_count(default: int = 1) -> int:
    raw = os.environ.get("UPT_THREADS", "").strip()
    try:
        n = int(raw) if raw else default
    except ValueError:
        n = default
    return max(1, n)


def pmap(func, items, workers=None):
    """``list(map(func, items))``, run on up to ``workers`` threads.

    Results come back in input order, so callers get schedule-independent
    output.  Each task runs in a copy of the caller's context, so tolerance
    overrides carry over.
    """
    items = list(items)
    workers = worker_count() if workers is None else max(1, workers)
    if workers == 1 or len(items) < 2:
        return [func(it) for it in items]
    ctx = contextvars.copy_context()
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda it: ctx.copy().run(func, it), items))
