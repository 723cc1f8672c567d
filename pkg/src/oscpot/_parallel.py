import os
from concurrent.futures import ThreadPoolExecutor


def thread_count():
    """Worker cap from ``OSCPOT_THREADS`` (defaults to 1, i.e. serial)."""
    raw = os.environ.get("OSCPOT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Ordered map; results come back in input order whatever the schedule."""
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
