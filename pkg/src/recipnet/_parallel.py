from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor


def chunked_map(func, items, threads: int = 1, chunk: int = 2048) -> list:
    """Apply ``func`` to every item, returning results in input order.

    Work is split into fixed-size chunks so the output never depends on the
    thread count.
    """
    items = list(items)
    if threads <= 1 or len(items) <= chunk:
        return [func(x) for x in items]
    chunks = [items[i:i + chunk] for i in range(0, len(items), chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = pool.map(lambda c: [func(x) for x in c], chunks)
    return [r for part in parts for r in part]
