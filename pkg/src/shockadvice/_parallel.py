import os
from concurrent.futures import ProcessPoolExecutor


def default_workers():
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def pmap(func, items, workers=1, chunksize=1):
    """Ordered map; a process pool when ``workers > 1``.

    Result order always follows ``items`` so reductions downstream do not
    depend on scheduling.
    """
    items = list(items)
    if workers is None:
        workers = default_workers()
    if workers <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as ex:
        return list(ex.map(func, items, chunksize=chunksize))
