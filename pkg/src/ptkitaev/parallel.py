"""Order-preserving parallel map over independent tasks."""

import os
from concurrent.futures import ProcessPoolExecutor

from threadpoolctl import threadpool_limits

WORKERS_ENV = "PTKITAEV_WORKERS"


def default_workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _init_worker():
    # one BLAS thread per process keeps results independent of worker count
    threadpool_limits(1)


def ordered_map(func, items, workers=None, chunksize=None):
    """``[func(x) for x in items]``, optionally spread over processes.

    Results come back in input order, so output placement never depends on
    scheduling.  ``func`` must be picklable when ``workers > 1``.
    """
    items = list(items)
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        with threadpool_limits(1):
            return [func(x) for x in items]
    if chunksize is None:
        chunksize = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker) as pool:
        return list(pool.map(func, items, chunksize=chunksize))
