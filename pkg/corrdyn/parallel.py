"""
Order-preserving parallel map
Results come back in input order, so worker count never changes output
"""
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(threads: Optional[int] = None) -> int:
    """Explicit value first, then CORRDYN_THREADS, then available cores"""
    if threads is None:
        from corrdyn.config import settings
        threads = settings.threads
    if threads is None:
        threads = os.cpu_count() or 1
    return max(1, int(threads))


def parallel_map(func: Callable[[T], R], items: Sequence[T], workers: int = 1, chunksize: int = 1) -> List[R]:
    """
    Map func over items, in a process pool when workers > 1.

    func must be picklable (module-level function or functools.partial of one).
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    workers = min(workers, len(items))
    logger.debug("parallel_map: %d items on %d workers", len(items), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items, chunksize=chunksize))
