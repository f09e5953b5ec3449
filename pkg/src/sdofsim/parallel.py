"""Order-preserving trial execution over a process pool."""

import os
from concurrent.futures import ProcessPoolExecutor

__all__ = ["default_workers", "run_trials"]


def default_workers():
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1


def run_trials(fn, trials, workers=1):
    """Evaluate ``fn(i)`` for ``i in range(trials)``; results in index order.

    ``fn`` must be picklable when ``workers > 1`` (a module-level function or
    a :func:`functools.partial` of one). Results never depend on scheduling
    because every trial derives its own RNG stream from its index.
    """
    if workers is None:
        workers = default_workers()
    if workers <= 1 or trials < 2:
        return [fn(i) for i in range(trials)]
    chunk = max(1, trials // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, range(trials), chunksize=chunk))
