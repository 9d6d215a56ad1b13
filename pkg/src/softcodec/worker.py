"""Worker threads for per-image encoding, mining and benchmarking.

Jobs are queued with their input index and results are written back by
index, so the output order never depends on scheduling.
"""

import logging
import queue
import threading
from dataclasses import dataclass
from typing import Callable, Generic, Iterable, TypeVar

from .config import get_worker_count

LOG = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


@dataclass
class Job(Generic[T]):
    """One unit of work and its position in the input."""
    index: int
    item: T


class WorkerPool:
    """Runs a function over many items on a bounded set of threads."""

    def __init__(self, max_workers: int | None = None, name: str = "softcodec-worker") -> None:
        """Initialize the pool.

        Args:
            max_workers: Thread bound; defaults to SOFTCODEC_THREADS or the CPU count.
            name: Thread name prefix.
        """
        self._max_workers = max_workers if max_workers is not None else get_worker_count()
        self._name = name

    @property
    def max_workers(self) -> int:
        """Return the thread bound."""
        return self._max_workers

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
        """Apply fn to every item and return the results in input order.

        The first exception raised by a job stops the remaining workers and
        is re-raised here.
        """
        items = list(items)
        workers = min(self._max_workers, len(items))
        if workers <= 1:
            return [fn(item) for item in items]

        jobs: queue.Queue[Job[T] | None] = queue.Queue()
        for index, item in enumerate(items):
            jobs.put(Job(index, item))
        for _ in range(workers):
            jobs.put(None)  # one shutdown signal per thread

        results: list[R | None] = [None] * len(items)
        errors: list[BaseException] = []
        stop_event = threading.Event()
        lock = threading.Lock()

        def run() -> None:
            while True:
                job = jobs.get()
                try:
                    if job is None:
                        break
                    if stop_event.is_set():
                        continue
                    results[job.index] = fn(job.item)
                except Exception as e:
                    LOG.exception("Error processing job: %s", e)
                    with lock:
                        errors.append(e)
                    stop_event.set()
                finally:
                    jobs.task_done()

        threads = [
            threading.Thread(target=run, name=f"{self._name}-{i}", daemon=True)
            for i in range(workers)
        ]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()
        LOG.debug("Processed %d jobs on %d threads", len(items), workers)

        if errors:
            raise errors[0]
        return results  # type: ignore[return-value]
