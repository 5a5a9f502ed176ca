"""
Deterministic worker pool for per-state evaluation.

Work is partitioned by state index into fixed-size chunks. Worker threads pull
chunks from a queue and evaluate them independently; results are merged in
index order so the number of workers never changes the output.
"""

import logging
import queue
import threading
from typing import Any, Callable, Dict, List, Optional, Protocol, Tuple

logger = logging.getLogger(__name__)

Chunk = Tuple[int, int, int]


class PoolSettings(Protocol):
    """Anything carrying a worker count and chunk size."""

    workers: int
    batch_size: int


class EvaluationPool:
    """
    Thread pool that maps an index function over range(n) in ordered chunks.

    The evaluation function must be a pure function of the index (it may close
    over immutable data such as a prebuilt emergent channel).
    """

    def __init__(
        self,
        workers: int = 4,
        batch_size: int = 256,
        on_batch: Optional[Callable[[List[Any]], None]] = None,
    ):
        """
        Initialize the pool.

        Args:
            workers: Number of worker threads (default: 4).
            batch_size: Number of indices per chunk (default: 256).
            on_batch: Called once per chunk, in index order, after all chunks finish.
        """
        if workers < 1:
            raise ValueError(f"workers must be at least 1, got {workers}")
        if batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {batch_size}")
        self.workers = workers
        self.batch_size = batch_size
        self.on_batch = on_batch

        self._queue: "queue.Queue[Optional[Chunk]]" = queue.Queue()
        self._threads: List[threading.Thread] = []

        # Statistics
        self._chunks_submitted = 0
        self._chunks_processed = 0
        self._chunks_failed = 0
        self._items_processed = 0
        self._lock = threading.Lock()

    @classmethod
    def from_config(
        cls,
        config: PoolSettings,
        on_batch: Optional[Callable[[List[Any]], None]] = None,
    ) -> "EvaluationPool":
        return cls(workers=config.workers, batch_size=config.batch_size, on_batch=on_batch)

    def _chunks(self, n: int) -> List[Chunk]:
        return [
            (k, start, min(start + self.batch_size, n))
            for k, start in enumerate(range(0, n, self.batch_size))
        ]

    def map(self, fn: Callable[[int], Any], n: int) -> List[Any]:
        """
        Evaluate fn(0), ..., fn(n - 1) and return the results in index order.

        Raises:
            The exception of the lowest-index failing chunk, after all workers stop.
        """
        if n <= 0:
            return []
        chunks = self._chunks(n)
        results: Dict[int, List[Any]] = {}
        failures: Dict[int, BaseException] = {}

        for chunk in chunks:
            self._queue.put(chunk)
        with self._lock:
            self._chunks_submitted += len(chunks)

        n_threads = min(self.workers, len(chunks))
        for _ in range(n_threads):
            self._queue.put(None)

        self._threads = [
            threading.Thread(
                target=self._worker_loop,
                args=(fn, results, failures),
                daemon=True,
                name=f"CoarseGrainWorker-{i}",
            )
            for i in range(n_threads)
        ]
        logger.info(f"Evaluating {n} states in {len(chunks)} chunks on {n_threads} workers")
        for thread in self._threads:
            thread.start()
        for thread in self._threads:
            thread.join()
        self._threads = []

        if failures:
            first = min(failures)
            logger.error(f"{len(failures)} chunk(s) failed, first at chunk {first}")
            raise failures[first]

        merged: List[Any] = []
        for k in range(len(chunks)):
            batch = results[k]
            if self.on_batch:
                self.on_batch(batch)
            merged.extend(batch)
        return merged

    def _worker_loop(
        self,
        fn: Callable[[int], Any],
        results: Dict[int, List[Any]],
        failures: Dict[int, BaseException],
    ):
        while True:
            chunk = self._queue.get()
            if chunk is None:
                break
            k, start, stop = chunk
            try:
                batch = [fn(i) for i in range(start, stop)]
                with self._lock:
                    results[k] = batch
                    self._chunks_processed += 1
                    self._items_processed += len(batch)
                logger.debug(f"Chunk {k} done ({start}..{stop - 1})")
            except Exception as e:
                logger.exception(f"Error evaluating chunk {k} ({start}..{stop - 1}): {e}")
                with self._lock:
                    failures[k] = e
                    self._chunks_failed += 1

    def get_stats(self) -> Dict[str, int]:
        """
        Get pool statistics.

        Returns:
            Dictionary with chunk and item counters.
        """
        with self._lock:
            return {
                "chunks_submitted": self._chunks_submitted,
                "chunks_processed": self._chunks_processed,
                "chunks_failed": self._chunks_failed,
                "items_processed": self._items_processed,
                "workers": self.workers,
                "batch_size": self.batch_size,
            }
