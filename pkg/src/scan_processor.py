"""Asynchronous chunk processor for the scan engine.

Distributes independent pieces of scan work (chunk folds, sweep levels, row
and column scans) across a pool of workers sized from the available CPU cores.
Results always come back in submission order, so output never depends on
scheduling.
"""
import asyncio
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Generic, List, Optional, Sequence, Tuple, TypeVar

from utils.logging_utils import get_logger

logger = get_logger(__name__)

T = TypeVar('T')  # Job type
R = TypeVar('R')  # Result type

WORKERS_ENV = "FSCAN_WORKERS"
DEFAULT_CHUNK_SIZE = 64


def default_workers() -> int:
    """Worker count from FSCAN_WORKERS, falling back to the CPU count."""
    value = os.getenv(WORKERS_ENV)
    if value:
        try:
            workers = int(value)
            if workers >= 1:
                return workers
        except ValueError:
            pass
        logger.warning(f"Ignoring invalid {WORKERS_ENV}={value!r}")
    return os.cpu_count() or 1


@dataclass
class ScanConfig:
    """Configuration for parallel scan processing."""
    workers: int = field(default_factory=default_workers)
    # cells per scan chunk, independent of `workers`
    chunk_size: int = DEFAULT_CHUNK_SIZE

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.chunk_size < 1:
            raise ValueError(f"chunk_size must be >= 1, got {self.chunk_size}")


@dataclass
class WorkerStats:
    """Track per-worker processing statistics."""
    worker_id: int
    processed: int = 0
    failed: int = 0
    busy_time: float = 0.0


def split_evenly(total: int, parts: int) -> List[Tuple[int, int]]:
    """
    Contiguous [start, stop) ranges covering range(total); the first
    `total % parts` ranges get one extra item. Empty ranges are dropped.
    """
    base, remaining = divmod(total, parts)
    ranges = []
    start = 0
    for i in range(parts):
        size = base + (1 if i < remaining else 0)
        if size:
            ranges.append((start, start + size))
        start += size
    return ranges


def chunk_ranges(total: int, size: int) -> List[Tuple[int, int]]:
    """Contiguous [start, stop) ranges of `size` items; only the last may be shorter."""
    return [(start, min(start + size, total)) for start in range(0, total, size)]


class ParallelScanProcessor(Generic[T, R]):
    """Runs batches of pure jobs on a thread pool and gathers results in order."""

    def __init__(self, config: Optional[ScanConfig] = None):
        """Initialize the processor.

        Args:
            config: Configuration for parallel processing
        """
        self.config = config or ScanConfig()
        self.workers = self.config.workers
        self.stats: Dict[int, WorkerStats] = {
            i: WorkerStats(worker_id=i) for i in range(self.workers)
        }
        self._pool: Optional[ThreadPoolExecutor] = None
        logger.debug(f"Initialized scan processor with {self.workers} workers")

    def __enter__(self) -> "ParallelScanProcessor[T, R]":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def close(self) -> None:
        """Shut the worker threads down; a later call starts a fresh pool."""
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def _executor(self) -> ThreadPoolExecutor:
        if self._pool is None:
            self._pool = ThreadPoolExecutor(max_workers=self.workers, thread_name_prefix="fscan")
        return self._pool

    def _process_batch(
        self,
        worker_id: int,
        batch: Sequence[Tuple[int, T]],
        job: Callable[[T], R],
    ) -> List[Tuple[int, R]]:
        """Process one worker's share of the jobs sequentially."""
        stats = self.stats[worker_id]
        results = []
        for index, item in batch:
            start = time.perf_counter()
            try:
                results.append((index, job(item)))
                stats.processed += 1
            except Exception as e:
                stats.failed += 1
                logger.error(f"Worker {worker_id} failed on job {index}: {e}")
                raise
            finally:
                stats.busy_time += time.perf_counter() - start
        return results

    async def process_items(self, items: Sequence[T], job: Callable[[T], R]) -> List[R]:
        """Apply `job` to every item using all workers.

        Args:
            items: Independent work items
            job: Pure function applied to each item

        Returns:
            Results in the order of `items`
        """
        indexed = list(enumerate(items))
        if not indexed:
            return []

        if self.workers == 1 or len(indexed) == 1:
            return [result for _, result in self._process_batch(0, indexed, job)]

        # Contiguous batches, one per worker
        batches = [indexed[a:b] for a, b in split_evenly(len(indexed), self.workers)]

        loop = asyncio.get_running_loop()
        pool = self._executor()
        tasks = [
            loop.run_in_executor(pool, self._process_batch, worker_id, batch, job)
            for worker_id, batch in enumerate(batches)
        ]
        batch_results = await asyncio.gather(*tasks)

        results: List[Optional[R]] = [None] * len(indexed)
        for batch_result in batch_results:
            for index, result in batch_result:
                results[index] = result
        return results  # type: ignore[return-value]

    def map(self, items: Sequence[T], job: Callable[[T], R]) -> List[R]:
        """Synchronous wrapper around process_items."""
        return asyncio.run(self.process_items(items, job))

    def log_stats(self) -> None:
        """Log processing statistics for all workers."""
        total_processed = sum(stat.processed for stat in self.stats.values())
        total_failed = sum(stat.failed for stat in self.stats.values())
        total_busy = sum(stat.busy_time for stat in self.stats.values())

        logger.info(
            f"Processing statistics: workers={self.workers} "
            f"processed={total_processed} failed={total_failed} busy={total_busy:.3f}s"
        )
        for worker_id, stats in self.stats.items():
            logger.debug(
                f"Worker {worker_id}: processed={stats.processed} "
                f"failed={stats.failed} busy={stats.busy_time:.3f}s"
            )
