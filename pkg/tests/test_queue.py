"""
Evaluation pool tests.
"""

import threading
import time

import pytest

from coarse_grain.core.config import CoarseGrainConfig
from coarse_grain.core.queue import EvaluationPool
from coarse_grain.experiments.records import ExperimentConfig


def test_pool_returns_results_in_index_order():
    def _slow_square(i):
        # Later indices finish first.
        time.sleep(0.001 * (10 - i % 10))
        return i * i

    pool = EvaluationPool(workers=4, batch_size=3)
    assert pool.map(_slow_square, 25) == [i * i for i in range(25)]


def test_worker_count_does_not_change_output():
    single = EvaluationPool(workers=1, batch_size=7).map(lambda i: (i, i % 3), 50)
    many = EvaluationPool(workers=8, batch_size=2).map(lambda i: (i, i % 3), 50)
    assert single == many


def test_batches_are_delivered_in_order():
    batches = []
    pool = EvaluationPool(workers=3, batch_size=4, on_batch=lambda b: batches.append(list(b)))
    pool.map(lambda i: i, 10)
    assert batches == [[0, 1, 2, 3], [4, 5, 6, 7], [8, 9]]


def test_uses_worker_threads():
    names = set()
    lock = threading.Lock()

    def _record(i):
        with lock:
            names.add(threading.current_thread().name)
        time.sleep(0.01)
        return i

    EvaluationPool(workers=2, batch_size=1).map(_record, 6)
    assert names <= {"CoarseGrainWorker-0", "CoarseGrainWorker-1"}
    assert names


def test_lowest_failing_chunk_is_raised():
    def _fail(i):
        if i in (3, 9):
            raise ValueError(f"bad index {i}")
        return i

    pool = EvaluationPool(workers=4, batch_size=2)
    with pytest.raises(ValueError, match="bad index 3"):
        pool.map(_fail, 12)
    assert pool.get_stats()["chunks_failed"] == 2


def test_empty_map():
    assert EvaluationPool().map(lambda i: i, 0) == []


def test_pool_stats():
    pool = EvaluationPool(workers=2, batch_size=5)
    pool.map(lambda i: i, 12)
    stats = pool.get_stats()
    assert stats["chunks_submitted"] == 3
    assert stats["chunks_processed"] == 3
    assert stats["items_processed"] == 12
    assert stats["workers"] == 2


def test_invalid_arguments():
    with pytest.raises(ValueError):
        EvaluationPool(workers=0)
    with pytest.raises(ValueError):
        EvaluationPool(batch_size=0)


def test_from_config():
    pool = EvaluationPool.from_config(CoarseGrainConfig(workers=3, batch_size=17))
    assert pool.workers == 3
    assert pool.batch_size == 17


def test_from_experiment_config():
    pool = EvaluationPool.from_config(ExperimentConfig(workers=2, batch_size=5))
    assert (pool.workers, pool.batch_size) == (2, 5)
