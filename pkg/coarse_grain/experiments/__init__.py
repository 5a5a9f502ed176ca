"""Benchmark and table-reproduction runs."""

from .harness import (
    run_commutativity,
    run_cross_generator_matrix,
    run_sdp_tables,
    run_time_sweep,
    run_werner_sweep,
)
from .records import BenchmarkRecord, ExperimentConfig, summarize

__all__ = [
    "BenchmarkRecord",
    "ExperimentConfig",
    "summarize",
    "run_commutativity",
    "run_cross_generator_matrix",
    "run_sdp_tables",
    "run_time_sweep",
    "run_werner_sweep",
]
