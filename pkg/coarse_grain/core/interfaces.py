"""
Public interfaces for quantum-coarse-grain components.

All protocols in this module define extension points for the experiment harness.
Implement these interfaces to plug in custom record sinks or state samplers.
"""

from __future__ import annotations

from typing import Any, Dict, List, Protocol

import numpy as np


class RecordExporter(Protocol):
    """Exporter interface for writing batches of benchmark records to a sink."""

    def initialize(self) -> None:
        """Open the sink."""
        ...  # pragma: no cover

    def export_batch(self, records: List[Dict[str, Any]]) -> None:
        """Write a batch of records, in the order given."""
        ...  # pragma: no cover

    def shutdown(self) -> None:
        """Flush and close the sink."""
        ...  # pragma: no cover


class RecordSampler(Protocol):
    """
    Protocol for evaluation-state sampling.

    Implementations must be deterministic in the index so that records do not
    depend on how work is partitioned across workers.
    """

    def sample(self, index: int) -> np.ndarray:
        """
        Return the evaluation state with the given index.

        Args:
            index: Zero-based state index.

        Returns:
            A density matrix.
        """
        ...  # pragma: no cover
