"""
Fan-out of benchmark record batches to several sinks.

A run typically writes a CSV file and a JSON copy of the same records; the
harness sees a single sink either way.
"""

from __future__ import annotations

import logging
from typing import Any, Dict, List, Set

from .interfaces import RecordExporter

logger = logging.getLogger(__name__)


class CompositeExporter(RecordExporter):
    """
    Forwards each batch to every child sink, in order.

    A sink that fails on a batch is dropped for the rest of the run, so no output
    file ends up with a gap in the middle. With strict=True the failure is
    re-raised once the remaining sinks have received the batch.
    """

    def __init__(self, exporters: List[RecordExporter], strict: bool = False):
        if not exporters:
            raise ValueError("CompositeExporter requires at least one exporter")
        self._exporters = list(exporters)
        self.strict = strict
        self._failed: Set[int] = set()
        self._opened: List[int] = []
        self._records = 0

    @property
    def failed(self) -> List[int]:
        """Indices of sinks dropped after a failure."""
        return sorted(self._failed)

    def initialize(self) -> None:
        """Open every sink; if one fails, close those already opened and re-raise."""
        for i, exporter in enumerate(self._exporters):
            try:
                exporter.initialize()
            except Exception as e:
                logger.error(f"Record sink {i} failed to open: {e}")
                self._close(self._opened)
                self._opened = []
                raise
            self._opened.append(i)

    def export_batch(self, records: List[Dict[str, Any]]) -> None:
        errors = []
        for i, exporter in enumerate(self._exporters):
            if i in self._failed:
                continue
            try:
                exporter.export_batch(records)
            except Exception as e:
                logger.exception(
                    f"Record sink {i} failed on a batch of {len(records)} records; "
                    f"dropping it for the rest of the run: {e}"
                )
                self._failed.add(i)
                errors.append(e)
        self._records += len(records)
        if errors and self.strict:
            raise errors[0]

    def shutdown(self) -> None:
        """Close sinks in reverse order."""
        self._close(range(len(self._exporters)))
        self._opened = []
        if self._failed:
            logger.warning(f"{len(self._failed)} record sink(s) dropped during the run")

    def _close(self, indices) -> None:
        for i in reversed(list(indices)):
            try:
                self._exporters[i].shutdown()
            except Exception as e:
                logger.exception(f"Record sink {i} failed to close: {e}")

    def get_stats(self) -> Dict[str, int]:
        return {
            "sinks": len(self._exporters),
            "failed": len(self._failed),
            "records": self._records,
        }
