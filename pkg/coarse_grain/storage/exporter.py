"""
File exporters for benchmark records.

Implement the RecordExporter interface: CSV with a fixed header, or a JSON
document (optionally gzip-compressed) produced by the output pipeline.
"""

from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import IO, Any, Dict, List, Optional

from ..core.config import CoarseGrainConfig, get_config
from ..core.interfaces import RecordExporter
from ..experiments.records import CSV_COLUMNS, format_cell
from ..processing.pipeline import OutputPipeline

logger = logging.getLogger(__name__)


class CsvRecordExporter(RecordExporter):
    """Writes records as CSV rows under a mandatory header."""

    def __init__(self, path, columns: Optional[List[str]] = None):
        self.path = Path(path)
        self.columns = list(columns or CSV_COLUMNS)
        self._handle: Optional[IO[str]] = None
        self._writer: Any = None
        self._rows = 0
        self._initialized = False

    def initialize(self) -> None:
        if self._initialized:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = open(self.path, "w", newline="", encoding="utf-8")
        self._writer = csv.writer(self._handle, lineterminator="\n")
        self._writer.writerow(self.columns)
        self._initialized = True
        logger.debug(f"CSV exporter opened {self.path}")

    def export_batch(self, records: List[Dict[str, Any]]) -> None:
        if not records:
            return
        if not self._initialized:
            self.initialize()
        for record in records:
            self._writer.writerow([format_cell(record.get(col)) for col in self.columns])
        self._rows += len(records)

    def shutdown(self) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None
            logger.info(f"Wrote {self._rows} rows to {self.path}")
        self._initialized = False


class JsonRecordExporter(RecordExporter):
    """
    Collects records and writes one JSON document {"meta": ..., "records": [...]}.

    Compression follows config.compression_enabled.
    """

    def __init__(
        self,
        path,
        config: Optional[CoarseGrainConfig] = None,
        meta: Optional[Dict[str, Any]] = None,
    ):
        self.path = Path(path)
        self.config = config or get_config()
        self.meta = dict(meta or {})
        self._pipeline = OutputPipeline(self.config)
        self._records: List[Dict[str, Any]] = []
        self._initialized = False

    def initialize(self) -> None:
        if self._initialized:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._records = []
        self._initialized = True

    def export_batch(self, records: List[Dict[str, Any]]) -> None:
        if not self._initialized:
            self.initialize()
        self._records.extend(records)

    def shutdown(self) -> None:
        if not self._initialized:
            return
        self._pipeline.write(self.path, {"meta": self.meta, "records": self._records})
        logger.info(f"Wrote {len(self._records)} records to {self.path}")
        self._initialized = False


def exporter_for(
    path, fmt: str, config: Optional[CoarseGrainConfig] = None, **meta
) -> RecordExporter:
    """The file exporter matching an output format."""
    if fmt == "csv":
        return CsvRecordExporter(path)
    if fmt == "json":
        return JsonRecordExporter(path, config=config, meta=meta)
    raise ValueError(f"unknown output format {fmt!r}")
