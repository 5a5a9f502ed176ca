"""File sinks for benchmark records."""

from .exporter import CsvRecordExporter, JsonRecordExporter, exporter_for

__all__ = ["CsvRecordExporter", "JsonRecordExporter", "exporter_for"]
