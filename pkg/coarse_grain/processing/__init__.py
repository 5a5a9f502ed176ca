"""Serialization and compression of experiment outputs."""

from .pipeline import Compressor, OutputPipeline, Serializer

__all__ = ["Compressor", "OutputPipeline", "Serializer"]
