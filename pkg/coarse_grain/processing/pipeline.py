"""
Output processing pipeline for quantum-coarse-grain.

Records, table cells and solver dumps pass through serialize -> compress before
they hit disk. Output is strict JSON: numpy values are converted, complex
matrices become {"real_part", "imag_part"} pairs and non-finite floats become null.
"""

import gzip
import json
import logging
import math
from pathlib import Path
from typing import Any, Union

import numpy as np

from ..core.config import CoarseGrainConfig

logger = logging.getLogger(__name__)

GZIP_MAGIC = b"\x1f\x8b"


def _encode_default(obj: Any) -> Any:
    """JSON fallback for numpy values, complex numbers and enums."""
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {
                "real_part": _finite(obj.real.tolist()),
                "imag_part": _finite(obj.imag.tolist()),
            }
        return _finite(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.floating):
        return _finite(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return {"real_part": float(obj.real), "imag_part": float(obj.imag)}
    if hasattr(obj, "value"):
        return obj.value
    return str(obj)


def _finite(obj: Any) -> Any:
    """Replace NaN and infinities by None, recursively through lists and dicts."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


class Serializer:
    """Compact strict-JSON encoding."""

    @staticmethod
    def serialize(data: Any) -> bytes:
        """
        Serialize data to UTF-8 JSON bytes.

        Raises:
            TypeError: If data cannot be encoded.
        """
        try:
            text = json.dumps(
                _finite(data),
                ensure_ascii=False,
                separators=(",", ":"),
                allow_nan=False,
                default=_encode_default,
            )
        except (TypeError, ValueError) as e:
            logger.error(f"Serialization error: {e}")
            raise TypeError(f"Failed to serialize data: {e}") from e
        return text.encode("utf-8")

    @staticmethod
    def deserialize(data: bytes) -> Any:
        try:
            return json.loads(data.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            logger.error(f"Deserialization error: {e}")
            raise ValueError(f"Failed to deserialize data: {e}") from e


class Compressor:
    """
    Optional gzip stage. Output is byte-reproducible: the gzip header carries no
    timestamp, so equal inputs give equal files.
    """

    def __init__(self, enabled: bool = True, compression_level: int = 6):
        self.enabled = enabled
        self.compression_level = compression_level

    def compress(self, data: bytes) -> bytes:
        if not self.enabled:
            return data
        compressed = gzip.compress(data, compresslevel=self.compression_level, mtime=0)
        if data:
            logger.debug(f"gzip {len(data)} -> {len(compressed)} bytes")
        return compressed

    def decompress(self, data: bytes) -> bytes:
        """Inflate gzip data; anything else is returned unchanged."""
        if not self.is_compressed(data):
            return data
        try:
            return gzip.decompress(data)
        except (OSError, EOFError) as e:
            logger.error(f"Decompression error: {e}")
            raise RuntimeError(f"Failed to decompress data: {e}") from e

    @staticmethod
    def is_compressed(data: bytes) -> bool:
        return data[:2] == GZIP_MAGIC


class OutputPipeline:
    """serialize -> compress, and back."""

    def __init__(self, config: CoarseGrainConfig):
        self.config = config
        self.serializer = Serializer()
        self.compressor = Compressor(
            enabled=config.compression_enabled,
            compression_level=config.compression_level,
        )

    def process(self, data: Any) -> bytes:
        """
        Encode one document.

        Raises:
            RuntimeError: naming the step that failed.
        """
        try:
            serialized = self.serializer.serialize(data)
        except Exception as e:
            raise RuntimeError(f"Serialization failed: {e}") from e
        try:
            return self.compressor.compress(serialized)
        except Exception as e:
            raise RuntimeError(f"Compression failed: {e}") from e

    def write(self, path: Union[str, Path], data: Any) -> Path:
        """Encode a document and write it, creating parent directories."""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(self.process(data))
        return target

    def reverse(self, data: bytes) -> Any:
        """
        Decode bytes written by process(). Gzip and plain JSON are both accepted,
        whatever the compression setting.

        Raises:
            RuntimeError: If the bytes cannot be decoded.
        """
        try:
            return self.serializer.deserialize(self.compressor.decompress(data))
        except Exception as e:
            logger.error(f"Pipeline reverse processing error: {e}")
            raise RuntimeError(f"Failed to reverse process data: {e}") from e

    def read(self, path: Union[str, Path]) -> Any:
        """Decode a file written by write()."""
        return self.reverse(Path(path).read_bytes())
