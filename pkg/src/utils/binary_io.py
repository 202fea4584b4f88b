"""
Little-endian binary helpers shared by feature files and checkpoints.
"""

import io
import struct

import numpy as np

from ..exceptions import FeatureFormatError

U32 = struct.Struct("<I")


class ByteReader:
    """Bounds-checked cursor over a byte buffer; every failure names file and offset."""

    def __init__(self, data: bytes, path: str):
        self.data = data
        self.path = path
        self.offset = 0

    @property
    def remaining(self) -> int:
        return len(self.data) - self.offset

    def take(self, n: int) -> bytes:
        if n > self.remaining:
            raise FeatureFormatError(
                f"truncated file: wanted {n} bytes, {self.remaining} left", self.path, self.offset
            )
        chunk = self.data[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def u32(self) -> int:
        return U32.unpack(self.take(4))[0]

    def f32(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(4 * count), dtype="<f4").astype(np.float32)

    def text(self) -> str:
        """Length-prefixed UTF-8 string."""
        start = self.offset
        raw = self.take(self.u32())
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as e:
            raise FeatureFormatError(f"invalid UTF-8 string: {e}", self.path, start) from e

    def expect_end(self) -> None:
        if self.remaining:
            raise FeatureFormatError(f"{self.remaining} trailing bytes", self.path, self.offset)


class ByteWriter:
    """Append-only little-endian writer."""

    def __init__(self):
        self._buffer = io.BytesIO()

    def raw(self, data: bytes) -> None:
        self._buffer.write(data)

    def u32(self, value: int) -> None:
        self._buffer.write(U32.pack(int(value)))

    def f32(self, array: np.ndarray) -> None:
        self._buffer.write(np.ascontiguousarray(array, dtype="<f4").tobytes())

    def text(self, value: str) -> None:
        encoded = value.encode("utf-8")
        self.u32(len(encoded))
        self._buffer.write(encoded)

    def getvalue(self) -> bytes:
        return self._buffer.getvalue()
