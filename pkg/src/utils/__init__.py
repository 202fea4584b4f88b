"""
Utilities package.

Binary encoding helpers shared by the feature and checkpoint formats.
"""

from .binary_io import U32, ByteReader, ByteWriter

__all__ = ['U32', 'ByteReader', 'ByteWriter']
