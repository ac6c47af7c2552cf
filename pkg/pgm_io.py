#!/usr/bin/env python3
"""
Binary PGM (P5, maxval 255) reader/writer - the interchange format for
screens, emission images and templates.
"""

from pathlib import Path
from typing import Union

import numpy as np

from raster import Bitmap


class PgmFormatError(ValueError):
    """Malformed PGM; names the byte offset where parsing failed."""

    def __init__(self, offset: int, message: str):
        super().__init__(f"byte {offset}: {message}")
        self.offset = offset


def encode_pgm(bitmap: Bitmap) -> bytes:
    header = f"P5\n{bitmap.width} {bitmap.height}\n255\n".encode("ascii")
    return header + bitmap.to_bytes()


def write_pgm(path: Union[str, Path], bitmap: Bitmap) -> None:
    Path(path).write_bytes(encode_pgm(bitmap))


def _skip_space(data: bytes, offset: int) -> int:
    while offset < len(data):
        byte = data[offset:offset + 1]
        if byte == b"#":
            end = data.find(b"\n", offset)
            offset = len(data) if end < 0 else end + 1
        elif byte.isspace():
            offset += 1
        else:
            break
    return offset


def _read_int(data: bytes, offset: int, what: str):
    offset = _skip_space(data, offset)
    start = offset
    while offset < len(data) and data[offset:offset + 1].isdigit():
        offset += 1
    if offset == start:
        raise PgmFormatError(start, f"expected {what}")
    return int(data[start:offset]), offset


def decode_pgm(data: bytes, polarity: str = "dark-on-light") -> Bitmap:
    if data[:2] != b"P5":
        raise PgmFormatError(0, "missing P5 magic")
    width, offset = _read_int(data, 2, "width")
    height, offset = _read_int(data, offset, "height")
    maxval, offset = _read_int(data, offset, "maxval")
    if width <= 0 or height <= 0:
        raise PgmFormatError(offset, f"non-positive size {width}x{height}")
    if maxval != 255:
        raise PgmFormatError(offset, f"maxval {maxval} unsupported (need 255)")
    if offset >= len(data) or not data[offset:offset + 1].isspace():
        raise PgmFormatError(offset, "expected single whitespace before raster")
    offset += 1
    expected = width * height
    if len(data) - offset < expected:
        raise PgmFormatError(len(data), f"raster truncated: need {expected} bytes from offset {offset}")
    if len(data) - offset > expected:
        raise PgmFormatError(offset + expected, "trailing bytes after raster")
    samples = np.frombuffer(data, dtype=np.uint8, count=expected, offset=offset).reshape(height, width)
    return Bitmap(samples, polarity)


def read_pgm(path: Union[str, Path], polarity: str = "dark-on-light") -> Bitmap:
    return decode_pgm(Path(path).read_bytes(), polarity)
