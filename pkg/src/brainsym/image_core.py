"""
Pixel containers and Netpbm (PGM/PPM) I/O.

Coordinates follow the usual raster convention: ``x`` is the column index
growing rightward, ``y`` the row index growing downward. Arrays are stored
row-major with shape ``(height, width)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, MalformedHeader, TruncatedData, ValueOutOfRange

__all__ = [
    "GrayImage",
    "RgbImage",
    "BinaryMask",
    "round_half_up",
    "to_grayscale",
    "read_pgm",
    "read_ppm",
    "read_pnm",
    "write_pgm",
    "write_ppm",
    "write_ppm_overlay",
]

_WHITESPACE = b" \t\n\r\v\f"


def round_half_up(values):
    """Round to nearest integer with ties going up (``floor(v + 0.5)``)."""
    return np.floor(np.asarray(values, dtype=np.float64) + 0.5)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit grayscale raster; ``pixels`` has shape ``(height, width)``."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatch(f"expected a non-empty 2-D array, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            if arr.size and (np.any(arr < 0) or np.any(arr > 255)):
                raise ValueOutOfRange("gray intensities must lie in [0, 255]")
            if np.issubdtype(arr.dtype, np.floating) and not np.all(arr == np.round(arr)):
                raise ValueOutOfRange("gray intensities must be integers")
            arr = arr.astype(np.uint8)
        object.__setattr__(self, "pixels", _frozen(arr))

    @classmethod
    def from_flat(cls, width: int, height: int, values) -> "GrayImage":
        values = np.asarray(values)
        if values.size != width * height:
            raise DimensionMismatch(f"{values.size} samples for a {width}x{height} image")
        return cls(values.reshape(height, width))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self):
        return self.pixels.shape

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.pixels, other.pixels))

    def __repr__(self):
        return f"GrayImage(width={self.width}, height={self.height})"


@dataclass(frozen=True, eq=False)
class RgbImage:
    """8-bit RGB raster; ``pixels`` has shape ``(height, width, 3)``."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatch(f"expected shape (h, w, 3), got {arr.shape}")
        if arr.dtype != np.uint8:
            if np.any(arr < 0) or np.any(arr > 255):
                raise ValueOutOfRange("channel values must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        object.__setattr__(self, "pixels", _frozen(arr))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other):
        if not isinstance(other, RgbImage):
            return NotImplemented
        return bool(np.array_equal(self.pixels, other.pixels))

    def __repr__(self):
        return f"RgbImage(width={self.width}, height={self.height})"


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Boolean raster; ``bits`` has shape ``(height, width)``."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bits)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatch(f"expected a non-empty 2-D array, got shape {arr.shape}")
        object.__setattr__(self, "bits", _frozen(arr.astype(bool)))

    @classmethod
    def empty(cls, width: int, height: int):
        return cls(np.zeros((height, width), dtype=bool))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def shape(self):
        return self.bits.shape

    def count(self) -> int:
        return int(np.count_nonzero(self.bits))

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.bits, other.bits))

    def __repr__(self):
        return f"{type(self).__name__}(width={self.width}, height={self.height}, count={self.count()})"


def to_grayscale(img: RgbImage) -> GrayImage:
    """BT.601 luma, rounded half-up."""
    rgb = img.pixels.astype(np.float64)
    luma = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return GrayImage(np.clip(round_half_up(luma), 0, 255).astype(np.uint8))


# ---------------------------------------------------------------------------
# Netpbm parsing
# ---------------------------------------------------------------------------

class _Tokenizer:
    """Whitespace/comment-aware reader over a Netpbm byte string."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def _skip(self):
        data, n = self.data, len(self.data)
        while self.pos < n:
            c = data[self.pos]
            if c in _WHITESPACE:
                self.pos += 1
            elif c == ord("#"):
                while self.pos < n and data[self.pos] not in b"\r\n":
                    self.pos += 1
            else:
                break

    def token(self):
        self._skip()
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos] not in _WHITESPACE \
                and self.data[self.pos] != ord("#"):
            self.pos += 1
        return self.data[start:self.pos] if self.pos > start else None

    def header_int(self, what: str) -> int:
        tok = self.token()
        if tok is None or not tok.isdigit():
            raise MalformedHeader(f"invalid or missing {what}: {tok!r}")
        return int(tok)


def _parse_header(data: bytes, magics):
    if not isinstance(data, (bytes, bytearray, memoryview)):
        raise TypeError("expected a byte sequence")
    data = bytes(data)
    if len(data) < 2 or data[:2] not in magics:
        raise MalformedHeader(f"bad magic number {data[:2]!r}")
    tok = _Tokenizer(data)
    tok.pos = 2
    if tok.pos < len(data) and data[tok.pos] not in _WHITESPACE and data[tok.pos] != ord("#"):
        raise MalformedHeader("magic number must be followed by whitespace")
    width = tok.header_int("width")
    height = tok.header_int("height")
    maxval = tok.header_int("maxval")
    if width < 1 or height < 1:
        raise MalformedHeader(f"non-positive dimensions {width}x{height}")
    if not 1 <= maxval <= 65535:
        raise MalformedHeader(f"maxval {maxval} outside [1, 65535]")
    return data[:2], width, height, maxval, tok


def _read_samples(tok: _Tokenizer, magic: bytes, count: int, maxval: int) -> np.ndarray:
    if magic in (b"P2", b"P3"):
        values = np.empty(count, dtype=np.int64)
        for i in range(count):
            t = tok.token()
            if t is None:
                raise TruncatedData(f"expected {count} samples, found {i}")
            if not t.isdigit():
                raise ValueOutOfRange(f"sample {t!r} is not a non-negative integer")
            values[i] = int(t)
    else:
        # exactly one whitespace byte separates maxval from the raster
        if tok.pos >= len(tok.data) or tok.data[tok.pos] not in _WHITESPACE:
            raise MalformedHeader("maxval must be followed by a single whitespace byte")
        start = tok.pos + 1
        nbytes = 1 if maxval < 256 else 2
        payload = tok.data[start:start + count * nbytes]
        if len(payload) < count * nbytes:
            raise TruncatedData(f"expected {count * nbytes} raster bytes, found {len(payload)}")
        dtype = np.uint8 if nbytes == 1 else ">u2"
        values = np.frombuffer(payload, dtype=dtype).astype(np.int64)
    if values.size and values.max() > maxval:
        raise ValueOutOfRange(f"sample {int(values.max())} exceeds maxval {maxval}")
    if maxval != 255:
        values = (values * 510 + maxval) // (2 * maxval)
    return values.astype(np.uint8)


def read_pgm(data: bytes) -> GrayImage:
    """Parse a P2 (ASCII) or P5 (binary) graymap."""
    magic, width, height, maxval, tok = _parse_header(data, (b"P2", b"P5"))
    values = _read_samples(tok, magic, width * height, maxval)
    return GrayImage(values.reshape(height, width))


def read_ppm(data: bytes) -> RgbImage:
    """Parse a P3 (ASCII) or P6 (binary) pixmap."""
    magic, width, height, maxval, tok = _parse_header(data, (b"P3", b"P6"))
    values = _read_samples(tok, magic, width * height * 3, maxval)
    return RgbImage(values.reshape(height, width, 3))


def read_pnm(data: bytes) -> GrayImage:
    """Read any supported Netpbm image; color inputs are converted to gray."""
    head = bytes(data[:2])
    if head in (b"P3", b"P6"):
        return to_grayscale(read_ppm(data))
    return read_pgm(data)


# ---------------------------------------------------------------------------
# Netpbm writing
# ---------------------------------------------------------------------------

def write_pgm(img: GrayImage, binary: bool = True) -> bytes:
    header = b"%s\n%d %d\n255\n" % (b"P5" if binary else b"P2", img.width, img.height)
    if binary:
        return header + img.pixels.tobytes()
    rows = (" ".join(str(v) for v in row) for row in img.pixels.tolist())
    return header + ("\n".join(rows) + "\n").encode("ascii")


def write_ppm(img: RgbImage) -> bytes:
    return b"P6\n%d %d\n255\n" % (img.width, img.height) + img.pixels.tobytes()


def write_ppm_overlay(img: GrayImage, mask: BinaryMask, axis_trace: BinaryMask | None = None) -> bytes:
    """Render ``img`` as P6 with ``mask`` in red and ``axis_trace`` in green on top."""
    if mask.shape != img.shape:
        raise DimensionMismatch(f"mask {mask.shape} vs image {img.shape}")
    if axis_trace is not None and axis_trace.shape != img.shape:
        raise DimensionMismatch(f"axis trace {axis_trace.shape} vs image {img.shape}")
    rgb = np.repeat(img.pixels[..., None], 3, axis=2)
    rgb[mask.bits] = (255, 0, 0)
    if axis_trace is not None:
        rgb[axis_trace.bits] = (0, 255, 0)
    return write_ppm(RgbImage(rgb))
