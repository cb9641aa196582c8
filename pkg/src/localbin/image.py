"""Grayscale / binary image containers and Netpbm I/O.

Only 8-bit PGM input (``P2``/``P5``) and bitmap PBM output (``P4``) are
handled. Label convention for :class:`BinaryImage`: ``0`` is foreground
(ink), ``1`` is background. In PBM files foreground is written as bit 1
(black).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FOREGROUND = 0
BACKGROUND = 1


class NetpbmError(ValueError):
    """Base class for Netpbm decoding errors."""


class MalformedHeaderError(NetpbmError):
    pass


class UnsupportedMaxvalError(NetpbmError):
    pass


class TruncatedDataError(NetpbmError):
    pass


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array, dtype=np.uint8)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class GrayImage:
    """H x W grid of gray levels in [0, 255], stored row-major."""

    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        if pixels.ndim != 2 or pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise ValueError(f"expected a non-empty 2-D array, got shape {pixels.shape}")
        if pixels.dtype != np.uint8:
            if pixels.size and (pixels.min() < 0 or pixels.max() > 255):
                raise ValueError("gray levels must lie in [0, 255]")
            if np.issubdtype(pixels.dtype, np.floating) and not np.all(pixels == np.round(pixels)):
                raise ValueError("gray levels must be integers")
        object.__setattr__(self, "pixels", _frozen(pixels))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __repr__(self):
        return f"GrayImage({self.height}x{self.width})"


@dataclass(frozen=True, eq=False)
class BinaryImage:
    """H x W grid of labels; 0 = foreground, 1 = background."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {labels.shape}")
        if labels.dtype == np.uint8:
            valid = labels.max(initial=0) <= 1  # no H x W temporaries
        else:
            valid = bool(np.all((labels == 0) | (labels == 1)))
        if not valid:
            raise ValueError("labels must be 0 (foreground) or 1 (background)")
        object.__setattr__(self, "labels", _frozen(labels))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    @property
    def foreground(self) -> np.ndarray:
        """Boolean mask, True where the pixel is ink."""
        return self.labels == FOREGROUND

    def __eq__(self, other):
        if not isinstance(other, BinaryImage):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    def __repr__(self):
        return f"BinaryImage({self.height}x{self.width}, fg={int(self.foreground.sum())})"


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read `count` whitespace separated header tokens, skipping ``#`` comments.

    Returns the tokens and the offset just past the last token.
    """
    tokens = []
    pos = 0
    size = len(data)
    while len(tokens) < count:
        while pos < size and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= size:
            raise MalformedHeaderError("unexpected end of header")
        if data[pos:pos + 1] == b"#":
            while pos < size and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < size and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def _positive_int(token: bytes, what: str) -> int:
    if not token.isdigit():
        raise MalformedHeaderError(f"invalid {what}: {token!r}")
    value = int(token)
    if value < 1:
        raise MalformedHeaderError(f"{what} must be positive, got {value}")
    return value


def read_pgm(data: bytes) -> GrayImage:
    """Decode a binary (P5) or ASCII (P2) PGM with maxval <= 255."""
    if len(data) < 2:
        raise MalformedHeaderError("file too short for a PGM magic number")
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        raise MalformedHeaderError(f"not a PGM file (magic {magic!r})")
    (width_tok, height_tok, maxval_tok), pos = _header_tokens(data[2:], 3)
    pos += 2
    width = _positive_int(width_tok, "width")
    height = _positive_int(height_tok, "height")
    maxval = _positive_int(maxval_tok, "maxval")
    if maxval > 255:
        raise UnsupportedMaxvalError(f"maxval {maxval} exceeds 255; only 8-bit PGM is supported")
    count = width * height

    if magic == b"P5":
        if pos >= len(data) or not data[pos:pos + 1].isspace():
            raise MalformedHeaderError("missing whitespace after maxval")
        body = data[pos + 1:pos + 1 + count]
        if len(body) < count:
            raise TruncatedDataError(f"expected {count} pixel bytes, found {len(body)}")
        pixels = np.frombuffer(body, dtype=np.uint8)
    else:
        fields = data[pos:].split()
        if len(fields) < count:
            raise TruncatedDataError(f"expected {count} samples, found {len(fields)}")
        try:
            pixels = np.array([int(f) for f in fields[:count]], dtype=np.int64)
        except ValueError as exc:
            raise MalformedHeaderError(f"non-numeric sample in P2 data: {exc}") from None
    if pixels.max(initial=0) > maxval:
        raise MalformedHeaderError(f"sample exceeds declared maxval {maxval}")
    return GrayImage(pixels.reshape(height, width).astype(np.uint8))


def write_pgm(image: GrayImage) -> bytes:
    """Encode as binary PGM (P5, maxval 255)."""
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    return header + image.pixels.tobytes()


def write_pbm(image: BinaryImage) -> bytes:
    """Encode as binary PBM (P4); foreground becomes bit 1, rows byte-padded."""
    header = f"P4\n{image.width} {image.height}\n".encode("ascii")
    ink = (image.labels == FOREGROUND).astype(np.uint8)
    return header + np.packbits(ink, axis=1).tobytes()
