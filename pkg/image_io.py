"""
Image Input/Output

Portable graymap/pixmap files (P5/P6, 8 or 16 bit) are read and written by a
small numpy codec so that pattern files are bit exact. Other formats (PNG,
BMP, JPEG, ...) go through pygame's image module.

Values are clamped to [0, 1] and quantized exactly once, when written.

Author: CodeWithEzeh
Date: November 2025
"""

import logging
import os
from pathlib import Path

import numpy as np

from constants import *
from core import ImagePlane
from errors import ImageIOError, InvalidArgumentError

os.environ.setdefault("PYGAME_HIDE_SUPPORT_PROMPT", "1")
import pygame  # noqa: E402

logger = logging.getLogger(__name__)

PNM_SUFFIXES = (".pgm", ".ppm", ".pnm")
_WHITESPACE = b" \t\r\n\x0b\x0c"


def _read_pnm_header(blob):
    """
    Parse the four header fields of a binary PNM file.

    Returns:
        tuple: (magic, width, height, maxval, offset of the pixel data)
    """
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(blob) and blob[pos:pos + 1] in _WHITESPACE:
            pos += 1
        if pos >= len(blob):
            raise ImageIOError("truncated PNM header")
        if blob[pos:pos + 1] == b"#":
            end = blob.find(b"\n", pos)
            pos = len(blob) if end < 0 else end + 1
            continue
        start = pos
        while pos < len(blob) and blob[pos:pos + 1] not in _WHITESPACE and blob[pos:pos + 1] != b"#":
            pos += 1
        fields.append(blob[start:pos].decode("ascii", errors="replace"))
    # exactly one whitespace byte separates maxval from the raster
    pos += 1
    magic = fields[0]
    if magic not in ("P5", "P6"):
        raise ImageIOError(f"unsupported PNM type {magic!r}, expected P5 or P6")
    try:
        width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    except ValueError:
        raise ImageIOError(f"malformed PNM header {fields}") from None
    if width < 1 or height < 1 or not (0 < maxval < 65536):
        raise ImageIOError(f"invalid PNM dimensions or maxval {fields[1:]}")
    return magic, width, height, maxval, pos


def decode_pnm(blob):
    """
    Decode a binary PGM/PPM file.

    Args:
        blob (bytes): File contents

    Returns:
        ImagePlane: Values scaled by 1/maxval
    """
    magic, width, height, maxval, offset = _read_pnm_header(blob)
    channels = 1 if magic == "P5" else 3
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height * channels
    if len(blob) - offset < count * dtype.itemsize:
        raise ImageIOError(f"PNM raster truncated: expected {count * dtype.itemsize} bytes")
    raster = np.frombuffer(blob, dtype=dtype, count=count, offset=offset).astype(np.float64)
    shape = (height, width) if channels == 1 else (height, width, 3)
    return ImagePlane(raster.reshape(shape) / maxval)


def encode_pnm(image, bits=PATTERN_BITS):
    """
    Encode an image as binary PGM (gray) or PPM (RGB).

    Args:
        image (ImagePlane): Image to encode
        bits (int): 8 or 16

    Returns:
        bytes
    """
    if bits not in (8, 16):
        raise InvalidArgumentError(f"bit depth must be 8 or 16, got {bits}")
    maxval = (1 << bits) - 1
    quantized = np.round(np.clip(image.values, 0.0, 1.0) * maxval)
    dtype = ">u2" if bits == 16 else "u1"
    magic = "P5" if image.channels == 1 else "P6"
    header = f"{magic}\n{image.cols} {image.rows}\n{maxval}\n".encode("ascii")
    return header + quantized.astype(dtype).tobytes()


def read_image(path):
    """
    Load an image file.

    Args:
        path (str or Path): PNM file, or any format pygame can load

    Returns:
        ImagePlane: Gray when all channels agree, RGB otherwise
    """
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise ImageIOError(f"cannot read image {path}: {exc.strerror}") from None
    if path.suffix.lower() in PNM_SUFFIXES or blob[:2] in (b"P5", b"P6"):
        try:
            return decode_pnm(blob)
        except ImageIOError as exc:
            raise ImageIOError(f"{path}: {exc}") from None
    try:
        surface = pygame.image.load(str(path))
    except pygame.error as exc:
        raise ImageIOError(f"cannot decode image {path}: {exc}") from None
    rgb = pygame.surfarray.array3d(surface).transpose(1, 0, 2).astype(np.float64) / 255.0
    if np.array_equal(rgb[:, :, 0], rgb[:, :, 1]) and np.array_equal(rgb[:, :, 0], rgb[:, :, 2]):
        return ImagePlane(rgb[:, :, 0])
    return ImagePlane(rgb)


def write_image(path, image, bits=PATTERN_BITS):
    """
    Save an image, clamped to [0, 1].

    PNM suffixes keep the requested bit depth; other formats are written by
    pygame at 8 bits.

    Args:
        path (str or Path): Destination file
        image (ImagePlane): Image to save
        bits (int): 8 or 16 for PNM files
    """
    path = Path(path)
    try:
        if path.suffix.lower() in PNM_SUFFIXES:
            path.write_bytes(encode_pnm(image, bits))
            return
        if bits != 8:
            logger.debug("%s: non-PNM formats are written at 8 bits", path)
        rgb = np.round(np.clip(image.values, 0.0, 1.0) * 255).astype(np.uint8)
        if rgb.ndim == 2:
            rgb = np.repeat(rgb[:, :, None], 3, axis=2)
        surface = pygame.surfarray.make_surface(rgb.transpose(1, 0, 2))
        pygame.image.save(surface, str(path))
    except OSError as exc:
        raise ImageIOError(f"cannot write image {path}: {exc.strerror}") from None
    except pygame.error as exc:
        raise ImageIOError(f"cannot write image {path}: {exc}") from None
