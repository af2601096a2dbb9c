"""
Grayscale PGM images (P2 plain and P5 raw, maxval 255).

An incomplete image is stored as two files of identical size: the image
itself and a mask in which 255 marks an observed pixel and 0 a missing one.
"""

from __future__ import annotations

import logging
import re
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray

from rmps.services.completion import MaskedMatrix

logger = logging.getLogger(__name__)

MAXVAL = 255

_TOKEN = re.compile(rb"#[^\n]*|\S+")


class PGMFormatError(ValueError):
    """Raised for malformed or unsupported PGM data."""


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read ``count`` header tokens, skipping comments; return them and the end offset."""
    tokens: list[bytes] = []
    position = 0
    while len(tokens) < count:
        match = _TOKEN.search(data, position)
        if match is None:
            raise PGMFormatError("Truncated PGM header")
        position = match.end()
        if not match.group().startswith(b"#"):
            tokens.append(match.group())
    return tokens, position


def parse_pgm(data: bytes) -> NDArray[np.int64]:
    """
    Decode PGM bytes into an integer matrix of shape ``(rows, cols)``.

    Raises:
        PGMFormatError: Unknown magic number, malformed header, maxval other
            than 255, or a raster of the wrong size.
    """
    (magic, *size), offset = _header_tokens(data, 4)
    if magic not in (b"P2", b"P5"):
        raise PGMFormatError(f"Unsupported PGM magic number {magic!r}")
    try:
        width, height, maxval = (int(token) for token in size)
    except ValueError as exc:
        raise PGMFormatError(f"Malformed PGM header: {exc}") from exc
    if width < 1 or height < 1:
        raise PGMFormatError(f"Invalid PGM size {width}x{height}")
    if maxval != MAXVAL:
        raise PGMFormatError(f"Only maxval {MAXVAL} is supported, got {maxval}")

    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        raster = data[offset + 1 : offset + 1 + width * height]
        if len(raster) != width * height:
            raise PGMFormatError(
                f"P5 raster holds {len(raster)} bytes, expected {width * height}"
            )
        pixels = np.frombuffer(raster, dtype=np.uint8).astype(np.int64)
    else:
        body = [token for token in _TOKEN.findall(data, offset) if not token.startswith(b"#")]
        if len(body) != width * height:
            raise PGMFormatError(f"P2 raster holds {len(body)} values, expected {width * height}")
        try:
            pixels = np.array([int(token) for token in body], dtype=np.int64)
        except ValueError as exc:
            raise PGMFormatError(f"Malformed P2 pixel value: {exc}") from exc
        if np.any((pixels < 0) | (pixels > MAXVAL)):
            raise PGMFormatError(f"P2 pixel values must lie in [0, {MAXVAL}]")
    return pixels.reshape(height, width)


def read_pgm_matrix(path: str | Path) -> NDArray[np.int64]:
    """Read a single PGM file into an integer matrix."""
    try:
        return parse_pgm(Path(path).read_bytes())
    except PGMFormatError as exc:
        raise PGMFormatError(f"{path}: {exc}") from exc


def read_pgm(image_path: str | Path, mask_path: str | Path) -> MaskedMatrix:
    """
    Read an image and its observation mask.

    Raises:
        PGMFormatError: Either file is malformed, the sizes differ, or the
            mask contains values other than 0 and 255.
    """
    image = read_pgm_matrix(image_path)
    mask = read_pgm_matrix(mask_path)
    if image.shape != mask.shape:
        raise PGMFormatError(
            f"Image {image_path} is {image.shape[1]}x{image.shape[0]} but mask "
            f"{mask_path} is {mask.shape[1]}x{mask.shape[0]}"
        )
    if np.any((mask != 0) & (mask != MAXVAL)):
        raise PGMFormatError(f"Mask {mask_path} may only contain 0 (missing) and 255 (observed)")
    observed = mask == MAXVAL
    logger.debug(
        "Read %s: %dx%d, %d missing pixels",
        image_path, image.shape[1], image.shape[0], int((~observed).sum()),
    )
    return MaskedMatrix(values=image.astype(float), mask=observed)


def write_pgm(matrix: ArrayLike, path: str | Path, *, binary: bool = False) -> Path:
    """
    Write a matrix as a PGM image (plain P2 by default), rounding values to
    the nearest integer and clipping them into ``[0, 255]``.
    """
    pixels = np.clip(np.rint(np.asarray(matrix, dtype=float)), 0, MAXVAL).astype(np.uint8)
    if pixels.ndim != 2:
        raise PGMFormatError(f"Expected a 2-D matrix, got shape {pixels.shape}")
    height, width = pixels.shape
    target = Path(path)
    if binary:
        target.write_bytes(f"P5\n{width} {height}\n{MAXVAL}\n".encode("ascii") + pixels.tobytes())
    else:
        rows = "\n".join(" ".join(str(v) for v in row) for row in pixels)
        target.write_text(f"P2\n{width} {height}\n{MAXVAL}\n{rows}\n", encoding="ascii")
    return target
