"""
Hyper-rectangle search domains.

A problem is posed on a box ``[a_1, b_1] x ... x [a_n, b_n]`` and solved on
the unit cube ``[0, 1]^n``.  This module owns the box type, the affine
bijection between the two and the decimal rounding used to compare run
solutions.  Everything here is a pure function of immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal, localcontext
from functools import cached_property
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

UnitPoint = NDArray[np.float64]
"""A point of the unit cube, every coordinate in ``[0, 1]``."""


class DomainError(ValueError):
    """Raised for malformed boxes, dimension mismatches and points outside a box."""


@dataclass(frozen=True)
class Box:
    """
    Closed, bounded hyper-rectangle ``prod_i [lower_i, upper_i]``.

    Bounds are stored as tuples so that a box is hashable and immutable;
    :attr:`lower_array`, :attr:`upper_array` and :attr:`widths` give cached
    numpy views for arithmetic.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self) -> None:
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        if len(lower) != len(upper):
            raise DomainError(
                f"Box bounds differ in length: {len(lower)} lower vs {len(upper)} upper"
            )
        if not lower:
            raise DomainError("Box must have at least one dimension")
        if not all(np.isfinite(lower)) or not all(np.isfinite(upper)):
            raise DomainError("Box bounds must be finite")
        for i, (a, b) in enumerate(zip(lower, upper)):
            if not a < b:
                raise DomainError(f"Box interval {i} is empty or degenerate: [{a}, {b}]")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def cube(cls, low: float, high: float, dimension: int) -> Box:
        """Return ``[low, high]^dimension``."""
        if dimension < 1:
            raise DomainError(f"Box dimension must be >= 1, got {dimension}")
        return cls(lower=(low,) * dimension, upper=(high,) * dimension)

    @classmethod
    def unit(cls, dimension: int) -> Box:
        """Return the unit cube ``[0, 1]^dimension``."""
        return cls.cube(0.0, 1.0, dimension)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @cached_property
    def lower_array(self) -> NDArray[np.float64]:
        return np.asarray(self.lower, dtype=float)

    @cached_property
    def upper_array(self) -> NDArray[np.float64]:
        return np.asarray(self.upper, dtype=float)

    @cached_property
    def widths(self) -> NDArray[np.float64]:
        return self.upper_array - self.lower_array

    def contains(self, z: ArrayLike) -> bool:
        """True when ``z`` has the box's dimension and lies inside it."""
        point = np.asarray(z, dtype=float)
        if point.shape != (self.dimension,):
            return False
        return bool(np.all(point >= self.lower_array) and np.all(point <= self.upper_array))

    def __str__(self) -> str:
        if len(set(self.lower)) == 1 and len(set(self.upper)) == 1:
            return f"[{self.lower[0]:g}, {self.upper[0]:g}]^{self.dimension}"
        intervals = " x ".join(f"[{a:g}, {b:g}]" for a, b in zip(self.lower, self.upper))
        return intervals


def _as_vector(z: ArrayLike, dimension: int, what: str) -> NDArray[np.float64]:
    vector = np.asarray(z, dtype=float)
    if vector.ndim != 1 or vector.shape[0] != dimension:
        raise DomainError(
            f"{what} has shape {vector.shape}, expected ({dimension},)"
        )
    return vector


def to_unit(box: Box, z: ArrayLike) -> UnitPoint:
    """
    Map a point of ``box`` onto the unit cube.

    ``g_i(z) = (z_i - a_i) / (b_i - a_i)``, clamped into ``[0, 1]`` to absorb
    floating-point drift at the endpoints.

    Raises:
        DomainError: ``z`` has the wrong dimension or lies outside ``box``.
    """
    point = _as_vector(z, box.dimension, "Point")
    outside = (point < box.lower_array) | (point > box.upper_array) | ~np.isfinite(point)
    if np.any(outside):
        index = int(np.flatnonzero(outside)[0])
        raise DomainError(
            f"Point coordinate {index} = {point[index]!r} lies outside "
            f"[{box.lower[index]}, {box.upper[index]}]"
        )
    return np.clip((point - box.lower_array) / box.widths, 0.0, 1.0)


def from_unit(box: Box, u: ArrayLike) -> NDArray[np.float64]:
    """
    Map a unit-cube point back into ``box``: ``z_i = a_i + u_i (b_i - a_i)``.

    Raises:
        DomainError: ``u`` has the wrong dimension.
    """
    point = _as_vector(u, box.dimension, "Unit point")
    return box.lower_array + point * box.widths


def round_point(u: Sequence[float] | UnitPoint, digits: int) -> UnitPoint:
    """
    Round every coordinate to ``digits`` decimal places, half away from zero.

    Rounding is done on the shortest decimal representation of each float,
    so ``0.9999995`` rounds up to ``1.0`` at six digits instead of following
    the binary expansion.
    """
    if digits < 0:
        raise DomainError(f"Rounding digits must be >= 0, got {digits}")
    quantum = Decimal(1).scaleb(-digits)
    # quantize fails once the result needs more digits than the context holds
    with localcontext() as ctx:
        ctx.prec = max(28, digits + 20)
        rounded = [
            float(Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_UP))
            for value in np.asarray(u, dtype=float).ravel()
        ]
    return np.asarray(rounded, dtype=float)
