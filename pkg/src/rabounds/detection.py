"""Exact counting of object-detection output configurations.

Modeling detection as classification over every possible arrangement of
objects (which anchor positions are occupied, and by which class) turns a
detector's output into one label from an enormous but finite alphabet.  The
count is kept as an exact big integer end to end; the only float appears at
the final log2 conversion, which is computed from the bit length plus a
53-bit mantissa so the full integer never passes through double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

__all__ = [
    "DetectionModel",
    "detection_config_count",
    "log2_of_count",
    "sci_notation",
    "bits_per_pixel",
]


@dataclass(frozen=True)
class DetectionModel:
    """Detection-as-classification parameters.

    Attributes:
        positions: anchor positions available per image.
        classes: object classes an occupant may take.
        max_objects: largest number of simultaneous objects, at most
            ``positions``.
    """

    positions: int
    classes: int
    max_objects: int

    def __post_init__(self) -> None:
        if self.positions < 1:
            raise ValueError("positions must be at least 1")
        if self.classes < 1:
            raise ValueError("classes must be at least 1")
        if not 1 <= self.max_objects <= self.positions:
            raise ValueError("max_objects must lie in [1, positions]")


def detection_config_count(model: DetectionModel) -> int:
    """Number of distinct object configurations, exactly.

    Objects occupy distinct positions and each carries one class, with 1 to
    ``max_objects`` objects present (the empty image is excluded):
    sum over i of C(positions, i) * classes**i.
    """
    p, m, n = model.positions, model.classes, model.max_objects
    return sum(math.comb(p, i) * m**i for i in range(1, n + 1))


def log2_of_count(count: int) -> float:
    """log2 of an exact non-negative integer, to ~1e-15 relative accuracy.

    Splits the integer into its bit length and a 54-bit leading mantissa;
    the discarded tail perturbs the result by less than 2**-53, so powers of
    two come out exact at any size.
    """
    if count < 1:
        raise ValueError("count must be a positive integer")
    count = int(count)
    nbits = count.bit_length()
    shift = max(0, nbits - 54)
    return math.log2(float(count >> shift)) + shift


def sci_notation(count: int, sig: int = 2) -> str:
    """Round an exact positive integer to scientific notation.

    Works at any magnitude because the rounding happens in decimal
    arithmetic, never through a float.
    """
    if count < 1:
        raise ValueError("count must be a positive integer")
    if sig < 1:
        raise ValueError("need at least one significant digit")
    exp = len(str(int(count))) - 1
    mantissa = Decimal(int(count)).scaleb(-exp).quantize(
        Decimal(1).scaleb(-(sig - 1)), rounding=ROUND_HALF_UP
    )
    if mantissa >= 10:
        mantissa = mantissa.scaleb(-1).quantize(Decimal(1).scaleb(-(sig - 1)))
        exp += 1
    return f"{mantissa}e{exp:+03d}"


def bits_per_pixel(bits_per_image: float, width: int, height: int) -> float:
    """Convert a per-image bit budget into bits per pixel."""
    if width < 1 or height < 1:
        raise ValueError("width and height must be at least 1 pixel")
    b = float(bits_per_image)
    if b < 0.0:
        raise ValueError("bits_per_image must be non-negative")
    return b / (width * height)
