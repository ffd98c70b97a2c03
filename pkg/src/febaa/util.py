"""Small shared helpers: deterministic rounding, float formatting, checksums."""

import hashlib
import math
from fractions import Fraction
from pathlib import Path


def round_half_up(x: float) -> int:
    """Round to the nearest integer, halves away from zero toward +inf.

    Exact for the rational value the float argument represents, so grid
    ratios like 0.375 behave identically on every platform.
    """
    return int(math.floor(Fraction(x) + Fraction(1, 2)))


def fraction_count(total: int, fraction: float) -> int:
    """Size of a selected subset: round-half-up of fraction * total."""
    return int(math.floor(Fraction(fraction) * total + Fraction(1, 2)))


def fmt_float(x: float) -> str:
    """Lossless, byte-stable float rendering for CSV artifacts."""
    return repr(float(x))


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
