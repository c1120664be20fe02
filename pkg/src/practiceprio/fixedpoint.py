"""Exact millipoint arithmetic for influence scores.

Scores are held as ``int`` millipoints (``2.5`` -> ``2500``). Weights, costs and
objective values are :class:`fractions.Fraction`, so every comparison made by
the optimizers is exact.
"""
from __future__ import annotations

from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Union

Number = Union[int, str, Decimal, Fraction, float]

MILLI = 1000


def parse_decimal(text: str) -> Fraction:
    """Parse a plain decimal literal into an exact fraction."""
    try:
        d = Decimal(text.strip())
    except InvalidOperation:
        raise ValueError(f"not a decimal number: {text!r}") from None
    if not d.is_finite():
        raise ValueError(f"not a finite number: {text!r}")
    return Fraction(d)


def to_fraction(x: Number) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        # repr round-trips, so 2.5 stays 2.5 and 0.1 becomes 1/10
        return parse_decimal(repr(x))
    if isinstance(x, Decimal):
        return Fraction(x)
    return parse_decimal(str(x))


def to_millis(x: Number) -> int:
    """Convert a number to millipoints, rejecting anything finer than 0.001."""
    scaled = to_fraction(x) * MILLI
    if scaled.denominator != 1:
        raise ValueError(f"{x!r} has more than 3 fractional digits")
    return scaled.numerator


def round_half_away(value: Fraction) -> int:
    """Round to the nearest integer, ties away from zero."""
    sign = -1 if value < 0 else 1
    mag = abs(value)
    whole, rem = divmod(mag.numerator, mag.denominator)
    if 2 * rem >= mag.denominator:
        whole += 1
    return sign * whole


def format_millis(m: int) -> str:
    """Shortest exact decimal text for a millipoint value (``2500`` -> ``"2.5"``)."""
    sign = "-" if m < 0 else ""
    whole, frac = divmod(abs(m), MILLI)
    if frac == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:03d}".rstrip("0")


def format_fraction(x: Fraction) -> str:
    """Exact decimal text when the fraction terminates, else the float repr."""
    den = x.denominator
    for p in (2, 5):
        while den % p == 0:
            den //= p
    if den != 1:
        return repr(float(x))
    d = Decimal(x.numerator) / Decimal(x.denominator)
    return format(d.normalize(), "f")


def json_number(x: Fraction) -> int | float:
    """JSON-friendly value: ints stay ints, everything else becomes the nearest float."""
    if x.denominator == 1:
        return x.numerator
    return float(x)
