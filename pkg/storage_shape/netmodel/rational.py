from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable

_RATIONAL_PATTERN = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def parse_rational(text: str) -> Fraction:
    """Parse "p/q" or "p". Decimal and exponent notation are rejected."""
    if not isinstance(text, str):
        raise ValueError(f"exact rational must be a 'p/q' string, got {type(text).__name__}")
    match = _RATIONAL_PATTERN.match(text)
    if not match:
        raise ValueError(f"not an exact rational 'p/q': {text!r}")
    numerator = int(match.group(1))
    denominator = int(match.group(2)) if match.group(2) is not None else 1
    if denominator == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(numerator, denominator)


def format_rational(value: Fraction | int) -> str:
    return str(Fraction(value))


def lcm_of_denominators(values: Iterable[Fraction]) -> int:
    result = 1
    for value in values:
        result = math.lcm(result, Fraction(value).denominator)
    return result

