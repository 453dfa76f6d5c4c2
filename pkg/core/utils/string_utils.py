"""
String and Rational Number Utilities

Exact text conversions used by game files, the CLI and the report writers:
- Rational parsing ("p/q", integers, finite decimals)
- Rational vector parsing ("0,1/2,1")
- Canonical rational and float formatting

Usage:
    from core.utils import parse_rational, format_rational

    value = parse_rational("-3/4")
    text = format_rational(value)
"""

import math
import re
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence, Tuple, Union

from core.logger import log

RationalLike = Union[int, Fraction, str, float]

_RATIONAL_PATTERN = re.compile(r"^[+-]?\d+(?:\s*/\s*[+-]?\d+)?$")
_DECIMAL_PATTERN = re.compile(r"^[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$")


def normalize_minus(text: str) -> str:
    """Replace typographic minus signs with ASCII hyphens and strip whitespace."""
    return text.replace("−", "-").replace("–", "-").strip()


def parse_rational(value: RationalLike) -> Fraction:
    """
    Convert a scalar to an exact rational.

    Supports:
    - int and Fraction values
    - strings "p", "p/q" and finite decimals such as "0.25" or "1e-3"
    - floats, read through their shortest decimal representation (0.1 -> 1/10)

    Raises:
        ValueError: If the value is not a finite rational number

    Examples:
        >>> parse_rational("-3/4")
        Fraction(-3, 4)
        >>> parse_rational(0.5)
        Fraction(1, 2)
    """
    if isinstance(value, bool):
        raise ValueError(f"Boolean is not a rational number: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"Non-finite number is not rational: {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        text = normalize_minus(value)
        if _RATIONAL_PATTERN.match(text):
            numerator, _, denominator = text.partition("/")
            if denominator and int(denominator) == 0:
                raise ValueError(f"Zero denominator in {value!r}")
            return Fraction(int(numerator), int(denominator) if denominator else 1)
        if _DECIMAL_PATTERN.match(text):
            return Fraction(text)
        log.warning(f"Rejected rational literal: {value!r}")
        raise ValueError(f"Not a rational literal: {value!r}")
    raise ValueError(f"Unsupported rational value of type {type(value).__name__}: {value!r}")


def parse_rational_vector(text: Union[str, Iterable[RationalLike]]) -> Tuple[Fraction, ...]:
    """
    Parse a comma separated list (or an iterable) of rationals.

    Examples:
        >>> parse_rational_vector("0, 1/2, 1")
        (Fraction(0, 1), Fraction(1, 2), Fraction(1, 1))
    """
    if isinstance(text, str):
        items = [item for item in normalize_minus(text).strip("()[] ").split(",") if item.strip()]
    else:
        items = list(text)
    return tuple(parse_rational(item) for item in items)


def format_rational(value: Union[int, Fraction]) -> str:
    """
    Canonical text for a rational: "p" for integers, "p/q" otherwise.

    Examples:
        >>> format_rational(Fraction(6, 4))
        '3/2'
    """
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_rational_vector(values: Sequence[Union[int, Fraction]]) -> str:
    """Comma separated canonical rationals."""
    return ",".join(format_rational(v) for v in values)


def format_float(value: float) -> str:
    """Round-trippable float text with 17 significant digits."""
    return f"{value:.17g}"


def normalize_label(text: str, prefix: str, aliases: Sequence[str] = ()) -> str:
    """
    Canonicalise an indexed label such as an edge or branch name.

    Accepts the canonical prefix, any alias prefix or a bare index.

    Examples:
        >>> normalize_label("g13", "γ", aliases=("g", "gamma"))
        'γ13'
    """
    cleaned = text.strip()
    for candidate in sorted((prefix, *aliases), key=len, reverse=True):
        if cleaned.lower().startswith(candidate.lower()) and cleaned[len(candidate) :].isdigit():
            return f"{prefix}{int(cleaned[len(candidate):])}"
    if cleaned.isdigit():
        return f"{prefix}{int(cleaned)}"
    return cleaned
