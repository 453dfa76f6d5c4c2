"""
Core Utilities Package

Provides exact rational text helpers shared by the analysis modules.
"""

from core.utils.string_utils import (
    format_float,
    format_rational,
    format_rational_vector,
    normalize_label,
    normalize_minus,
    parse_rational,
    parse_rational_vector,
)

__all__ = [
    "format_float",
    "format_rational",
    "format_rational_vector",
    "normalize_label",
    "normalize_minus",
    "parse_rational",
    "parse_rational_vector",
]
