"""Exact rationals as "num/den" strings."""

from __future__ import annotations

from fractions import Fraction

from .errors import ValidationError


def format_fraction(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(text, path: str = "value") -> Fraction:
    """Parse ``"p/q"`` or an integer; ``path`` names the field in error messages."""
    if isinstance(text, bool):
        raise ValidationError(f"{path}: expected a rational, got {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValidationError(f"{path}: expected a rational string, got {text!r}")
    num, sep, den = text.strip().partition("/")
    try:
        n = int(num)
        d = int(den) if sep else 1
    except ValueError:
        raise ValidationError(f"{path}: malformed rational {text!r}") from None
    if d == 0:
        raise ValidationError(f"{path}: zero denominator in {text!r}")
    return Fraction(n, d)
