"""Exact rational arithmetic: the numeric substrate for the whole pipeline.

All geometry is carried in arbitrary-precision rationals (gmpy2.mpq), which
are always stored in lowest terms with positive denominator.  Nothing in the
geometric pipeline ever rounds.
"""

from __future__ import annotations

from gmpy2 import mpq, mpz

from .errors import InputError

QQ = mpq

ZERO = mpq(0)
ONE = mpq(1)


def rational(value, den=None) -> mpq:
    """Coerce ints, "p/q" strings, or pairs to an exact rational."""
    if den is not None:
        return mpq(value, den)
    if isinstance(value, str):
        return parse_rational(value)
    return mpq(value)


def parse_rational(text: str) -> mpq:
    """Parse the exact text form "p/q" (or "p")."""
    s = text.strip()
    try:
        if "/" in s:
            num, den = s.split("/")
            q = mpq(mpz(num.strip()), mpz(den.strip()))
        else:
            q = mpq(mpz(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"not a rational: {text!r}") from exc
    return q


def format_rational(q) -> str:
    """Exact text form: "p/q", or "p" when the denominator is 1."""
    q = mpq(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def rational_floor(q) -> int:
    return int(q.numerator // q.denominator)


def rational_round(q) -> int:
    """Nearest integer; half-way ties round toward +infinity (deterministic)."""
    q = mpq(q)
    return int((2 * q.numerator + q.denominator) // (2 * q.denominator))
