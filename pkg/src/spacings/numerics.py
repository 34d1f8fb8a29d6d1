"""Exact and multi-precision number plumbing.

Exact quantities are :class:`fractions.Fraction` instances (always in lowest
terms).  Real quantities are :class:`mpmath.mpf` values; every function that
produces one takes an explicit ``prec`` in bits and rounds to it.  An ``mpf``
keeps its mantissa after the working-precision context is left, so a value
produced at 256 bits stays a 256-bit value.

Note that mpmath's working precision is a process-global setting; the real
valued routines here are not meant to be driven from several threads at once.
"""
from __future__ import annotations

import math
import os
from collections.abc import Iterable
from fractions import Fraction

import mpmath
from mpmath import libmp

ExactRational = Fraction
BigReal = mpmath.mpf

MIN_PRECISION = 64
DEFAULT_PRECISION = 256
PRECISION_ENV = "SPACINGS_PRECISION_BITS"


def default_precision() -> int:
    """Working precision from ``$SPACINGS_PRECISION_BITS`` or 256."""
    raw = os.environ.get(PRECISION_ENV)
    if not raw:
        return DEFAULT_PRECISION
    return check_precision(int(raw))


def check_precision(prec: int) -> int:
    if prec < MIN_PRECISION:
        raise ValueError(f"precision must be at least {MIN_PRECISION} bits, got {prec}")
    return int(prec)


def as_fraction(value) -> Fraction:
    """Exact conversion of ints, Fractions, decimal strings, "p/q" strings,
    floats and mpf values (the latter two are dyadic, hence exact)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, mpmath.mpf):
        sign, man, exp, _ = value._mpf_
        if not man:
            if value != 0:
                raise ValueError(f"cannot convert {value} to a rational")
            return Fraction(0)
        man = int(man)
        if sign:
            man = -man
        return Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2**-exp)
    raise TypeError(f"cannot convert {type(value).__name__} to Fraction")


def rational_to_real(q, prec: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """Round ``q`` to nearest at ``prec`` bits."""
    check_precision(prec)
    q = as_fraction(q)
    raw = libmp.from_rational(q.numerator, q.denominator, prec, libmp.round_nearest)
    with mpmath.workprec(prec):
        return mpmath.mpf(raw)


def to_real(value, prec: int = DEFAULT_PRECISION) -> mpmath.mpf:
    if isinstance(value, mpmath.mpf):
        with mpmath.workprec(prec):
            return +value
    return rational_to_real(as_fraction(value), prec)


def compensated_sum(xs: Iterable, prec: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """Neumaier-compensated summation at ``prec`` bits."""
    with mpmath.workprec(prec):
        total = mpmath.mpf(0)
        carry = mpmath.mpf(0)
        for x in xs:
            x = mpmath.mpf(x)
            t = total + x
            if abs(total) >= abs(x):
                carry += (total - t) + x
            else:
                carry += (x - t) + total
            total = t
        return total + carry


def ulp(x: mpmath.mpf, prec: int) -> mpmath.mpf:
    """Unit in the last place of ``x`` at ``prec`` bits."""
    if x == 0:
        return mpmath.mpf(0)
    _, exp = mpmath.frexp(x)
    return mpmath.ldexp(1, int(exp) - prec)


def log2_abs(x) -> float:
    """log2 |x| as a float (-inf for zero), safe for huge exponents."""
    if isinstance(x, Fraction):
        if x == 0:
            return -math.inf
        return _log2_int(abs(x.numerator)) - _log2_int(x.denominator)
    if x == 0:
        return -math.inf
    mant, exp = mpmath.frexp(abs(mpmath.mpf(x)))
    return math.log2(float(mant)) + int(exp)


def _log2_int(k: int) -> float:
    shift = max(k.bit_length() - 60, 0)
    return math.log2(k >> shift) + shift


def format_rational(q: Fraction) -> str:
    """"p/q", or "p" when the denominator is one."""
    return str(q)


def format_real(x, prec: int = DEFAULT_PRECISION, digits: int | None = None) -> str:
    """Decimal rendering with as many significant digits as ``prec`` supports.

    Fixed notation for moderate magnitudes, scientific for very small or large ones.
    """
    if digits is None:
        digits = max(1, int(prec * math.log10(2)))
    with mpmath.workprec(prec + 8):
        return mpmath.nstr(mpmath.mpf(x), digits, strip_zeros=False)


def fraction_to_decimal(q: Fraction, digits: int = 20) -> str:
    return format_real(rational_to_real(q, max(MIN_PRECISION, int(digits * 3.33) + 16)),
                       digits=digits)
