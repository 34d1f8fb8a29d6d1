"""Generalised harmonic numbers H_{n,r} and the partition sums

    Hs(n, s) = sum over partitions r of s of prod_i H_{n,i}^{r_i} / (r_i! i^{r_i}),

computed three independent ways (partition sum, alternating binomial sum,
convolution recurrence).  The recurrence is the production path; the other two
exist to cross-check it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import gmpy2
import mpmath
from gmpy2 import mpq, mpz

from .combinatorics import partitions
from .numerics import DEFAULT_PRECISION, check_precision, rational_to_real

EXACT_N_LIMIT = 10**4
MAX_PARTITION_ORDER = 30


def _power_sum(lo: int, hi: int, r: int) -> tuple[int, int]:
    """sum_{j=lo}^{hi-1} j^-r as an unreduced (p, q) pair, by binary splitting."""
    if hi - lo == 1:
        return mpz(1), mpz(lo) ** r
    mid = (lo + hi) // 2
    p1, q1 = _power_sum(lo, mid, r)
    p2, q2 = _power_sum(mid, hi, r)
    return p1 * q2 + p2 * q1, q1 * q2


@lru_cache(maxsize=512)
def _harmonic_mpq(n: int, r: int) -> mpq:
    p, q = _power_sum(1, n + 1, r)
    g = gmpy2.gcd(p, q)
    return mpq(p // g, q // g)


def _to_fraction(v: mpq) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


@lru_cache(maxsize=512)
def harmonic(n: int, r: int) -> Fraction:
    """Exact H_{n,r} = sum_{j=1}^n j^-r."""
    if n < 1 or r < 1:
        raise ValueError(f"harmonic: need n >= 1 and r >= 1, got n={n}, r={r}")
    return _to_fraction(_harmonic_mpq(n, r))


def harmonic_real(n: int, r: int, prec: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """H_{n,r} rounded to ``prec`` bits.

    Accumulates floor(2^W / j^r) in a fixed-point integer with
    W = prec + log2(n) + 32, so the only error is at most n truncation units
    of 2^-W before the final rounding.
    """
    if n < 1 or r < 1:
        raise ValueError(f"harmonic_real: need n >= 1 and r >= 1, got n={n}, r={r}")
    check_precision(prec)
    w = prec + n.bit_length() + 32
    one = 1 << w
    acc = 0
    if r == 1:
        for j in range(1, n + 1):
            acc += one // j
    else:
        for j in range(1, n + 1):
            acc += one // j**r
    with mpmath.workprec(prec):
        return mpmath.ldexp(mpmath.mpf(acc), -w)


@dataclass(frozen=True)
class HarmonicTable:
    """H_{n,1..max_order} for one n, exact and (optionally) rounded."""

    n: int
    max_order: int
    values: tuple[Fraction, ...]

    @classmethod
    def build(cls, n: int, max_order: int) -> "HarmonicTable":
        return cls(n, max_order, tuple(harmonic(n, r) for r in range(1, max_order + 1)))

    def __getitem__(self, r: int) -> Fraction:
        if not 1 <= r <= self.max_order:
            raise IndexError(r)
        return self.values[r - 1]

    def real(self, prec: int = DEFAULT_PRECISION) -> tuple[mpmath.mpf, ...]:
        return tuple(rational_to_real(v, prec) for v in self.values)


def script_h_partition(n: int, s: int) -> Fraction:
    if n < 1 or not 1 <= s <= MAX_PARTITION_ORDER:
        raise ValueError(f"script_h_partition: need n >= 1 and 1 <= s <= {MAX_PARTITION_ORDER}")
    h = [harmonic(n, i) for i in range(1, s + 1)]
    total = Fraction(0)
    for r in partitions(s):
        term = Fraction(1)
        for i, ri in enumerate(r, start=1):
            if ri:
                term *= h[i - 1] ** ri / (factorial(ri) * i**ri)
        total += term
    return total


def script_h_alternating(n: int, s: int) -> Fraction:
    """sum_{k=1}^n k^-s C(n,k) (-1)^(k+1)."""
    if n < 1 or s < 1:
        raise ValueError("script_h_alternating: need n >= 1 and s >= 1")
    # common denominator lcm(1..n)^s keeps this a single big-integer sum
    lcm = math.lcm(*range(1, n + 1)) ** s
    num = 0
    for k in range(1, n + 1):
        term = comb(n, k) * (lcm // k**s)
        num += term if k % 2 else -term
    return Fraction(num, lcm)


@lru_cache(maxsize=256)
def script_h_sequence(n: int, s_max: int) -> tuple[Fraction, ...]:
    """(Hs(n,0), ..., Hs(n,s_max)) from s Hs(n,s) = sum_r H_{n,r} Hs(n,s-r)."""
    if n < 1 or s_max < 0:
        raise ValueError("script_h_sequence: need n >= 1 and s_max >= 0")
    # gmpy2 rationals internally: several times faster than Fraction at n ~ 10^4
    h = [None] + [_harmonic_mpq(n, r) for r in range(1, s_max + 1)]
    seq = [mpq(1)]
    for s in range(1, s_max + 1):
        seq.append(sum((h[r] * seq[s - r] for r in range(1, s + 1)), mpq(0)) / s)
    return tuple(_to_fraction(v) for v in seq)


def script_h_recurrence(n: int, s: int) -> Fraction:
    if n < 1 or s < 1:
        raise ValueError("script_h_recurrence: need n >= 1 and s >= 1")
    return script_h_sequence(n, s)[s]


def script_h_real_sequence(n: int, s_max: int, prec: int = DEFAULT_PRECISION) -> list[mpmath.mpf]:
    """Hs(n, 0..s_max) at ``prec`` bits via the recurrence on rounded H_{n,r}.

    The recurrence has only positive terms, so it is well conditioned.
    """
    guard = prec + 32
    h = [None] + [harmonic_real(n, r, guard) for r in range(1, s_max + 1)]
    with mpmath.workprec(guard):
        seq = [mpmath.mpf(1)]
        for s in range(1, s_max + 1):
            seq.append(mpmath.fsum(h[r] * seq[s - r] for r in range(1, s + 1)) / s)
    with mpmath.workprec(prec):
        return [+v for v in seq]
