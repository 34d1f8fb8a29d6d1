"""Exact finite-n law of the largest of n circular uniform spacings.

With n points on a circle of unit perimeter the largest gap d_max has

    P(d_max <= x) = sum_{k=0}^{min(n, floor(1/x))} (-1)^k C(n,k) (1 - kx)^(n-1)

on its support [1/n, 1], and raw moments

    E[d_max^m] = (n-1)! m! / (n+m-1)! * Hs(n, m)

where Hs is the partition sum of harmonic numbers from :mod:`spacings.harmonic`.
Everything here that can be exact is returned as a Fraction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import NamedTuple

import mpmath
import numpy as np
from scipy.special import gammaln

from .harmonic import EXACT_N_LIMIT, harmonic, script_h_real_sequence, script_h_sequence
from .numerics import (
    DEFAULT_PRECISION,
    as_fraction,
    check_precision,
    compensated_sum,
    log2_abs,
    rational_to_real,
)

MAX_MOMENT_ORDER = 30
MAX_QUADRATURE_N = 200
QUANTILE_TOLERANCE = 1e-12
QUANTILE_PRECISION = 128
QUANTILE_MAX_ITER = 200
# beyond this many working bits cdf_real gives up on floats and goes exact
_MAX_ESCALATED_BITS = 1 << 15


class QuadratureError(RuntimeError):
    def __init__(self, message: str, achieved_error):
        super().__init__(message)
        self.achieved_error = achieved_error


class ConvergenceError(RuntimeError):
    pass


class Quadrature(NamedTuple):
    value: mpmath.mpf
    error: mpmath.mpf


def _check_n(n: int) -> None:
    if n < 2:
        raise ValueError(f"need at least two points, got n={n}")


def cdf(n: int, x) -> Fraction:
    """P(d_max <= x), exact."""
    _check_n(n)
    x = as_fraction(x)
    if not 0 <= x <= 1:
        raise ValueError(f"cdf: x must lie in [0, 1], got {x}")
    if x <= Fraction(1, n):
        return Fraction(0)
    kmax = min(n, math.floor(1 / x))
    total = Fraction(0)
    for k in range(kmax + 1):
        term = comb(n, k) * (1 - k * x) ** (n - 1)
        total += -term if k % 2 else term
    return total


def _cdf_terms(n: int, x: Fraction, kmax: int, prec: int) -> list[mpmath.mpf]:
    with mpmath.workprec(prec):
        terms = []
        for k in range(kmax + 1):
            base = rational_to_real(1 - k * x, prec)
            t = comb(n, k) * base ** (n - 1)
            terms.append(-t if k % 2 else t)
        return terms


def cdf_real(n: int, x, prec: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """P(d_max <= x) rounded to ``prec`` bits.

    The alternating sum is accumulated with compensation; whenever the observed
    cancellation (largest term against the result, in bits) would eat into the
    requested precision, the sum is redone at twice the working precision.
    """
    _check_n(n)
    check_precision(prec)
    xq = as_fraction(x)
    if not 0 <= xq <= 1:
        raise ValueError(f"cdf_real: x must lie in [0, 1], got {x}")
    if xq <= Fraction(1, n):
        return mpmath.mpf(0)
    if xq == 1:
        return mpmath.mpf(1)
    kmax = min(n, math.floor(1 / xq))
    work = prec + 32
    while work <= _MAX_ESCALATED_BITS:
        terms = _cdf_terms(n, xq, kmax, work)
        total = compensated_sum(terms, work)
        if total > 0:
            lost = max(log2_abs(t) for t in terms) - log2_abs(total)
            if work - lost >= prec + 16:
                with mpmath.workprec(prec):
                    return +total
        work *= 2
    return rational_to_real(cdf(n, xq), prec)


def cdf_array(n: int, xs) -> np.ndarray:
    """Vectorised float64 cdf for large batches (KS statistics).

    Terms are generated in log space and summed until the unimodal tail is
    negligible.  Points whose largest term makes float cancellation exceed
    1e-12 absolute are recomputed with :func:`cdf_real`.
    """
    _check_n(n)
    xs = np.asarray(xs, dtype=float)
    out = np.zeros_like(xs)
    out[xs >= 1.0] = 1.0
    inside = (xs > 1.0 / n) & (xs < 1.0)
    x = xs[inside]
    if x.size == 0:
        return out
    kmax = np.minimum(n, np.floor(1.0 / x)).astype(np.int64)
    # floor(1/x) in floating point can overshoot by one
    kmax -= (1.0 - kmax * x) < 0
    log_binom = gammaln(n + 1) - gammaln(np.arange(n + 1) + 1) - gammaln(n - np.arange(n + 1) + 1)
    acc = np.ones_like(x)
    comp = np.zeros_like(x)
    biggest = np.ones_like(x)
    prev = np.ones_like(x)
    live = np.ones(x.shape, dtype=bool)
    count = np.ones_like(x)
    for k in range(1, int(kmax.max()) + 1):
        live &= k <= kmax
        if not live.any():
            break
        idx = np.nonzero(live)[0]
        base = 1.0 - k * x[idx]
        with np.errstate(divide="ignore"):
            term = np.exp(log_binom[k] + (n - 1) * np.log(base))
        signed = -term if k % 2 else term
        # Kahan-Babuska step per point
        s = acc[idx]
        t = s + signed
        comp[idx] += np.where(np.abs(s) >= np.abs(signed), (s - t) + signed, (signed - t) + s)
        acc[idx] = t
        biggest[idx] = np.maximum(biggest[idx], term)
        count[idx] += 1
        ratio = np.divide(term, prev[idx], out=np.zeros_like(term), where=prev[idx] > 0)
        prev[idx] = term
        with np.errstate(over="ignore"):
            tail = term * ratio / np.maximum(1.0 - ratio, 1e-300)
        tail_small = (ratio < 1.0) & (tail < 1e-17)
        live[idx[tail_small]] = False
    values = acc + comp
    err = biggest * count * 4.0 * np.finfo(float).eps
    bad = np.nonzero(err > 1e-12)[0]
    for i in bad:
        values[i] = float(cdf_real(n, float(x[i]), 64))
    out[inside] = np.clip(values, 0.0, 1.0)
    return out


def pdf(n: int, x) -> Fraction:
    """Density of d_max; 0 outside (1/n, 1), right limit at the kinks x = 1/k."""
    _check_n(n)
    x = as_fraction(x)
    if not Fraction(1, n) < x < 1:
        return Fraction(0)
    total = Fraction(0)
    k = 1
    while k <= n and k * x < 1:
        term = comb(n, k) * k * (1 - k * x) ** (n - 2)
        total += term if k % 2 else -term
        k += 1
    return (n - 1) * total


def quantile(n: int, p, tolerance: float = QUANTILE_TOLERANCE,
             prec: int = QUANTILE_PRECISION) -> mpmath.mpf:
    """x in [1/n, 1] with |cdf(n, x) - p| <= tolerance, by bisection."""
    _check_n(n)
    p = as_fraction(p)
    if not 0 < p < 1:
        raise ValueError(f"quantile: p must lie in (0, 1), got {p}")
    with mpmath.workprec(prec):
        target = rational_to_real(p, prec)
        tol = mpmath.mpf(tolerance)
        lo, hi = mpmath.mpf(1) / n, mpmath.mpf(1)
        for _ in range(QUANTILE_MAX_ITER):
            mid = (lo + hi) / 2
            f = cdf_real(n, mid, prec)
            if abs(f - target) <= tol:
                return mid
            if f < target:
                lo = mid
            else:
                hi = mid
    raise ConvergenceError(f"quantile(n={n}, p={p}) did not converge in {QUANTILE_MAX_ITER} steps")


def moment_factor(n: int, m: int) -> Fraction:
    """(n-1)! m! / (n+m-1)!"""
    return Fraction(factorial(m), math.prod(range(n, n + m)))


def moment_exact(n: int, m: int) -> Fraction:
    """E[d_max^m] exactly."""
    _check_n(n)
    if not 1 <= m <= MAX_MOMENT_ORDER:
        raise ValueError(f"moment_exact: need 1 <= m <= {MAX_MOMENT_ORDER}, got {m}")
    return moment_factor(n, m) * script_h_sequence(n, m)[m]


def raw_moments_real(n: int, m_max: int, prec: int = DEFAULT_PRECISION,
                     exact_limit: int = EXACT_N_LIMIT) -> list[mpmath.mpf]:
    """E[(n d_max)^k] for k = 0..m_max at ``prec`` bits.

    Exact up to ``exact_limit`` points, otherwise from rounded harmonic numbers.
    """
    _check_n(n)
    if n <= exact_limit:
        hs = script_h_sequence(n, m_max)
        return [rational_to_real(n**k * moment_factor(n, k) * hs[k], prec) for k in range(m_max + 1)]
    hs = script_h_real_sequence(n, m_max, prec + 16)
    with mpmath.workprec(prec + 16):
        vals = [rational_to_real(n**k * moment_factor(n, k), prec + 16) * hs[k] for k in range(m_max + 1)]
    with mpmath.workprec(prec):
        return [+v for v in vals]


def integral_piece(n: int, k: int, nu: int, m: int) -> Fraction:
    """Closed form of int_{1/(nu+1)}^{1/nu} x^m (1-kx)^(n-2) dx."""
    if not (n >= 2 and 1 <= k < n and 1 <= nu < n and k <= nu and m >= 1):
        raise ValueError(f"integral_piece: invalid (n={n}, k={k}, nu={nu}, m={m})")
    total = Fraction(0)
    for mu in range(m + 1):
        e = n + mu - 1
        t = Fraction(1, k * e) * (
            Fraction((nu + 1 - k) ** e, (nu + 1) ** (n + m - 1))
            - Fraction((nu - k) ** e, nu ** (n + m - 1))
        )
        coef = Fraction(factorial(m) * factorial(n - 2),
                        k**mu * factorial(m - mu) * factorial(n + mu - 2))
        total += coef * t
    return total


def integral_piece_quadrature(n: int, k: int, nu: int, m: int, prec: int = 128) -> Quadrature:
    with mpmath.workprec(prec):
        a, b = mpmath.mpf(1) / (nu + 1), mpmath.mpf(1) / nu
        value, err = mpmath.quad(lambda x: x**m * (1 - k * x) ** (n - 2), [a, b],
                                 method="gauss-legendre", error=True)
        return Quadrature(value, err)


def nu_sum_closed(n: int, k: int, m: int) -> Fraction:
    """sum_{nu=k}^{n-1} of the integral pieces, in telescoped closed form."""
    if not (n >= 2 and 1 <= k < n and m >= 1):
        raise ValueError(f"nu_sum_closed: invalid (n={n}, k={k}, m={m})")
    total = Fraction(0)
    for mu in range(m + 1):
        total += Fraction(
            factorial(m) * factorial(n - 2) * (n - k) ** (n + mu - 1),
            k ** (mu + 1) * factorial(m - mu) * factorial(n + mu - 1) * n ** (n + m - 1),
        )
    return total


def moment_from_pieces(n: int, m: int) -> Fraction:
    """The double sum over nu and k of the moment integral, piece by piece."""
    _check_n(n)
    total = Fraction(0)
    for nu in range(1, n):
        for k in range(1, nu + 1):
            term = comb(n, k) * k * integral_piece(n, k, nu, m)
            total += term if k % 2 else -term
    return (n - 1) * total


def moment_from_nu_sums(n: int, m: int) -> Fraction:
    """(n-1) sum_k C(n,k) (-1)^(k+1) k nu_sum_closed(n,k,m)."""
    _check_n(n)
    total = Fraction(0)
    for k in range(1, n):
        term = comb(n, k) * k * nu_sum_closed(n, k, m)
        total += term if k % 2 else -term
    return (n - 1) * total


def moment_via_integration(n: int, m: int, prec: int = 128) -> Quadrature:
    """Moment by Gauss-Legendre quadrature of the density on each [1/(nu+1), 1/nu].

    The reported error adds mpmath's per-interval estimate to a bound on the
    rounding of the alternating integrand and the final rounding to ``prec``.
    """
    _check_n(n)
    if n > MAX_QUADRATURE_N:
        raise ValueError(f"moment_via_integration: n={n} exceeds {MAX_QUADRATURE_N}")
    check_precision(prec)
    work = prec + n + 16
    with mpmath.workprec(work):
        coeffs = [(-1) ** (k + 1) * comb(n, k) * k for k in range(n + 1)]
        pieces, errors = [], []
        for nu in range(1, n):
            def integrand(x, nu=nu):
                return x**m * mpmath.fsum(coeffs[k] * (1 - k * x) ** (n - 2) for k in range(1, nu + 1))
            a, b = mpmath.mpf(1) / (nu + 1), mpmath.mpf(1) / nu
            value, err = mpmath.quad(integrand, [a, b], method="gauss-legendre", error=True)
            pieces.append(value)
            errors.append(err)
        value = (n - 1) * mpmath.fsum(pieces)
        rounding = mpmath.mpf(n) ** 2 * mpmath.ldexp(1, n + 4 - work)
        error = (n - 1) * mpmath.fsum(errors) + rounding
    limit = mpmath.ldexp(1, -prec // 2)
    if error > limit:
        raise QuadratureError(f"moment_via_integration(n={n}, m={m}) reached only {error}", error)
    with mpmath.workprec(prec):
        rounded = +value
        # final rounding to prec bits is part of the reported error
        return Quadrature(rounded, error + abs(rounded - value))


def kth_gap_mean(n: int, k: int) -> Fraction:
    """Mean of the k-th largest gap, (H_n - H_{k-1}) / n."""
    _check_n(n)
    if not 1 <= k <= n:
        raise ValueError(f"kth_gap_mean: need 1 <= k <= n, got k={k}")
    tail = harmonic(n, 1) - (harmonic(k - 1, 1) if k > 1 else 0)
    return tail / n


def min_gap_survival(n: int, y) -> Fraction:
    """P(d_min > y) = (1 - n y)^(n-1) on [0, 1/n], zero beyond."""
    _check_n(n)
    y = as_fraction(y)
    if y < 0:
        raise ValueError(f"min_gap_survival: y must be non-negative, got {y}")
    if y >= Fraction(1, n):
        return Fraction(0)
    return (1 - n * y) ** (n - 1)


@dataclass(frozen=True)
class MaxSpacingLaw:
    """Convenience handle on the law of d_max for a fixed n."""

    n: int

    def __post_init__(self):
        _check_n(self.n)

    @property
    def support(self) -> tuple[Fraction, Fraction]:
        return Fraction(1, self.n), Fraction(1)

    def cdf(self, x) -> Fraction:
        return cdf(self.n, x)

    def pdf(self, x) -> Fraction:
        return pdf(self.n, x)

    def quantile(self, p, tolerance: float = QUANTILE_TOLERANCE) -> mpmath.mpf:
        return quantile(self.n, p, tolerance)

    def moment(self, m: int) -> Fraction:
        return moment_exact(self.n, m)

    def mean(self) -> Fraction:
        return kth_gap_mean(self.n, 1)
