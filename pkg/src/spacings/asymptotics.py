"""Large-n behaviour of n d_max - log n.

The centred and scaled variable has moments converging to those of a standard
Gumbel law: cumulants gamma, zeta(2), 2! zeta(3), ..., (m-1)! zeta(m).  This
module computes both sides (finite-n moments from the exact formula, the
limits from gamma and zeta evaluated in-house) and the Carleman-type bound
showing the limiting moments determine the law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import mpmath
import numpy as np

from .combinatorics import exp_series_coeffs, moments_to_cumulants
from .exactdist import Quadrature, QuadratureError, moment_exact, raw_moments_real
from .harmonic import EXACT_N_LIMIT, harmonic
from .numerics import DEFAULT_PRECISION, check_precision, compensated_sum, log2_abs, rational_to_real

MAX_LIMIT_ORDER = 30
MAX_CUMULANT_ORDER = 12
MAX_DETERMINACY_ORDER = 15


@lru_cache(maxsize=None)
def _bernoulli_even(count: int) -> tuple[Fraction, ...]:
    """B_0, B_2, ..., B_{2(count-1)} from the recurrence sum_k C(m+1,k) B_k = 0."""
    top = 2 * (count - 1)
    b = [Fraction(1)]
    for m in range(1, top + 1):
        b.append(-sum(comb(m + 1, k) * b[k] for k in range(m)) / (m + 1))
    return tuple(b[::2])


def _bernoulli(k2: int) -> Fraction:
    """B_{k2} for even k2."""
    need = k2 // 2 + 1
    size = 8
    while size < need:
        size *= 2
    return _bernoulli_even(size)[k2 // 2]


def _em_cutoff(prec: int) -> int:
    return max(64, prec)


@lru_cache(maxsize=64)
def _gamma_rational(prec: int) -> tuple[Fraction, int]:
    """Rational part S with gamma = S - log N to 2^-(prec+20)."""
    n = _em_cutoff(prec)
    total = harmonic(n, 1) - Fraction(1, 2 * n)
    goal = -(prec + 20)
    k = 1
    while True:
        term = _bernoulli(2 * k) / (2 * k * Fraction(n) ** (2 * k))
        total += term
        if log2_abs(term) < goal:
            return total, n
        k += 1


def euler_gamma(prec: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """Euler-Mascheroni constant by Euler-Maclaurin summation of H_N - log N."""
    check_precision(prec)
    s, n = _gamma_rational(prec)
    work = prec + 16
    with mpmath.workprec(work):
        value = rational_to_real(s, work) - mpmath.log(n)
    with mpmath.workprec(prec):
        return +value


@lru_cache(maxsize=512)
def _zeta_rational(s: int, prec: int) -> Fraction:
    n = _em_cutoff(prec)
    total = harmonic(n - 1, s) + Fraction(1, (s - 1) * n ** (s - 1)) + Fraction(1, 2 * n**s)
    goal = -(prec + 20)
    rising = s  # s (s+1) ... (s+2k-2)
    k = 1
    while True:
        term = _bernoulli(2 * k) / factorial(2 * k) * rising / Fraction(n) ** (s + 2 * k - 1)
        total += term
        if log2_abs(term) < goal:
            return total
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        k += 1


def zeta_int(s: int, prec: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """Riemann zeta at an integer s >= 2 (direct sum plus Euler-Maclaurin tail)."""
    if s < 2:
        raise ValueError(f"zeta_int: need s >= 2, got {s}")
    check_precision(prec)
    return rational_to_real(_zeta_rational(s, prec), prec)


def limit_cumulant(m: int, prec: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """gamma for m = 1, (m-1)! zeta(m) otherwise."""
    if m < 1:
        raise ValueError(f"limit_cumulant: need m >= 1, got {m}")
    if m == 1:
        return euler_gamma(prec)
    with mpmath.workprec(prec):
        return factorial(m - 1) * zeta_int(m, prec + 8)


def limit_cumulants(m_max: int, prec: int = DEFAULT_PRECISION) -> list[mpmath.mpf]:
    return [limit_cumulant(m, prec) for m in range(1, m_max + 1)]


def limit_moments(m_max: int, prec: int = DEFAULT_PRECISION) -> list[mpmath.mpf]:
    """mu_1..mu_{m_max}: m! [y^m] exp(gamma y + sum_{r>=2} zeta(r) y^r / r)."""
    if not 1 <= m_max <= MAX_LIMIT_ORDER:
        raise ValueError(f"limit_moments: need 1 <= m <= {MAX_LIMIT_ORDER}, got {m_max}")
    work = prec + 32
    x = [euler_gamma(work)] + [zeta_int(r, work) for r in range(2, m_max + 1)]
    with mpmath.workprec(work):
        mu = exp_series_coeffs(x)
    with mpmath.workprec(prec):
        return [+v for v in mu[1:]]


def limit_moment(m: int, prec: int = DEFAULT_PRECISION) -> mpmath.mpf:
    return limit_moments(m, prec)[m - 1]


def centered_scaled_moments(n: int, m_max: int, prec: int = DEFAULT_PRECISION,
                            exact_limit: int = EXACT_N_LIMIT) -> list[mpmath.mpf]:
    """E[(n d_max - log n)^m] for m = 1..m_max.

    Binomial expansion over the raw moments of n d_max.  The raw moments are
    rounded from exact rationals (or from rounded harmonic numbers above
    ``exact_limit``) and log n enters only at the final combination; the
    working precision doubles until the alternating sum keeps ``prec`` bits.
    """
    if n < 2 or m_max < 1:
        raise ValueError("centered_scaled_moments: need n >= 2 and m >= 1")
    check_precision(prec)
    work = prec + 32
    while True:
        raw = raw_moments_real(n, m_max, work, exact_limit)
        out, worst = [], -math.inf
        with mpmath.workprec(work):
            neg_log = -mpmath.log(n)
            for m in range(1, m_max + 1):
                terms = [comb(m, k) * neg_log ** (m - k) * raw[k] for k in range(m + 1)]
                total = compensated_sum(terms, work)
                lost = max(log2_abs(t) for t in terms) - log2_abs(total)
                worst = max(worst, lost)
                out.append(total)
        if work - worst >= prec + 16:
            with mpmath.workprec(prec):
                return [+v for v in out]
        work *= 2


def centered_scaled_moment(n: int, m: int, prec: int = DEFAULT_PRECISION,
                           exact_limit: int = EXACT_N_LIMIT) -> mpmath.mpf:
    return centered_scaled_moments(n, m, prec, exact_limit)[m - 1]


def centered_scaled_cumulants(n: int, m_max: int, prec: int = DEFAULT_PRECISION,
                              exact_limit: int = EXACT_N_LIMIT) -> list[mpmath.mpf]:
    """Cumulants of n d_max - log n, from its moments."""
    if not 1 <= m_max <= MAX_CUMULANT_ORDER:
        raise ValueError(f"centered_scaled_cumulants: need 1 <= m <= {MAX_CUMULANT_ORDER}")
    work = prec + 64
    moments = centered_scaled_moments(n, m_max, work, exact_limit)
    with mpmath.workprec(work):
        kappa = moments_to_cumulants(moments)
    with mpmath.workprec(prec):
        return [+v for v in kappa]


def gumbel_cdf(x, prec: int | None = None):
    """exp(-exp(-x)); float in, float out, mpf otherwise."""
    if isinstance(x, (float, int, np.floating)) and prec is None:
        return math.exp(-math.exp(-x)) if x > -700 else 0.0
    with mpmath.workprec(prec or DEFAULT_PRECISION):
        return mpmath.exp(-mpmath.exp(-mpmath.mpf(x)))


def gumbel_cdf_array(xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    with np.errstate(over="ignore"):
        return np.exp(-np.exp(-xs))


def _upper_gamma_int(m: int, b) -> mpmath.mpf:
    """Gamma(m+1, b) = m! e^-b sum_{j<=m} b^j / j! for integer m."""
    return factorial(m) * mpmath.exp(-b) * mpmath.fsum(b**j / factorial(j) for j in range(m + 1))


def gumbel_moment_quadrature(m: int, prec: int = 128) -> Quadrature:
    """E[G^m] for standard Gumbel G by tanh-sinh quadrature on a finite window.

    Both tails are bounded by Gamma(m+1, .): the upper one directly, the lower
    one after u = e^-x (log u < u).  The window widens until the tail bound is
    below 2^-prec; the returned error is quadrature estimate plus tail bound.
    """
    if not 0 <= m <= MAX_CUMULANT_ORDER:
        raise ValueError(f"gumbel_moment_quadrature: need 0 <= m <= {MAX_CUMULANT_ORDER}")
    check_precision(prec)
    work = prec + 32
    with mpmath.workprec(work):
        tol = mpmath.ldexp(1, -prec)
        lo, hi = mpmath.mpf(-3), mpmath.mpf(32)
        for _ in range(64):
            tail = _upper_gamma_int(m, hi) + _upper_gamma_int(m, mpmath.exp(-lo))
            if tail < tol:
                break
            lo -= 1
            hi *= 2
        else:
            raise QuadratureError("gumbel_moment_quadrature: tails never became small", tail)

        def density_moment(x):
            return x**m * mpmath.exp(-x - mpmath.exp(-x))

        points = [lo, mpmath.mpf(0)]
        edge = mpmath.mpf(2)
        while edge < hi:
            points.append(edge)
            edge *= 2
        points.append(hi)
        value, err = mpmath.quad(density_moment, points, error=True)
        total_err = err + tail
    with mpmath.workprec(prec):
        return Quadrature(+value, +total_err)


@dataclass(frozen=True)
class DeterminacyRow:
    m: int
    value: mpmath.mpf  # mu_{2m}^(1/2m) / 2m
    bound: mpmath.mpf  # (exp(c sqrt(2m)) (2m)! 2^2m)^(1/2m) / 2m

    @property
    def holds(self) -> bool:
        return self.value <= self.bound


def determinacy_check(m_max: int, prec: int = DEFAULT_PRECISION) -> list[DeterminacyRow]:
    """Carleman-type boundedness of mu_{2m}^(1/2m) / 2m against the
    partition-count bound with c = 2 sqrt(zeta(2))."""
    if not 1 <= m_max <= MAX_DETERMINACY_ORDER:
        raise ValueError(f"determinacy_check: need 1 <= m_max <= {MAX_DETERMINACY_ORDER}")
    mu = limit_moments(2 * m_max, prec)
    rows = []
    with mpmath.workprec(prec):
        c = 2 * mpmath.sqrt(zeta_int(2, prec))
        for m in range(1, m_max + 1):
            k = 2 * m
            value = mpmath.root(mu[k - 1], k) / k
            bound = mpmath.root(mpmath.exp(c * mpmath.sqrt(k)) * factorial(k) * 2**k, k) / k
            rows.append(DeterminacyRow(m, value, bound))
    return rows


def determinacy_bound_limit() -> float:
    return 2 / math.e


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    m: int
    centered_moment: mpmath.mpf
    limit_moment: mpmath.mpf
    abs_gap: mpmath.mpf
    cumulant: mpmath.mpf
    limit_cumulant: mpmath.mpf
    cumulant_gap: mpmath.mpf
    lln_ratio: mpmath.mpf  # E[((n / log n) d_max)^m], tends to 1


CONVERGENCE_FIELDS = ("n", "m", "centered_moment", "limit_moment", "abs_gap", "cumulant_gap",
                      "cumulant", "limit_cumulant", "lln_ratio")


def convergence_table(ns, m_max: int, prec: int = DEFAULT_PRECISION,
                      exact_limit: int = EXACT_N_LIMIT) -> list[ConvergenceRow]:
    ns = list(ns)
    if not ns or any(n < 2 for n in ns):
        raise ValueError("convergence_table: need a non-empty list of n >= 2")
    if not 1 <= m_max <= MAX_CUMULANT_ORDER:
        raise ValueError(f"convergence_table: need 1 <= m_max <= {MAX_CUMULANT_ORDER}")
    mu = limit_moments(m_max, prec)
    kappa_lim = limit_cumulants(m_max, prec)
    rows = []
    for n in sorted(ns):
        moments = centered_scaled_moments(n, m_max, prec, exact_limit)
        kappa = centered_scaled_cumulants(n, m_max, prec, exact_limit)
        raw = raw_moments_real(n, m_max, prec + 16, exact_limit)
        with mpmath.workprec(prec):
            log_n = mpmath.log(n)
            for m in range(1, m_max + 1):
                rows.append(ConvergenceRow(
                    n=n, m=m,
                    centered_moment=moments[m - 1],
                    limit_moment=mu[m - 1],
                    abs_gap=abs(moments[m - 1] - mu[m - 1]),
                    cumulant=kappa[m - 1],
                    limit_cumulant=kappa_lim[m - 1],
                    cumulant_gap=abs(kappa[m - 1] - kappa_lim[m - 1]),
                    lln_ratio=raw[m] / log_n**m,
                ))
    return rows


def lln_ratio_exact(n: int, m: int, prec: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """E[d_max^m] (n / log n)^m from the exact moment."""
    with mpmath.workprec(prec):
        return rational_to_real(moment_exact(n, m) * n**m, prec + 16) / mpmath.log(n) ** m
