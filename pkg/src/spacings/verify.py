"""Exact residual checks behind ``spacings verify``.

Each check walks a parameter grid and records the first tuple whose residual
is nonzero (or, for quadrature comparisons, outside tolerance).
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import mpmath

from .combinatorics import (
    exp_series_coeffs,
    exp_series_partition_sum,
    moments_to_cumulants,
    verify_identity_1,
    verify_identity_2,
    verify_identity_3,
)
from .exactdist import (
    integral_piece,
    integral_piece_quadrature,
    moment_exact,
    moment_from_nu_sums,
    moment_from_pieces,
    nu_sum_closed,
)
from .harmonic import (
    harmonic,
    script_h_alternating,
    script_h_partition,
    script_h_recurrence,
    script_h_sequence,
)
from .numerics import rational_to_real

SUITES = ("identities", "lemmas", "theorem", "all")
QUADRATURE_TOLERANCE = 1e-14


@dataclass
class CheckResult:
    name: str
    total: int = 0
    failed: int = 0
    first_failure: dict | None = None
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.failed == 0 and self.total > 0

    def record(self, ok: bool, **where) -> None:
        self.total += 1
        if not ok:
            self.failed += 1
            if self.first_failure is None:
                self.first_failure = {k: str(v) for k, v in where.items()}

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "total": self.total,
                "failed": self.failed, "first_failure": self.first_failure,
                "detail": self.detail, "seconds": round(self.seconds, 3)}


def _timed(fn):
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        result = fn(*args, **kwargs)
        result.seconds = time.perf_counter() - start
        return result
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_timed
def check_identity_1(n_max: int = 60) -> CheckResult:
    res = CheckResult("binomial identity 1")
    for n in range(1, n_max + 1):
        r = verify_identity_1(n)
        res.record(r == 0, n=n, residual=r)
    return res


@_timed
def check_identity_2(n_max: int = 60) -> CheckResult:
    res = CheckResult("binomial identity 2")
    for n in range(1, n_max + 1):
        for s in range(1, n):
            r = verify_identity_2(n, s)
            res.record(r == 0, n=n, s=s, residual=r)
    return res


@_timed
def check_identity_3(n_max: int = 60, m_max: int = 10) -> CheckResult:
    res = CheckResult("binomial identity 3")
    for n in range(1, n_max + 1):
        for m in range(1, m_max + 1):
            for s in range(1, m + 1):
                r = verify_identity_3(n, m, s)
                res.record(r == 0, n=n, m=m, s=s, residual=r)
    return res


@_timed
def check_script_h_agreement(n_max: int = 50, s_max: int = 10) -> CheckResult:
    """Partition sum, alternating binomial sum and recurrence agree exactly."""
    res = CheckResult("Hs triple agreement")
    for n in range(1, n_max + 1):
        seq = script_h_sequence(n, s_max)
        for s in range(1, s_max + 1):
            a = script_h_partition(n, s)
            b = script_h_alternating(n, s)
            res.record(a == b == seq[s] == script_h_recurrence(n, s), n=n, s=s)
    return res


@_timed
def check_script_h_induction(n_max: int = 30, s_max: int = 8) -> CheckResult:
    """sum_sigma Hs(n, sigma) (n+1)^-(s-sigma) = Hs(n+1, s)."""
    res = CheckResult("Hs induction step")
    for n in range(1, n_max + 1):
        cur = script_h_sequence(n, s_max)
        nxt = script_h_sequence(n + 1, s_max)
        for s in range(1, s_max + 1):
            lhs = sum(cur[sig] * Fraction(1, (n + 1) ** (s - sig)) for sig in range(s + 1))
            res.record(lhs == nxt[s], n=n, s=s)
    return res


@_timed
def check_exp_series(m_max: int = 12, trials: int = 5, seed: int = 2024) -> CheckResult:
    """Recurrence equals partition sum, and cumulants are (m-1)! x_m."""
    rng = random.Random(seed)
    res = CheckResult("exp-series coefficients and cumulants")
    for t in range(trials):
        x = [Fraction(rng.randint(-50, 50), rng.randint(1, 30)) for _ in range(m_max)]
        mu = exp_series_coeffs(x)
        for j in range(1, m_max + 1):
            res.record(mu[j] == exp_series_partition_sum(x, j), trial=t, j=j)
        kappa = moments_to_cumulants(mu[1:])
        for m in range(1, m_max + 1):
            res.record(kappa[m - 1] == factorial(m - 1) * x[m - 1], trial=t, m=m)
    for n in (2, 7, 50):
        h = [harmonic(n, r) for r in range(1, 9)]
        kappa = moments_to_cumulants(exp_series_coeffs(h)[1:])
        for m in range(1, 9):
            res.record(kappa[m - 1] == factorial(m - 1) * h[m - 1], n=n, m=m)
    return res


@_timed
def check_integral_pieces(samples: int = 100, n_max: int = 30, m_max: int = 6,
                          seed: int = 1, tol: float = QUADRATURE_TOLERANCE) -> CheckResult:
    """Closed-form integral pieces against Gauss-Legendre quadrature."""
    rng = random.Random(seed)
    res = CheckResult("integral pieces vs quadrature")
    worst = mpmath.mpf(0)
    for _ in range(samples):
        n = rng.randint(2, n_max)
        k = rng.randint(1, n - 1)
        nu = rng.randint(k, n - 1)
        m = rng.randint(1, m_max)
        exact = integral_piece(n, k, nu, m)
        quad = integral_piece_quadrature(n, k, nu, m)
        diff = abs(rational_to_real(exact, 128) - quad.value)
        worst = max(worst, diff)
        res.record(diff <= tol, n=n, k=k, nu=nu, m=m, diff=mpmath.nstr(diff, 5))
    res.detail["max_abs_diff"] = mpmath.nstr(worst, 5)
    return res


@_timed
def check_nu_sums(n_max: int = 20, m_max: int = 6) -> CheckResult:
    """Telescoped nu-sum equals the termwise sum of pieces."""
    res = CheckResult("telescoped nu-sums")
    for n in range(2, n_max + 1):
        for k in range(1, n):
            for m in range(1, m_max + 1):
                direct = sum(integral_piece(n, k, nu, m) for nu in range(k, n))
                res.record(direct == nu_sum_closed(n, k, m), n=n, k=k, m=m)
    return res


@_timed
def check_moment_reconstruction(n_max: int = 30, m_max: int = 6) -> CheckResult:
    """Proof chain: nu-sum form of the moment equals the closed form."""
    res = CheckResult("moment reconstruction")
    for n in range(2, n_max + 1):
        for m in range(1, m_max + 1):
            res.record(moment_from_nu_sums(n, m) == moment_exact(n, m), n=n, m=m)
    return res


@_timed
def check_moment_pieces(n_max: int = 15, m_max: int = 4) -> CheckResult:
    """Moment as the double sum over nu and k of the pieces equals the closed form."""
    res = CheckResult("moment from integral pieces")
    for n in range(2, n_max + 1):
        for m in range(1, m_max + 1):
            res.record(moment_from_pieces(n, m) == moment_exact(n, m), n=n, m=m)
    return res


def run_suite(suite: str = "all", n_max: int | None = None, m_max: int | None = None,
              samples: int = 100, seed: int = 1) -> list[CheckResult]:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")
    out: list[CheckResult] = []
    if suite in ("identities", "all"):
        n = n_max or 60
        out += [check_identity_1(n), check_identity_2(n), check_identity_3(n, m_max or 10)]
    if suite in ("lemmas", "all"):
        out += [
            check_script_h_agreement(min(n_max or 50, 50), 10),
            check_script_h_induction(min(n_max or 30, 30), 8),
            check_exp_series(),
            check_integral_pieces(samples, min(n_max or 30, 30), m_max or 6, seed),
            check_nu_sums(min(n_max or 20, 20), m_max or 6),
        ]
    if suite in ("theorem", "all"):
        out += [check_moment_reconstruction(n_max or 30, m_max or 6),
                check_moment_pieces(min(n_max or 15, 15), min(m_max or 4, 4))]
    return out
