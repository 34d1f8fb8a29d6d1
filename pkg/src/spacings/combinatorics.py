"""Integer partitions, binomials, the three binomial identities, and the
exponential-series / moment / cumulant transforms.

A partition of ``s`` is represented by its multiplicity vector
``(r_1, ..., r_s)`` with ``sum(i * r_i) == s``, stored as a plain tuple.
"""
from __future__ import annotations

from collections.abc import Sequence
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

MAX_ENUMERATED_PARTITION = 64

PartitionVector = tuple


def partitions(s: int) -> list[tuple[int, ...]]:
    """All partitions of ``s`` as multiplicity vectors of length ``s``.

    Order is descending lexicographic in ``(r_1, r_2, ...)``, so for ``s = 3``
    the result is ``[(3, 0, 0), (1, 1, 0), (0, 0, 1)]``.
    """
    if s < 1:
        raise ValueError(f"partitions: size must be positive, got {s}")
    if s > MAX_ENUMERATED_PARTITION:
        raise ValueError(f"partitions: size {s} exceeds enumeration bound {MAX_ENUMERATED_PARTITION}")
    return list(_partitions(s))


@lru_cache(maxsize=None)
def _partitions(s: int) -> tuple[tuple[int, ...], ...]:
    out: list[tuple[int, ...]] = []
    mult = [0] * s

    def fill(part: int, remaining: int) -> None:
        if remaining == 0:
            out.append(tuple(mult))
            return
        if part > remaining:
            return
        for r in range(remaining // part, -1, -1):
            mult[part - 1] = r
            fill(part + 1, remaining - r * part)
        mult[part - 1] = 0

    fill(1, s)
    return tuple(out)


def is_partition(r: Sequence[int], s: int) -> bool:
    return (
        len(r) <= s
        and all(x >= 0 for x in r)
        and sum((i + 1) * x for i, x in enumerate(r)) == s
    )


@lru_cache(maxsize=None)
def partition_count(s: int) -> int:
    """p(s) by Euler's pentagonal-number recurrence."""
    if s < 0:
        raise ValueError(f"partition_count: negative argument {s}")
    p = [1] + [0] * s
    for k in range(1, s + 1):
        total = 0
        j = 1
        while True:
            g1 = j * (3 * j - 1) // 2
            if g1 > k:
                break
            sign = 1 if j % 2 else -1
            total += sign * p[k - g1]
            g2 = j * (3 * j + 1) // 2
            if g2 <= k:
                total += sign * p[k - g2]
            j += 1
        p[k] = total
    return p[s]


def partition_weight(m: int, r: Sequence[int]) -> Fraction:
    """m! / (r_1! 1^r_1 ... r_m! m^r_m): permutations of m with cycle type r."""
    if m < 1 or not is_partition(r, m):
        raise ValueError(f"partition_weight: {tuple(r)} is not a partition of {m}")
    denom = 1
    for i, ri in enumerate(r, start=1):
        denom *= factorial(ri) * i**ri
    return Fraction(factorial(m), denom)


def binomial(n: int, k: int) -> int:
    """C(n, k), zero outside 0 <= k <= n."""
    if n < 0 or k < 0 or k > n:
        return 0
    return comb(n, k)


def verify_identity_1(n: int) -> Fraction:
    """Residual of sum_k C(n,k) (-1)^(k+1) k/(n+1-k) = (-1)^(n+1)."""
    if n < 1:
        raise ValueError("verify_identity_1: n must be positive")
    lhs = sum((-1) ** (k + 1) * Fraction(comb(n, k) * k, n + 1 - k) for k in range(1, n + 1))
    return lhs - (-1) ** (n + 1)


def verify_identity_2(n: int, s: int) -> Fraction:
    """Residual of sum_k k^s (-1)^(k+1) C(n,k) = 0, valid for 1 <= s < n.

    s = 0 is refused as well: there the sum is 1 - (1-1)^n = 1.
    """
    if n < 1:
        raise ValueError("verify_identity_2: n must be positive")
    if not 1 <= s < n:
        raise ValueError(f"verify_identity_2: requires 1 <= s < n, got n={n}, s={s}")
    return Fraction(sum((-1) ** (k + 1) * k**s * comb(n, k) for k in range(1, n + 1)))


def verify_identity_3(n: int, m: int, s: int) -> Fraction:
    """Residual of
    sum_mu (-1)^mu / ((m-mu)! (n+mu-1)!) C(n+mu-1, mu-s) = [s == m] (-1)^m / (n+m-1)!.
    """
    if n < 1 or m < 1:
        raise ValueError("verify_identity_3: n and m must be positive")
    if not 1 <= s <= m:
        raise ValueError(f"verify_identity_3: requires 1 <= s <= m, got s={s}, m={m}")
    lhs = sum(
        Fraction((-1) ** mu * binomial(n + mu - 1, mu - s), factorial(m - mu) * factorial(n + mu - 1))
        for mu in range(s, m + 1)
    )
    rhs = Fraction((-1) ** m, factorial(n + m - 1)) if s == m else Fraction(0)
    return lhs - rhs


def exp_series_coeffs(x: Sequence) -> list:
    """mu'_j = j! [y^j] exp(sum_r x_r y^r / r) for j = 0..len(x).

    Uses mu'_j = sum_{r=1}^{j} (j-1)!/(j-r)! x_r mu'_{j-r}.  Works for any
    scalar type with + and * (Fraction, int, mpf, float).
    """
    m = len(x)
    if m < 1:
        raise ValueError("exp_series_coeffs: need at least one coefficient")
    mu = [1]
    for j in range(1, m + 1):
        acc = 0
        ratio = 1  # (j-1)!/(j-r)!
        for r in range(1, j + 1):
            acc += ratio * x[r - 1] * mu[j - r]
            ratio *= j - r
        mu.append(acc)
    return mu


def exp_series_partition_sum(x: Sequence, j: int):
    """Same quantity as ``exp_series_coeffs(x)[j]``, by explicit partition enumeration."""
    if j == 0:
        return 1
    total = 0
    for r in partitions(j):
        term = partition_weight(j, r)
        for i, ri in enumerate(r):
            if ri:
                term *= x[i] ** ri
        total += term
    return total


def moments_to_cumulants(mu: Sequence) -> list:
    """Cumulants kappa_1..kappa_m from raw moments mu'_1..mu'_m (mu'_0 = 1 implied)."""
    m = len(mu)
    raw = [1, *mu]
    kappa: list = []
    for k in range(1, m + 1):
        acc = raw[k]
        for j in range(1, k):
            acc -= comb(k - 1, j - 1) * kappa[j - 1] * raw[k - j]
        kappa.append(acc)
    return kappa


def cumulants_to_moments(kappa: Sequence) -> list:
    """Raw moments mu'_1..mu'_m from cumulants; exact inverse of :func:`moments_to_cumulants`."""
    m = len(kappa)
    raw: list = [1]
    for k in range(1, m + 1):
        acc = 0
        for j in range(1, k + 1):
            acc += comb(k - 1, j - 1) * kappa[j - 1] * raw[k - j]
        raw.append(acc)
    return raw[1:]
