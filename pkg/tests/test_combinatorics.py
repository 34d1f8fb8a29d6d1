import itertools
from fractions import Fraction
from math import factorial

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spacings.asymptotics import euler_gamma, limit_moment, zeta_int
from spacings.combinatorics import (
    binomial,
    cumulants_to_moments,
    exp_series_coeffs,
    exp_series_partition_sum,
    is_partition,
    moments_to_cumulants,
    partition_count,
    partition_weight,
    partitions,
    verify_identity_1,
    verify_identity_2,
    verify_identity_3,
)


def test_small_partitions():
    assert partitions(1) == [(1,)]
    assert partitions(3) == [(3, 0, 0), (1, 1, 0), (0, 0, 1)]


@pytest.mark.parametrize("s, count", [(0, 1), (10, 42), (30, 5604)])
def test_partition_count(s, count):
    assert partition_count(s) == count
    if s:
        assert len(partitions(s)) == count


@pytest.mark.parametrize("s", range(1, 21))
def test_enumeration_matches_pentagonal(s):
    parts = partitions(s)
    assert len(parts) == partition_count(s) == len(set(parts))
    assert all(is_partition(r, s) for r in parts)


def test_partition_bounds():
    with pytest.raises(ValueError):
        partitions(0)
    with pytest.raises(ValueError):
        partitions(65)


def _cycle_type(perm):
    seen, counts = set(), [0] * len(perm)
    for i in range(len(perm)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        counts[length - 1] += 1
    return tuple(counts)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 6])
def test_weights_count_permutations(m):
    # brute force: tally cycle types over all m! permutations
    tally = {}
    for perm in itertools.permutations(range(m)):
        t = _cycle_type(perm)
        tally[t] = tally.get(t, 0) + 1
    for r in partitions(m):
        assert partition_weight(m, r) == tally[r]
    assert sum(partition_weight(m, r) for r in partitions(m)) == factorial(m)


def test_weight_examples():
    assert partition_weight(2, (2, 0)) == 1
    assert partition_weight(2, (0, 1)) == 1
    assert partition_weight(3, (1, 1, 0)) == 3
    with pytest.raises(ValueError):
        partition_weight(3, (1, 0, 0))


def test_binomial():
    assert binomial(5, 2) == 10
    assert binomial(5, -1) == 0
    assert binomial(60, 30) == binomial(59, 29) + binomial(59, 30)


@pytest.mark.parametrize("n", [1, 2, 3, 17, 60])
def test_identity_1(n):
    assert verify_identity_1(n) == 0


@pytest.mark.parametrize("n, s", [(2, 1), (3, 2), (40, 20), (60, 59)])
def test_identity_2(n, s):
    assert verify_identity_2(n, s) == 0


@pytest.mark.parametrize("n, s", [(3, 3), (5, 0), (4, 7)])
def test_identity_2_refuses_invalid(n, s):
    with pytest.raises(ValueError):
        verify_identity_2(n, s)


def test_identity_2_fails_at_s_equal_n():
    n = 6
    raw = sum((-1) ** (k + 1) * k**n * binomial(n, k) for k in range(1, n + 1))
    assert abs(raw) == factorial(n)


@pytest.mark.parametrize("n, m, s", [(1, 1, 1), (3, 2, 1), (5, 6, 6), (60, 10, 4)])
def test_identity_3(n, m, s):
    assert verify_identity_3(n, m, s) == 0


def test_exp_series_examples():
    c = Fraction(3, 7)
    assert exp_series_coeffs([c, 0, 0, 0]) == [c**j for j in range(5)]
    mu = exp_series_coeffs([Fraction(3, 2), Fraction(5, 4)])
    assert mu[2] == Fraction(7, 2)
    # Exp(1): x_r = 1 gives j! and cumulants (j-1)!
    mu = exp_series_coeffs([1] * 8)
    assert mu == [factorial(j) for j in range(9)]
    assert moments_to_cumulants(mu[1:]) == [factorial(j - 1) for j in range(1, 9)]


def test_exp_series_gumbel_third_moment():
    prec = 128
    with mpmath.workprec(prec):
        g, z2, z3 = euler_gamma(prec), zeta_int(2, prec), zeta_int(3, prec)
        expected = g**3 + 3 * g * z2 + 2 * z3
        assert abs(exp_series_partition_sum([g, z2, z3], 3) - expected) < mpmath.mpf(2) ** -120
        assert abs(exp_series_coeffs([g, z2, z3])[3] - expected) < mpmath.mpf(2) ** -120
        assert abs(cumulants_to_moments([g, z2, 2 * z3])[2] - expected) < mpmath.mpf(2) ** -120
        assert abs(limit_moment(3, prec) - expected) < mpmath.mpf(2) ** -110


small_q = st.fractions(min_value=-20, max_value=20, max_denominator=50)


@given(st.lists(small_q, min_size=1, max_size=9))
@settings(max_examples=60, deadline=None)
def test_recurrence_equals_partition_sum(x):
    mu = exp_series_coeffs(x)
    for j in range(len(x) + 1):
        assert mu[j] == exp_series_partition_sum(x, j)
    kappa = moments_to_cumulants(mu[1:])
    assert kappa == [factorial(m - 1) * x[m - 1] for m in range(1, len(x) + 1)]


@given(st.lists(small_q, min_size=1, max_size=10))
@settings(max_examples=60, deadline=None)
def test_cumulant_round_trip(kappa):
    assert moments_to_cumulants(cumulants_to_moments(kappa)) == kappa


def test_degenerate_cumulants():
    c = Fraction(2, 3)
    assert moments_to_cumulants([c, c**2, c**3]) == [c, 0, 0]
    assert cumulants_to_moments([c, 0, 0, 0]) == [c**j for j in range(1, 5)]
