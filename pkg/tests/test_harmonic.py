from fractions import Fraction
from math import log

import mpmath
import pytest

from spacings.harmonic import (
    HarmonicTable,
    harmonic,
    harmonic_real,
    script_h_alternating,
    script_h_partition,
    script_h_real_sequence,
    script_h_recurrence,
    script_h_sequence,
)
from spacings.numerics import as_fraction, rational_to_real, ulp


def test_harmonic_values():
    assert harmonic(1, 7) == 1
    assert harmonic(2, 1) == Fraction(3, 2)
    assert harmonic(2, 2) == Fraction(5, 4)
    assert harmonic(10, 1) == sum(Fraction(1, j) for j in range(1, 11))
    with pytest.raises(ValueError):
        harmonic(0, 1)


def test_harmonic_real_euler_maclaurin():
    n = 10**6
    with mpmath.workprec(256):
        em = mpmath.log(n) + mpmath.euler + mpmath.mpf(1) / (2 * n) - mpmath.mpf(1) / (12 * mpmath.mpf(n) ** 2)
        assert abs(harmonic_real(n, 1, 256) - em) < mpmath.mpf(10) ** -20


@pytest.mark.parametrize("n, r", [(100, 2), (100, 1), (37, 5), (1, 5)])
def test_harmonic_real_vs_exact(n, r):
    exact = harmonic(n, r)
    got = harmonic_real(n, r, 256)
    assert abs(as_fraction(got) - exact) <= 8 * as_fraction(ulp(got, 256))
    assert harmonic_real(1, 5, 64) == 1


def test_table():
    t = HarmonicTable.build(6, 4)
    assert t[2] == harmonic(6, 2)
    assert t.real(64)[0] == rational_to_real(harmonic(6, 1), 64)
    with pytest.raises(IndexError):
        t[5]


@pytest.mark.parametrize("fn", [script_h_partition, script_h_alternating, script_h_recurrence])
def test_script_h_examples(fn):
    assert fn(2, 2) == Fraction(7, 4)
    assert fn(2, 1) == Fraction(3, 2)
    for s in range(1, 6):
        assert fn(1, s) == 1


@pytest.mark.parametrize("n", [1, 2, 5, 13, 30, 50])
def test_triple_agreement(n):
    seq = script_h_sequence(n, 10)
    for s in range(1, 11):
        assert script_h_partition(n, s) == script_h_alternating(n, s) == seq[s]
    assert seq[1] == harmonic(n, 1)


def test_monotone_in_n():
    for s in range(1, 8):
        vals = [script_h_sequence(n, 8)[s] for n in range(1, 25)]
        assert all(a < b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("n", [1, 4, 19, 30])
def test_induction_step(n):
    cur, nxt = script_h_sequence(n, 8), script_h_sequence(n + 1, 8)
    for s in range(1, 9):
        assert sum(cur[k] * Fraction(1, (n + 1) ** (s - k)) for k in range(s + 1)) == nxt[s]


def test_real_sequence_matches_exact():
    n = 400
    exact = script_h_sequence(n, 8)
    real = script_h_real_sequence(n, 8, 200)
    for s in range(9):
        rel = abs(as_fraction(real[s]) - exact[s]) / exact[s]
        assert rel < Fraction(1, 2**190)


def test_large_n_dominates_single_partition():
    # every partition contributes positively; the all-ones one alone gives H_n^s / s!
    from math import factorial
    n = 10**4
    seq = script_h_sequence(n, 6)
    h = harmonic(n, 1)
    for s in range(1, 7):
        assert seq[s] >= h**s / factorial(s)
