import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spacings.exactdist import (
    MaxSpacingLaw,
    QuadratureError,
    cdf,
    cdf_array,
    cdf_real,
    integral_piece,
    integral_piece_quadrature,
    kth_gap_mean,
    min_gap_survival,
    moment_exact,
    moment_from_nu_sums,
    moment_via_integration,
    nu_sum_closed,
    pdf,
    quantile,
    raw_moments_real,
)
from spacings.harmonic import harmonic, script_h_sequence
from spacings.montecarlo import draw
from spacings.numerics import as_fraction, rational_to_real


def test_cdf_spot_values():
    assert cdf(2, Fraction(3, 4)) == Fraction(1, 2)
    assert cdf(2, Fraction(1, 2)) == 0
    assert cdf(3, Fraction(1, 2)) == Fraction(1, 4)
    assert cdf(5, 1) == 1
    with pytest.raises(ValueError):
        cdf(3, Fraction(3, 2))
    with pytest.raises(ValueError):
        cdf(1, Fraction(1, 2))


@given(st.fractions(min_value=Fraction(1, 2), max_value=1))
def test_two_points_uniform(x):
    assert cdf(2, x) == 2 * x - 1


def test_cdf_monte_carlo_oracle():
    trials = 10**7
    d = draw(3, trials, seed=11).d_max
    p_hat = np.count_nonzero(d <= 0.5) / trials
    sigma = math.sqrt(0.25 * 0.75 / trials)
    assert abs(p_hat - 0.25) <= 3 * sigma


@pytest.mark.parametrize("n", [3, 7, 20, 60, 100])
def test_cdf_real_matches_exact(n):
    for x in (Fraction(1, n) + Fraction(1, 7 * n), Fraction(3, 2 * n), Fraction(2, n), Fraction(1, 3), Fraction(5, 6)):
        if x > 1:
            continue
        exact = rational_to_real(cdf(n, x), 200)
        with mpmath.workprec(200):
            assert abs(cdf_real(n, x, 200) - exact) <= abs(exact) * mpmath.mpf(2) ** -196


def test_cdf_real_large_n_stable():
    n = 1000
    x = 2 * math.log(n) / n
    lo, hi = cdf_real(n, x, 128), cdf_real(n, x, 256)
    assert 0 < lo < 1
    assert abs(lo - hi) < mpmath.mpf(2) ** -120
    assert cdf_real(2, 0.75, 64) == 0.5


def test_cdf_array_agrees_with_exact():
    for n in (2, 10, 100, 1000):
        xs = np.linspace(0.5 / n, 1.0, 301)
        got = cdf_array(n, xs)
        ref = np.array([float(cdf_real(n, float(x), 64)) for x in xs])
        assert np.max(np.abs(got - ref)) < 1e-11
        assert np.all(np.diff(got) >= -1e-15)


@pytest.mark.parametrize("n", [3, 10, 50])
def test_cdf_monotone(n):
    grid = [Fraction(1, n) + (1 - Fraction(1, n)) * Fraction(i, 200) for i in range(201)]
    vals = [cdf(n, x) for x in grid]
    assert vals[0] == 0 and vals[-1] == 1
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_pdf_spot_values():
    assert pdf(2, Fraction(3, 4)) == 2
    assert pdf(3, Fraction(1, 4)) == 0
    assert pdf(3, Fraction(2, 5)) > 0


@pytest.mark.parametrize("n, x", [(3, Fraction(2, 5)), (5, Fraction(3, 10)), (12, Fraction(1, 7))])
def test_pdf_finite_difference(n, x):
    h = Fraction(1, 10**6)
    fd = (cdf(n, x + h) - cdf(n, x - h)) / (2 * h)
    assert abs(fd - pdf(n, x)) < Fraction(1, 10**6)


@pytest.mark.parametrize("n", [2, 3, 8, 25, 50])
def test_pdf_integrates_to_one(n):
    # split at the kinks 1/k so each piece is a polynomial
    with mpmath.workprec(64):
        pts = [mpmath.mpf(1) / k for k in range(n, 0, -1)]
        total = mpmath.quad(lambda t: rational_to_real(pdf(n, as_fraction(t)), 64), pts)
    assert abs(total - 1) < 1e-10


def test_quantile():
    assert abs(quantile(2, Fraction(1, 2)) - mpmath.mpf("0.75")) <= 1e-12
    assert abs(quantile(3, Fraction(1, 4)) - mpmath.mpf("0.5")) <= 1e-12
    for n, p in ((7, Fraction(9, 10)), (40, Fraction(1, 100))):
        x = quantile(n, p)
        assert abs(cdf_real(n, x, 128) - rational_to_real(p, 128)) <= 1e-12
    with pytest.raises(ValueError):
        quantile(3, 1)


def test_moment_spot_values():
    assert moment_exact(2, 1) == Fraction(3, 4)
    assert moment_exact(2, 2) == Fraction(7, 12)
    assert moment_exact(5, 1) == Fraction(137, 300) == kth_gap_mean(5, 1)


@pytest.mark.parametrize("n", list(range(2, 201)))
def test_mean_is_harmonic_over_n(n):
    assert moment_exact(n, 1) == harmonic(n, 1) / n


def test_moment_n2_integral():
    # d_max ~ Uniform[1/2, 1]: E[d^m] = (1 - 2^-(m+1)) / (m+1) * 2
    for m in range(1, 8):
        assert moment_exact(2, m) == 2 * (1 - Fraction(1, 2 ** (m + 1))) / (m + 1)


@pytest.mark.parametrize("n, m", [(2, 1), (2, 2), (10, 1), (17, 3), (50, 6)])
def test_moment_vs_quadrature(n, m):
    q = moment_via_integration(n, m)
    exact = rational_to_real(moment_exact(n, m), 128)
    assert abs(q.value - exact) <= q.error
    assert q.error < 1e-12


def test_quadrature_failure_reports_error(monkeypatch):
    def sloppy(f, interval, **kwargs):
        return mpmath.mpf(0), mpmath.mpf("1e-3")
    monkeypatch.setattr(mpmath, "quad", sloppy)
    with pytest.raises(QuadratureError) as info:
        moment_via_integration(5, 2)
    assert info.value.achieved_error >= 1e-3


@pytest.mark.parametrize("n", [2, 5, 30])
def test_cauchy_schwarz_and_support(n):
    m1, m2 = moment_exact(n, 1), moment_exact(n, 2)
    assert m1**2 <= m2
    assert Fraction(1, n) <= m1 <= 1
    # E[d^m] is decreasing in m because d <= 1
    ms = [moment_exact(n, m) for m in range(1, 8)]
    assert all(a > b for a, b in zip(ms, ms[1:]))


def test_raw_moments_real_crossover():
    n = 300
    exact = raw_moments_real(n, 5, 128, exact_limit=10**4)
    approx = raw_moments_real(n, 5, 128, exact_limit=10)
    for a, b in zip(exact, approx):
        assert abs(a - b) <= abs(a) * mpmath.mpf(2) ** -120
    assert exact[2] == rational_to_real(n**2 * moment_exact(n, 2), 128)
    assert script_h_sequence(n, 1)[1] == harmonic(n, 1)


def test_integral_pieces():
    assert integral_piece(3, 1, 1, 1) == Fraction(1, 12)
    assert nu_sum_closed(3, 1, 1) == Fraction(10, 81)
    for n in (4, 9):
        assert nu_sum_closed(n, n - 1, 2) == integral_piece(n, n - 1, n - 1, 2)
    # n = 2: constant integrand on [1/2, 1]
    assert integral_piece(2, 1, 1, 3) == (1 - Fraction(1, 16)) / 4
    with pytest.raises(ValueError):
        integral_piece(3, 2, 1, 1)


@given(st.integers(2, 25), st.data())
@settings(max_examples=40, deadline=None)
def test_integral_piece_quadrature(n, data):
    k = data.draw(st.integers(1, n - 1))
    nu = data.draw(st.integers(k, n - 1))
    m = data.draw(st.integers(1, 6))
    q = integral_piece_quadrature(n, k, nu, m)
    assert abs(q.value - rational_to_real(integral_piece(n, k, nu, m), 128)) < 1e-14


@given(st.integers(2, 20), st.data())
@settings(max_examples=30, deadline=None)
def test_telescoping(n, data):
    k = data.draw(st.integers(1, n - 1))
    m = data.draw(st.integers(1, 5))
    assert nu_sum_closed(n, k, m) == sum(integral_piece(n, k, nu, m) for nu in range(k, n))


def test_reconstruction_small():
    for n in range(2, 12):
        for m in range(1, 5):
            assert moment_from_nu_sums(n, m) == moment_exact(n, m)


def test_kth_gap_means():
    assert kth_gap_mean(2, 1) == Fraction(3, 4)
    assert kth_gap_mean(2, 2) == Fraction(1, 4)
    assert kth_gap_mean(3, 2) == Fraction(5, 18)
    for n in (2, 7, 40):
        assert sum(kth_gap_mean(n, k) for k in range(1, n + 1)) == 1
        assert kth_gap_mean(n, n) == Fraction(1, n * n)
        assert kth_gap_mean(n, 1) == moment_exact(n, 1)


def test_kth_gap_monte_carlo_oracle():
    trials = 10**7
    vals = draw(3, trials, seed=5, kth=(2,)).kth[2]
    mean = vals.mean()
    se = vals.std(ddof=1) / math.sqrt(trials)
    assert abs(mean - 5 / 18) <= 3 * se


def test_min_gap_survival():
    assert min_gap_survival(7, 0) == 1
    assert min_gap_survival(2, Fraction(1, 4)) == Fraction(1, 2)
    assert min_gap_survival(5, Fraction(1, 4)) == 0
    assert abs(float(min_gap_survival(100, Fraction(1, 100**2))) - math.exp(-1)) < 0.02


def test_law_handle():
    law = MaxSpacingLaw(3)
    assert law.support == (Fraction(1, 3), 1)
    assert law.cdf(Fraction(1, 2)) == Fraction(1, 4)
    assert law.moment(1) == law.mean() == Fraction(11, 18)
    with pytest.raises(ValueError):
        MaxSpacingLaw(1)
