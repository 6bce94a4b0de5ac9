import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import ndtr
from hypothesis import given, settings
from hypothesis import strategies as st

from fraccite.stats import distributions as d
from fraccite.stats import studentized_range as sr
from fraccite.stats.distributions import ConvergenceError

mpmath.mp.dps = 30


def t_sf_oracle(t, df):
    # upper tail of Student's t by direct quadrature of the density
    df = mpmath.mpf(df)
    c = mpmath.gamma((df + 1) / 2) / (mpmath.sqrt(df * mpmath.pi) * mpmath.gamma(df / 2))
    return float(mpmath.quad(lambda x: c * (1 + x * x / df) ** (-(df + 1) / 2), [t, mpmath.inf]))


def f_sf_oracle(f, a, b):
    a, b = mpmath.mpf(a), mpmath.mpf(b)
    c = (a / b) ** (a / 2) / mpmath.beta(a / 2, b / 2)
    return float(mpmath.quad(lambda x: c * x ** (a / 2 - 1) * (1 + a * x / b) ** (-(a + b) / 2), [f, mpmath.inf]))


def chi2_sf_oracle(x, k):
    return float(mpmath.gammainc(mpmath.mpf(k) / 2, mpmath.mpf(x) / 2, mpmath.inf, regularized=True))


@pytest.mark.parametrize("t,df", [(0.0, 5), (1.0, 1), (2.1, 25), (-1.7, 7), (3.5, 100), (0.3, 2.5)])
def test_t_tail_matches_quadrature(t, df):
    expected = t_sf_oracle(t, df)
    assert abs(d.t_sf(t, df) - expected) < 1e-6
    assert abs(d.t_two_sided(t, df) - 2 * min(expected, 1 - expected)) < 1e-6


@pytest.mark.parametrize("f,a,b", [(0.5, 1, 10), (2.0, 26, 3923), (17.4, 26, 3923), (1.0, 3, 3), (4.2, 2, 50)])
def test_f_tail_matches_quadrature(f, a, b):
    assert abs(d.f_sf(f, a, b) - f_sf_oracle(f, a, b)) < 1e-6


@pytest.mark.parametrize("x,k", [(0.5, 1), (3.857142857, 1), (26.0, 26), (40.0, 26), (1.0, 7), (300.0, 250)])
def test_chi2_tail_matches_incomplete_gamma(x, k):
    assert abs(d.chi2_sf(x, k) - chi2_sf_oracle(x, k)) < 1e-6


@settings(max_examples=60, deadline=None)
@given(a=st.floats(0.2, 60), b=st.floats(0.2, 60), x=st.floats(0, 1))
def test_betainc_against_mpmath(a, b, x):
    expected = float(mpmath.betainc(a, b, 0, x, regularized=True))
    assert abs(d.betainc(a, b, x) - expected) < 1e-9


@settings(max_examples=60, deadline=None)
@given(a=st.floats(0.1, 200), x=st.floats(0, 400))
def test_gammainc_against_mpmath(a, x):
    expected = float(mpmath.gammainc(a, 0, x, regularized=True))
    assert abs(d.gammainc_lower(a, x) - expected) < 1e-9
    assert abs(d.gammainc_lower(a, x) + d.gammainc_upper(a, x) - 1.0) < 1e-12


@settings(max_examples=40, deadline=None)
@given(df=st.floats(1, 500), a=st.floats(-8, 8), b=st.floats(-8, 8))
def test_t_survival_is_monotone(df, a, b):
    lo, hi = sorted((a, b))
    assert d.t_sf(lo, df) >= d.t_sf(hi, df)
    assert 0.0 <= d.t_sf(hi, df) <= 1.0


def test_range_cdf_against_mpmath_integral():
    # W(w) = k * int phi(z) (Phi(z) - Phi(z - w))^(k-1) dz
    for w, k in [(1.0, 2), (2.5, 3), (4.0, 10), (5.5, 27)]:
        integrand = lambda z: k * mpmath.npdf(z) * (mpmath.ncdf(z) - mpmath.ncdf(z - w)) ** (k - 1)
        expected = float(mpmath.quad(integrand, [-mpmath.inf, -3, 0, 3, mpmath.inf]))
        assert abs(sr.range_cdf(w, k)[0] - expected) < 1e-9


def test_studentized_cdf_against_nested_quadrature():
    # adaptive QUADPACK integration over both variables as an independent oracle
    for q, k, nu in [(3.0, 3, 10), (4.5, 5, 20), (5.3, 27, 100)]:
        log_c = (nu / 2) * math.log(nu) - math.lgamma(nu / 2) - (nu / 2 - 1) * math.log(2)

        def inner(w):
            f = lambda z: k * math.exp(-z * z / 2) / math.sqrt(2 * math.pi) * (ndtr(z) - ndtr(z - w)) ** (k - 1)
            return quad(f, -10, 10, epsabs=1e-12, limit=200)[0]

        def outer(s):
            return math.exp(log_c + (nu - 1) * math.log(s) - nu * s * s / 2) * inner(q * s)

        expected = quad(outer, 1e-12, 4, epsabs=1e-11, limit=200, points=[1.0])[0]
        assert abs(sr.cdf(q, k, nu) - expected) < 1e-6


def test_k2_infinite_df_reduces_to_normal_difference():
    assert sr.quantile(0.05, 2) == pytest.approx(math.sqrt(2) * 1.959963984540054, abs=1e-6)


@pytest.mark.parametrize("alpha,k,nu", [(0.05, 3, 10), (0.01, 27, 100), (0.1, 5, 2), (0.05, 27, math.inf)])
def test_quantile_inverts_cdf(alpha, k, nu):
    q = sr.quantile(alpha, k, nu)
    assert abs(sr.sf(q, k, nu) - alpha) < 1e-8
    assert abs(sr.quantile(sr.sf(q, k, nu), k, nu) - q) < 1e-4


def test_quantile_monotone_in_k_alpha_and_nu():
    qs_k = [sr.quantile(0.05, k, 30) for k in (2, 3, 5, 10, 27)]
    assert all(a < b for a, b in zip(qs_k, qs_k[1:]))
    qs_a = [sr.quantile(a, 4, 30) for a in (0.01, 0.05, 0.1, 0.2)]
    assert all(a > b for a, b in zip(qs_a, qs_a[1:]))
    qs_nu = [sr.quantile(0.05, 4, nu) for nu in (2, 5, 20, 100, 1000)]
    assert all(a > b for a, b in zip(qs_nu, qs_nu[1:]))
    assert qs_nu[-1] > sr.quantile(0.05, 4, math.inf)


def test_quantile_rejects_bad_arguments():
    with pytest.raises(ValueError):
        sr.quantile(0.0, 3, 10)
    with pytest.raises(ValueError):
        sr.quantile(0.05, 1, 10)
    with pytest.raises(ValueError):
        sr.quantile(0.05, 3, 0.5)


def test_convergence_error_is_reported_with_parameters(monkeypatch):
    monkeypatch.setattr(sr, "cdf", lambda q, k, nu=math.inf: 0.0)
    sr.quantile.cache_clear()
    with pytest.raises(ConvergenceError, match="k=4"):
        sr.quantile(0.05, 4, 12)
    sr.quantile.cache_clear()


def test_range_cdf_vectorized_and_bounded():
    w = np.linspace(-1, 12, 50)
    v = sr.range_cdf(w, 6)
    assert np.all(np.diff(v) >= -1e-15)
    assert v[0] == 0.0 and abs(v[-1] - 1.0) < 1e-12
