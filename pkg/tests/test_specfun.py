# tests/test_specfun.py
import math

import mpmath
import numpy as np
import pytest
from hypothesis import example, given, settings as hypothesis_settings, strategies as st
from scipy import special

from squeeze import specfun
from squeeze.config import settings
from squeeze.errors import DomainError, NonTerminatingSeriesError


def test_log_gamma_and_factorial():
    """Test ln Gamma(11) = ln 10! and the domain check."""
    assert specfun.log_gamma(11.0) == pytest.approx(15.104413, abs=1e-6)
    assert specfun.log_factorial(10) == pytest.approx(math.log(3628800))
    with pytest.raises(DomainError):
        specfun.log_gamma(0.0)


@pytest.mark.parametrize("a, k", [(0.5, 3), (2.5, 7), (-1.5, 3), (-2.5, 2), (-3.5, 2), (-0.5, 6)])
def test_pochhammer_matches_scipy(a, k):
    value = specfun.pochhammer(a, k)
    assert value.to_real() == pytest.approx(special.poch(a, k), rel=1e-13)


def test_pochhammer_hits_zero_factor():
    """(-2)_3 = (-2)(-1)(0) is exactly zero."""
    assert specfun.pochhammer(-2.0, 3).is_zero
    assert specfun.pochhammer(7.0, 0).to_real() == 1.0


@pytest.mark.parametrize("nu", [0.5, 1.5, 3.5])
@pytest.mark.parametrize("x", [-0.7, 0.3, 0.9])
def test_gegenbauer_matches_mpmath(nu, x):
    for n in range(31):
        reference = float(mpmath.gegenbauer(n, nu, x))
        # |C_n^nu(x)| <= C_n^nu(1) = (2 nu)_n / n! on [-1, 1]
        bound = special.poch(2.0 * nu, n) / math.factorial(n)
        assert abs(specfun.gegenbauer(n, nu, x).to_real() - reference) <= 1e-11 * bound


def test_gegenbauer_large_degree_stays_finite():
    """C_3000^200.5(1) = (401)_3000 / 3000! overflows a double but not the log form."""
    value = specfun.gegenbauer(3000, 200.5, 1.0)
    expected = math.lgamma(3401.0) - math.lgamma(401.0) - math.lgamma(3001.0)
    assert expected > math.log(1.7976931348623157e308)
    assert value.sign == 1
    assert value.log_abs == pytest.approx(expected, rel=1e-10)


@given(
    n=st.integers(min_value=0, max_value=60),
    nu=st.floats(min_value=0.1, max_value=20.0),
    x=st.floats(min_value=-1.0, max_value=1.0),
)
@hypothesis_settings(max_examples=100)
def test_gegenbauer_parity(n, nu, x):
    """Property: C_n(-x) = (-1)^n C_n(x)."""
    plus = specfun.gegenbauer(n, nu, x)
    minus = specfun.gegenbauer(n, nu, -x)
    if plus.is_zero:
        assert minus.is_zero
    else:
        assert minus.sign == plus.sign * (-1) ** n
        assert minus.log_abs == pytest.approx(plus.log_abs, rel=1e-12, abs=1e-12)


def test_gegenbauer_domain():
    with pytest.raises(DomainError):
        specfun.gegenbauer(3, -0.5, 0.2)
    with pytest.raises(DomainError):
        specfun.gegenbauer(-1, 1.0, 0.2)


def test_legendre_p_matches_scipy():
    for n in range(25):
        for x in (-0.9, -0.1, 0.42, 1.0):
            assert specfun.legendre_p(n, x) == pytest.approx(special.eval_legendre(n, x), abs=1e-13)
    with pytest.raises(DomainError):
        specfun.legendre_p(2, 1.5)


@pytest.mark.parametrize("x", [0.2, 0.65, 0.95])
def test_assoc_legendre_condon_shortley(x):
    """Nonnegative orders against scipy's lpmv, which includes the (-1)^k phase."""
    for l in range(13):
        for k in range(l + 1):
            bound = math.sqrt(math.factorial(l + k) / math.factorial(l - k))
            value = specfun.assoc_legendre_p(l, k, x).to_real()
            assert abs(value - special.lpmv(k, l, x)) <= 1e-11 * bound


@pytest.mark.parametrize("x", [0.2, 0.65])
def test_assoc_legendre_negative_order(x):
    """Negative orders against mpmath's Ferrers function."""
    for l in range(1, 9):
        for k in range(1, l + 1):
            reference = float(mpmath.re(mpmath.legenp(l, -k, x, type=2)))
            value = specfun.assoc_legendre_p(l, -k, x).to_real()
            assert value == pytest.approx(reference, rel=1e-10, abs=1e-14)


def test_assoc_legendre_domain():
    with pytest.raises(DomainError):
        specfun.assoc_legendre_p(2, 3, 0.5)
    with pytest.raises(DomainError):
        specfun.assoc_legendre_p(2, 1, 1.0)


@pytest.mark.parametrize("m", [0.0, 0.1, 0.5, 0.9, 0.999])
def test_elliptic_integrals_match_scipy(m):
    assert specfun.elliptic_K(m) == pytest.approx(special.ellipk(m), rel=1e-13)
    assert specfun.elliptic_E(m) == pytest.approx(special.ellipe(m), rel=1e-13)


def test_elliptic_domain():
    assert specfun.elliptic_E(1.0) == 1.0
    with pytest.raises(DomainError):
        specfun.elliptic_K(1.0)


def test_legendre_q_half_reference_value():
    """Q_{-1/2}(3) = sqrt(1/2) K(1/2)."""
    assert specfun.legendre_q_half(0, 3.0) == pytest.approx(1.3110288, abs=1e-7)


@pytest.mark.parametrize("z", [1.05, 1.5, 3.0, 10.0])
def test_legendre_q_half_matches_mpmath(z):
    for k in range(12):
        reference = float(mpmath.re(mpmath.legenq(k - 0.5, 0, z, type=3)))
        assert specfun.legendre_q_half(k, z) == pytest.approx(reference, rel=1e-9)


def test_legendre_q_half_falls_back_to_quadrature(mocker):
    """High degrees contaminate the upward recurrence; the integral form takes over."""
    spy = mocker.spy(specfun, "_legendre_q_half_quadrature")
    value = specfun.legendre_q_half(30, 3.0)
    assert spy.call_count == 1
    reference = float(mpmath.re(mpmath.legenq(29.5, 0, 3.0, type=3)))
    assert value == pytest.approx(reference, rel=1e-9)


def test_legendre_q_half_low_degree_uses_recurrence(mocker):
    spy = mocker.spy(specfun, "_legendre_q_half_quadrature")
    specfun.legendre_q_half(1, 3.0)
    assert spy.call_count == 0


@given(k=st.integers(min_value=0, max_value=15), z=st.floats(min_value=1.05, max_value=10.0))
@hypothesis_settings(max_examples=40, deadline=None)
def test_legendre_q_half_decreases_with_degree(k, z):
    assert 0.0 < specfun.legendre_q_half(k + 1, z) < specfun.legendre_q_half(k, z)


def test_legendre_q_half_domain():
    with pytest.raises(DomainError):
        specfun.legendre_q_half(1, 1.0)


@pytest.mark.parametrize("x", [0.1, 1.0, 5.0, 20.0, 50.0])
def test_bessel_j_matches_scipy(x):
    for k in range(11):
        assert specfun.bessel_j(k, x) == pytest.approx(special.jv(k, x), abs=1e-12)


@given(x=st.floats(min_value=0.0, max_value=40.0))
@example(x=1e-200)
@example(x=5e-324)
@hypothesis_settings(max_examples=50)
def test_bessel_sum_rule(x):
    """Property: J_0^2 + 2 sum_k J_k^2 = 1."""
    total = specfun.bessel_j(0, x) ** 2 + 2.0 * sum(specfun.bessel_j(k, x) ** 2 for k in range(1, int(x) + 40))
    assert total == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("w", [0.5 + 0.5j, 3.0 - 1.0j, 2.0j, 8.0 + 0.0j])
def test_bessel_j_complex_matches_scipy(w):
    for k in range(6):
        assert specfun.bessel_j_complex(k, w) == pytest.approx(special.jv(k, w), abs=1e-11)


def test_bessel_j_complex_rejects_large_argument():
    with pytest.raises(DomainError):
        specfun.bessel_j_complex(1, 25.0 + 0j)


def test_hermite_psi_explicit_polynomial():
    """psi_5(1) from H_5(x) = 32 x^5 - 160 x^3 + 120 x."""
    x = 1.0
    h5 = 32 * x ** 5 - 160 * x ** 3 + 120 * x
    expected = h5 * math.exp(-0.5 * x * x) / math.sqrt(2 ** 5 * math.factorial(5) * math.sqrt(math.pi))
    assert specfun.hermite_psi(5, x).to_real() == pytest.approx(expected, rel=1e-13)


def test_hermite_psi_normalized():
    """Trapezoidal integral of psi_n^2 over [-20, 20] is 1."""
    grid = np.linspace(-20.0, 20.0, 8001)
    for n in (0, 1, 7, 25, 50):
        values = np.array([specfun.hermite_psi(n, x).to_real() for x in grid])
        assert np.trapezoid(values ** 2, grid) == pytest.approx(1.0, abs=1e-8)


def test_hypergeometric_reference_value():
    """F(-1, -1/2; 2; -sinh^2 1) = 1 - sinh^2(1) / 4."""
    value = specfun.hypergeometric_terminating(-1.0, -0.5, 2.0, -math.sinh(1.0) ** 2)
    assert value.to_real() == pytest.approx(0.65472555, abs=1e-8)
    assert value.to_real() == pytest.approx(1.0 - math.sinh(1.0) ** 2 / 4.0, rel=1e-13)


def test_hypergeometric_matches_scipy():
    for a, b, c, z in ((-5.0, 0.3, 1.5, -0.7), (-3.5, -4.0, 2.0, 0.4), (-8.0, -7.5, 3.0, -0.9)):
        value = specfun.hypergeometric_terminating(a, b, c, z).to_real()
        assert value == pytest.approx(special.hyp2f1(a, b, c, z), rel=1e-10)


def test_hypergeometric_non_terminating():
    with pytest.raises(NonTerminatingSeriesError):
        specfun.hypergeometric_terminating(0.5, 1.5, 2.0, 0.3)
    with pytest.raises(NonTerminatingSeriesError):
        specfun.hypergeometric_terminating(-10.0, 0.5, 2.0, 0.3, max_terms=5)




def test_hypergeometric_cancelling_sum_is_refined(mocker):
    """F(-40, -40; 1; z) behind P_40(0.3) cancels about eleven digits in doubles."""
    spy = mocker.spy(specfun, "extended_series")
    z = (0.3 - 1.0) / (0.3 + 1.0)
    value, digits = specfun.hypergeometric_series(-40.0, -40.0, 1.0, z)
    assert spy.call_count == 1
    assert digits == 0.0
    with mpmath.workdps(60):
        reference = float(mpmath.hyp2f1(-40, -40, 1, mpmath.mpf(z)))
    assert value.to_real() == pytest.approx(reference, rel=1e-12)


def test_hypergeometric_mild_sum_stays_in_doubles(mocker):
    spy = mocker.spy(specfun, "extended_series")
    specfun.hypergeometric_series(-5.0, 0.3, 1.5, 0.4)
    assert spy.call_count == 0


def test_jacobi_high_degree_legendre():
    """P_40^(0,0)(0.3) = P_40(0.3) survives the cancellation in its series."""
    value, digits = specfun.jacobi_series(40, 0.0, 0.0, 0.3)
    assert digits <= settings.extended_precision_digits
    assert value.to_real() == pytest.approx(special.eval_legendre(40, 0.3), abs=1e-13)


@pytest.mark.parametrize("alpha", [0.0, 1.0, 2.5])
@pytest.mark.parametrize("beta", [-0.5, 0.5])
def test_jacobi_matches_mpmath(alpha, beta):
    for x in (-0.5, 0.3, 0.9):
        for k in range(21):
            value, digits = specfun.jacobi_series(k, alpha, beta, x)
            reference = float(mpmath.jacobi(k, alpha, beta, x))
            # binom(k + max(alpha, beta), k) bounds |P_k| on [-1, 1]
            floor = 1e-13 * special.binom(k + max(alpha, beta), k)
            assert abs(value.to_real() - reference) <= 1e-12 * 10.0 ** digits * abs(reference) + floor


def test_gegenbauer_half_is_legendre():
    """C_n^(1/2)(x) = P_n(x) for every degree to 200 on a 101-point grid."""
    for x in np.linspace(-1.0, 1.0, 101):
        for n in range(201):
            legendre = specfun.legendre_p(n, x)
            value = specfun.gegenbauer(n, 0.5, x).to_real()
            assert abs(value - legendre) <= 1e-10 * max(1.0, abs(legendre))


@pytest.mark.parametrize("x", [0.05, 0.3, 0.6, 0.85, 0.99])
def test_gegenbauer_to_associated_legendre_bridge(x):
    """
    pi^(-1/2) Gamma(mu + 1/2) C_(nu-mu)^(mu+1/2)(x)
        = (-1)^mu 2^(-mu) (1 - x^2)^(-mu/2) P_nu^mu(x)
    for 0 <= mu <= nu <= 40.
    """
    log_sin = 0.5 * math.log1p(-x * x)
    for nu in range(41):
        for mu in range(nu + 1):
            front = math.lgamma(mu + 0.5) - 0.5 * math.log(math.pi)
            left = specfun.gegenbauer(nu - mu, mu + 0.5, x).scaled(front).to_real()
            right = (-1) ** mu * specfun.assoc_legendre_p(nu, mu, x).scaled(-mu * (math.log(2.0) + log_sin)).to_real()
            # |C_n^lam(x)| <= C_n^lam(1) = (2 lam)_n / n!
            scale = math.exp(front) * special.poch(2.0 * mu + 1.0, nu - mu) / math.factorial(nu - mu)
            assert abs(left - right) <= 1e-9 * scale


def test_bessel_j_tiny_argument():
    """The ascending series keeps J_k finite where the recurrence ratio 2k/x overflows."""
    assert specfun.bessel_j(0, 1e-74) == 1.0
    assert specfun.bessel_j(1, 1e-200) == pytest.approx(5e-201, rel=1e-12)
    assert specfun.bessel_j(3, 5e-324) == 0.0
    for x in (1e-8, 5e-4, 9.99e-4):
        for k in range(11):
            assert specfun.bessel_j(k, x) == pytest.approx(special.jv(k, x), rel=1e-12, abs=1e-300)
