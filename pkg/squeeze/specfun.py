"""
Special functions behind the closed-form matrix elements.

Polynomial families are evaluated by their three-term recurrences in
signed-log form (see lognum.three_term_recurrence), so degrees and orders in
the thousands stay representable. Everything here is a pure function.
"""

import cmath
import logging
import math
from typing import Callable, Optional, Tuple

import mpmath
from scipy import integrate

from .config import settings
from .errors import DomainError, NonTerminatingSeriesError, NonConvergenceError
from .lognum import LogSigned, ONE, ZERO, series_from_ratios, three_term_recurrence

logger = logging.getLogger(__name__)

_EPS = 2.220446049250313e-16
_LN2 = math.log(2.0)


def log_gamma(x: float) -> float:
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def log_factorial(n: int) -> float:
    return math.lgamma(n + 1)


def pochhammer(a: float, k: int) -> LogSigned:
    """Rising factorial (a)_k = a (a+1) ... (a+k-1)."""
    if k < 0:
        raise DomainError(f"pochhammer requires k >= 0, got {k}")
    if k == 0:
        return ONE
    if a > 0:
        return LogSigned(math.lgamma(a + k) - math.lgamma(a), 1)
    log_abs = 0.0
    sign = 1
    for j in range(k):
        factor = a + j
        if factor == 0:
            return ZERO
        if factor > 0:
            # remaining factors are all positive
            log_abs += math.lgamma(a + k) - math.lgamma(factor)
            break
        log_abs += math.log(-factor)
        sign = -sign
    return LogSigned(log_abs, sign)


def gegenbauer(n: int, nu: float, x: float) -> LogSigned:
    if nu <= -0.5:
        raise DomainError(f"gegenbauer requires nu > -1/2, got {nu}")
    if n < 0:
        raise DomainError(f"gegenbauer requires n >= 0, got {n}")
    if n == 0:
        return ONE
    seed1 = LogSigned.from_real(2.0 * nu * x)
    return three_term_recurrence(
        ONE, seed1, n,
        lambda j: (2.0 * x * (j + nu - 1.0) / j, -(j + 2.0 * nu - 2.0) / j),
    )


def legendre_p(n: int, x: float) -> float:
    if abs(x) > 1.0:
        raise DomainError(f"legendre_p requires |x| <= 1, got {x}")
    if n == 0:
        return 1.0
    prev, cur = 1.0, x
    for j in range(2, n + 1):
        prev, cur = cur, ((2 * j - 1) * x * cur - (j - 1) * prev) / j
    return cur


def _assoc_legendre(l: int, k: int, x: float, log_sin: float) -> LogSigned:
    """
    Ferrers P_l^k(x) with the Condon-Shortley phase, given
    log_sin = log sqrt(1 - x^2) computed by the caller.
    """
    if k < 0:
        kp = -k
        base = _assoc_legendre(l, kp, x, log_sin)
        ratio = LogSigned(math.lgamma(l - kp + 1) - math.lgamma(l + kp + 1), -1 if kp % 2 else 1)
        return base * ratio
    if k == 0:
        diagonal = ONE
    elif log_sin == -math.inf:
        return ZERO
    else:
        # (2k-1)!! = (2k)! / (2^k k!)
        log_double_factorial = math.lgamma(2 * k + 1) - k * _LN2 - math.lgamma(k + 1)
        diagonal = LogSigned(log_double_factorial + k * log_sin, -1 if k % 2 else 1)
    if l == k:
        return diagonal
    above = diagonal * ((2 * k + 1) * x)
    return three_term_recurrence(
        diagonal, above, l - k,
        lambda j: ((2 * k + 2 * j - 1) * x / j, -(2 * k + j - 1) / j),
    )


def assoc_legendre_p(l: int, k: int, x: float) -> LogSigned:
    if not isinstance(l, int) or not isinstance(k, int) or l < 0:
        raise DomainError(f"assoc_legendre_p requires integer l >= 0 and integer k, got l={l}, k={k}")
    if abs(k) > l:
        raise DomainError(f"assoc_legendre_p requires |k| <= l, got l={l}, k={k}")
    if not 0.0 < x < 1.0:
        raise DomainError(f"assoc_legendre_p requires 0 < x < 1, got {x}")
    log_sin = 0.5 * (math.log1p(-x) + math.log1p(x))
    return _assoc_legendre(l, k, x, log_sin)


def _agm_iterations(m: float):
    a, b, c = 1.0, math.sqrt(1.0 - m), math.sqrt(m)
    yield a, b, c
    for _ in range(64):
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        yield a, b, c
        if abs(c) <= _EPS * a:
            return


def elliptic_K(m: float) -> float:
    """Complete elliptic integral of the first kind, parameter m = k^2."""
    if not 0.0 <= m < 1.0:
        raise DomainError(f"elliptic_K requires 0 <= m < 1, got {m}")
    a = 1.0
    for a, _, _ in _agm_iterations(m):
        pass
    return math.pi / (2.0 * a)


def elliptic_E(m: float) -> float:
    """Complete elliptic integral of the second kind, parameter m = k^2."""
    if not 0.0 <= m <= 1.0:
        raise DomainError(f"elliptic_E requires 0 <= m <= 1, got {m}")
    if m == 1.0:
        return 1.0
    a = 1.0
    weighted = 0.0
    power = 0.5
    for a, _, c in _agm_iterations(m):
        weighted += power * c * c
        power *= 2.0
    return math.pi / (2.0 * a) * (1.0 - weighted)


def _toroidal_seeds(z: float) -> Tuple[float, float, float, float]:
    """Q_{-1/2}(z), Q_{1/2}(z) and the rounding error of each seed."""
    m = 2.0 / (z + 1.0)
    modulus = math.sqrt(m)
    big_k = elliptic_K(m)
    big_e = elliptic_E(m)
    q0 = modulus * big_k
    first = z * modulus * big_k
    second = math.sqrt(2.0 * (z + 1.0)) * big_e
    q1 = first - second
    return q0, q1, 4.0 * _EPS * q0, 4.0 * _EPS * (abs(first) + abs(second))


def _legendre_q_half_quadrature(k: int, z: float) -> float:
    """Q_{k-1/2}(z) = int_0^inf (z + sqrt(z^2-1) cosh t)^(-k-1/2) dt."""
    root = math.sqrt((z - 1.0) * (z + 1.0))
    order = k + 0.5
    peak = z + root

    def integrand(t: float) -> float:
        if t > 700.0:
            return 0.0
        return ((z + root * math.cosh(t)) / peak) ** (-order)

    value, _ = integrate.quad(integrand, 0.0, math.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return math.exp(-order * math.log(peak)) * value


def legendre_q_half(k: int, z: float) -> float:
    """
    Toroidal function Q_{k-1/2}(z) for z > 1.

    Seeds come from complete elliptic integrals and higher degrees from
    (j + 1/2) Q_{j+1/2} = 2 j z Q_{j-1/2} - (j - 1/2) Q_{j-3/2}. Q is the
    minimal solution, so the propagated seed error is tracked alongside; once
    its relative size passes settings.q_contamination_limit the value is
    recomputed from the integral representation.
    """
    if not z > 1.0:
        raise DomainError(f"legendre_q_half requires z > 1, got {z}")
    if k < 0:
        raise DomainError(f"legendre_q_half requires k >= 0, got {k}")
    q0, q1, err0, err1 = _toroidal_seeds(z)
    if k == 0:
        return q0
    prev, cur = q0, q1
    err_prev, err_cur = err0, err1
    for j in range(1, k):
        nxt = (2.0 * j * z * cur - (j - 0.5) * prev) / (j + 0.5)
        err_nxt = (2.0 * j * z * err_cur + (j - 0.5) * err_prev) / (j + 0.5) + _EPS * abs(nxt)
        prev, cur = cur, nxt
        err_prev, err_cur = err_cur, err_nxt
    if cur > 0.0 and err_cur <= settings.q_contamination_limit * cur:
        return cur
    logger.debug(f"Q_{k}-1/2({z}) recurrence contaminated (error bound {err_cur:.3e}); using quadrature")
    return _legendre_q_half_quadrature(k, z)


_BESSEL_SERIES_MAX_X = 1e-3


def _bessel_j_small(k: int, x: float) -> float:
    # ascending series; the downward recurrence overflows once 2 order / x is huge
    step = -0.25 * x * x
    term = 1.0
    terms = [term]
    for j in range(1, 20):
        term *= step / (j * (j + k))
        if abs(term) < 1e-18:
            break
        terms.append(term)
    return math.exp(k * (math.log(x) - _LN2) - math.lgamma(k + 1)) * math.fsum(terms)


def bessel_j(k: int, x: float) -> float:
    """J_k(x) by downward Miller recurrence normalized with J_0 + 2 sum J_2m = 1."""
    if k < 0:
        raise DomainError(f"bessel_j requires k >= 0, got {k}")
    if x < 0:
        raise DomainError(f"bessel_j requires x >= 0, got {x}")
    if x == 0.0:
        return 1.0 if k == 0 else 0.0
    if x < _BESSEL_SERIES_MAX_X:
        return _bessel_j_small(k, x)
    start = k + math.ceil(1.5 * x) + settings.bessel_start_margin
    if start % 2:
        start += 1
    upper, current = 0.0, 1.0
    norm = 2.0 * current
    result = 0.0
    for order in range(start, 0, -1):
        lower = (2.0 * order / x) * current - upper
        upper, current = current, lower
        if order - 1 == k:
            result = current
        if (order - 1) % 2 == 0:
            norm += current if order == 1 else 2.0 * current
        if abs(current) > 1e250:
            upper *= 1e-250
            current *= 1e-250
            norm *= 1e-250
            result *= 1e-250
    return result / norm


def bessel_j_complex(k: int, w: complex, max_terms: Optional[int] = None) -> complex:
    """J_k(w) for complex w in a bounded disk, by the ascending series."""
    if k < 0:
        raise DomainError(f"bessel_j_complex requires k >= 0, got {k}")
    if abs(w) > settings.bessel_complex_max_abs:
        raise DomainError(f"bessel_j_complex requires |w| <= {settings.bessel_complex_max_abs}, got {abs(w)}")
    if w == 0:
        return complex(1.0 if k == 0 else 0.0)
    max_terms = max_terms or 500
    half = complex(w) / 2.0
    step = -half * half
    term = half ** k * math.exp(-math.lgamma(k + 1))
    real_parts = [term.real]
    imag_parts = [term.imag]
    largest = abs(term)
    for j in range(1, max_terms + 1):
        term *= step / (j * (j + k))
        real_parts.append(term.real)
        imag_parts.append(term.imag)
        largest = max(largest, abs(term))
        if j > abs(half) and abs(term) <= 1e-17 * largest:
            return complex(math.fsum(real_parts), math.fsum(imag_parts))
    raise NonConvergenceError(f"bessel_j_complex did not converge in {max_terms} terms for w={w}")


def hermite_psi(n: int, x: float) -> LogSigned:
    """Normalized Hermite function (pi^(1/2) 2^n n!)^(-1/2) H_n(x) exp(-x^2/2)."""
    if n < 0:
        raise DomainError(f"hermite_psi requires n >= 0, got {n}")
    psi0 = LogSigned(-0.25 * math.log(math.pi) - 0.5 * x * x, 1)
    if n == 0:
        return psi0
    psi1 = psi0 * (math.sqrt(2.0) * x)
    return three_term_recurrence(
        psi0, psi1, n,
        lambda j: (x * math.sqrt(2.0 / j), -math.sqrt((j - 1.0) / j)),
    )


def _terminating_length(a: float, b: float) -> int:
    counts = [int(-p) for p in (a, b) if p <= 0 and float(p).is_integer()]
    if not counts:
        raise NonTerminatingSeriesError(f"series F({a}, {b}; c; z) does not terminate")
    return min(counts)


def _extended_dps(digits: float) -> int:
    if math.isinf(digits):
        return settings.extended_max_dps
    return min(settings.extended_max_dps, 16 + math.ceil(digits) + settings.extended_guard_digits)


def extended_series(make_ratio: Callable[[], Callable[[int], "mpmath.mpf"]], length: int, digits: float) -> LogSigned:
    """
    Redo a terminating sum t_0 = 1, t_{j+1} = t_j * ratio(j) in mpmath.

    make_ratio is called inside the raised working precision, so any argument
    it derives (e.g. -sinh^2 r from r) is computed at that precision too.
    digits is the loss measured in double precision and sets the precision.
    """
    with mpmath.workdps(_extended_dps(digits)):
        ratio = make_ratio()
        term = mpmath.mpf(1)
        terms = [term]
        for j in range(length):
            term = term * ratio(j)
            if not term:
                break
            terms.append(term)
        total = mpmath.fsum(terms)
        if not total:
            return ZERO
        return LogSigned(float(mpmath.log(abs(total))), 1 if total > 0 else -1)


def hypergeometric_series(
    a: float,
    b: float,
    c: float,
    z: float,
    max_terms: Optional[int] = None,
    z_exact: Optional[Callable[[], "mpmath.mpf"]] = None,
) -> Tuple[LogSigned, float]:
    """
    Terminating 2F1 together with the decimal digits its value still lacks.

    The sum runs in double precision first. If it loses more than
    settings.extended_precision_digits to cancellation it is redone with
    extended_series and the residual loss is reported as 0. z_exact, when
    given, returns z at the current mpmath precision; otherwise z itself is
    taken as exact.
    """
    if c <= 0:
        raise DomainError(f"hypergeometric_terminating requires c > 0, got {c}")
    length = _terminating_length(a, b)
    if max_terms is not None and length > max_terms:
        raise NonTerminatingSeriesError(
            f"series F({a}, {b}; {c}; z) needs {length} terms, bound is {max_terms}"
        )
    ratios = ((a + j) * (b + j) * z / ((j + 1) * (c + j)) for j in range(length))
    value, digits = series_from_ratios(ratios)
    if digits <= settings.extended_precision_digits:
        return value, digits

    def make_ratio():
        exact = z_exact() if z_exact is not None else mpmath.mpf(z)
        return lambda j: (a + j) * (b + j) * exact / ((j + 1) * (c + j))

    logger.debug(f"F({a}, {b}; {c}; {z}) lost {digits:.1f} digits; summing in extended precision")
    return extended_series(make_ratio, length, digits), 0.0


def hypergeometric_terminating(
    a: float, b: float, c: float, z: float, max_terms: Optional[int] = None
) -> LogSigned:
    value, _ = hypergeometric_series(a, b, c, z, max_terms)
    return value


def jacobi_series(
    k: int, alpha: float, beta: float, x: float, z_exact: Optional[Callable[[], "mpmath.mpf"]] = None
) -> Tuple[LogSigned, float]:
    """
    P_k^(alpha, beta)(x) from
    ((alpha+1)_k / k!) ((x+1)/2)^k F(-k, -k-beta; alpha+1; (x-1)/(x+1)),
    with the digits the terminating sum still lacks. z_exact overrides the
    series argument (x-1)/(x+1) in extended precision.
    """
    if k < 0:
        raise DomainError(f"jacobi_p requires k >= 0, got {k}")
    if alpha <= -1.0:
        raise DomainError(f"jacobi_p requires alpha > -1, got {alpha}")
    if x <= -1.0:
        raise DomainError(f"jacobi_p requires x > -1, got {x}")
    if z_exact is None:
        def z_exact():
            exact_x = mpmath.mpf(x)
            return (exact_x - 1) / (exact_x + 1)

    series, digits = hypergeometric_series(-k, -k - beta, alpha + 1.0, (x - 1.0) / (x + 1.0), z_exact=z_exact)
    prefactor = pochhammer(alpha + 1.0, k).scaled(k * math.log(0.5 * (x + 1.0)) - math.lgamma(k + 1))
    return prefactor * series, digits


def jacobi_p(k: int, alpha: float, beta: float, x: float) -> LogSigned:
    value, _ = jacobi_series(k, alpha, beta, x)
    return value
