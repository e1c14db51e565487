"""
Matrix elements <m|S(xi)|n> of the squeezing operator.

Five closed-form routes are implemented independently of each other:

  gegenbauer      unifying formula, C_n^(alpha+1/2)(1/cosh r)   (primary)
  hypergeometric  terminating 2F1 in z = -sinh^2 r
  finite_sum      the normal-ordered double sum reduced to a single sum
  legendre        sqrt(cos theta) times a non-normalized spherical harmonic
  jacobi          parity-split Jacobi forms P^(alpha, -+1/2)

Magnitudes are assembled as logs first and exponentiated once, so indices in
the thousands do not overflow. For r = 0 every route returns delta_mn.
"""

import logging
import math
from collections import deque
from typing import Dict, Optional

import mpmath

from .config import settings
from .errors import ArgumentError, CutoffExceededError, DomainError
from .lognum import LOG_COMPLEX_ZERO, LogComplex, LogSigned, series_from_ratios
from .schemas import CLOSED_FORM_ROUTES, Derived, Distribution, ElementResult, FockPair, Route, SqueezeParam
from .specfun import (
    _assoc_legendre,
    extended_series,
    gegenbauer,
    hermite_psi,
    hypergeometric_series,
    jacobi_series,
    legendre_p,
)

logger = logging.getLogger(__name__)

_EPS = 2.220446049250313e-16
_HALF_LOG_PI = 0.5 * math.log(math.pi)


def _log_cosh(r: float) -> float:
    return r + math.log1p(math.exp(-2.0 * r)) - math.log(2.0)


def derive(param: SqueezeParam) -> Derived:
    r = param.r
    log_cosh_r = _log_cosh(r)
    try:
        cosh_r = math.cosh(r)
        sinh_r = math.sinh(r)
    except OverflowError:
        raise DomainError(f"r={r} is too large: cosh r overflows")
    tanh_r = math.tanh(r)
    return Derived(
        eta=2.0 * log_cosh_r,
        zeta=complex(tanh_r * math.cos(param.phi), tanh_r * math.sin(param.phi)),
        x=math.exp(-log_cosh_r),
        theta=math.atan(sinh_r),
        z=-sinh_r * sinh_r,
        s=math.exp(r),
        cosh_r=cosh_r,
        sinh_r=sinh_r,
        tanh_r=tanh_r,
        log_cosh_r=log_cosh_r,
    )


def _minus_sinh_squared(r: float):
    # -sinh^2 r at the caller's mpmath precision, for sums redone in extended precision
    return lambda: -mpmath.sinh(mpmath.mpf(r)) ** 2


def _is_identity(param: SqueezeParam) -> bool:
    return param.r == 0.0


def _identity_result(pair: FockPair, route: Route) -> ElementResult:
    value = 1.0 if pair.m == pair.n else 0.0
    return ElementResult(
        value=complex(value),
        route=route,
        log_form=LogComplex.from_complex(value),
        error_estimate=0.0,
        condition_note="identity (r = 0)",
    )


def _parity_zero(route: Route) -> ElementResult:
    return ElementResult(
        value=0j,
        route=route,
        log_form=LOG_COMPLEX_ZERO,
        error_estimate=0.0,
        condition_note="parity selection rule: m + n odd",
    )


def _result(log_form: LogComplex, route: Route, steps: int, digits: float = 0.0) -> ElementResult:
    value = log_form.to_complex()
    estimate = abs(value) * _EPS * (steps + 1) * 10.0 ** digits
    note = None
    if digits > settings.cancellation_digits:
        note = f"cancellation: {digits:.1f} decimal digits lost in alternating sum"
        logger.warning(f"{route.value}: {note}")
    return ElementResult(value=value, route=route, log_form=log_form, error_estimate=estimate, condition_note=note)


def _mirror_phase(count: int, phi: float) -> float:
    # (-e^{-i phi})^count
    return count * (math.pi - phi)


def _gegenbauer_log_form(pair: FockPair, param: SqueezeParam, d: Derived) -> LogComplex:
    m, n = pair.m, pair.n
    log_x = -d.log_cosh_r
    log_two_tanh = math.log(2.0 * d.tanh_r)
    if m >= n:
        order, low, high, phase = pair.alpha, n, m, pair.alpha * param.phi
    else:
        order, low, high, phase = pair.lam, m, n, _mirror_phase(pair.lam, param.phi)
    log_mag = (
        0.5 * log_x
        + order * log_two_tanh
        + 0.5 * (math.lgamma(low + 1) - math.lgamma(high + 1))
        - _HALF_LOG_PI
        + math.lgamma(order + 0.5)
    )
    poly = gegenbauer(low, order + 0.5, d.x)
    return LogComplex.from_log_signed(poly.scaled(log_mag), phase)


def element_gegenbauer(pair: FockPair, param: SqueezeParam) -> ElementResult:
    if _is_identity(param):
        return _identity_result(pair, Route.GEGENBAUER)
    if pair.parity:
        return _parity_zero(Route.GEGENBAUER)
    d = derive(param)
    return _result(_gegenbauer_log_form(pair, param, d), Route.GEGENBAUER, pair.n_lt)


def element_hypergeometric(pair: FockPair, param: SqueezeParam) -> ElementResult:
    if _is_identity(param):
        return _identity_result(pair, Route.HYPERGEOMETRIC)
    if pair.parity:
        return _parity_zero(Route.HYPERGEOMETRIC)
    d = derive(param)
    m, n = pair.m, pair.n
    if m >= n:
        order, low, high, phase = pair.alpha, n, m, pair.alpha * param.phi
    else:
        order, low, high, phase = pair.lam, m, n, _mirror_phase(pair.lam, param.phi)
    series, digits = hypergeometric_series(
        -low / 2.0, (1.0 - low) / 2.0, order + 1.0, d.z, z_exact=_minus_sinh_squared(param.r)
    )
    log_mag = (
        -(low + 0.5) * d.log_cosh_r
        + order * math.log(0.5 * d.tanh_r)
        + 0.5 * (math.lgamma(high + 1) - math.lgamma(low + 1))
        - math.lgamma(order + 1)
    )
    log_form = LogComplex.from_log_signed(series.scaled(log_mag), phase)
    return _result(log_form, Route.HYPERGEOMETRIC, low, digits)


def element_finite_sum(pair: FockPair, param: SqueezeParam) -> ElementResult:
    if _is_identity(param):
        return _identity_result(pair, Route.FINITE_SUM)
    if pair.parity:
        return _parity_zero(Route.FINITE_SUM)
    d = derive(param)
    m, n = pair.m, pair.n
    if m >= n:
        order, low, phase = pair.alpha, n, pair.alpha * param.phi
    else:
        order, low, phase = pair.lam, m, _mirror_phase(pair.lam, param.phi)
    step = -0.25 * d.sinh_r * d.sinh_r
    # t_k = step^k / ((order+k)! k! (low-2k)!), relative to t_0 = 1 / (order! low!)
    ratios = (
        step * (low - 2 * j) * (low - 2 * j - 1) / ((order + j + 1) * (j + 1))
        for j in range(low // 2)
    )
    series, digits = series_from_ratios(ratios)
    if digits > settings.extended_precision_digits:

        def make_ratio():
            exact_step = _minus_sinh_squared(param.r)() / 4
            return lambda j: exact_step * (low - 2 * j) * (low - 2 * j - 1) / ((order + j + 1) * (j + 1))

        series, digits = extended_series(make_ratio, low // 2, digits), 0.0
    log_mag = (
        -(low + 0.5) * d.log_cosh_r
        + order * math.log(0.5 * d.tanh_r)
        + 0.5 * (math.lgamma(m + 1) + math.lgamma(n + 1))
        - math.lgamma(order + 1)
        - math.lgamma(low + 1)
    )
    log_form = LogComplex.from_log_signed(series.scaled(log_mag), phase)
    return _result(log_form, Route.FINITE_SUM, low, digits)


def element_legendre(pair: FockPair, param: SqueezeParam) -> ElementResult:
    if _is_identity(param):
        return _identity_result(pair, Route.LEGENDRE)
    if pair.parity:
        return _parity_zero(Route.LEGENDRE)
    d = derive(param)
    l, k = pair.l, pair.k
    legendre = _assoc_legendre(l, k, d.x, math.log(d.tanh_r))
    # X_l^k = (-1)^k sqrt((l-k)!/(l+k)!) P_l^k(cos theta) e^{ik phi}
    log_mag = -0.5 * d.log_cosh_r + 0.5 * (math.lgamma(l - k + 1) - math.lgamma(l + k + 1))
    harmonic = legendre.scaled(log_mag) * (-1.0 if k % 2 else 1.0)
    log_form = LogComplex.from_log_signed(harmonic, k * param.phi)
    return _result(log_form, Route.LEGENDRE, pair.n_lt)


def _jacobi_upper(pair: FockPair, param: SqueezeParam, d: Derived) -> ElementResult:
    m, n, alpha = pair.m, pair.n, pair.alpha
    argument = d.x * d.x - d.tanh_r * d.tanh_r # (1+z)/(1-z) = 2x^2 - 1
    log_mag = -0.5 * d.log_cosh_r + alpha * math.log(0.5 * d.tanh_r) + 0.5 * (math.lgamma(m + 1) - math.lgamma(n + 1))
    if n % 2 == 0:
        degree = n // 2
        poly, digits = jacobi_series(degree, alpha, -0.5, argument, z_exact=_minus_sinh_squared(param.r))
        log_mag += math.lgamma(degree + 1) - math.lgamma(m // 2 + 1)
    else:
        degree = (n - 1) // 2
        poly, digits = jacobi_series(degree, alpha, 0.5, argument, z_exact=_minus_sinh_squared(param.r))
        # sqrt((1 + X)/2) = x
        log_mag += math.lgamma(degree + 1) - math.lgamma((m - 1) // 2 + 1) - d.log_cosh_r
    log_form = LogComplex.from_log_signed(poly.scaled(log_mag), alpha * param.phi)
    return _result(log_form, Route.JACOBI, n, digits)


def element_jacobi(pair: FockPair, param: SqueezeParam) -> ElementResult:
    if _is_identity(param):
        return _identity_result(pair, Route.JACOBI)
    if pair.parity:
        return _parity_zero(Route.JACOBI)
    d = derive(param)
    if pair.m >= pair.n:
        return _jacobi_upper(pair, param, d)
    # <m|S|n> = (-1)^lam conj(<n|S|m>)
    mirrored = _jacobi_upper(pair.swapped(), param, d)
    log_form = mirrored.log_form.conjugate().rotated(pair.lam * math.pi)
    return ElementResult(
        value=log_form.to_complex(),
        route=Route.JACOBI,
        log_form=log_form,
        error_estimate=mirrored.error_estimate,
        condition_note=mirrored.condition_note,
    )


_ROUTES = {
    Route.GEGENBAUER: element_gegenbauer,
    Route.HYPERGEOMETRIC: element_hypergeometric,
    Route.FINITE_SUM: element_finite_sum,
    Route.LEGENDRE: element_legendre,
    Route.JACOBI: element_jacobi,
}


def element(pair: FockPair, param: SqueezeParam, route: Route = Route.GEGENBAUER) -> ElementResult:
    return _ROUTES[route](pair, param)


def all_routes(pair: FockPair, param: SqueezeParam) -> Dict[Route, ElementResult]:
    return {route: _ROUTES[route](pair, param) for route in CLOSED_FORM_ROUTES}


def transition_probability(pair: FockPair, param: SqueezeParam) -> float:
    """w_mn = (n_<! / n_>!) x |P_l^k(x)|^2 with l = (m+n)/2, k = |m-n|/2."""
    if _is_identity(param):
        return 1.0 if pair.m == pair.n else 0.0
    if pair.parity:
        return 0.0
    d = derive(param)
    legendre = _assoc_legendre(pair.l, abs(pair.k), d.x, math.log(d.tanh_r))
    if legendre.is_zero:
        return 0.0
    log_w = math.lgamma(pair.n_lt + 1) - math.lgamma(pair.n_gt + 1) - d.log_cosh_r + 2.0 * legendre.log_abs
    return math.exp(log_w)


def distribution(n: int, param: SqueezeParam, mass_target: Optional[float] = None) -> Distribution:
    """
    Photon-number distribution p_m(n) = |<m|S|n>|^2 over m of the parity of n.

    Extends m until the captured mass reaches mass_target and the last
    settings.distribution_tail_terms terms are each below
    settings.distribution_tail_threshold.
    """
    target = settings.distribution_mass_target if mass_target is None else mass_target
    if not 0.0 < target < 1.0:
        raise ArgumentError(f"mass_target must lie in (0, 1), got {target}")
    if n < 0:
        raise ArgumentError(f"n must be nonnegative, got {n}")
    identity = _is_identity(param)
    d = None if identity else derive(param)
    recent = deque(maxlen=settings.distribution_tail_terms)
    probs = []
    captured = 0.0
    m = n % 2
    while True:
        if m > settings.distribution_hard_cap:
            raise CutoffExceededError(
                f"distribution for n={n}, r={param.r} reached m={m} with mass {captured:.3e} < {target}"
            )
        if identity:
            p = 1.0 if m == n else 0.0
        else:
            log_form = _gegenbauer_log_form(FockPair(m=m, n=n), param, d)
            p = 0.0 if log_form.is_zero else math.exp(2.0 * log_form.log_abs)
        probs.append((m, p))
        captured += p
        recent.append(p)
        if (
            captured >= target
            and len(recent) == recent.maxlen
            and all(q < settings.distribution_tail_threshold for q in recent)
        ):
            break
        m += 2
    captured_mass = math.fsum(p for _, p in probs)
    mean = math.fsum((m + 0.5) * p for m, p in probs)
    logger.debug(f"distribution n={n}, r={param.r}: m_max={m}, mass={captured_mass!r}")
    return Distribution(n=n, param=param, probs=probs, captured_mass=captured_mass, mean_energy=mean)


def element_hermite_approx(pair: FockPair, param: SqueezeParam) -> ElementResult:
    """Large-squeezing approximation e^{i phi (m-n)/2} psi_n(t_m) / (cosh r sqrt(t_m))."""
    if pair.m < 1:
        raise DomainError("hermite approximation requires m >= 1")
    if pair.parity:
        return _parity_zero(Route.HERMITE_APPROX)
    d = derive(param)
    t = math.sqrt(pair.m / 2.0) / d.cosh_r
    psi = hermite_psi(pair.n, t)
    log_form = LogComplex.from_log_signed(
        psi.scaled(-d.log_cosh_r - 0.5 * math.log(t)),
        0.5 * param.phi * (pair.m - pair.n),
    )
    return ElementResult(
        value=log_form.to_complex(),
        route=Route.HERMITE_APPROX,
        log_form=log_form,
        condition_note=f"t_m = {t!r}",
    )


def hermite_approx_distribution(n: int, param: SqueezeParam, m_max: int) -> Distribution:
    """p_m(n) from the Hermite approximation on the support of n's parity up to m_max."""
    probs = []
    for m in range(n % 2, m_max + 1, 2):
        if m == 0:
            continue
        result = element_hermite_approx(FockPair(m=m, n=n), param)
        probs.append((m, 0.0 if result.log_form.is_zero else math.exp(2.0 * result.log_form.log_abs)))
    # not normalized on the lattice; the mass is reported as computed
    captured = math.fsum(p for _, p in probs)
    mean = math.fsum((m + 0.5) * p for m, p in probs)
    return Distribution(n=n, param=param, probs=probs, captured_mass=captured, mean_energy=mean, route=Route.HERMITE_APPROX)


def regime_indicators(n: int, param: SqueezeParam) -> Dict[str, float]:
    d = derive(param)
    sech2 = 1.0 / (d.cosh_r * d.cosh_r)
    return {
        "n_over_cosh2_r": n * sech2,
        "n_one_minus_tanh2_r": n * (1.0 - d.tanh_r * d.tanh_r),
        "n2_tanh2_r": n * n * d.tanh_r * d.tanh_r,
    }


def mean_energy(n: int, r: float) -> float:
    return (n + 0.5) * math.cosh(2.0 * r)


def squeezed_vacuum_amplitude(m: int, param: SqueezeParam) -> complex:
    """<m|S|0> = sqrt(cos theta) sqrt((2l)! / (2^(2l) (l!)^2)) sin^l theta e^{il phi}, l = m/2."""
    if m % 2:
        return 0j
    if _is_identity(param):
        return complex(1.0 if m == 0 else 0.0)
    d = derive(param)
    l = m // 2
    log_mag = (
        -0.5 * d.log_cosh_r
        + 0.5 * (math.lgamma(2 * l + 1) - 2 * l * math.log(2.0) - 2.0 * math.lgamma(l + 1))
        + l * math.log(d.tanh_r)
    )
    return LogComplex(log_mag, l * param.phi).to_complex()


def diagonal_closed_form(n: int, param: SqueezeParam) -> float:
    """<n|S|n> = sqrt(x) P_n(x)."""
    d = derive(param)
    return math.sqrt(d.x) * legendre_p(n, d.x)


def local_maxima(dist: Distribution, m_max: Optional[int] = None) -> int:
    """Interior local maxima of p_m over the occupied parity, m <= m_max."""
    values = [p for m, p in dist.probs if m_max is None or m <= m_max]
    return sum(1 for i in range(1, len(values) - 1) if values[i - 1] < values[i] > values[i + 1])
