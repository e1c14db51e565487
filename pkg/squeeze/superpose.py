"""
Coherent, Gaussian-stochastic and thermal superpositions of squeezing
matrix elements, each as a closed form and as the term-by-term sum it
replaces.
"""

import cmath
import logging
import math
from typing import Dict, Optional

from .config import settings
from .core import derive, element, transition_probability
from .errors import ArgumentError, DomainError, NonConvergenceError
from .oracle import quadrature_exp_weighted
from .schemas import CoherentPair, ComparisonReport, FockPair, PlanckWeights, Regime, SqueezeParam, ThermalField
from .specfun import bessel_j, bessel_j_complex, legendre_q_half

logger = logging.getLogger(__name__)

RAYLEIGH_JEANS_LIMIT = 0.1
WIEN_LIMIT = 3.0


def _check_tol(rel_tol: float):
    if not 0.0 < rel_tol < 1.0:
        raise ArgumentError(f"rel_tol must lie in (0, 1), got {rel_tol}")


def coherent_sum_lhs(pair: CoherentPair, k: int, param: SqueezeParam, rel_tol: float = 1e-12) -> complex:
    """
    sum_n <beta|n+2k><n+2k|S|n><n|alpha>, with Gegenbauer-route elements.

    Since |<m|S|n>| <= 1, the coherent weights u_n bound the terms; their
    ratio q_n = |alpha beta| / sqrt((n+2k+1)(n+1)) decreases, so the tail after
    n is at most u_{n+1} / (1 - q_{n+1}) once q_{n+1} < 1.
    """
    _check_tol(rel_tol)
    if k < 0:
        raise ArgumentError(f"k must be nonnegative, got {k}")
    a, b = complex(pair.alpha), complex(pair.beta)
    abs_a, abs_b = abs(a), abs(b)
    log_damping = -0.5 * (abs_a * abs_a + abs_b * abs_b)
    real_parts, imag_parts = [], []

    def log_weight(n: int) -> float:
        # log u_n; -inf where a zero amplitude kills the term
        if (abs_b == 0.0 and n + 2 * k > 0) or (abs_a == 0.0 and n > 0):
            return -math.inf
        log_b = math.log(abs_b) if abs_b else 0.0
        log_a = math.log(abs_a) if abs_a else 0.0
        return (
            (n + 2 * k) * log_b + n * log_a
            - 0.5 * (math.lgamma(n + 2 * k + 1) + math.lgamma(n + 1))
            + log_damping
        )

    arg_a = cmath.phase(a)
    arg_b = cmath.phase(b)
    for n in range(settings.series_max_terms):
        weight = log_weight(n)
        if weight > -math.inf:
            result = element(FockPair(m=n + 2 * k, n=n), param)
            if not result.log_form.is_zero:
                log_abs = weight + result.log_form.log_abs
                angle = n * arg_a - (n + 2 * k) * arg_b + result.log_form.phase
                term = cmath.rect(math.exp(log_abs), angle)
                real_parts.append(term.real)
                imag_parts.append(term.imag)
        partial = abs(complex(math.fsum(real_parts), math.fsum(imag_parts)))
        next_weight = log_weight(n + 1)
        if next_weight == -math.inf:
            return complex(math.fsum(real_parts), math.fsum(imag_parts))
        ratio = abs_a * abs_b / math.sqrt((n + 2 * k + 2) * (n + 2))
        if ratio < 1.0 and math.exp(next_weight) / (1.0 - ratio) <= rel_tol * partial:
            logger.debug(f"coherent sum settled after {n + 1} terms")
            return complex(math.fsum(real_parts), math.fsum(imag_parts))
    raise NonConvergenceError(f"coherent sum did not settle in {settings.series_max_terms} terms")


def coherent_closed_rhs(pair: CoherentPair, k: int, param: SqueezeParam) -> complex:
    """
    exp(-|beta|^2/2 - |alpha|^2/2 + beta* alpha cos theta) e^{-eta/4} e^{ik phi}
    (beta*/alpha)^k J_k(beta* alpha tanh r).
    """
    if k < 0:
        raise ArgumentError(f"k must be nonnegative, got {k}")
    a, b = complex(pair.alpha), complex(pair.beta)
    if a == 0 and k > 0:
        raise DomainError("coherent_closed_rhs requires alpha != 0 when k > 0")
    d = derive(param)
    product = b.conjugate() * a
    exponent = -0.5 * (abs(a) ** 2 + abs(b) ** 2) + product * d.x - 0.25 * d.eta + 1j * k * param.phi
    ratio = (b.conjugate() / a) ** k if k else 1.0
    return cmath.exp(exponent) * ratio * bessel_j_complex(k, product * d.tanh_r)


def semiclassical_correspondence(alpha: complex, k: int, param: SqueezeParam) -> Dict[str, float]:
    """
    For beta = alpha: |coherent_closed_rhs| against the real Bessel envelope
    exp(-|alpha|^2 (1 - cos theta)) e^{-eta/4} |J_k(|alpha|^2 tanh r)|.
    """
    quantum = abs(coherent_closed_rhs(CoherentPair(alpha=alpha, beta=alpha), k, param))
    d = derive(param)
    intensity = abs(alpha) ** 2
    envelope = math.exp(-intensity * (1.0 - d.x) - 0.25 * d.eta) * abs(bessel_j(k, intensity * d.tanh_r))
    return {"quantum": quantum, "semiclassical": envelope, "deviation": abs(quantum - envelope)}


def _check_gaussian(gamma: float, I0: float):
    if not gamma > 0 or not I0 > 0:
        raise DomainError(f"gaussian average requires gamma, I0 > 0, got gamma={gamma}, I0={I0}")


def gaussian_average(k: int, gamma: float, I0: float) -> float:
    """(1/I0) int e^{-I/I0} J_k^2(gamma I) dI = Q_{k-1/2}(1 + 1/(2 c^2)) / (pi c), c = gamma I0."""
    _check_gaussian(gamma, I0)
    c = gamma * I0
    return legendre_q_half(k, 1.0 + 1.0 / (2.0 * c * c)) / (math.pi * c)


def gaussian_average_quadrature(k: int, gamma: float, I0: float, rel_tol: float = 1e-9) -> float:
    _check_gaussian(gamma, I0)
    return quadrature_exp_weighted(lambda intensity: bessel_j(k, gamma * intensity) ** 2, I0, rel_tol, bound=1.0)


def planck_weights(field: ThermalField, n_max: int) -> PlanckWeights:
    if n_max < 0:
        raise ArgumentError(f"n_max must be nonnegative, got {n_max}")
    b = field.b
    weights = [(1.0 - b) * b ** n for n in range(n_max + 1)]
    return PlanckWeights(weights=weights, tail_mass=b ** (n_max + 1))


def _thermal_closed(order: int, field: ThermalField, param: SqueezeParam, sign: int) -> float:
    if param.r == 0.0:
        raise DomainError("thermal closed form requires r > 0")
    if field.nbar == 0.0:
        raise DomainError("thermal closed form requires nbar > 0")
    if order < 0:
        raise ArgumentError(f"order must be nonnegative, got {order}")
    d = derive(param)
    spread = math.sqrt(field.nbar * (1.0 + field.nbar)) * d.sin_theta
    z = 1.0 + 1.0 / (2.0 * spread * spread)
    log_boltzmann = -sign * order * math.log(field.b)
    return d.x / (math.pi * spread) * math.exp(log_boltzmann) * legendre_q_half(order, z)


def thermal_emission(k: int, field: ThermalField, param: SqueezeParam) -> float:
    """cos theta / (pi sqrt(nbar(1+nbar)) sin theta) b^{-k} Q_{k-1/2}(z)."""
    return _thermal_closed(k, field, param, +1)


def thermal_absorption(l: int, field: ThermalField, param: SqueezeParam) -> float:
    """cos theta / (pi sqrt(nbar(1+nbar)) sin theta) b^{+l} Q_{l-1/2}(z)."""
    return _thermal_closed(l, field, param, -1)


def _thermal_sum(shift: int, start: int, field: ThermalField, param: SqueezeParam, rel_tol: float) -> float:
    # sum_{n >= start} p_n w_{n + shift, n}; the weights beyond n carry mass b^{n+1}
    _check_tol(rel_tol)
    b = field.b
    terms = []
    for n in range(start, start + settings.series_max_terms):
        weight = (1.0 - b) * b ** n
        terms.append(weight * transition_probability(FockPair(m=n + shift, n=n), param))
        tail = b ** (n + 1)
        if tail == 0.0 or tail <= rel_tol * math.fsum(terms):
            return math.fsum(terms)
    raise NonConvergenceError(f"thermal sum did not settle in {settings.series_max_terms} terms")


def thermal_emission_sum(k: int, field: ThermalField, param: SqueezeParam, rel_tol: float = 1e-12) -> float:
    if k < 0:
        raise ArgumentError(f"k must be nonnegative, got {k}")
    return _thermal_sum(2 * k, 0, field, param, rel_tol)


def thermal_absorption_sum(l: int, field: ThermalField, param: SqueezeParam, rel_tol: float = 1e-12) -> float:
    if l < 0:
        raise ArgumentError(f"l must be nonnegative, got {l}")
    return _thermal_sum(-2 * l, 2 * l, field, param, rel_tol)


def classify_regime(field: ThermalField) -> Regime:
    ratio = field.hv_over_kT
    if ratio < RAYLEIGH_JEANS_LIMIT:
        return Regime.RAYLEIGH_JEANS
    if ratio > WIEN_LIMIT:
        return Regime.WIEN
    return Regime.INTERMEDIATE


def semiclassical_comparison(k: int, field: ThermalField, param: SqueezeParam) -> ComparisonReport:
    """
    Quantum thermal average against the Gaussian-intensity average at the
    same Q argument, 2 gamma^2 I0^2 = 2 nbar(1+nbar) sin^2 theta, weighted by
    the vacuum persistence cos theta. The ratio is then b^{-k}.
    """
    d = derive(param)
    emission = thermal_emission(k, field, param)
    absorption = thermal_absorption(k, field, param)
    gamma = math.sqrt(field.nbar * (1.0 + field.nbar)) * d.sin_theta
    semiclassical = d.x * gaussian_average(k, gamma, 1.0)
    return ComparisonReport(
        order=k,
        b=field.b,
        hv_over_kT=field.hv_over_kT,
        quantum_emission=emission,
        quantum_absorption=absorption,
        semiclassical=semiclassical,
        regime=classify_regime(field),
        ratio=emission / semiclassical,
    )


def total_thermal_probability(
    field: ThermalField, param: SqueezeParam, rel_tol: float = 1e-10, max_order: Optional[int] = None
) -> float:
    """Elastic plus all emission and absorption orders; equals 1 by unitarity."""
    _check_tol(rel_tol)
    max_order = max_order or settings.series_max_terms
    terms = [thermal_emission(0, field, param)]
    for order in range(1, max_order + 1):
        step = thermal_emission(order, field, param) + thermal_absorption(order, field, param)
        terms.append(step)
        if step <= rel_tol * math.fsum(terms):
            logger.debug(f"total thermal probability settled at order {order}")
            return math.fsum(terms)
    raise NonConvergenceError(f"thermal orders did not settle by order {max_order}")
