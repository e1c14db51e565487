"""
Brute-force ground truth on a truncated Fock basis.

The generator G = (xi/2)(a+)^2 - (xi*/2)a^2 only couples |n> with |n +- 2>, so
e^G is computed per parity block and cached. Truncation error enters from the
trailing basis states; every comparison here reads the leading half of the
basis and is certified by doubling the dimension.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import mpmath
import numpy as np
from scipy import integrate, linalg, special

from .cache import get_propagator_from_cache, get_propagator_key, set_propagator_in_cache
from .config import settings
from .core import derive
from .errors import ArgumentError, DomainError, NonConvergenceError, OverflowRangeError
from .lognum import LOG_COMPLEX_ZERO, LogComplex
from .schemas import ElementResult, FockPair, Route, SqueezeParam

logger = logging.getLogger(__name__)

_STABLE_BLOCK_TOL = 1e-13


@dataclass
class FockMatrix:
    dim: int
    entries: np.ndarray
    basis_note: str = ""

    def __post_init__(self):
        if self.entries.shape != (self.dim, self.dim):
            raise ArgumentError(f"entries of shape {self.entries.shape} do not match dim {self.dim}")
        if not self.basis_note:
            self.basis_note = f"Fock basis |0>..|{self.dim - 1}>"

    def leading(self, size: int) -> np.ndarray:
        return self.entries[:size, :size]


def annihilation(dim: int) -> FockMatrix:
    """a|n> = sqrt(n)|n-1>: a[n-1, n] = sqrt(n)."""
    if dim < 1:
        raise ArgumentError(f"dim must be positive, got {dim}")
    entries = np.diag(np.sqrt(np.arange(1, dim, dtype=np.float64)), 1).astype(np.complex128)
    return FockMatrix(dim, entries)


def creation(dim: int) -> FockMatrix:
    return FockMatrix(dim, annihilation(dim).entries.conj().T.copy())


def _couplings(param: SqueezeParam, start: int, count: int) -> np.ndarray:
    # (xi/2) <j+2|(a+)^2|j> for j = start, start + 2, ...
    j = start + 2.0 * np.arange(count)
    return 0.5 * param.xi * (np.sqrt(j + 1.0) * np.sqrt(j + 2.0))


def build_generator(dim: int, param: SqueezeParam) -> FockMatrix:
    if dim < 2:
        raise ArgumentError(f"build_generator requires dim >= 2, got {dim}")
    entries = np.zeros((dim, dim), dtype=np.complex128)
    if dim > 2:
        j = np.arange(dim - 2)
        lower = 0.5 * param.xi * (np.sqrt(j + 1.0) * np.sqrt(j + 2.0))
        entries[j + 2, j] = lower
        entries[j, j + 2] = -np.conj(lower)
    return FockMatrix(dim, entries)


def _block_generator(param: SqueezeParam, dim: int, parity: int) -> np.ndarray:
    size = (dim - parity + 1) // 2
    block = np.zeros((size, size), dtype=np.complex128)
    if size > 1:
        lower = _couplings(param, parity, size - 1)
        i = np.arange(size - 1)
        block[i + 1, i] = lower
        block[i, i + 1] = -np.conj(lower)
    return block


def _expm_checked(entries: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(entries)):
        raise ArgumentError("matrix_exponential requires finite entries")
    norm = np.linalg.norm(entries, 1)
    if norm > settings.expm_max_norm:
        raise OverflowRangeError(f"matrix 1-norm {norm:.3e} exceeds supported range {settings.expm_max_norm:.1e}")
    return linalg.expm(entries)


def matrix_exponential(matrix: FockMatrix) -> FockMatrix:
    """e^M by scaling and squaring (scipy.linalg.expm)."""
    return FockMatrix(matrix.dim, _expm_checked(matrix.entries), matrix.basis_note)


def _parity_block(param: SqueezeParam, dim: int, parity: int) -> np.ndarray:
    key = get_propagator_key(param, dim, parity)
    block = get_propagator_from_cache(key)
    if block is None:
        block = _expm_checked(_block_generator(param, dim, parity))
        set_propagator_in_cache(key, block)
    return block


def propagator(param: SqueezeParam, dim: int) -> FockMatrix:
    """Truncated e^G assembled from its two parity blocks."""
    if dim < 2:
        raise ArgumentError(f"propagator requires dim >= 2, got {dim}")
    entries = np.zeros((dim, dim), dtype=np.complex128)
    for parity in (0, 1):
        index = np.arange(parity, dim, 2)
        entries[np.ix_(index, index)] = _parity_block(param, dim, parity)
    return FockMatrix(dim, entries)


def _oracle_entry(pair: FockPair, param: SqueezeParam, dim: int) -> complex:
    block = _parity_block(param, dim, pair.m % 2)
    return complex(block[pair.m // 2, pair.n // 2])


def element_oracle(pair: FockPair, param: SqueezeParam, dim: Optional[int] = None) -> ElementResult:
    """
    Entry [m, n] of e^G, certified by one doubling step.

    The starting dimension grows until max(m, n) < dim / 2; the value at 2 dim
    is accepted once |value(dim) - value(2 dim)| < settings.oracle_acceptance_tol.
    """
    dim = settings.oracle_default_dim if dim is None else dim
    if dim < 2:
        raise ArgumentError(f"element_oracle requires dim >= 2, got {dim}")
    if pair.parity:
        return ElementResult(
            value=0j,
            route=Route.ORACLE,
            log_form=LOG_COMPLEX_ZERO,
            error_estimate=0.0,
            condition_note="parity selection rule: m + n odd",
        )
    while 2 * pair.n_gt >= dim:
        dim *= 2
    while 2 * dim <= settings.oracle_max_dim:
        coarse = _oracle_entry(pair, param, dim)
        fine = _oracle_entry(pair, param, 2 * dim)
        estimate = abs(fine - coarse)
        if estimate < settings.oracle_acceptance_tol:
            return ElementResult(
                value=fine,
                route=Route.ORACLE,
                log_form=LogComplex.from_complex(fine),
                error_estimate=estimate,
                condition_note=f"dim {2 * dim}",
            )
        logger.debug(f"<{pair.m}|S|{pair.n}> at r={param.r}: change {estimate:.3e} from dim {dim} to {2 * dim}")
        dim *= 2
    raise NonConvergenceError(
        f"oracle for <{pair.m}|S|{pair.n}> at r={param.r} did not settle by dim {settings.oracle_max_dim}"
    )


def verify_unitarity(param: SqueezeParam, dim: int) -> float:
    """max-norm of (e^G)+ e^G - I over the leading dim/2 columns."""
    size = dim // 2
    columns = propagator(param, dim).entries[:, :size]
    return float(np.max(np.abs(columns.conj().T @ columns - np.eye(size))))


def su11_generators(dim: int) -> Tuple[FockMatrix, FockMatrix, FockMatrix]:
    """K+ = (a+)^2 / 2, K- = a^2 / 2, K0 = (a+ a + 1/2) / 2."""
    a = annihilation(dim).entries
    ad = a.conj().T
    k_plus = 0.5 * (ad @ ad)
    k_minus = 0.5 * (a @ a)
    k_zero = np.diag(0.5 * (np.arange(dim) + 0.5)).astype(np.complex128)
    return FockMatrix(dim, k_plus), FockMatrix(dim, k_minus), FockMatrix(dim, k_zero)


def _raising_exp(c: complex, dim: int) -> np.ndarray:
    """
    exp(c K+) on the truncated basis from its terminating Taylor series:
    entry [j + 2k, j] = (c/2)^k sqrt((j+2k)! / j!) / k!. exp(c K-) is the transpose.
    """
    entries = np.eye(dim, dtype=np.complex128)
    if c == 0:
        return entries
    log_half = math.log(abs(c) / 2.0)
    angle = cmath.phase(c)
    for k in range(1, (dim - 1) // 2 + 1):
        j = np.arange(dim - 2 * k)
        log_mag = k * log_half + 0.5 * (special.gammaln(j + 2 * k + 1) - special.gammaln(j + 1)) - math.lgamma(k + 1)
        entries[j + 2 * k, j] = np.exp(log_mag) * cmath.exp(1j * k * angle)
    return entries


def verify_su11_algebra(dim: int) -> Dict[str, float]:
    """
    Deviations of the su(1,1) relations on the leading (dim - 2) block, where
    truncation of the intermediate states does not reach.
    """
    if dim < 4:
        raise ArgumentError(f"verify_su11_algebra requires dim >= 4, got {dim}")
    k_plus, k_minus, k_zero = (g.entries for g in su11_generators(dim))
    size = dim - 2

    def deviation(matrix: np.ndarray) -> float:
        return float(np.max(np.abs(matrix[:size, :size])))

    casimir = k_zero @ k_zero - 0.5 * (k_plus @ k_minus + k_minus @ k_plus)
    return {
        "k0_kplus": deviation(k_zero @ k_plus - k_plus @ k_zero - k_plus),
        "k0_kminus": deviation(k_zero @ k_minus - k_minus @ k_zero + k_minus),
        "kminus_kplus": deviation(k_minus @ k_plus - k_plus @ k_minus - 2.0 * k_zero),
        "casimir": deviation(casimir + (3.0 / 16.0) * np.eye(dim)),
        "bargmann_even": abs(k_zero[0, 0].real - 0.25),
        "bargmann_odd": abs(k_zero[1, 1].real - 0.75),
    }


def _certified_block(param: SqueezeParam, dim: int, size: int) -> np.ndarray:
    """Leading size x size block of e^G, stable under doubling of the working dimension."""
    work = dim
    current = propagator(param, work).leading(size)
    while 2 * work <= settings.oracle_max_dim:
        refined = propagator(param, 2 * work).leading(size)
        change = float(np.max(np.abs(refined - current)))
        work *= 2
        current = refined
        if change < _STABLE_BLOCK_TOL:
            return current
    raise NonConvergenceError(f"leading {size}-block of e^G at r={param.r} did not settle by dim {work}")


def _normal_form_block(param: SqueezeParam, size: int) -> np.ndarray:
    """
    Leading size x size block of exp(zeta K+) exp(-eta K0) exp(-zeta* K-).

    With theta = arg zeta the factors are D R D^-1, S and E^-1 L E for real
    triangular R and L and diagonal phases D = e^{i n theta / 2},
    E = e^{i n (pi - theta) / 2}. The middle phases collapse to (-i)^j, so
    entry [i, k] is e^{i (i theta + k (pi - theta)) / 2} (-i)^(i mod 2) times
    the real sum over j of R[i, j] (-1)^(j // 2) S[j] L[j, k]. That sum
    alternates and cancels heavily at high Fock index, so it runs in mpmath.
    """
    theta = cmath.phase(param.xi)
    with mpmath.workdps(30 + size // 2):
        r = mpmath.mpf(param.r)
        half_t = mpmath.tanh(r) / 2
        inv_cosh = 1 / mpmath.cosh(r)
        factorial = [mpmath.factorial(n) for n in range(size)]
        root = [mpmath.sqrt(f) for f in factorial]
        # R[i, j] = (t/2)^((i-j)/2) sqrt(i!/j!) / ((i-j)/2)!, and L[j, k] = R[k, j]
        triangle = [
            [half_t ** ((i - j) // 2) * root[i] / (root[j] * factorial[(i - j) // 2]) if j <= i and (i - j) % 2 == 0 else 0
             for j in range(size)]
            for i in range(size)
        ]
        middle = [(-1) ** (j // 2) * inv_cosh ** (j + mpmath.mpf(0.5)) for j in range(size)]
        block = np.zeros((size, size), dtype=np.complex128)
        for i in range(size):
            for k in range(i % 2, size, 2):
                core = mpmath.fdot(
                    (triangle[i][j] * middle[j], triangle[k][j]) for j in range(i % 2, min(i, k) + 1, 2)
                )
                phase = cmath.exp(0.5j * (i * theta + k * (math.pi - theta))) * (-1j if i % 2 else 1)
                block[i, k] = float(core) * phase
    return block


def verify_normal_form(param: SqueezeParam, dim: int) -> float:
    """
    Spectral-norm distance between e^G and exp(zeta K+) exp(-eta K0) exp(-zeta* K-)
    on the leading dim/2 block.

    Both outer factors are triangular, so the truncated product is exact; e^G
    is taken from a working dimension large enough that its block is settled.
    """
    if dim < 16:
        raise ArgumentError(f"verify_normal_form requires dim >= 16, got {dim}")
    size = dim // 2
    if param.r == 0.0:
        return float(np.linalg.norm(propagator(param, dim).leading(size) - np.eye(size), 2))
    exact = _certified_block(param, dim, size)
    return float(np.linalg.norm(exact - _normal_form_block(param, size), 2))


def verify_anti_normal_form(param: SqueezeParam, block: int = 8) -> float:
    """
    Spectral-norm distance between e^G and exp(-zeta* K-) exp(eta K0) exp(zeta K+)
    on the leading block.

    The intermediate Fock sum behaves like sinh^(2j) r, so the form is only
    evaluated for sinh r < 1; its working dimension doubles until the block
    settles.
    """
    if block < 1:
        raise ArgumentError(f"block must be positive, got {block}")
    d = derive(param)
    if d.sinh_r >= 1.0:
        raise DomainError(f"anti-normal form sum diverges for sinh r >= 1 (r={param.r})")
    if param.r == 0.0:
        return float(np.linalg.norm(propagator(param, max(2 * block, 2)).leading(block) - np.eye(block), 2))

    def anti_normal(work: int) -> np.ndarray:
        k_zero = su11_generators(work)[2].entries
        lowering = _raising_exp(-np.conj(d.zeta), work).T
        scaling = np.exp(d.eta * np.diag(k_zero).real)
        raising = _raising_exp(d.zeta, work)
        return ((lowering * scaling) @ raising)[:block, :block]

    work = max(64, 4 * block)
    current = anti_normal(work)
    while True:
        if 2 * work > 1024:
            raise NonConvergenceError(f"anti-normal form at r={param.r} did not settle by dim {work}")
        refined = anti_normal(2 * work)
        change = float(np.max(np.abs(refined - current)))
        work *= 2
        current = refined
        if change < _STABLE_BLOCK_TOL:
            break
    exact = _certified_block(param, max(2 * block, 16), block)
    return float(np.linalg.norm(exact - current, 2))


def verify_spinor_identity(param: SqueezeParam) -> Dict[str, float]:
    """
    2x2 representation K+ -> -sigma+, K- -> sigma-, K0 -> sigma3 / 2.

    Checks the closed-form exponential, the normal and anti-normal orderings
    and the (eta, zeta, zeta') read back from the exponential.
    """
    d = derive(param)
    xi = param.xi
    k_plus = np.array([[0.0, -1.0], [0.0, 0.0]], dtype=np.complex128)
    k_minus = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=np.complex128)
    k_zero = np.diag([0.5, -0.5]).astype(np.complex128)
    unitary = linalg.expm(-np.array([[0.0, xi], [np.conj(xi), 0.0]]))
    phase = complex(math.cos(param.phi), math.sin(param.phi))
    closed = np.array(
        [[d.cosh_r, -phase * d.sinh_r], [-phase.conjugate() * d.sinh_r, d.cosh_r]],
        dtype=np.complex128,
    )
    generated = linalg.expm(xi * k_plus - np.conj(xi) * k_minus)
    normal = linalg.expm(d.zeta * k_plus) @ linalg.expm(-d.eta * k_zero) @ linalg.expm(-np.conj(d.zeta) * k_minus)
    anti = linalg.expm(-np.conj(d.zeta) * k_minus) @ linalg.expm(d.eta * k_zero) @ linalg.expm(d.zeta * k_plus)
    u11 = unitary[1, 1]
    eta = 2.0 * math.log(abs(u11))
    zeta = -unitary[0, 1] / u11
    zeta_prime = unitary[1, 0] / u11
    return {
        "closed_form": float(np.max(np.abs(unitary - closed))),
        "generators": float(np.max(np.abs(generated - unitary))),
        "normal_form": float(np.max(np.abs(normal - unitary))),
        "anti_normal_form": float(np.max(np.abs(anti - unitary))),
        "eta": abs(eta - d.eta),
        "zeta": abs(zeta - d.zeta),
        "zeta_prime": abs(zeta_prime + np.conj(d.zeta)),
    }


def quadrature_exp_weighted(
    f: Callable[[float], float],
    scale: float,
    rel_tol: float,
    bound: float = 1.0,
    max_panels: Optional[int] = None,
) -> float:
    """
    (1/I0) int_0^inf exp(-I/I0) f(I) dI with I0 = scale.

    Integrates panel by panel in t = I/I0 with scipy's adaptive quad and stops
    once the tail bound exp(-b) max(bound, |f(I0 b)| (1 + 1/b)) falls below
    rel_tol times the running total. bound is a sup of |f|; the second term
    covers integrands growing at most linearly.
    """
    if not scale > 0:
        raise ArgumentError(f"scale must be positive, got {scale}")
    if not 0.0 < rel_tol < 1.0:
        raise ArgumentError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    width = settings.quadrature_panel_width
    max_panels = max_panels or settings.quadrature_max_panels

    def weighted(t: float) -> float:
        return math.exp(-t) * f(scale * t)

    parts = []
    for panel in range(max_panels):
        lower = panel * width
        upper = lower + width
        value, _ = integrate.quad(weighted, lower, upper, epsabs=0.0, epsrel=max(0.1 * rel_tol, 1e-13), limit=100)
        parts.append(value)
        total = math.fsum(parts)
        tail = math.exp(-upper) * max(bound, abs(f(scale * upper)) * (1.0 + 1.0 / upper))
        if tail <= rel_tol * abs(total):
            logger.debug(f"quadrature settled after {panel + 1} panels, tail bound {tail:.3e}")
            return total
    raise NonConvergenceError(f"exponentially weighted quadrature did not settle in {max_panels} panels")
