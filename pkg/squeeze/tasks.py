import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterable, List, NamedTuple, Sequence, Tuple

from joblib import Parallel, delayed

from . import core, oracle, specfun, superpose
from .config import settings
from .errors import ArgumentError, SqueezeError
from .schemas import CheckResult, CoherentPair, FockPair, Route, SqueezeParam, ThermalField

logger = logging.getLogger(__name__)

FAST = "fast"
FULL = "full"
MAGNITUDE_FLOOR = 1e-12


@dataclass(frozen=True)
class Grid:
    route_m_max: int
    route_r: Tuple[float, ...]
    route_phi: Tuple[float, ...]
    oracle_m_max: int
    oracle_r: Tuple[float, ...]
    oracle_phi: Tuple[float, ...]
    unitarity_n_max: int
    unitarity_r: Tuple[float, ...]
    coherent_moduli: Tuple[float, ...]
    coherent_args: Tuple[float, ...]
    coherent_k_max: int
    coherent_r: Tuple[float, ...]
    gaussian_k_max: int
    gaussian_scales: Tuple[float, ...]
    thermal_k_max: int
    thermal_nbar: Tuple[float, ...]
    thermal_r: Tuple[float, ...]


GRIDS = {
    FAST: Grid(
        route_m_max=24,
        route_r=(0.5, 1.0, 2.0),
        route_phi=(0.0, math.pi / 3),
        oracle_m_max=24,
        oracle_r=(0.5, 1.0),
        oracle_phi=(0.0, 2.0),
        unitarity_n_max=12,
        unitarity_r=(0.5, 2.0),
        coherent_moduli=(0.5, 1.2),
        coherent_args=(0.0, 0.7),
        coherent_k_max=2,
        coherent_r=(0.8,),
        gaussian_k_max=3,
        gaussian_scales=(0.5, 1.0),
        thermal_k_max=3,
        thermal_nbar=(0.1, 1.0),
        thermal_r=(0.5, 1.0),
    ),
    FULL: Grid(
        route_m_max=60,
        route_r=(0.1, 0.5, 1.0, 1.5, 2.0),
        route_phi=(0.0, math.pi / 3, 2.0),
        oracle_m_max=60,
        oracle_r=(0.1, 0.5, 1.0, 1.5, 2.0),
        oracle_phi=(0.0, math.pi / 3, 2.0),
        unitarity_n_max=40,
        unitarity_r=(0.1, 0.5, 1.0, 1.5, 2.0),
        coherent_moduli=(0.5, 1.5, 3.0),
        coherent_args=(0.0, 0.7),
        coherent_k_max=4,
        coherent_r=(0.4, 0.8, 1.2),
        gaussian_k_max=5,
        gaussian_scales=(0.1, 0.5, 1.0, 3.0),
        thermal_k_max=5,
        thermal_nbar=(0.1, 1.0, 5.0),
        thermal_r=(0.5, 1.0, 1.5),
    ),
}


class Sample(NamedTuple):
    deviation: float
    allowed: float
    point: Dict[str, Any]


def summarize(name: str, tolerance: float, samples: Sequence[Sample], detail: str = None) -> CheckResult:
    """Fold grid samples into one CheckResult; the worst point is the one nearest (or past) its bound."""
    if not samples:
        return CheckResult(name=name, passed=True, max_deviation=0.0, tolerance=tolerance, points=0, detail=detail)
    worst = max(samples, key=lambda s: s.deviation / s.allowed if s.allowed > 0 else math.inf)
    return CheckResult(
        name=name,
        passed=all(s.deviation <= s.allowed for s in samples),
        max_deviation=max(s.deviation for s in samples),
        tolerance=tolerance,
        points=len(samples),
        worst_point=worst.point,
        detail=detail,
    )


def _relative(value: float, reference: float) -> float:
    return abs(value - reference) / max(abs(reference), 1e-300)


def run_pool(work: Callable[[Any], List[Sample]], units: Iterable[Any]) -> List[Sample]:
    """
    Map work over units in settings.validate_workers joblib processes; results
    keep the order of units. With one worker everything runs in-process.
    """
    groups = Parallel(n_jobs=settings.validate_workers)(delayed(work)(unit) for unit in units)
    return [sample for group in groups for sample in group]


def _same_parity_pairs(m_max: int):
    for m in range(m_max + 1):
        for n in range(m % 2, m_max + 1, 2):
            yield FockPair(m=m, n=n)


# --- specfun ---

def check_toroidal(grid: Grid) -> CheckResult:
    samples = [Sample(abs(specfun.legendre_q_half(0, 3.0) - 1.3110288), 1e-7, {"k": 0, "z": 3.0})]
    for z in (1.1, 1.5, 3.0):
        for k in range(9):
            reference = specfun._legendre_q_half_quadrature(k, z)
            samples.append(Sample(_relative(specfun.legendre_q_half(k, z), reference), 1e-9, {"k": k, "z": z}))
    return summarize("specfun.toroidal", 1e-9, samples, "recurrence with elliptic seeds against the integral form")


def check_bessel(grid: Grid) -> CheckResult:
    samples = []
    for x in (0.5, 2.0, 7.5):
        for k in range(7):
            deviation = abs(specfun.bessel_j(k, x) - specfun.bessel_j_complex(k, complex(x)).real)
            samples.append(Sample(deviation, 1e-11, {"k": k, "x": x}))
    return summarize("specfun.bessel", 1e-11, samples, "Miller recurrence against the ascending series")


def check_jacobi_gegenbauer(grid: Grid) -> CheckResult:
    samples = []
    for alpha in (0, 1, 3):
        nu = alpha + 0.5
        for x in (-0.5, 0.2, 0.8):
            t = math.sqrt(0.5 * (1.0 + x))
            for k in range(11):
                even, digits_even = specfun.jacobi_series(k, alpha, -0.5, x)
                even_ref = specfun.pochhammer(0.5, k) / specfun.pochhammer(nu, k) * specfun.gegenbauer(2 * k, nu, t)
                odd, digits_odd = specfun.jacobi_series(k, alpha, 0.5, x)
                odd_ref = specfun.pochhammer(0.5, k + 1) / specfun.pochhammer(nu, k + 1) * specfun.gegenbauer(2 * k + 1, nu, t) / t
                for value, reference, digits, beta in ((even, even_ref, digits_even, -0.5), (odd, odd_ref, digits_odd, 0.5)):
                    exact = reference.to_real()
                    # relative, with an absolute floor of one near the zeros of P_k
                    deviation = abs(value.to_real() - exact) / max(abs(exact), 1.0)
                    samples.append(Sample(deviation, 1e-9 * 10.0 ** digits, {"k": k, "alpha": alpha, "beta": beta, "x": x}))
    return summarize("specfun.jacobi_gegenbauer", 1e-9, samples, "relative above 1, absolute below")


# --- squeeze_core ---

def _route_group(unit: Tuple[float, float, int]) -> List[Sample]:
    r, phi, m_max = unit
    param = SqueezeParam(r=r, phi=phi)
    samples = []
    for pair in _same_parity_pairs(m_max):
        results = core.all_routes(pair, param)
        reference = results[Route.GEGENBAUER]
        scale = abs(reference.value)
        if scale <= MAGNITUDE_FLOOR:
            continue
        for route, result in results.items():
            if route == Route.GEGENBAUER:
                continue
            samples.append(Sample(
                abs(result.value - reference.value) / scale,
                settings.route_rel_tol,
                {"route": route.value, "m": pair.m, "n": pair.n, "r": r, "phi": phi},
            ))
    return samples


def check_route_agreement(grid: Grid) -> CheckResult:
    units = [(r, phi, grid.route_m_max) for r in grid.route_r for phi in grid.route_phi]
    return summarize(
        "core.route_agreement",
        settings.route_rel_tol,
        run_pool(_route_group, units),
        "relative to the gegenbauer route",
    )


def _oracle_group(unit: Tuple[float, float, int]) -> List[Sample]:
    r, phi, m_max = unit
    param = SqueezeParam(r=r, phi=phi)
    samples = []
    for pair in _same_parity_pairs(m_max):
        closed = core.element_gegenbauer(pair, param)
        truth = oracle.element_oracle(pair, param)
        samples.append(Sample(
            abs(closed.value - truth.value),
            settings.oracle_abs_tol,
            {"m": pair.m, "n": pair.n, "r": r, "phi": phi},
        ))
    return samples


def check_oracle_agreement(grid: Grid) -> CheckResult:
    units = [(r, phi, grid.oracle_m_max) for r in grid.oracle_r for phi in grid.oracle_phi]
    return summarize("core.oracle_agreement", settings.oracle_abs_tol, run_pool(_oracle_group, units))


def _unitarity_group(unit: Tuple[float, int]) -> List[Sample]:
    r, n_max = unit
    param = SqueezeParam(r=r)
    return [
        Sample(abs(core.distribution(n, param).captured_mass - 1.0), 1e-9, {"n": n, "r": r})
        for n in range(n_max + 1)
    ]


def check_unitarity(grid: Grid) -> CheckResult:
    units = [(r, grid.unitarity_n_max) for r in grid.unitarity_r]
    return summarize("core.unitarity", 1e-9, run_pool(_unitarity_group, units), "sum over m of w_mn")


def check_closed_specials(grid: Grid) -> CheckResult:
    samples = []
    for r in grid.route_r:
        param = SqueezeParam(r=r, phi=1.0)
        for m in range(0, 41, 2):
            reference = core.element_gegenbauer(FockPair(m=m, n=0), param).value
            if abs(reference) > MAGNITUDE_FLOOR:
                deviation = abs(core.squeezed_vacuum_amplitude(m, param) - reference) / abs(reference)
                samples.append(Sample(deviation, 1e-10, {"kind": "vacuum", "m": m, "r": r}))
        for n in range(41):
            reference = core.element_gegenbauer(FockPair(m=n, n=n), param).value
            deviation = abs(core.diagonal_closed_form(n, param) - reference)
            samples.append(Sample(deviation, 1e-12, {"kind": "diagonal", "n": n, "r": r}))
    return summarize("core.closed_specials", 1e-10, samples, "squeezed vacuum and diagonal elements")


def check_reference_scalars(grid: Grid) -> CheckResult:
    param = SqueezeParam(r=1.5)
    d = core.derive(param)
    samples = [
        Sample(abs(d.s - 4.48), 0.005, {"quantity": "s"}),
        Sample(abs(d.tanh_r ** 2 - 0.82), 0.005, {"quantity": "tanh^2 r"}),
    ]
    for n, expected in ((0, 5.03), (1, 15.1), (5, 55.4)):
        mean = core.distribution(n, param).mean_energy
        samples.append(Sample(abs(mean - expected), 0.05, {"quantity": "mean_energy", "n": n}))
    return summarize("core.reference_scalars", 0.05, samples, "mean energies summed over the distribution")


def check_hermite_asymptotic(grid: Grid) -> CheckResult:
    param = SqueezeParam(r=1.5)
    exact = core.distribution(5, param)
    approx = dict(core.hermite_approx_distribution(5, param, exact.m_max).probs)
    samples = [
        Sample(abs(p - approx.get(m, 0.0)), settings.hermite_sup_bound, {"m": m})
        for m, p in exact.probs
    ]
    return summarize("core.hermite_asymptotic", settings.hermite_sup_bound, samples, "sup over m of |p_m(5) - approx|")


def check_oscillations(grid: Grid) -> CheckResult:
    maxima = core.local_maxima(core.distribution(30, SqueezeParam(r=1.0)), m_max=200)
    return CheckResult(
        name="core.oscillations",
        passed=maxima >= 5,
        max_deviation=float(max(0, 5 - maxima)),
        tolerance=0.0,
        points=1,
        worst_point={"n": 30, "r": 1.0, "maxima": maxima},
        detail="interior local maxima of p_m(30), even m <= 200",
    )


# --- oracle ---

def check_su11(grid: Grid) -> CheckResult:
    deviations = oracle.verify_su11_algebra(32)
    samples = [Sample(value, 1e-9, {"relation": name}) for name, value in deviations.items()]
    return summarize("oracle.su11_algebra", 1e-9, samples)


def check_orderings(grid: Grid) -> CheckResult:
    samples = [
        Sample(oracle.verify_normal_form(SqueezeParam(r=0.8, phi=1.1), 128), 1e-9, {"form": "normal", "r": 0.8}),
        Sample(oracle.verify_anti_normal_form(SqueezeParam(r=0.5, phi=1.1)), 1e-9, {"form": "anti_normal", "r": 0.5}),
    ]
    return summarize("oracle.orderings", 1e-9, samples, "leading block, spectral norm")


def check_spinor(grid: Grid) -> CheckResult:
    samples = []
    for r in (0.0, 0.8, 2.0):
        for phi in (0.0, 1.1):
            for name, value in oracle.verify_spinor_identity(SqueezeParam(r=r, phi=phi)).items():
                samples.append(Sample(value, 1e-12, {"identity": name, "r": r, "phi": phi}))
    return summarize("oracle.spinor", 1e-12, samples)


def check_propagator_unitarity(grid: Grid) -> CheckResult:
    samples = [
        Sample(oracle.verify_unitarity(SqueezeParam(r=r, phi=0.4), 128), 1e-10, {"r": r, "dim": 128})
        for r in (0.5, 2.0)
    ]
    return summarize("oracle.unitarity", 1e-10, samples)


# --- superpose ---

def _coherent_group(unit: Tuple[float, int, Tuple[float, ...], Tuple[float, ...]]) -> List[Sample]:
    r, k, moduli, args = unit
    param = SqueezeParam(r=r, phi=0.3)
    samples = []
    for a_mod in moduli:
        for b_mod in moduli:
            for b_arg in args:
                pair = CoherentPair(alpha=complex(a_mod), beta=b_mod * complex(math.cos(b_arg), math.sin(b_arg)))
                lhs = superpose.coherent_sum_lhs(pair, k, param)
                rhs = superpose.coherent_closed_rhs(pair, k, param)
                samples.append(Sample(
                    abs(lhs - rhs) / max(abs(lhs), 1e-30),
                    1e-8,
                    {"alpha": a_mod, "beta": b_mod, "arg_beta": b_arg, "k": k, "r": r},
                ))
    return samples


def check_coherent(grid: Grid) -> CheckResult:
    units = [
        (r, k, grid.coherent_moduli, grid.coherent_args)
        for r in grid.coherent_r
        for k in range(grid.coherent_k_max + 1)
    ]
    return summarize("superpose.coherent", 1e-8, run_pool(_coherent_group, units), "term sum against the Bessel closed form")


def check_gaussian(grid: Grid) -> CheckResult:
    samples = []
    for scale in grid.gaussian_scales:
        for k in range(grid.gaussian_k_max + 1):
            closed = superpose.gaussian_average(k, scale, 1.0)
            numeric = superpose.gaussian_average_quadrature(k, scale, 1.0)
            samples.append(Sample(_relative(numeric, closed), 1e-6, {"k": k, "gamma_I0": scale}))
    return summarize("superpose.gaussian", 1e-6, samples, "quadrature against the toroidal closed form")


def _thermal_group(unit: Tuple[float, float, int]) -> List[Sample]:
    r, nbar, k_max = unit
    param = SqueezeParam(r=r)
    field = ThermalField(nbar=nbar)
    samples = []
    for k in range(k_max + 1):
        emission = superpose.thermal_emission(k, field, param)
        absorption = superpose.thermal_absorption(k, field, param)
        point = {"k": k, "nbar": nbar, "r": r}
        samples.append(Sample(_relative(superpose.thermal_emission_sum(k, field, param), emission), 1e-8, {**point, "kind": "emission"}))
        samples.append(Sample(_relative(superpose.thermal_absorption_sum(k, field, param), absorption), 1e-8, {**point, "kind": "absorption"}))
        balance = emission / absorption
        samples.append(Sample(_relative(balance, field.b ** (-2 * k)), 1e-10, {**point, "kind": "detailed_balance"}))
    return samples


def check_thermal(grid: Grid) -> CheckResult:
    units = [(r, nbar, grid.thermal_k_max) for r in grid.thermal_r for nbar in grid.thermal_nbar]
    return summarize("superpose.thermal", 1e-8, run_pool(_thermal_group, units), "Planck-averaged sums against closed forms")


def check_total_probability(grid: Grid) -> CheckResult:
    param = SqueezeParam(r=1.0)
    samples = [
        Sample(abs(superpose.total_thermal_probability(ThermalField(nbar=nbar), param) - 1.0), 1e-6, {"nbar": nbar, "r": 1.0})
        for nbar in (0.1, 1.0)
    ]
    return summarize("superpose.total_probability", 1e-6, samples)


def check_semiclassical(grid: Grid) -> CheckResult:
    param = SqueezeParam(r=1.0)
    rayleigh_jeans = ThermalField.from_boltzmann(0.99)
    wien = ThermalField.from_boltzmann(0.02)
    samples = []
    for k in (1, 2, 3):
        report = superpose.semiclassical_comparison(k, rayleigh_jeans, param)
        samples.append(Sample(abs(report.ratio - 1.0), 0.06, {"b": 0.99, "k": k, "regime": report.regime.value}))
    report = superpose.semiclassical_comparison(2, wien, param)
    # at least a hundredfold discrepancy
    samples.append(Sample(100.0 / report.ratio, 1.0, {"b": 0.02, "k": 2, "regime": report.regime.value}))
    for field in (rayleigh_jeans, wien):
        report = superpose.semiclassical_comparison(0, field, param)
        samples.append(Sample(abs(report.ratio - 1.0), 1e-12, {"b": field.b, "k": 0}))
    return summarize("superpose.semiclassical", 0.06, samples, "quantum / semiclassical ratio by regime")


CHECKS: List[Callable[[Grid], CheckResult]] = [
    check_toroidal,
    check_bessel,
    check_jacobi_gegenbauer,
    check_route_agreement,
    check_oracle_agreement,
    check_unitarity,
    check_closed_specials,
    check_reference_scalars,
    check_hermite_asymptotic,
    check_oscillations,
    check_su11,
    check_orderings,
    check_spinor,
    check_propagator_unitarity,
    check_coherent,
    check_gaussian,
    check_thermal,
    check_total_probability,
    check_semiclassical,
]


def _check_name(check: Callable[[Grid], CheckResult]) -> str:
    return check.__name__.removeprefix("check_")


def run_validation(tier: str = FAST) -> List[CheckResult]:
    """Run every invariant check on the tier's grid; a check that raises is reported as failed."""
    if tier not in GRIDS:
        raise ArgumentError(f"unknown validation tier {tier!r}, expected one of {sorted(GRIDS)}")
    grid = GRIDS[tier]
    results = []
    logger.info(f"Starting {tier} validation: {len(CHECKS)} checks, {settings.validate_workers} workers")
    for check in CHECKS:
        try:
            result = check(grid)
        except Exception as e:
            logger.error(f"Check {_check_name(check)} raised: {e.__class__.__name__} - {e}", exc_info=True)
            result = CheckResult(
                name=_check_name(check),
                passed=False,
                max_deviation=math.inf,
                tolerance=0.0,
                points=0,
                detail=f"{e.__class__.__name__} - {e}",
                exit_code=e.exit_code if isinstance(e, SqueezeError) else None,
            )
        if result.passed:
            logger.info(f"{result.name}: passed ({result.points} points, max deviation {result.max_deviation:.3e})")
        else:
            logger.warning(f"{result.name}: FAILED at {result.worst_point} (max deviation {result.max_deviation:.3e})")
        results.append(result)
    return results
