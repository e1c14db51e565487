import argparse
import csv
import io
import logging
import sys
import time
from typing import Any, Dict, List, Optional, Sequence

from . import __version__, core, superpose, tasks
from .config import settings
from .errors import EXIT_ARGUMENT, EXIT_OK, ArgumentError, DisagreementError, SqueezeError
from .oracle import element_oracle
from .schemas import (
    CoherentPair,
    Command,
    Distribution,
    ElementResult,
    FockPair,
    OutputFormat,
    ResultRecord,
    Route,
    RunConfig,
    SqueezeParam,
    ThermalField,
    standardized_json,
)

logger = logging.getLogger(__name__)

FIGURES = {
    # name: (n, r, scale of p_m)
    "fig1a": (0, 1.5, 1.0),
    "fig1b": (1, 1.5, 4.0),
    "fig2a": (5, 1.5, 1.0),
    "fig2b": (5, 1.5, 1.0),
    "fig3": (30, 1.0, 1.0),
}
COMPARE_COLUMNS = ["order", "b", "hv_over_kT", "quantum_emission", "quantum_absorption", "semiclassical", "regime", "ratio"]


def encode_complex(value: complex) -> Dict[str, float]:
    return {"re": value.real, "im": value.imag}


def encode_element(result: ElementResult) -> Dict[str, Any]:
    return {
        "value": encode_complex(result.value),
        "magnitude": result.magnitude,
        "route": result.route.value,
        "error_estimate": result.error_estimate,
        "condition_note": result.condition_note,
    }


def format_float(value: float) -> str:
    return format(value, ".17g")


def render_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    return buffer.getvalue()


def emit(text: str, output_path: Optional[str]):
    if not text.endswith("\n"):
        text += "\n"
    if output_path:
        with open(output_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        logger.info(f"Wrote {len(text)} bytes to {output_path}")
    else:
        sys.stdout.write(text)


def _record(config: RunConfig, inputs: Dict[str, Any], **fields) -> ResultRecord:
    return ResultRecord(command=config.command, version=__version__, inputs=inputs, **fields)


def _param(config: RunConfig) -> SqueezeParam:
    return SqueezeParam(r=config.r, phi=config.phi)


def _require(config: RunConfig, *names: str):
    missing = [name for name in names if getattr(config, name) is None]
    if missing:
        raise ArgumentError(f"{config.command.value} requires --{' --'.join(missing)}")


def _distribution_rows(dist: Distribution, scale: float = 1.0) -> List[List[Any]]:
    return [[m, scale * p] for m, p in dist.probs]


def cmd_element(config: RunConfig) -> ResultRecord:
    _require(config, "m", "n")
    pair = FockPair(m=config.m, n=config.n)
    param = _param(config)
    results = core.all_routes(pair, param)
    reference = results[Route.GEGENBAUER]
    scale = abs(reference.value)
    deviations = {}
    agreed = True
    for route, result in results.items():
        deviation = abs(result.value - reference.value)
        # relative unless the element itself is negligible
        if scale > tasks.MAGNITUDE_FLOOR:
            deviation /= scale
        deviations[route.value] = deviation
        agreed = agreed and deviation <= config.tol
    outputs = {"routes": {route.value: encode_element(result) for route, result in results.items()}}
    checks = {"route_agreement": {"passed": agreed, "tolerance": config.tol, "deviations": deviations}}
    if config.options.get("with_oracle"):
        truth = element_oracle(pair, param)
        outputs["oracle"] = encode_element(truth)
        oracle_deviation = abs(truth.value - reference.value)
        checks["oracle_agreement"] = {
            "passed": oracle_deviation <= settings.oracle_abs_tol,
            "tolerance": settings.oracle_abs_tol,
            "deviation": oracle_deviation,
        }
    logger.info(f"<{pair.m}|S|{pair.n}> at r={param.r}, phi={param.phi}: {reference.value}")
    inputs = {"m": pair.m, "n": pair.n, "r": param.r, "phi": param.phi, "tol": config.tol}
    return _record(
        config, inputs,
        outputs=outputs,
        checks=checks,
        error_estimates={route.value: result.error_estimate for route, result in results.items()},
    )


def cmd_distribution(config: RunConfig) -> ResultRecord:
    _require(config, "n")
    param = _param(config)
    dist = core.distribution(config.n, param, config.mass_target)
    logger.info(f"p_m({config.n}) at r={param.r}: m_max={dist.m_max}, mean energy {dist.mean_energy:.6g}")
    inputs = {"n": config.n, "r": param.r, "phi": param.phi, "mass_target": config.mass_target}
    outputs = {
        "probs": _distribution_rows(dist),
        "captured_mass": dist.captured_mass,
        "mean_energy": dist.mean_energy,
        "m_max": dist.m_max,
        "regime_indicators": core.regime_indicators(config.n, param),
    }
    return _record(config, inputs, outputs=outputs, error_estimates={"missing_mass": 1.0 - dist.captured_mass})


def cmd_figure(config: RunConfig) -> ResultRecord:
    which = config.options.get("which")
    if which not in FIGURES:
        raise ArgumentError(f"unknown figure {which!r}, expected one of {sorted(FIGURES)}")
    n, r, scale = FIGURES[which]
    param = SqueezeParam(r=r)
    exact = core.distribution(n, param)
    dist = core.hermite_approx_distribution(n, param, exact.m_max) if which == "fig2b" else exact
    summary = {"n": n, "r": r, "scale": scale, "mean_energy": dist.mean_energy, "m_max": dist.m_max}
    if which == "fig3":
        summary["local_maxima"] = core.local_maxima(dist, m_max=200)
    if which == "fig2b":
        exact_probs = dict(exact.probs)
        summary["sup_distance_to_exact"] = max(abs(p - exact_probs.get(m, 0.0)) for m, p in dist.probs)
    logger.info(f"{which}: mean energy {dist.mean_energy:.4g}, m_max {dist.m_max}")
    return _record(config, {"figure": which}, outputs={"rows": _distribution_rows(dist, scale), "summary": summary})


def cmd_superpose(config: RunConfig) -> ResultRecord:
    _require(config, "k")
    param = _param(config)
    options = config.options
    pair = CoherentPair(alpha=options.get("alpha", 0j), beta=options.get("beta", 0j))
    tol = options.get("identity_tol", 1e-8)
    lhs = superpose.coherent_sum_lhs(pair, config.k, param)
    outputs = {"coherent_sum": encode_complex(lhs)}
    checks = {}
    if pair.alpha != 0 or config.k == 0:
        rhs = superpose.coherent_closed_rhs(pair, config.k, param)
        deviation = abs(lhs - rhs) / max(abs(lhs), 1e-30)
        outputs["coherent_closed"] = encode_complex(rhs)
        checks["coherent_identity"] = {"passed": deviation <= tol, "tolerance": tol, "deviation": deviation}
        outputs["correspondence"] = superpose.semiclassical_correspondence(pair.alpha, config.k, param)
    gamma_i0 = options.get("gamma_i0")
    if gamma_i0 is not None:
        closed = superpose.gaussian_average(config.k, gamma_i0, 1.0)
        numeric = superpose.gaussian_average_quadrature(config.k, gamma_i0, 1.0)
        deviation = abs(numeric - closed) / closed
        outputs["gaussian_average"] = {"closed": closed, "quadrature": numeric}
        checks["gaussian_identity"] = {"passed": deviation <= 1e-6, "tolerance": 1e-6, "deviation": deviation}
    inputs = {
        "alpha": encode_complex(pair.alpha),
        "beta": encode_complex(pair.beta),
        "k": config.k,
        "r": param.r,
        "phi": param.phi,
        "gamma_i0": gamma_i0,
    }
    return _record(config, inputs, outputs=outputs, checks=checks)


def _thermal_field(options: Dict[str, Any]) -> ThermalField:
    if options.get("b") is not None:
        return ThermalField.from_boltzmann(options["b"])
    if options.get("hv_over_kT") is not None:
        return ThermalField.from_hv_over_kT(options["hv_over_kT"])
    if options.get("nbar") is not None:
        return ThermalField(nbar=options["nbar"])
    raise ArgumentError("thermal parameters require one of --nbar, --b, --hv-over-kT")


def cmd_thermal(config: RunConfig) -> ResultRecord:
    _require(config, "k")
    param = _param(config)
    field = _thermal_field(config.options)
    k = config.k
    outputs = {
        "b": field.b,
        "nbar": field.nbar,
        "emission_sum": superpose.thermal_emission_sum(k, field, param, config.tol),
        "absorption_sum": superpose.thermal_absorption_sum(k, field, param, config.tol),
    }
    checks = {}
    if param.r > 0 and field.nbar > 0:
        outputs["emission"] = superpose.thermal_emission(k, field, param)
        outputs["absorption"] = superpose.thermal_absorption(k, field, param)
        outputs["total_probability"] = superpose.total_thermal_probability(field, param)
        for kind in ("emission", "absorption"):
            deviation = abs(outputs[f"{kind}_sum"] - outputs[kind]) / outputs[kind]
            checks[f"{kind}_identity"] = {"passed": deviation <= 1e-8, "tolerance": 1e-8, "deviation": deviation}
    inputs = {"k": k, "nbar": field.nbar, "r": param.r, "phi": param.phi, "tol": config.tol}
    return _record(config, inputs, outputs=outputs, checks=checks)


def cmd_compare(config: RunConfig) -> ResultRecord:
    param = _param(config)
    orders = config.options.get("orders") or [config.k if config.k is not None else 0]
    fields = [ThermalField.from_boltzmann(b) for b in config.options.get("b_values") or []]
    fields += [ThermalField.from_hv_over_kT(x) for x in config.options.get("hv_values") or []]
    fields += [ThermalField(nbar=nbar) for nbar in config.options.get("nbar_values") or []]
    if not fields:
        raise ArgumentError("compare requires --nbar, --b or --hv-over-kT values")
    reports = [superpose.semiclassical_comparison(k, field, param) for field in fields for k in orders]
    for report in reports:
        logger.info(f"k={report.order}, b={report.b:.4g}: ratio {report.ratio:.6g} ({report.regime.value})")
    inputs = {"orders": orders, "b": [f.b for f in fields], "r": param.r}
    return _record(config, inputs, outputs={"rows": [report.model_dump(mode="json") for report in reports]})


def cmd_validate(config: RunConfig) -> ResultRecord:
    tier = config.options.get("tier", tasks.FAST)
    results = tasks.run_validation(tier)
    checks = {result.name: result.model_dump(exclude={"name"}) for result in results}
    failed = [result.name for result in results if not result.passed]
    return _record(config, {"tier": tier}, outputs={"passed": not failed, "failed": failed}, checks=checks)


COMMANDS = {
    Command.ELEMENT: cmd_element,
    Command.DISTRIBUTION: cmd_distribution,
    Command.FIGURE: cmd_figure,
    Command.SUPERPOSE: cmd_superpose,
    Command.THERMAL: cmd_thermal,
    Command.COMPARE: cmd_compare,
    Command.VALIDATE: cmd_validate,
}


def render(record: ResultRecord, config: RunConfig, with_timing: bool) -> str:
    if config.format == OutputFormat.JSON:
        return standardized_json(record.to_payload(with_timing))
    outputs = record.outputs
    if config.command in (Command.FIGURE, Command.DISTRIBUTION):
        rows = outputs["rows"] if "rows" in outputs else outputs["probs"]
        return render_csv(["m", "p"], rows)
    if config.command == Command.COMPARE:
        return render_csv(COMPARE_COLUMNS, [[row[c] for c in COMPARE_COLUMNS] for row in outputs["rows"]])
    raise ArgumentError(f"csv output is not available for {config.command.value}")


def _failed_checks(record: ResultRecord) -> List[str]:
    return [name for name, check in record.checks.items() if isinstance(check, dict) and not check.get("passed", True)]


def _failure_exit_code(record: ResultRecord, failed: List[str]) -> Optional[int]:
    """Exit code carried by the first failed check that raised, if any."""
    for name in failed:
        code = record.checks[name].get("exit_code")
        if code is not None:
            return code
    return None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default=None)
    common.add_argument("--out", dest="output_path", default=None, help="output file (default stdout)")
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--with-timing", action="store_true")
    common.add_argument("--log-level", type=str.upper, choices=["DEBUG", "INFO", "WARNING", "ERROR"], default=None)

    squeeze = argparse.ArgumentParser(add_help=False)
    squeeze.add_argument("--r", type=float, default=0.0)
    squeeze.add_argument("--phi", type=float, default=0.0)

    parser = argparse.ArgumentParser(prog="squeeze", description="Squeezing-operator matrix elements and their superpositions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    element = sub.add_parser("element", parents=[common, squeeze], help="<m|S|n> by every closed-form route")
    element.add_argument("--m", type=int, required=True)
    element.add_argument("--n", type=int, required=True)
    element.add_argument("--with-oracle", action="store_true")

    distribution = sub.add_parser("distribution", parents=[common, squeeze], help="photon-number distribution p_m(n)")
    distribution.add_argument("--n", type=int, required=True)
    distribution.add_argument("--mass-target", type=float, default=None)

    figure = sub.add_parser("figure", parents=[common], help="figure data as m,p rows")
    figure.add_argument("which", choices=sorted(FIGURES))

    coherent = sub.add_parser("superpose", parents=[common, squeeze], help="coherent and Gaussian superpositions")
    coherent.add_argument("--k", type=int, required=True)
    coherent.add_argument("--alpha", type=complex, default=0j)
    coherent.add_argument("--beta", type=complex, default=0j)
    coherent.add_argument("--gamma-i0", type=float, default=None)

    thermal = sub.add_parser("thermal", parents=[common, squeeze], help="Planck-averaged transition probabilities")
    thermal.add_argument("--k", type=int, required=True)
    thermal.add_argument("--nbar", type=float, default=None)
    thermal.add_argument("--b", type=float, default=None)
    thermal.add_argument("--hv-over-kT", dest="hv_over_kT", type=float, default=None)

    compare = sub.add_parser("compare", parents=[common, squeeze], help="quantum vs semiclassical thermal averages")
    compare.add_argument("--k", type=int, nargs="+", default=[0])
    compare.add_argument("--nbar", type=float, nargs="+", default=None)
    compare.add_argument("--b", type=float, nargs="+", default=None)
    compare.add_argument("--hv-over-kT", dest="hv_over_kT", type=float, nargs="+", default=None)

    validate = sub.add_parser("validate", parents=[common], help="run the invariant checks")
    validate.add_argument("--tier", choices=sorted(tasks.GRIDS), default=tasks.FAST)
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    command = Command(args.command)
    options: Dict[str, Any] = {}
    k = getattr(args, "k", None)
    if command == Command.ELEMENT:
        options["with_oracle"] = args.with_oracle
    elif command == Command.FIGURE:
        options["which"] = args.which
    elif command == Command.SUPERPOSE:
        options.update(alpha=args.alpha, beta=args.beta, gamma_i0=args.gamma_i0)
        if args.tol is not None:
            options["identity_tol"] = args.tol
    elif command == Command.THERMAL:
        options.update(nbar=args.nbar, b=args.b, hv_over_kT=args.hv_over_kT)
    elif command == Command.COMPARE:
        options.update(orders=args.k, nbar_values=args.nbar, b_values=args.b, hv_values=args.hv_over_kT)
        k = None
    elif command == Command.VALIDATE:
        options["tier"] = args.tier
    default_format = OutputFormat.CSV if command == Command.FIGURE else OutputFormat.JSON
    return RunConfig(
        command=command,
        r=getattr(args, "r", 0.0),
        phi=getattr(args, "phi", 0.0),
        m=getattr(args, "m", None),
        n=getattr(args, "n", None),
        k=k,
        tol=args.tol if args.tol is not None else settings.route_rel_tol,
        mass_target=getattr(args, "mass_target", None),
        output_path=args.output_path,
        format=OutputFormat(args.format) if args.format else default_format,
        options=options,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_ARGUMENT

    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    try:
        config = _run_config(args)
        logger.info(f"Running {config.command.value}")
        started = time.perf_counter()
        record = COMMANDS[config.command](config)
        elapsed = time.perf_counter() - started
        record.timing = {"seconds": elapsed}
        logger.info(f"{config.command.value} finished in {elapsed:.3f} s")
        emit(render(record, config, args.with_timing), config.output_path)
        failed = _failed_checks(record)
        if failed or record.outputs.get("passed") is False:
            raise DisagreementError(f"checks failed: {', '.join(failed)}", exit_code=_failure_exit_code(record, failed))
    except ValueError as e:
        # pydantic ValidationError is a ValueError
        logger.error(f"Invalid arguments: {e}")
        return EXIT_ARGUMENT
    except SqueezeError as e:
        logger.error(f"{e.__class__.__name__}: {e.detail}")
        return e.exit_code
    except OSError as e:
        logger.error(f"Could not write output: {e}")
        return EXIT_ARGUMENT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
