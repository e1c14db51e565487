# tests/test_main.py
import json
import math

import pytest

from squeeze import __version__
from squeeze.errors import EXIT_ARGUMENT, EXIT_DISAGREEMENT, EXIT_NON_CONVERGENCE, EXIT_OK
from squeeze.main import main
from squeeze.schemas import CheckResult, encode_non_finite, standardized_json


def _run_json(capsys, argv):
    """Run the CLI and parse its JSON output."""
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_element_command(capsys):
    code, payload = _run_json(capsys, ["element", "--m", "0", "--n", "0", "--r", "1.5"])
    assert code == EXIT_OK
    assert payload["command"] == "element"
    assert payload["version"] == __version__
    routes = payload["outputs"]["routes"]
    assert set(routes) == {"gegenbauer", "hypergeometric", "finite_sum", "legendre", "jacobi"}
    for result in routes.values():
        assert result["magnitude"] == pytest.approx(1.0 / math.sqrt(math.cosh(1.5)), rel=1e-12)
    assert payload["checks"]["route_agreement"]["passed"]
    # timing is excluded unless asked for
    assert "timing" not in payload


def test_element_with_oracle(capsys):
    code, payload = _run_json(capsys, ["element", "--m", "4", "--n", "2", "--r", "0.7", "--phi", "0.3", "--with-oracle"])
    assert code == EXIT_OK
    assert payload["outputs"]["oracle"]["route"] == "oracle"
    assert payload["checks"]["oracle_agreement"]["passed"]


def test_element_parity_zero(capsys):
    code, payload = _run_json(capsys, ["element", "--m", "1", "--n", "0", "--r", "0.5"])
    assert code == EXIT_OK
    assert all(result["magnitude"] == 0.0 for result in payload["outputs"]["routes"].values())


def test_output_is_deterministic(capsys):
    """Identical inputs give byte-identical output."""
    argv = ["element", "--m", "6", "--n", "2", "--r", "1.1", "--phi", "0.4"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    second = capsys.readouterr().out
    assert first == second


def test_with_timing_adds_timing(capsys):
    _, payload = _run_json(capsys, ["element", "--m", "0", "--n", "0", "--r", "0.5", "--with-timing"])
    assert payload["timing"]["seconds"] >= 0.0


@pytest.mark.parametrize("argv", [
    ["element", "--n", "0", "--r", "1.0"], # missing --m
    ["element", "--m", "-1", "--n", "0", "--r", "1.0"],
    ["element", "--m", "0", "--n", "0", "--r", "-1.0"],
    ["element", "--m", "0", "--n", "0", "--r", "1.0", "--format", "csv"],
    ["figure", "fig9"],
    ["thermal", "--k", "1", "--r", "1.0", "--b", "1.5"],
    ["compare", "--k", "1", "--r", "1.0"],
    ["validate", "--tier", "thorough"],
])
def test_bad_arguments_exit_two(capsys, argv):
    assert main(argv) == EXIT_ARGUMENT


def test_figure_csv(capsys):
    """fig1a is p_m(0) at r = 1.5, one (m, p) row per even m."""
    code = main(["figure", "fig1a"])
    lines = capsys.readouterr().out.splitlines()
    assert code == EXIT_OK
    assert lines[0] == "m,p"
    m, p = lines[1].split(",")
    assert m == "0"
    assert float(p) == pytest.approx(1.0 / math.cosh(1.5), rel=1e-12)
    assert all(int(line.split(",")[0]) % 2 == 0 for line in lines[1:])


def test_figure_scaled_rows(capsys):
    """fig1b plots 4 p_m(1)."""
    main(["figure", "fig1b"])
    first_row = capsys.readouterr().out.splitlines()[1]
    m, p = first_row.split(",")
    assert m == "1"
    # p_1(1) = x^3 with x = 1/cosh r
    assert float(p) == pytest.approx(4.0 / math.cosh(1.5) ** 3, rel=1e-12)


def test_figure_json_summary(capsys):
    code, payload = _run_json(capsys, ["figure", "fig1a", "--format", "json"])
    assert code == EXIT_OK
    assert abs(payload["outputs"]["summary"]["mean_energy"] - 5.03) <= 0.05


def test_distribution_command_writes_file(capsys, tmp_path):
    target = tmp_path / "dist.json"
    code = main(["distribution", "--n", "1", "--r", "0.5", "--out", str(target)])
    assert code == EXIT_OK
    assert capsys.readouterr().out == ""
    payload = json.loads(target.read_text())
    assert payload["outputs"]["captured_mass"] == pytest.approx(1.0, abs=1e-9)


def test_superpose_command(capsys):
    code, payload = _run_json(capsys, [
        "superpose", "--k", "1", "--r", "0.8", "--phi", "0.3",
        "--alpha", "1.2", "--beta", "1.1+0.4j", "--gamma-i0", "0.7",
    ])
    assert code == EXIT_OK
    assert payload["checks"]["coherent_identity"]["passed"]
    assert payload["checks"]["gaussian_identity"]["passed"]


def test_thermal_command(capsys):
    code, payload = _run_json(capsys, ["thermal", "--k", "1", "--r", "0.8", "--nbar", "1.0"])
    assert code == EXIT_OK
    assert payload["checks"]["emission_identity"]["passed"]
    assert payload["checks"]["absorption_identity"]["passed"]
    assert payload["outputs"]["total_probability"] == pytest.approx(1.0, abs=1e-6)


def test_compare_command(capsys):
    code, payload = _run_json(capsys, ["compare", "--k", "2", "--r", "1.0", "--b", "0.99", "0.02"])
    assert code == EXIT_OK
    rows = payload["outputs"]["rows"]
    assert [row["regime"] for row in rows] == ["rayleigh_jeans", "wien"]
    assert rows[0]["ratio"] == pytest.approx(0.99 ** -2, rel=1e-10)
    assert rows[1]["ratio"] == pytest.approx(2500.0, rel=1e-10)


def test_compare_csv(capsys):
    main(["compare", "--k", "0", "1", "--r", "1.0", "--hv-over-kT", "0.05", "--format", "csv"])
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "order,b,hv_over_kT,quantum_emission,quantum_absorption,semiclassical,regime,ratio"
    assert len(lines) == 3


def test_validate_failure_exits_three(capsys, mock_run_validation):
    """Output is still written before the disagreement exit code."""
    mock_run_validation.return_value = [
        CheckResult(name="core.route_agreement", passed=False, max_deviation=1.0, tolerance=1e-9, points=4),
    ]
    code, payload = _run_json(capsys, ["validate"])
    assert code == EXIT_DISAGREEMENT
    assert payload["outputs"] == {"passed": False, "failed": ["core.route_agreement"]}
    mock_run_validation.assert_called_once_with("fast")


def test_validate_success_exits_zero(capsys, mock_run_validation):
    mock_run_validation.return_value = [
        CheckResult(name="oracle.spinor", passed=True, max_deviation=0.0, tolerance=1e-12, points=6),
    ]
    code, payload = _run_json(capsys, ["validate", "--tier", "full"])
    assert code == EXIT_OK
    assert payload["checks"]["oracle.spinor"]["passed"]
    mock_run_validation.assert_called_once_with("full")


def test_validate_exit_code_follows_raising_check(capsys, mock_run_validation):
    """A check that stopped on non-convergence sets the exit code; inf is written as a string."""
    mock_run_validation.return_value = [
        CheckResult(name="oracle.orderings", passed=False, max_deviation=math.inf, tolerance=0.0, points=0,
                    detail="NonConvergenceError - leading block did not settle", exit_code=EXIT_NON_CONVERGENCE),
        CheckResult(name="core.route_agreement", passed=False, max_deviation=1.0, tolerance=1e-9, points=4),
    ]
    code = main(["validate"])
    out = capsys.readouterr().out
    assert code == EXIT_NON_CONVERGENCE
    assert "Infinity" not in out
    payload = json.loads(out)
    assert payload["checks"]["oracle.orderings"]["max_deviation"] == "inf"
    assert payload["outputs"]["failed"] == ["oracle.orderings", "core.route_agreement"]


def test_standardized_json_encodes_non_finite_values():
    payload = {"b": [1.0, -math.inf], "a": {"x": math.nan}, "c": (math.inf, 2)}
    assert encode_non_finite(payload) == {"b": [1.0, "-inf"], "a": {"x": "nan"}, "c": ["inf", 2]}
    assert standardized_json(payload) == '{"a":{"x":"nan"},"b":[1.0,"-inf"],"c":["inf",2]}'


def test_compare_accepts_mean_photon_numbers(capsys):
    code, payload = _run_json(capsys, ["compare", "--k", "1", "--r", "1.0", "--nbar", "1.0", "0.5"])
    assert code == EXIT_OK
    rows = payload["outputs"]["rows"]
    assert len(rows) == 2
    # nbar = 1 is b = 1/2 and nbar = 1/2 is b = 1/3
    assert payload["inputs"]["b"] == pytest.approx([0.5, 1.0 / 3.0], rel=1e-12)


def test_element_route_agreement_uses_fixed_tolerance(capsys):
    """Cancelling sums at m, n near 50 meet the default tolerance with no widening."""
    code, payload = _run_json(capsys, ["element", "--m", "51", "--n", "55", "--r", "1.0"])
    assert code == EXIT_OK
    agreement = payload["checks"]["route_agreement"]
    assert agreement["passed"]
    assert agreement["tolerance"] == 1e-9
    assert max(agreement["deviations"].values()) <= 1e-9
