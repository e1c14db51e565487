# tests/test_superpose.py
import cmath
import math

import pytest

from squeeze import superpose
from squeeze.core import element
from squeeze.errors import ArgumentError, DomainError
from squeeze.schemas import CoherentPair, FockPair, Regime, SqueezeParam, ThermalField


def test_coherent_sum_matches_bessel_form():
    """Term-by-term coherent sum against the closed Bessel expression."""
    param = SqueezeParam(r=0.8, phi=0.3)
    pair = CoherentPair(alpha=1.2, beta=1.2 * cmath.exp(0.3j))
    lhs = superpose.coherent_sum_lhs(pair, 2, param)
    rhs = superpose.coherent_closed_rhs(pair, 2, param)
    assert abs(lhs - rhs) <= 1e-8 * abs(lhs)


@pytest.mark.parametrize("k", [0, 1, 3])
def test_coherent_identity_over_orders(k):
    param = SqueezeParam(r=0.4, phi=-1.0)
    pair = CoherentPair(alpha=0.7 - 0.2j, beta=1.5 + 0.4j)
    lhs = superpose.coherent_sum_lhs(pair, k, param)
    assert lhs == pytest.approx(superpose.coherent_closed_rhs(pair, k, param), rel=1e-8)


def test_coherent_vacuum_alpha_single_term():
    """With alpha = 0 only n = 0 contributes: <beta|2k> <2k|S|0>."""
    param = SqueezeParam(r=0.8, phi=0.3)
    beta = 0.7 + 0.1j
    pair = CoherentPair(alpha=0, beta=beta)
    expected = (
        math.exp(-0.5 * abs(beta) ** 2)
        * beta.conjugate() ** 2 / math.sqrt(2.0)
        * element(FockPair(m=2, n=0), param).value
    )
    assert superpose.coherent_sum_lhs(pair, 1, param) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(DomainError):
        superpose.coherent_closed_rhs(pair, 1, param)
    # k = 0 still has a closed form: exp(-|beta|^2 / 2) / sqrt(cosh r)
    assert superpose.coherent_closed_rhs(pair, 0, param) == pytest.approx(
        superpose.coherent_sum_lhs(pair, 0, param), rel=1e-12
    )


def test_coherent_both_vacuum_vanishes_for_positive_order():
    param = SqueezeParam(r=0.8)
    assert superpose.coherent_sum_lhs(CoherentPair(alpha=0, beta=0), 1, param) == 0j


def test_coherent_rejects_negative_order():
    with pytest.raises(ArgumentError):
        superpose.coherent_sum_lhs(CoherentPair(alpha=1, beta=1), -1, SqueezeParam(r=0.5))


def test_semiclassical_correspondence_for_equal_amplitudes():
    """For beta = alpha the closed form reduces to a real Bessel envelope."""
    report = superpose.semiclassical_correspondence(1.5, 2, SqueezeParam(r=0.8, phi=0.6))
    assert set(report) == {"quantum", "semiclassical", "deviation"}
    assert report["deviation"] < 1e-12


@pytest.mark.parametrize("k", [0, 1, 2, 3])
@pytest.mark.parametrize("scale", [0.5, 2.0])
def test_gaussian_average_closed_form(k, scale):
    closed = superpose.gaussian_average(k, scale, 1.0)
    assert superpose.gaussian_average_quadrature(k, scale, 1.0) == pytest.approx(closed, rel=1e-6)


def test_gaussian_average_domain():
    with pytest.raises(DomainError):
        superpose.gaussian_average(1, 0.0, 1.0)


def test_planck_weights():
    weights = superpose.planck_weights(ThermalField(nbar=1.0), 2)
    assert weights.weights == pytest.approx([0.5, 0.25, 0.125])
    assert weights.tail_mass == pytest.approx(0.125)
    assert sum(weights.weights) + weights.tail_mass == pytest.approx(1.0)


def test_thermal_field_conversions():
    field = ThermalField.from_boltzmann(0.5)
    assert field.nbar == pytest.approx(1.0)
    assert field.hv_over_kT == pytest.approx(math.log(2.0))
    assert ThermalField.from_hv_over_kT(math.log(2.0)).b == pytest.approx(0.5)
    with pytest.raises(ValueError):
        ThermalField.from_boltzmann(1.0)
    with pytest.raises(ValueError):
        ThermalField.from_hv_over_kT(0.0)


@pytest.mark.parametrize("k", [0, 1, 2, 4])
def test_thermal_closed_forms_match_sums(warm_field, k):
    param = SqueezeParam(r=0.8)
    emission = superpose.thermal_emission(k, warm_field, param)
    absorption = superpose.thermal_absorption(k, warm_field, param)
    assert superpose.thermal_emission_sum(k, warm_field, param) == pytest.approx(emission, rel=1e-8)
    assert superpose.thermal_absorption_sum(k, warm_field, param) == pytest.approx(absorption, rel=1e-8)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_detailed_balance(k):
    """Emission over absorption is b^{-2k}."""
    field = ThermalField(nbar=0.3)
    param = SqueezeParam(r=1.2)
    ratio = superpose.thermal_emission(k, field, param) / superpose.thermal_absorption(k, field, param)
    assert ratio == pytest.approx(field.b ** (-2 * k), rel=1e-12)


def test_thermal_closed_form_domain(warm_field):
    with pytest.raises(DomainError):
        superpose.thermal_emission(1, warm_field, SqueezeParam(r=0.0))
    with pytest.raises(DomainError):
        superpose.thermal_absorption(1, ThermalField(nbar=0.0), SqueezeParam(r=0.5))


def test_total_thermal_probability_is_one(warm_field):
    assert superpose.total_thermal_probability(warm_field, SqueezeParam(r=1.0)) == pytest.approx(1.0, abs=1e-6)


def test_regime_classification():
    assert superpose.classify_regime(ThermalField.from_boltzmann(0.99)) == Regime.RAYLEIGH_JEANS
    assert superpose.classify_regime(ThermalField.from_boltzmann(0.5)) == Regime.INTERMEDIATE
    assert superpose.classify_regime(ThermalField.from_boltzmann(0.02)) == Regime.WIEN


def test_semiclassical_close_in_rayleigh_jeans_limit():
    """b = 0.99, k = 2: the ratio is b^-2 = 1.02, within 5% of one."""
    report = superpose.semiclassical_comparison(2, ThermalField.from_boltzmann(0.99), SqueezeParam(r=1.0))
    assert report.regime == Regime.RAYLEIGH_JEANS
    assert report.ratio == pytest.approx(0.99 ** -2, rel=1e-10)
    assert abs(report.ratio - 1.0) < 0.05


def test_semiclassical_fails_in_wien_limit():
    """b = 0.02, k = 2: the ratio is 2500."""
    report = superpose.semiclassical_comparison(2, ThermalField.from_boltzmann(0.02), SqueezeParam(r=1.0))
    assert report.regime == Regime.WIEN
    assert report.ratio == pytest.approx(2500.0, rel=1e-10)


def test_semiclassical_elastic_order_agrees():
    report = superpose.semiclassical_comparison(0, ThermalField.from_boltzmann(0.3), SqueezeParam(r=0.7))
    assert report.ratio == pytest.approx(1.0, rel=1e-12)
    assert report.quantum_emission == pytest.approx(report.quantum_absorption)


@pytest.mark.parametrize("k", [0, 1, 3])
def test_thermal_averages_independent_of_phase(warm_field, k):
    """Only |<m|S|n>|^2 enters the thermal averages, so phi drops out."""
    still, turned = SqueezeParam(r=0.9), SqueezeParam(r=0.9, phi=2.3)
    assert superpose.thermal_emission(k, warm_field, turned) == pytest.approx(
        superpose.thermal_emission(k, warm_field, still), rel=1e-13
    )
    assert superpose.thermal_emission_sum(k, warm_field, turned) == pytest.approx(
        superpose.thermal_emission_sum(k, warm_field, still), rel=1e-12
    )
    if k > 0:
        assert superpose.thermal_absorption(k, warm_field, turned) == pytest.approx(
            superpose.thermal_absorption(k, warm_field, still), rel=1e-13
        )
        assert superpose.thermal_absorption_sum(k, warm_field, turned) == pytest.approx(
            superpose.thermal_absorption_sum(k, warm_field, still), rel=1e-12
        )
    assert superpose.total_thermal_probability(warm_field, turned) == pytest.approx(1.0, abs=1e-6)
