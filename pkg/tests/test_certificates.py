import math

import numpy as np
import pytest

from piezoblow.certificates import (
    CertificateError,
    CertificateParams,
    Infeasible,
    admissible_k,
    certificate_for,
    check_inequalities,
    dissipation_residual,
    energy,
    f_of_t,
    max_b,
    select_parameters,
    sigma_limit,
    upper_bound_tm,
)
from piezoblow.grid_ops import Grid, sine_mode
from piezoblow.integrator import SimConfig, StateVector, run
from piezoblow.model import InitialData, PhysicalParams
from piezoblow.series import DiagnosticSample, TimeSeries
from piezoblow.sources import NullSource


def test_energy_of_the_acceptance_state(blowup_params, blowup_source):
    grid = Grid(1.0, 256)
    state = StateVector.from_initial(InitialData(), grid)

    sample = energy(state, blowup_params, blowup_source)

    assert sample.source_integral == pytest.approx(5.0 * 35.0 / 128.0, rel=1e-6)
    assert sample.E == pytest.approx(-0.75, abs=5e-3)
    assert sample.diss == 0.0


def test_energy_reports_dissipation(grid):
    params = PhysicalParams(lambda1=0.5, lambda2=0.25)
    u = sine_mode(grid)
    state = StateVector(grid, grid.zeros(), grid.zeros(), u, u)

    sample = energy(state, params, NullSource(), t=2.0)

    assert sample.t == 2.0
    assert sample.diss == pytest.approx(-0.75 * 0.5, rel=1e-3)
    assert sample.E == pytest.approx(0.5, rel=1e-3)


def test_dissipation_residual_needs_three_samples():
    series = TimeSeries.from_samples([DiagnosticSample(*([0.0] * 16))] * 2)

    with pytest.raises(ValueError, match="at least 3 samples"):
        dissipation_residual(series)


class TestCertificateArithmetic:
    def test_eta_eight_admits_unit_k(self):
        certificate = certificate_for(8.0, 2.0, 1.0 / 6.0, -1.0)

        assert isinstance(certificate, CertificateParams)
        assert certificate.k == pytest.approx(1.0, abs=1e-12)
        assert admissible_k(8.0, 2.0, 1.0 / 6.0) == pytest.approx(1.0, abs=1e-12)

    def test_eta_four_is_infeasible(self):
        selected = select_parameters(4.0, 0.1, 0.1, -1.0, 0.0, 0.0, 0.5)

        assert isinstance(selected, Infeasible)
        assert selected.constraint == "k_positive"

    def test_sigma_limit_and_max_b(self):
        assert sigma_limit(8.0, 2.0) == pytest.approx(4.0 / 6.0)
        assert max_b(1.0, -1.0, 2.0, 1.0 / 6.0) == pytest.approx(1.0 / 3.5)

    @pytest.mark.parametrize(
        ("epsilon", "sigma", "constraint"),
        [(5.0, 0.1, "epsilon"), (2.0, 0.9, "sigma"), (0.5, 0.5, "k_positive")],
        ids=["epsilon", "sigma", "k"],
    )
    def test_infeasible_pairs_name_the_constraint(self, epsilon, sigma, constraint):
        certificate = certificate_for(8.0, epsilon, sigma, -1.0)

        assert isinstance(certificate, Infeasible)
        assert certificate.constraint == constraint

    def test_non_negative_energy_is_refused(self):
        with pytest.raises(CertificateError, match="negative"):
            select_parameters(8.0, 0.1, 0.1, 0.0, 0.0, 0.0, 0.5)

    def test_selection_prefers_large_k_and_resolves_the_horizon(self):
        selected = select_parameters(8.0, 0.1, 0.1, -0.75, 0.0, 0.05, 0.25)

        assert isinstance(selected, CertificateParams)
        assert selected.k > 0.0
        assert 0.0 < selected.epsilon < 4.0
        assert 0.0 < selected.sigma < sigma_limit(8.0, selected.epsilon)
        report = upper_bound_tm(selected, mass0=0.25, cross0=0.0, L0_rate=0.05)
        assert report.feasible
        assert report.horizon_consistent
        assert selected.T_horizon > report.t_m

    def test_tiny_search_grid_still_works(self):
        selected = select_parameters(
            8.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.5, search_points=2
        )

        assert isinstance(selected, CertificateParams)
        assert selected.epsilon == pytest.approx(8.0 / 3.0)

    def test_negative_initial_velocity_delays_t0(self):
        certificate = certificate_for(8.0, 2.0, 1.0 / 6.0, -1.0, cross0=-1.0)

        assert certificate.t0 == pytest.approx(2.0 / certificate.b)


def test_upper_bound_refuses_non_positive_slope():
    certificate = CertificateParams(2.0, 1.0 / 6.0, 1.0, 1.0, 1.0, 1.0, 10.0)

    report = upper_bound_tm(certificate, mass0=0.5, cross0=-5.0, L0_rate=0.0)

    assert not report.feasible
    assert math.isinf(report.t_m)
    assert "F'(0)" in report.reason


def test_certificate_checks_hold_on_a_blowup_run(blowup_params, blowup_source):
    result = run(
        InitialData(),
        blowup_params,
        blowup_source,
        SimConfig(t_end=1.0),
        grid=Grid(1.0, 64),
    )
    series = result.series.head(len(result.series) - 1)
    E0 = float(series.energy[0])
    certificate = select_parameters(
        8.0,
        0.1,
        0.1,
        E0,
        float(series.cross[0]),
        float(series.rate[0]),
        float(series.mass[0]),
    )
    assert isinstance(certificate, CertificateParams)

    augmented = f_of_t(series, certificate)
    checks = check_inequalities(augmented, blowup_params, 8.0)
    report = upper_bound_tm(
        certificate,
        mass0=float(series.mass[0]),
        cross0=float(series.cross[0]),
        L0_rate=float(series.rate[0]),
    )

    assert checks.acceleration_ok
    assert checks.cross_term_ok
    assert checks.Q_nonneg_ok
    assert checks.G_concave_ok
    assert checks.all_ok()
    assert report.feasible and report.horizon_consistent
    assert result.blowup.t_blow <= report.t_m
    assert np.all(augmented.F > 0.0)
    assert np.all(np.diff(augmented.G) < 0.0)
    np.testing.assert_allclose(
        augmented.G * augmented.F**certificate.sigma, 1.0, rtol=1e-12
    )


def test_f_of_t_rejects_negative_f():
    sample = DiagnosticSample(*([0.0] * 16))._replace(mass=-10.0)
    series = TimeSeries.from_samples([sample])
    certificate = CertificateParams(2.0, 1.0 / 6.0, 1.0, 1.0, 1.0, 1.0, 10.0)

    with pytest.raises(CertificateError, match="non-negative"):
        f_of_t(series, certificate)


def test_f_of_t_matches_its_definition():
    samples = [
        DiagnosticSample(*([0.0] * 16))._replace(t=t, mass=1.0 + t, rate=0.2, cross=1.0)
        for t in (0.0, 0.5, 1.0)
    ]
    certificate = CertificateParams(2.0, 0.5, 1.0, 1.0, 2.0, 1.0, 3.0)

    augmented = f_of_t(TimeSeries.from_samples(samples), certificate)

    t = np.array([0.0, 0.5, 1.0])
    L = 0.2 * t + (3.0 - t) * 0.2
    expected = (1.0 + t) + 0.5 * L + (t + 1.0) ** 2
    np.testing.assert_allclose(augmented.F, expected)
    np.testing.assert_allclose(augmented.G, expected**-0.5)
    np.testing.assert_allclose(augmented.Fprime, 1.0 + 2.0 * (t + 1.0))
