"""End-to-end checks on the blow-up scenario and the damped linear run."""

import numpy as np
import pytest

from piezoblow._config import parse_config
from piezoblow.bounds import LowerBoundParams, coercivity_violation, lower_bound_tstar
from piezoblow.certificates import (
    CertificateParams,
    check_inequalities,
    dissipation_residual,
    energy,
    f_of_t,
    select_parameters,
    upper_bound_tm,
)
from piezoblow.core import SERIES_FILE, simulate
from piezoblow.grid_ops import Grid
from piezoblow.integrator import SimConfig, StateVector, run
from piezoblow.model import InitialData, PhysicalParams, check_g2, check_g2_scale
from piezoblow.sources import NullSource, PowerDifferenceSource
from piezoblow.verification import ConvergenceLevel, richardson

BLOWUP_PARAMS = PhysicalParams(alpha=1.0, beta=1.0, gamma=0.5, lambda1=0.1, lambda2=0.1)
BLOWUP_SOURCE = PowerDifferenceSource(a=40.0, eta=8.0)


def _blowup_run(cells, threshold=1e6):
    return run(
        InitialData(),
        BLOWUP_PARAMS,
        BLOWUP_SOURCE,
        SimConfig(t_end=1.0, blowup_threshold=threshold),
        grid=Grid(1.0, cells),
    )


@pytest.fixture(scope="module")
def blowup_runs():
    return {cells: _blowup_run(cells) for cells in (128, 256)}


def test_initial_energy_is_negative_at_four_times_the_resolution():
    fine = StateVector.from_initial(InitialData(), Grid(1.0, 512))

    assert energy(fine, BLOWUP_PARAMS, BLOWUP_SOURCE).E < 0.0


def test_blowup_time_converges_under_refinement(blowup_runs):
    coarse = blowup_runs[128].blowup
    fine = blowup_runs[256].blowup

    assert coarse is not None and fine is not None
    assert abs(fine.t_blow - coarse.t_blow) / fine.t_blow < 0.05


def test_blowup_time_ignores_the_threshold(blowup_runs):
    raised = _blowup_run(128, threshold=1e8)

    assert raised.blowup is not None
    reference = blowup_runs[128].blowup.t_blow
    assert abs(raised.blowup.t_blow - reference) / reference < 0.02


@pytest.mark.parametrize("cells", [128, 256], ids=["N128", "N256"])
def test_blowup_respects_both_bounds(blowup_runs, cells):
    result = blowup_runs[cells]
    series = result.series.head(len(result.series) - 1)
    lb = LowerBoundParams.from_model(BLOWUP_PARAMS, BLOWUP_SOURCE, 1.0)

    T_star = lower_bound_tstar(float(series.psi[0]), lb).T_star
    certificate = select_parameters(
        BLOWUP_SOURCE.eta,
        BLOWUP_PARAMS.lambda1,
        BLOWUP_PARAMS.lambda2,
        float(series.energy[0]),
        float(series.cross[0]),
        float(series.rate[0]),
        float(series.mass[0]),
    )
    assert isinstance(certificate, CertificateParams)
    bound = upper_bound_tm(
        certificate,
        mass0=float(series.mass[0]),
        cross0=float(series.cross[0]),
        L0_rate=float(series.rate[0]),
    )
    checks = check_inequalities(
        f_of_t(series, certificate), BLOWUP_PARAMS, BLOWUP_SOURCE.eta
    )

    assert T_star <= result.blowup.t_blow <= bound.t_m
    assert bound.feasible and bound.horizon_consistent
    assert checks.all_ok()
    assert coercivity_violation(result.series, lb.m) <= 1e-6


def test_extrapolated_blowup_time_stays_below_the_upper_bound(blowup_runs):
    levels = [
        ConvergenceLevel(cells, blowup_runs[cells].blowup.t_blow)
        for cells in (128, 256)
    ]
    series = blowup_runs[256].series
    certificate = select_parameters(
        8.0,
        0.1,
        0.1,
        float(series.energy[0]),
        float(series.cross[0]),
        float(series.rate[0]),
        float(series.mass[0]),
    )
    bound = upper_bound_tm(
        certificate,
        mass0=float(series.mass[0]),
        cross0=float(series.cross[0]),
        L0_rate=float(series.rate[0]),
    )

    assert richardson(levels).extrapolated <= 1.05 * bound.t_m


@pytest.mark.parametrize("cells", [128, 256], ids=["N128", "N256"])
def test_blowup_runs_never_gain_energy(blowup_runs, cells):
    energies = blowup_runs[cells].series.energy

    assert np.all(np.diff(energies) <= 1e-8 * (1.0 + abs(energies[0])))
    assert np.all(energies <= energies[0] + 1e-8 * (1.0 + abs(energies[0])))


def test_damped_linear_run_dissipates_energy_exactly():
    params = PhysicalParams(alpha=1.0, beta=1.0, gamma=0.3, lambda1=0.5, lambda2=0.5)

    result = run(
        InitialData(v0="sine:0.5"),
        params,
        NullSource(),
        SimConfig(t_end=2.0, cfl=0.5),
        grid=Grid(1.0, 256),
    )

    assert result.t_final == pytest.approx(2.0)
    assert dissipation_residual(result.series) <= 1e-5
    assert np.all(np.diff(result.series.energy) <= 0.0)


def test_power_source_satisfies_the_growth_identity():
    grid = Grid(1.0, 64)
    rng = np.random.default_rng(2024)

    residuals = []
    for _ in range(100):
        v, p = rng.normal(scale=0.8, size=(2, grid.size))
        scale = check_g2_scale(BLOWUP_SOURCE, v, p, grid)
        residuals.append(abs(check_g2(BLOWUP_SOURCE, v, p, grid)) / scale)

    assert max(residuals) <= 1e-12


def test_identical_configurations_write_identical_series(blowup_config, tmp_path):
    config = parse_config(blowup_config)

    simulate(config, tmp_path / "first")
    simulate(config, tmp_path / "second")

    first = (tmp_path / "first" / SERIES_FILE).read_bytes()
    assert first == (tmp_path / "second" / SERIES_FILE).read_bytes()
