"""Command pipelines: simulate, certify, lower bound, convergence and sweep."""

import logging
import math
from collections.abc import Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, replace
from pathlib import Path
from time import perf_counter

import numpy as np

from ._config import RunConfig, SweepGrid
from ._validation import validate_count
from .bounds import (
    LowerBoundParams,
    LowerBoundReport,
    check_psi_ode,
    coercivity_violation,
    lower_bound_tstar,
    psi,
)
from .certificates import (
    AugmentedSeries,
    CertificateError,
    CertificateParams,
    CertificateReport,
    Infeasible,
    check_inequalities,
    dissipation_residuals,
    f_of_t,
    select_parameters,
    upper_bound_tm,
)
from .integrator import SimulationResult, StateVector, run
from .logger import configure_worker_logging, console_level
from .model import check_g2, check_g2_scale
from .report import RunReport
from .series import TimeSeries, write_csv
from .verification import blowup_study, spatial_study, temporal_study

logger = logging.getLogger(__name__)

SERIES_FILE = "series.csv"
REPORT_FILE = "report.json"
SUMMARY_FILE = "summary.csv"
SUMMARY_COLUMNS = (
    "index",
    "a",
    "eta",
    "lambda1",
    "lambda2",
    "E0",
    "t_blow",
    "t_m",
    "T_star",
)

ENERGY_TOLERANCE = 1e-8
G2_TOLERANCE = 1e-12
COERCIVITY_TOLERANCE = 1e-6
PSI_ODE_TOLERANCE = 1e-6
SPATIAL_ORDER = (1.7, 2.3)
TEMPORAL_ORDER = (math.log2(12.0), math.log2(20.0))


@dataclass(frozen=True, eq=False)
class Certification:
    """Certificate found for a run and the functionals it induces."""

    params: CertificateParams
    report: CertificateReport
    augmented: AugmentedSeries


@contextmanager
def _phase(report: RunReport, name: str) -> Iterator[None]:
    started = perf_counter()
    try:
        yield
    finally:
        report.timings[name] = perf_counter() - started


def claim_outputs(directory: Path, names: Sequence[str]) -> list[Path]:
    """Return output paths after checking none of them exists.

    Raises:
        FileExistsError: One of the outputs is already present.
    """
    paths = [directory / name for name in names]
    for path in paths:
        if path.exists():
            raise FileExistsError(f"Output path already exists: {path}")
    return paths


def _energy_nonincreasing(series: TimeSeries) -> bool:
    if len(series) < 2:
        return True
    slack = ENERGY_TOLERANCE * (1.0 + abs(series.energy[0]))
    return bool(np.all(np.diff(series.energy) <= slack))


def _g2_residual(state: StateVector, config: RunConfig) -> float:
    scale = check_g2_scale(config.source, state.v, state.p, state.grid)
    if not math.isfinite(scale):
        return math.inf
    if scale == 0.0:
        return 0.0
    return abs(check_g2(config.source, state.v, state.p, state.grid)) / scale


def _pinned(state: StateVector) -> bool:
    return all(values[0] == 0.0 for values in (state.v, state.p, state.vt, state.pt))


def simulate_phase(
    config: RunConfig,
    report: RunReport,
) -> SimulationResult:
    """Run the time integration and record the simulation invariants."""
    start = StateVector.from_initial(config.initial, config.grid)
    logger.info(
        f"Integrating N={config.grid.cells} cells to t={config.sim.t_end:g}..."
    )
    with _phase(report, "simulate"):
        result = run(start, config.params, config.source, config.sim)
    series = result.series
    if result.blowup is None:
        logger.info(f"Horizon t={result.t_final:g} reached without blow-up.")
    report.blowup = result.blowup
    report.summary["E0"] = float(series.energy[0])
    report.summary["t_final"] = result.t_final
    report.summary["accepted_steps"] = result.accepted_steps
    report.summary["rejected_steps"] = result.rejected_steps

    report.flag("dirichlet_pinned", _pinned(result.final_state))
    report.flag("energy_nonincreasing", _energy_nonincreasing(series))
    residual = max(
        _g2_residual(start, config), _g2_residual(result.final_state, config)
    )
    report.flag("g2_identity", residual <= G2_TOLERANCE)
    m = min(config.params.alpha1, config.params.beta, 1.0)
    report.flag("coercivity", coercivity_violation(series, m) <= COERCIVITY_TOLERANCE)
    return result


def find_certificate(
    config: RunConfig,
    series: TimeSeries,
) -> Certification | Infeasible:
    """Select certificate constants for the run and evaluate ``F`` along it."""
    E0 = float(series.energy[0])
    if E0 >= 0.0:
        return Infeasible(
            "negative_energy",
            f"the initial energy E0={E0:.6g} is not negative.",
        )
    chosen = select_parameters(
        config.source.eta,
        config.params.lambda1,
        config.params.lambda2,
        E0,
        float(series.cross[0]),
        float(series.rate[0]),
        float(series.mass[0]),
        lambda_cert=config.lambda_cert,
        search_points=config.search_points,
    )
    if isinstance(chosen, Infeasible):
        return chosen
    bound = upper_bound_tm(
        chosen,
        mass0=float(series.mass[0]),
        cross0=float(series.cross[0]),
        L0_rate=float(series.rate[0]),
    )
    return Certification(chosen, bound, f_of_t(series, chosen))


def certify_phase(
    config: RunConfig,
    result: SimulationResult,
    report: RunReport,
) -> Certification | None:
    """Attach the certificate to ``report`` and record its inequality checks."""
    with _phase(report, "certify"):
        found = find_certificate(config, result.series)
    if isinstance(found, Infeasible):
        report.infeasible = found
        logger.warning(f"No certificate ({found.constraint}): {found.detail}")
        return None

    report.certificate = found.report
    report.summary["t_m"] = found.report.t_m
    logger.info(
        f"Certificate epsilon={found.params.epsilon:.4g}, "
        f"sigma={found.params.sigma:.4g}, k={found.params.k:.4g} "
        f"gives t_m={found.report.t_m:.6g}."
    )
    with _phase(report, "inequalities"):
        series = result.series
        if result.blowup is not None and len(series) > 1:
            series = series.head(len(series) - 1)
        augmented = f_of_t(series, found.params)
        inequalities = check_inequalities(augmented, config.params, config.source.eta)
    report.flag("acceleration_bound", inequalities.acceleration_ok)
    report.flag("cross_term_bound", inequalities.cross_term_ok)
    report.flag("q_nonneg", inequalities.Q_nonneg_ok)
    report.flag("g_concave", inequalities.G_concave_ok)
    report.flag(
        "horizon_consistent",
        found.report.feasible and found.report.horizon_consistent,
    )
    if result.blowup is not None:
        report.flag("t_blow_le_t_m", result.blowup.t_blow <= found.report.t_m)
    else:
        report.flag("t_blow_le_t_m", config.sim.t_end < found.report.t_m)
    return found


def lower_bound_phase(config: RunConfig, report: RunReport) -> LowerBoundReport:
    """Evaluate ``psi(0)`` and the blow-up time lower bound."""
    with _phase(report, "lower_bound"):
        state = StateVector.from_initial(config.initial, config.grid)
        psi0 = psi(state, config.source)
        lb = LowerBoundParams.from_model(
            config.params, config.source, config.grid.length
        )
        if psi0 <= 0.0 and not (lb.r <= 1.0 or lb.coefficient == 0.0):
            bound = LowerBoundReport(psi0=psi0, T_star=math.nan, undefined=True)
        else:
            bound = lower_bound_tstar(psi0, lb)
    report.lower_bound = bound
    report.summary["T_star"] = bound.T_star
    if bound.undefined:
        logger.warning(f"psi(0)={psi0:.6g} is not positive; T* is undefined.")
    else:
        logger.info(f"Lower bound T*={bound.T_star:.6g} from psi(0)={psi0:.6g}.")
    return bound


def write_series(
    path: Path,
    config: RunConfig,
    result: SimulationResult,
    certification: Certification | None,
) -> None:
    """Write the diagnostic table, certificate columns included when available."""
    series = result.series
    residuals = (
        dissipation_residuals(series) if len(series) >= 2 else np.zeros(len(series))
    )
    augmented = certification.augmented if certification else None
    write_csv(
        path,
        series,
        diss_residual=residuals,
        F=None if augmented is None else augmented.F,
        Fprime=None if augmented is None else augmented.Fprime,
        G=None if augmented is None else augmented.G,
        stride=config.output_stride,
    )
    logger.info(f"Series written to {path}.")


def _finish(report: RunReport, path: Path) -> RunReport:
    for name in report.failed_flags:
        logger.error(f"Invariant check failed: {name}.")
    report.write(path)
    logger.info(f"Report written to {path}.")
    return report


def _quiet_certificate(config: RunConfig, series: TimeSeries) -> Certification | None:
    try:
        found = find_certificate(config, series)
    except CertificateError as error:
        logger.debug(f"Certificate columns left empty: {error}")
        return None
    return None if isinstance(found, Infeasible) else found


def simulate(config: RunConfig, output_dir: Path) -> RunReport:
    """Run the simulation and write ``series.csv`` and ``report.json``.

    The certificate columns of the series are filled whenever a certificate
    exists; no certificate checks are recorded.

    Raises:
        FileExistsError: An output file already exists.
    """
    output_dir.mkdir(parents=True, exist_ok=True)
    series_path, report_path = claim_outputs(output_dir, (SERIES_FILE, REPORT_FILE))
    report = RunReport("simulate", config.echo())
    result = simulate_phase(config, report)
    write_series(series_path, config, result, _quiet_certificate(config, result.series))
    return _finish(report, report_path)


def certify(config: RunConfig, output_dir: Path) -> RunReport:
    """Simulate, then select and check a blow-up certificate.

    An infeasible certificate is reported through ``report.infeasible``.

    Raises:
        FileExistsError: An output file already exists.
    """
    output_dir.mkdir(parents=True, exist_ok=True)
    series_path, report_path = claim_outputs(output_dir, (SERIES_FILE, REPORT_FILE))
    report = RunReport("certify", config.echo())
    result = simulate_phase(config, report)
    certification = certify_phase(config, result, report)
    write_series(series_path, config, result, certification)
    return _finish(report, report_path)


def lower_bound(
    config: RunConfig,
    output_dir: Path,
    *,
    simulate: bool = False,
) -> RunReport:
    """Evaluate ``T*`` and, when asked, compare it with a simulated ``t_blow``.

    Raises:
        FileExistsError: An output file already exists.
    """
    output_dir.mkdir(parents=True, exist_ok=True)
    names = (SERIES_FILE, REPORT_FILE) if simulate else (REPORT_FILE,)
    paths = claim_outputs(output_dir, names)
    report = RunReport("lowerbound", config.echo())
    bound = lower_bound_phase(config, report)
    if simulate:
        result = simulate_phase(config, report)
        lb = LowerBoundParams.from_model(
            config.params, config.source, config.grid.length
        )
        excess = check_psi_ode(result.series, lb)
        scale = max(1.0, float(np.max(lb.growth_bound(result.series.psi))))
        report.flag("psi_ode", excess <= PSI_ODE_TOLERANCE * scale)
        if result.blowup is None or bound.undefined:
            report.flag("t_blow_ge_T_star", True)
        else:
            report.flag("t_blow_ge_T_star", result.blowup.t_blow >= bound.T_star)
        write_series(
            paths[0], config, result, _quiet_certificate(config, result.series)
        )
    return _finish(report, paths[-1])


def convergence(config: RunConfig, output_dir: Path, *, levels: int = 3) -> RunReport:
    """Run the spatial, temporal and blow-up time refinement studies.

    The spatial and temporal studies use the undamped, uncoupled free wave
    with the configured ``alpha`` and ``beta``. The blow-up study runs the
    configured problem at ``N, 2N, ...`` and is skipped when no level blows up.

    Raises:
        FileExistsError: An output file already exists.
    """
    levels = validate_count(levels, "levels", 2)
    output_dir.mkdir(parents=True, exist_ok=True)
    (report_path,) = claim_outputs(output_dir, (REPORT_FILE,))
    report = RunReport("convergence", config.echo())
    free = replace(config.params, gamma=0.0, lambda1=0.0, lambda2=0.0)
    length = config.grid.length

    logger.info(f"Running the spatial study over {levels} levels...")
    with _phase(report, "spatial"):
        spatial = spatial_study(
            free, length=length, cells=tuple(64 * 2**level for level in range(levels))
        )
    report.studies.append(spatial)
    report.flag("spatial_order", _order_within(spatial.estimate.order, SPATIAL_ORDER))

    logger.info(f"Running the temporal study over {levels} levels...")
    with _phase(report, "temporal"):
        temporal = temporal_study(free, length=length, levels=levels)
    report.studies.append(temporal)
    report.flag(
        "temporal_order", _order_within(temporal.estimate.order, TEMPORAL_ORDER)
    )

    cells = tuple(config.grid.cells * 2**level for level in range(levels))
    logger.info(f"Running the blow-up time study at N={', '.join(map(str, cells))}...")
    try:
        with _phase(report, "blowup"):
            study = blowup_study(
                config.initial,
                config.params,
                config.source,
                config.sim,
                length=length,
                cells=cells,
            )
    except ValueError as error:
        logger.warning(f"Blow-up study skipped: {error}")
    else:
        report.studies.append(study)
        report.summary["t_blow_extrapolated"] = study.estimate.extrapolated
    for study_result in report.studies:
        order = study_result.estimate.order
        logger.info(
            f"{study_result.name} study: observed order "
            f"{'n/a' if order is None else f'{order:.3f}'}."
        )
    return _finish(report, report_path)


def _order_within(order: float | None, limits: tuple[float, float]) -> bool:
    return order is not None and limits[0] <= order <= limits[1]


def _sweep_point(
    task: tuple[int, dict[str, float], RunConfig, Path],
) -> tuple[float, ...]:
    """Evaluate one sweep point and return its summary row."""
    index, overrides, base, directory = task
    config = base.with_overrides(overrides)
    directory.mkdir(parents=True, exist_ok=True)
    series_path, report_path = claim_outputs(directory, (SERIES_FILE, REPORT_FILE))
    report = RunReport("sweep", config.echo())
    bound = lower_bound_phase(config, report)
    result = simulate_phase(config, report)
    certification = certify_phase(config, result, report)
    t_blow = math.nan if result.blowup is None else result.blowup.t_blow
    report.flag("t_blow_ge_T_star", not t_blow < bound.T_star)
    write_series(series_path, config, result, certification)
    _finish(report, report_path)
    t_m = math.inf if certification is None else certification.report.t_m
    return (
        float(index),
        config.source.a,
        config.source.eta,
        config.params.lambda1,
        config.params.lambda2,
        float(result.series.energy[0]),
        t_blow,
        t_m,
        bound.T_star,
    )


def sweep(
    config: RunConfig,
    grid: SweepGrid,
    output_dir: Path,
    *,
    jobs: int = 1,
) -> list[tuple[float, ...]]:
    """Evaluate every point of ``grid``; each writes to ``point-XXX/``.

    ``summary.csv`` is written in grid order after all points finish.

    Raises:
        ConfigError: A grid point violates a model constraint.
        FileExistsError: An output file already exists.
    """
    jobs = validate_count(jobs, "jobs", 1)
    grid.check(config)
    output_dir.mkdir(parents=True, exist_ok=True)
    (summary_path,) = claim_outputs(output_dir, (SUMMARY_FILE,))
    tasks = [
        (index, point, config, output_dir / f"point-{index:03d}")
        for index, point in enumerate(grid.points())
    ]
    for _, _, _, directory in tasks:
        claim_outputs(directory, (SERIES_FILE, REPORT_FILE))
    logger.info(f"Sweeping {len(tasks)} points with {jobs} job(s)...")

    if jobs == 1:
        rows = [_sweep_point(task) for task in tasks]
    else:
        with ProcessPoolExecutor(
            max_workers=jobs,
            initializer=configure_worker_logging,
            initargs=(console_level(),),
        ) as executor:
            rows = list(executor.map(_sweep_point, tasks))

    with open(summary_path, "x", encoding="utf-8", newline="\n") as handle:
        np.savetxt(
            handle,
            np.array(rows, dtype=np.float64).reshape(len(rows), len(SUMMARY_COLUMNS)),
            fmt="%.17g",
            delimiter=",",
            header=",".join(SUMMARY_COLUMNS),
            comments="",
        )
    logger.info(f"Summary written to {summary_path}.")
    return rows

