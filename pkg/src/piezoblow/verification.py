"""Reference solutions and convergence studies.

The sine modes ``sin(k_j x)`` with ``k_j = pi (2j - 1) / (2L)`` satisfy both
boundary conditions, so the linear system decouples into one 4x4 ODE per
mode. Those ODEs are propagated exactly by the matrix exponential and serve
as oracles for the integrator.
"""

import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy.linalg import expm

from ._validation import validate_count, validate_positive
from .grid_ops import Grid, l2_norm_sq, mode_wavenumber
from .integrator import (
    SimConfig,
    StateVector,
    integrate_fixed,
    run,
)
from .model import InitialData, PhysicalParams
from .sources import NullSource, SourceModel

logger = logging.getLogger(__name__)

ModalVector = npt.NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class ModalSystem:
    """Linear dynamics of the amplitudes ``(v, p, v_t, p_t)`` of one sine mode.

    Attributes:
        mode: Mode index ``j >= 1``.
        k: Wavenumber ``pi (2j - 1) / (2L)``.
        matrix: Generator of the 4x4 first-order system.
    """

    mode: int
    k: float
    matrix: ModalVector

    @classmethod
    def for_mode(
        cls, params: PhysicalParams, mode: int, length: float
    ) -> "ModalSystem":
        k = mode_wavenumber(mode, length)
        stiffness = -(k**2) * params.stiffness_matrix()
        damping = np.diag([-params.lambda1, -params.lambda2])
        matrix = np.block([[np.zeros((2, 2)), np.eye(2)], [stiffness, damping]])
        matrix.flags.writeable = False
        return cls(mode=mode, k=k, matrix=matrix)

    def eigenvalues(self) -> npt.NDArray[np.complex128]:
        return np.linalg.eigvals(self.matrix)

    def propagate(self, amplitudes: npt.ArrayLike, t: float) -> ModalVector:
        """Return the amplitudes at time ``t``."""
        start = np.asarray(amplitudes, dtype=np.float64)
        return np.asarray(expm(self.matrix * t) @ start, dtype=np.float64)

    def energy(
        self,
        amplitudes: npt.ArrayLike,
        params: PhysicalParams,
        length: float,
    ) -> float:
        """Return the energy of the mode on ``(0, length)``."""
        v, p, vt, pt = np.asarray(amplitudes, dtype=np.float64)
        k = self.k
        quadratic = (
            params.alpha1 * (k * v) ** 2
            + params.beta * (params.gamma * k * v - k * p) ** 2
            + vt**2
            + pt**2
        )
        return float(0.25 * length * quadratic)


def _require_free_waves(params: PhysicalParams) -> None:
    if params.gamma != 0.0 or params.lambda1 != 0.0 or params.lambda2 != 0.0:
        raise ValueError(
            "the standing-wave solution needs gamma = lambda1 = lambda2 = 0; "
            f"received gamma={params.gamma}, lambda1={params.lambda1}, "
            f"lambda2={params.lambda2}."
        )


def _standing_wave(
    grid: Grid,
    mode: int,
    amplitude: float,
    frequency: float,
    t: float,
) -> StateVector:
    shape = np.sin(mode_wavenumber(mode, grid.length) * grid.nodes)
    shape[0] = 0.0
    v = amplitude * math.cos(frequency * t) * shape
    vt = -amplitude * frequency * math.sin(frequency * t) * shape
    zero = grid.zeros()
    return StateVector(grid, v, zero, vt, zero)


def analytic_mode(
    params: PhysicalParams,
    grid: Grid,
    t: float,
    mode: int = 1,
    amplitude: float = 1.0,
) -> StateVector:
    """Return ``v = amplitude cos(sqrt(alpha) k t) sin(k x)`` and ``p = 0``.

    Raises:
        ValueError: Coupling or damping is switched on.

    Examples:
        >>> from piezoblow.grid_ops import Grid
        >>> params = PhysicalParams(lambda1=0.0, lambda2=0.0)
        >>> state = analytic_mode(params, Grid(1.0, 16), 0.0)
        >>> float(state.v[-1])
        1.0
    """
    _require_free_waves(params)
    frequency = math.sqrt(params.alpha) * mode_wavenumber(mode, grid.length)
    return _standing_wave(grid, mode, amplitude, frequency, t)


def semidiscrete_mode(
    params: PhysicalParams,
    grid: Grid,
    t: float,
    mode: int = 1,
    amplitude: float = 1.0,
) -> StateVector:
    """Return the exact solution of the spatially discrete free wave system.

    Sampled sine modes are eigenvectors of the discrete second difference with
    eigenvalue ``-(2 / dx)**2 sin(k dx / 2)**2``, so only the frequency
    differs from :func:`analytic_mode`.
    """
    _require_free_waves(params)
    k = mode_wavenumber(mode, grid.length)
    half_angle = abs(math.sin(0.5 * k * grid.dx))
    frequency = math.sqrt(params.alpha) * (2.0 / grid.dx) * half_angle
    return _standing_wave(grid, mode, amplitude, frequency, t)


def modal_reference(
    amplitudes: Mapping[int, Sequence[float]],
    params: PhysicalParams,
    grid: Grid,
    t: float,
    source: SourceModel | None = None,
) -> StateVector:
    """Return the exact linear evolution of a finite sum of sine modes.

    Args:
        amplitudes: Mode index to initial ``(v, p, v_t, p_t)`` amplitudes.
        params: Physical coefficients.
        grid: Grid the state is sampled on.
        t: Time.
        source: Must be absent or a :class:`NullSource`.

    Raises:
        ValueError: A nonlinear source is supplied.
    """
    if source is not None and not isinstance(source, NullSource):
        raise ValueError("the modal reference only covers the source-free system.")
    fields = np.zeros((4, grid.size))
    for mode, initial in amplitudes.items():
        system = ModalSystem.for_mode(params, mode, grid.length)
        evolved = system.propagate(initial, t)
        shape = np.sin(system.k * grid.nodes)
        fields += np.outer(evolved, shape)
    fields[:, 0] = 0.0
    return StateVector.from_stacked(grid, fields)


@dataclass(frozen=True)
class ConvergenceLevel:
    """One refinement level of a study.

    Attributes:
        resolution: Number of cells or steps; doubles between levels.
        value: Observable measured at this level.
        config: Everything else the run depended on.
    """

    resolution: int
    value: float
    config: object = None


@dataclass(frozen=True)
class RichardsonEstimate:
    """Observed order and extrapolated observable.

    Attributes:
        order: Observed order, ``None`` when it cannot be estimated.
        extrapolated: Extrapolated observable.
        degenerate: Whether successive levels did not change.
    """

    order: float | None
    extrapolated: float
    degenerate: bool = False


def richardson(
    levels: Sequence[ConvergenceLevel],
    exact: float | None = None,
    nominal_order: float = 2.0,
) -> RichardsonEstimate:
    """Estimate the convergence order and extrapolate the finest level.

    The order comes from the errors against ``exact`` when given, otherwise
    from three successive levels. Extrapolation uses the observed order, or
    ``nominal_order`` when none is available.

    Raises:
        ValueError: Fewer than two levels, configurations differ, or the
            resolution does not double between levels.

    Examples:
        >>> levels = [ConvergenceLevel(8, 1.04), ConvergenceLevel(16, 1.01)]
        >>> estimate = richardson(levels, exact=1.0)
        >>> round(estimate.order, 12)
        2.0
    """
    if len(levels) < 2:
        raise ValueError(f"richardson needs at least 2 levels; received {len(levels)}.")
    ordered = sorted(levels, key=lambda level: level.resolution)
    for coarse, fine in zip(ordered, ordered[1:]):
        if fine.config != coarse.config:
            raise ValueError(
                "levels must share the same configuration apart from resolution."
            )
        if fine.resolution != 2 * coarse.resolution:
            raise ValueError(
                "resolution must double between levels; "
                f"received {coarse.resolution} and {fine.resolution}."
            )

    values = [level.value for level in ordered]
    order: float | None = None
    if exact is not None:
        coarse_error = abs(values[-2] - exact)
        fine_error = abs(values[-1] - exact)
        if coarse_error > 0.0 and fine_error > 0.0:
            order = math.log2(coarse_error / fine_error)
    elif len(values) >= 3:
        coarse_gap = abs(values[-2] - values[-3])
        fine_gap = abs(values[-1] - values[-2])
        if coarse_gap > 0.0 and fine_gap > 0.0:
            order = math.log2(coarse_gap / fine_gap)

    if values[-1] == values[-2]:
        return RichardsonEstimate(order=None, extrapolated=values[-1], degenerate=True)
    used = order if order is not None and order > 0.0 else nominal_order
    extrapolated = values[-1] + (values[-1] - values[-2]) / (2.0**used - 1.0)
    return RichardsonEstimate(order=order, extrapolated=extrapolated)


@dataclass(frozen=True)
class StudyResult:
    """Per-level table of one convergence study."""

    name: str
    observable: str
    levels: tuple[ConvergenceLevel, ...]
    estimate: RichardsonEstimate


def _free_wave_error(
    params: PhysicalParams,
    grid: Grid,
    t: float,
    mode: int,
    amplitude: float,
    cfl: float,
) -> float:
    config = SimConfig(dt0=1.0, cfl=cfl, t_end=t, sample_stride=2**30)
    start = analytic_mode(params, grid, 0.0, mode, amplitude)
    result = run(start, params, NullSource(), config)
    exact = analytic_mode(params, grid, t, mode, amplitude)
    return math.sqrt(l2_norm_sq(result.final_state.v - exact.v, grid))


def spatial_study(
    params: PhysicalParams,
    *,
    length: float = 1.0,
    cells: Sequence[int] = (64, 128, 256),
    t: float = 1.0,
    mode: int = 1,
    amplitude: float = 1.0,
    cfl: float = 0.5,
) -> StudyResult:
    """Measure the L2 error of ``v`` against the standing wave under refinement."""
    levels = []
    for count in cells:
        grid = Grid(length, count)
        error = _free_wave_error(params, grid, t, mode, amplitude, cfl)
        logger.debug(f"Spatial level N={count}: L2 error {error:.3e}.")
        levels.append(ConvergenceLevel(count, error, ("spatial", t, mode)))
    return StudyResult(
        name="spatial",
        observable="l2_error_v",
        levels=tuple(levels),
        estimate=richardson(levels, exact=0.0, nominal_order=2.0),
    )


def temporal_study(
    params: PhysicalParams,
    *,
    length: float = 1.0,
    cells: int = 512,
    mode: int = 8,
    amplitude: float = 1.0,
    t_end: float = 1.0,
    dt: float = 0.0016,
    levels: int = 3,
) -> StudyResult:
    """Measure the time-stepping error on a fixed grid.

    The reference is :func:`semidiscrete_mode`, so spatial error does not
    enter and the fourth-order decay stays visible.
    """
    grid = Grid(length, cells)
    dt = validate_positive(dt, "dt")
    start = semidiscrete_mode(params, grid, 0.0, mode, amplitude)
    exact = semidiscrete_mode(params, grid, t_end, mode, amplitude)
    table = []
    for level in range(validate_count(levels, "levels", 2)):
        step = dt / 2**level
        final = integrate_fixed(start, params, NullSource(), step, t_end)
        error = math.sqrt(l2_norm_sq(final.v - exact.v, grid))
        logger.debug(f"Temporal level dt={step:.3g}: L2 error {error:.3e}.")
        steps = math.ceil(t_end / dt - 1e-9) * 2**level
        table.append(ConvergenceLevel(steps, error, ("temporal", cells, mode)))
    return StudyResult(
        name="temporal",
        observable="l2_error_v",
        levels=tuple(table),
        estimate=richardson(table, exact=0.0, nominal_order=4.0),
    )


def blowup_study(
    initial: InitialData,
    params: PhysicalParams,
    source: SourceModel,
    config: SimConfig,
    *,
    length: float = 1.0,
    cells: Sequence[int] = (128, 256),
) -> StudyResult:
    """Measure the detected blow-up time under grid refinement.

    Raises:
        ValueError: A level finishes without blowing up.
    """
    levels = []
    for count in cells:
        result = run(initial, params, source, config, grid=Grid(length, count))
        if result.blowup is None:
            raise ValueError(f"no blow-up detected by t={config.t_end:g} at N={count}.")
        logger.debug(f"Blow-up level N={count}: t_blow {result.blowup.t_blow:.6g}.")
        levels.append(ConvergenceLevel(count, result.blowup.t_blow, ("blowup", config)))
    return StudyResult(
        name="blowup",
        observable="t_blow",
        levels=tuple(levels),
        estimate=richardson(levels, nominal_order=2.0),
    )
