"""Method-of-lines integration with adaptive steps and blow-up detection.

The state is advanced with the classical four-stage Runge-Kutta scheme. The
step never exceeds the Courant limit of the linear wave part. It is halved when
the full-state maximum norm grows too fast or when the discrete energy rises
above its last sampled value, since the exact energy never increases. A run
ends with a :class:`BlowupEvent` once the norm passes the configured threshold,
the step underflows, or the arithmetic stops being finite.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import numpy.typing as npt

from ._validation import (
    as_real,
    validate_count,
    validate_open_interval,
    validate_positive,
)
from .bounds import psi
from .certificates import energy
from .grid_ops import Field, Grid, check_field, dxx, inner, l2_norm_sq, linf
from .model import InitialData, PhysicalParams, ensure_valid
from .series import DiagnosticSample, TimeSeries
from .sources import SourceModel

logger = logging.getLogger(__name__)

Stacked = npt.NDArray[np.float64]


class NonFiniteStateError(ArithmeticError):
    """A Runge-Kutta stage produced a non-finite value."""


@dataclass(frozen=True, eq=False)
class StateVector:
    """Nodal ``v``, ``p``, ``v_t`` and ``p_t`` on one grid.

    Arrays are copied and made read-only.
    """

    grid: Grid
    v: Field
    p: Field
    vt: Field
    pt: Field

    def __post_init__(self) -> None:
        for name in ("v", "p", "vt", "pt"):
            values = np.array(check_field(getattr(self, name), self.grid, name))
            values.flags.writeable = False
            object.__setattr__(self, name, values)

    def __repr__(self) -> str:
        return f"StateVector(N={self.grid.cells}, linf={self.linf():.6g})"

    @classmethod
    def zeros(cls, grid: Grid) -> "StateVector":
        zero = grid.zeros()
        return cls(grid, zero, zero, zero, zero)

    @classmethod
    def from_initial(cls, initial: InitialData, grid: Grid) -> "StateVector":
        """Resolve initial descriptors on ``grid``."""
        v0, v1, p0, p1 = initial.resolve(grid)
        return cls(grid, v0, p0, v1, p1)

    @classmethod
    def from_stacked(cls, grid: Grid, values: Stacked) -> "StateVector":
        return cls(grid, values[0], values[1], values[2], values[3])

    def stacked(self) -> Stacked:
        """Return a writable ``(4, N + 1)`` copy ordered ``v, p, v_t, p_t``."""
        return np.stack([self.v, self.p, self.vt, self.pt])

    def linf(self) -> float:
        """Return the largest magnitude over all four fields."""
        return max(linf(self.v), linf(self.p), linf(self.vt), linf(self.pt))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.stacked())))

    def reversed(self) -> "StateVector":
        """Return the state with both velocities negated."""
        return StateVector(self.grid, self.v, self.p, -self.vt, -self.pt)


@dataclass(frozen=True)
class SimConfig:
    """Time-stepping controls.

    Attributes:
        dt0: Largest step requested.
        cfl: Courant factor applied to ``dx / c_max``.
        t_end: Horizon.
        blowup_threshold: Full-state maximum norm that declares blow-up.
        dt_min: Smallest step before declaring blow-up by underflow.
        sample_stride: Accepted steps between diagnostic samples.
        max_growth: Relative norm growth that rejects a step.
        relax_growth: Relative norm growth below which the step doubles.
        energy_tolerance: Largest energy rise an accepted step may show, relative
            to ``1 + |E(0)|``.
    """

    dt0: float = 0.01
    cfl: float = 0.9
    t_end: float = 1.0
    blowup_threshold: float = 1e6
    dt_min: float = 1e-12
    sample_stride: int = 1
    max_growth: float = 0.1
    relax_growth: float = 0.025
    energy_tolerance: float = 1e-8

    def __post_init__(self) -> None:
        object.__setattr__(self, "dt0", validate_positive(self.dt0, "dt0"))
        object.__setattr__(
            self, "cfl", validate_open_interval(self.cfl, "cfl", 0.0, 1.0)
        )
        object.__setattr__(self, "t_end", validate_positive(self.t_end, "t_end"))
        object.__setattr__(
            self,
            "blowup_threshold",
            validate_positive(self.blowup_threshold, "blowup_threshold"),
        )
        object.__setattr__(self, "dt_min", validate_positive(self.dt_min, "dt_min"))
        object.__setattr__(
            self,
            "sample_stride",
            validate_count(self.sample_stride, "sample_stride", 1),
        )
        object.__setattr__(
            self, "max_growth", validate_positive(self.max_growth, "max_growth")
        )
        relax = as_real(self.relax_growth, "relax_growth")
        if not 0.0 <= relax < self.max_growth:
            raise ValueError(
                f"relax_growth must lie in [0, max_growth); received {relax}."
            )
        object.__setattr__(self, "relax_growth", relax)
        object.__setattr__(
            self,
            "energy_tolerance",
            validate_positive(self.energy_tolerance, "energy_tolerance"),
        )
        if self.dt_min >= self.dt0:
            raise ValueError(
                "dt_min must be smaller than dt0; "
                f"received {self.dt_min} >= {self.dt0}."
            )

    def step_cap(self, grid: Grid, params: PhysicalParams) -> float:
        """Return ``min(dt0, cfl * dx / c_max)``."""
        speed = params.max_wave_speed()
        if speed == 0.0:
            return self.dt0
        return min(self.dt0, self.cfl * grid.dx / speed)


class BlowupTrigger(str, Enum):
    """Reason a run declared blow-up."""

    THRESHOLD_EXCEEDED = "threshold"
    STEP_UNDERFLOW = "step-underflow"
    NON_FINITE = "non-finite"


@dataclass(frozen=True)
class BlowupEvent:
    """Detected blow-up.

    Attributes:
        t_blow: Time of the last accepted state.
        trigger: Criterion that fired.
        final_linf: Last finite full-state maximum norm.
    """

    t_blow: float
    trigger: BlowupTrigger
    final_linf: float


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """Outcome of :func:`run`."""

    series: TimeSeries
    blowup: BlowupEvent | None
    final_state: StateVector
    accepted_steps: int
    rejected_steps: int
    t_final: float = field(default=0.0)

    @property
    def blew_up(self) -> bool:
        return self.blowup is not None


def _rhs_stacked(
    values: Stacked,
    grid: Grid,
    params: PhysicalParams,
    source: SourceModel,
) -> Stacked:
    v, p, vt, pt = values
    laplacian = dxx(values[:2], grid)
    f1, f2, _ = source(v, p)
    coupling = params.gamma * params.beta
    derivative = np.empty_like(values)
    derivative[0] = vt
    derivative[1] = pt
    derivative[2] = (
        params.alpha * laplacian[0]
        - coupling * laplacian[1]
        - params.lambda1 * vt
        + f1
    )
    derivative[3] = (
        params.beta * laplacian[1]
        - coupling * laplacian[0]
        - params.lambda2 * pt
        + f2
    )
    derivative[:, 0] = 0.0
    return derivative


def rhs(state: StateVector, params: PhysicalParams, source: SourceModel) -> StateVector:
    """Return the time derivative of ``state``.

    Args:
        state: Current nodal fields.
        params: Physical coefficients, assumed valid.
        source: Nonlinear source.

    Returns:
        ``(v_t, p_t, v_tt, p_tt)`` packed as a state, zero at node 0.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        derivative = _rhs_stacked(state.stacked(), state.grid, params, source)
    return StateVector.from_stacked(state.grid, derivative)


def _rk4_stacked(
    values: Stacked,
    dt: float,
    grid: Grid,
    params: PhysicalParams,
    source: SourceModel,
) -> Stacked:
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = _rhs_stacked(values, grid, params, source)
        k2 = _rhs_stacked(values + 0.5 * dt * k1, grid, params, source)
        k3 = _rhs_stacked(values + 0.5 * dt * k2, grid, params, source)
        k4 = _rhs_stacked(values + dt * k3, grid, params, source)
        updated = values + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(updated)):
        raise NonFiniteStateError(f"non-finite state after a step of {dt:.3g}")
    return updated


def step_rk4(
    state: StateVector,
    dt: float,
    params: PhysicalParams,
    source: SourceModel,
) -> StateVector:
    """Advance ``state`` by one classical Runge-Kutta step.

    Raises:
        ValueError: ``dt`` is not positive.
        NonFiniteStateError: The update is not finite.
    """
    dt = validate_positive(dt, "dt")
    updated = _rk4_stacked(state.stacked(), dt, state.grid, params, source)
    return StateVector.from_stacked(state.grid, updated)


def diagnose(
    state: StateVector,
    t: float,
    params: PhysicalParams,
    source: SourceModel,
) -> DiagnosticSample:
    """Return every sampled quantity of ``state`` at time ``t``."""
    grid = state.grid
    acceleration = rhs(state, params, source)
    sample = energy(state, params, source, t=t)
    v_sq = l2_norm_sq(state.v, grid)
    p_sq = l2_norm_sq(state.p, grid)
    vv = inner(state.v, state.vt, grid)
    pp = inner(state.p, state.pt, grid)
    return DiagnosticSample(
        t=t,
        energy=sample.E,
        dissipation=sample.diss,
        psi=psi(state, source),
        mass=0.5 * (v_sq + p_sq),
        rate=params.lambda1 * v_sq + params.lambda2 * p_sq,
        cross=vv + pp,
        damped_cross=params.lambda1 * vv + params.lambda2 * pp,
        kinetic=l2_norm_sq(state.vt, grid) + l2_norm_sq(state.pt, grid),
        accel_cross=inner(state.v, acceleration.vt, grid)
        + inner(state.p, acceleration.pt, grid),
        grad_v=sample.grad_v,
        grad_coupled=sample.grad_coupled,
        linf_v=linf(state.v),
        linf_p=linf(state.p),
        l2_v=math.sqrt(v_sq),
        l2_p=math.sqrt(p_sq),
    )


def _energy_of(
    values: Stacked,
    grid: Grid,
    params: PhysicalParams,
    source: SourceModel,
) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        return energy(StateVector.from_stacked(grid, values), params, source).E


def run(
    initial: InitialData | StateVector,
    params: PhysicalParams,
    source: SourceModel,
    config: SimConfig,
    *,
    grid: Grid | None = None,
) -> SimulationResult:
    """Integrate from ``t = 0`` until ``config.t_end`` or blow-up.

    Args:
        initial: Initial descriptors, resolved on ``grid``, or a ready state.
        params: Physical coefficients.
        source: Nonlinear source.
        config: Time-stepping controls.
        grid: Grid for descriptor resolution. Ignored for a ready state.

    Returns:
        The sampled series, the blow-up event if any, the last accepted state
        and step statistics.

    Raises:
        ValueError: Parameters or initial data are invalid.
    """
    ensure_valid(params, source)
    if isinstance(initial, StateVector):
        state = initial
    else:
        if grid is None:
            raise ValueError("a grid is required to resolve initial descriptors.")
        state = StateVector.from_initial(initial, grid)
    grid = state.grid
    if not state.is_finite():
        raise ValueError("initial state must be finite.")

    cap = config.step_cap(grid, params)
    horizon = config.t_end * (1.0 - 1e-12)
    values = state.stacked()
    norm = state.linf()
    t = 0.0
    dt = cap
    accepted = rejected = since_sample = 0
    blowup: BlowupEvent | None = None
    samples = [diagnose(state, t, params, source)]
    reference = samples[0].energy
    energy_slack = config.energy_tolerance * (1.0 + abs(reference))
    logger.debug(
        f"Integrating N={grid.cells} to t={config.t_end:g} with step cap {cap:.3g}."
    )

    if norm >= config.blowup_threshold:
        blowup = BlowupEvent(t, BlowupTrigger.THRESHOLD_EXCEEDED, norm)

    while blowup is None and t < horizon:
        step = min(dt, config.t_end - t)
        try:
            candidate = _rk4_stacked(values, step, grid, params, source)
        except NonFiniteStateError:
            candidate = None
        if candidate is None:
            candidate_norm = rise = math.inf
        else:
            candidate_norm = linf(candidate)
            rise = _energy_of(candidate, grid, params, source) - reference
        growth = candidate_norm / norm - 1.0 if norm > 0.0 else 0.0
        if (
            candidate is None
            or growth > config.max_growth
            or not rise <= energy_slack
        ):
            rejected += 1
            dt = 0.5 * step
            if dt < config.dt_min:
                trigger = (
                    BlowupTrigger.NON_FINITE
                    if candidate is None
                    else BlowupTrigger.STEP_UNDERFLOW
                )
                blowup = BlowupEvent(t, trigger, norm)
            continue

        values = candidate
        norm = candidate_norm
        t += step
        accepted += 1
        since_sample += 1
        if norm >= config.blowup_threshold:
            blowup = BlowupEvent(t, BlowupTrigger.THRESHOLD_EXCEEDED, norm)
        elif since_sample >= config.sample_stride:
            samples.append(
                diagnose(StateVector.from_stacked(grid, values), t, params, source)
            )
            reference = samples[-1].energy
            since_sample = 0
        if growth < config.relax_growth and rise <= 0.5 * energy_slack:
            dt = min(2.0 * dt, cap)

    final_state = StateVector.from_stacked(grid, values)
    if samples[-1].t != t:
        samples.append(diagnose(final_state, t, params, source))

    if blowup is not None:
        logger.info(
            f"Blow-up detected at t={blowup.t_blow:.6g} "
            f"({blowup.trigger.value}, max norm {blowup.final_linf:.3g})."
        )
    logger.debug(f"Accepted {accepted} steps and rejected {rejected}.")
    return SimulationResult(
        series=TimeSeries.from_samples(samples),
        blowup=blowup,
        final_state=final_state,
        accepted_steps=accepted,
        rejected_steps=rejected,
        t_final=t,
    )


def integrate_fixed(
    state: StateVector,
    params: PhysicalParams,
    source: SourceModel,
    dt: float,
    t_end: float,
) -> StateVector:
    """Advance with a constant step, shortening only the last one.

    Raises:
        NonFiniteStateError: The state stops being finite.
    """
    dt = validate_positive(dt, "dt")
    t_end = validate_positive(t_end, "t_end")
    values = state.stacked()
    t = 0.0
    while t < t_end * (1.0 - 1e-12):
        step = min(dt, t_end - t)
        values = _rk4_stacked(values, step, state.grid, params, source)
        t += step
    return StateVector.from_stacked(state.grid, values)
