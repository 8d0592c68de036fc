"""Physical parameters, initial data descriptors and their validation."""

import math
from collections.abc import Iterator
from dataclasses import dataclass
from typing import TypeAlias

import numpy as np
import numpy.typing as npt

from .grid_ops import Field, Grid, dx_forward_field, integral, linf, sine_mode
from .sources import SourceModel
from .sources.interface import SourceTerms

FieldSpec: TypeAlias = str | npt.NDArray[np.float64]

FIELD_NAMES = ("v0", "v1", "p0", "p1")
_DISPLACEMENTS = ("v0", "p0")
SLOPE_TOLERANCE = 0.1


@dataclass(frozen=True)
class PhysicalParams:
    """Coefficients of the normalized piezoelectric beam system.

    Instances may hold invalid values; :func:`validate_params` reports them.

    Attributes:
        alpha: Elastic stiffness.
        beta: Magnetic impermeability.
        gamma: Piezoelectric coupling.
        lambda1: Damping rate on ``v_t``.
        lambda2: Damping rate on ``p_t``.
    """

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 0.0
    lambda1: float = 0.1
    lambda2: float = 0.1

    @property
    def alpha1(self) -> float:
        """Return ``alpha - gamma**2 * beta``."""
        return self.alpha - self.gamma**2 * self.beta

    def stiffness_matrix(self) -> npt.NDArray[np.float64]:
        """Return the symmetric matrix of the coupled wave operator."""
        coupling = -self.gamma * self.beta
        return np.array(
            [[self.alpha, coupling], [coupling, self.beta]],
            dtype=np.float64,
        )

    def max_wave_speed(self) -> float:
        """Return the largest characteristic speed of the linear part."""
        largest = float(np.linalg.eigvalsh(self.stiffness_matrix())[-1])
        return math.sqrt(max(largest, 0.0))


@dataclass(frozen=True)
class ValidationVerdict:
    """Outcome of :func:`validate_params` listing every violated constraint."""

    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __iter__(self) -> Iterator[str]:
        return iter(self.violations)


def _finite(value: object) -> bool:
    if isinstance(value, bool):
        return False
    try:
        return math.isfinite(float(value))  # type: ignore[arg-type]
    except (TypeError, ValueError):
        return False


def validate_params(params: PhysicalParams, source: SourceModel) -> ValidationVerdict:
    """Check the model invariants without raising.

    Args:
        params: Physical coefficients.
        source: Nonlinear source with its growth data.

    Returns:
        A verdict whose ``violations`` name each failed constraint.

    Examples:
        >>> from piezoblow.sources import PowerDifferenceSource
        >>> validate_params(PhysicalParams(gamma=1.1), PowerDifferenceSource()).ok
        False
    """
    violations: list[str] = []
    numbers = {
        "alpha": params.alpha,
        "beta": params.beta,
        "gamma": params.gamma,
        "lambda1": params.lambda1,
        "lambda2": params.lambda2,
        "a": source.a,
        "eta": source.eta,
    }
    for name, value in numbers.items():
        if not _finite(value):
            violations.append(
                f"{name} must be a finite real number; received {value!r}."
            )
    if violations:
        return ValidationVerdict(tuple(violations))

    if params.alpha <= 0.0:
        violations.append(f"alpha must be greater than zero; received {params.alpha}.")
    if params.beta <= 0.0:
        violations.append(f"beta must be greater than zero; received {params.beta}.")
    if params.lambda1 < 0.0:
        violations.append(f"lambda1 must be non-negative; received {params.lambda1}.")
    if params.lambda2 < 0.0:
        violations.append(f"lambda2 must be non-negative; received {params.lambda2}.")
    if params.alpha1 <= 0.0:
        violations.append(
            "alpha1 = alpha - gamma**2 * beta must be greater than zero; "
            f"received {params.alpha1:.6g}."
        )
    if source.a < 0.0:
        violations.append(f"a must be non-negative; received {source.a}.")
    if source.eta <= 2.0:
        violations.append(f"eta must be greater than 2; received {source.eta}.")
    for index, exponent in enumerate(source.beta_exponents, start=1):
        if exponent < 1.0:
            violations.append(
                f"beta{index} growth exponent must be at least 1; received {exponent}."
            )
    return ValidationVerdict(tuple(violations))


def ensure_valid(params: PhysicalParams, source: SourceModel) -> None:
    """Raise ``ValueError`` joining every violation found by :func:`validate_params`."""
    verdict = validate_params(params, source)
    if not verdict:
        raise ValueError(" ".join(verdict.violations))


def eval_sources(
    source: SourceModel,
    v: npt.ArrayLike,
    p: npt.ArrayLike,
) -> SourceTerms:
    """Return ``(f1, f2, I)`` for scalar or array arguments."""
    return source(v, p)


def check_g2(
    source: SourceModel,
    v: npt.ArrayLike,
    p: npt.ArrayLike,
    grid: Grid,
) -> float:
    """Return the quadrature of ``v f1 + p f2 - eta I`` over the domain.

    The source growth hypothesis asks for a non-negative value. The
    power-difference family satisfies it with equality.
    """
    v_field = np.asarray(v, dtype=np.float64)
    p_field = np.asarray(p, dtype=np.float64)
    f1, f2, potential = source(v_field, p_field)
    with np.errstate(over="ignore", invalid="ignore"):
        integrand = v_field * f1 + p_field * f2 - source.eta * potential
    return integral(integrand, grid)


def check_g2_scale(
    source: SourceModel,
    v: npt.ArrayLike,
    p: npt.ArrayLike,
    grid: Grid,
) -> float:
    """Return the magnitude :func:`check_g2` residuals are measured against."""
    v_field = np.asarray(v, dtype=np.float64)
    p_field = np.asarray(p, dtype=np.float64)
    f1, f2, potential = source(v_field, p_field)
    with np.errstate(over="ignore", invalid="ignore"):
        magnitude = np.abs(v_field * f1) + np.abs(p_field * f2) + source.eta * potential
    return integral(magnitude, grid)


def parse_field_spec(spec: FieldSpec, grid: Grid, name: str = "field") -> Field:
    """Return nodal values for a preset name or an explicit array.

    Presets are ``zero``, ``sine``, ``sine:<amplitude>`` and
    ``sine:<amplitude>:<mode>``; mode ``j`` is ``sin(pi (2j - 1) x / (2L))``.

    Raises:
        ValueError: The preset is unknown or the array does not fit the grid.
    """
    if not isinstance(spec, str):
        values = np.array(spec, dtype=np.float64).ravel()
        if values.shape != (grid.size,):
            raise ValueError(
                f"{name} must hold {grid.size} nodal values for N={grid.cells}; "
                f"received {values.size}."
            )
        if not np.all(np.isfinite(values)):
            raise ValueError(f"{name} must contain only finite values.")
        return values

    parts = spec.strip().lower().split(":")
    if parts == ["zero"]:
        return grid.zeros()
    if parts[0] != "sine" or len(parts) > 3:
        raise ValueError(
            f"{name} must be 'zero', 'sine', 'sine:<amplitude>' or "
            f"'sine:<amplitude>:<mode>'; received {spec!r}."
        )
    try:
        amplitude = float(parts[1]) if len(parts) > 1 else 1.0
        mode = int(parts[2]) if len(parts) > 2 else 1
    except ValueError as error:
        raise ValueError(f"{name} has a malformed sine preset: {spec!r}.") from error
    if not math.isfinite(amplitude):
        raise ValueError(f"{name} amplitude must be finite; received {amplitude}.")
    if mode < 1:
        raise ValueError(f"{name} mode must be at least 1; received {mode}.")
    return sine_mode(grid, mode, amplitude)


def is_preset(spec: str) -> bool:
    """Return whether ``spec`` names a built-in field preset."""
    head = spec.strip().lower().split(":", 1)[0]
    return head in ("zero", "sine")


@dataclass(frozen=True, eq=False)
class InitialData:
    """Descriptors of ``v(0)``, ``v_t(0)``, ``p(0)`` and ``p_t(0)``.

    Each descriptor is a preset string (see :func:`parse_field_spec`) or an
    array of nodal values. Arrays are validated against the boundary
    conditions, never projected onto them.
    """

    v0: FieldSpec = "sine"
    v1: FieldSpec = "zero"
    p0: FieldSpec = "zero"
    p1: FieldSpec = "zero"

    def describe(self) -> dict[str, str]:
        """Return a printable descriptor per field."""
        described: dict[str, str] = {}
        for name, value in zip(FIELD_NAMES, self.specs(), strict=True):
            if isinstance(value, str):
                described[name] = value
            else:
                described[name] = f"<array of {np.size(value)} values>"
        return described

    def specs(self) -> tuple[FieldSpec, FieldSpec, FieldSpec, FieldSpec]:
        return (self.v0, self.v1, self.p0, self.p1)

    def resolve(self, grid: Grid) -> tuple[Field, Field, Field, Field]:
        """Return ``(v0, v1, p0, p1)`` on ``grid`` after compatibility checks.

        Raises:
            ValueError: A field is malformed, is non-zero at ``x = 0``, or a
                displacement has a non-vanishing derivative at ``x = L``.
        """
        fields: dict[str, Field] = {}
        for name, spec in zip(FIELD_NAMES, self.specs(), strict=True):
            fields[name] = parse_field_spec(spec, grid, name)
            if not isinstance(spec, str):
                check_compatibility(
                    fields[name], grid, name, neumann=name in _DISPLACEMENTS
                )
        return fields["v0"], fields["v1"], fields["p0"], fields["p1"]


def check_compatibility(values: Field, grid: Grid, name: str, *, neumann: bool) -> None:
    """Reject fields violating ``u(0) = 0`` or, when asked, ``u_x(L) = 0``.

    The end slope may reach ``SLOPE_TOLERANCE`` times the largest nodal slope.
    Presets are exact and never pass through here.
    """
    scale = max(1.0, linf(values))
    if abs(values[0]) > 1e-12 * scale:
        raise ValueError(f"{name} must vanish at x = 0; received {values[0]:.6g}.")
    if not neumann:
        return
    derivative = dx_forward_field(values, grid)
    tolerance = max(1e-10, SLOPE_TOLERANCE * linf(derivative))
    if abs(derivative[-1]) > tolerance:
        raise ValueError(
            f"{name} must have zero slope at x = L; "
            f"discrete derivative is {derivative[-1]:.6g}."
        )
