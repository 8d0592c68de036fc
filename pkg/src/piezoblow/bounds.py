"""Lower bound on the blow-up time from the source-integral growth law.

Along solutions with non-positive energy the source integral
``psi(t) = int I(v, p) dx`` obeys

    psi' <= c1 psi + A c1**r (psi**b1 + psi**b2 + psi**b3 + psi**b4),

with ``c1 = 2 / m``, so the solution cannot blow up before

    T* = int_{psi(0)}^inf dy / (c1 y + A c1**r sum_i y**b_i).
"""

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import numpy.typing as npt
from scipy.integrate import quad

from ._validation import as_real
from .grid_ops import integral
from .model import PhysicalParams
from .series import TimeSeries
from .sources import SourceModel
from .sources.interface import GrowthExponents

if TYPE_CHECKING:
    from .integrator import StateVector

QUAD_TOLERANCE = 1e-10


@dataclass(frozen=True)
class LowerBoundParams:
    """Constants of the growth law for ``psi``.

    Attributes:
        m: Coercivity constant ``min(alpha1, beta, 1)``.
        exponents: Growth exponents ``(b1, b2, b3, b4)``.
        Cp: Poincare constant.
        d: Source growth constant.
        A: ``d**2 max_i Cp**b_i`` unless given explicitly.
    """

    m: float
    exponents: GrowthExponents
    Cp: float = 1.0
    d: float = 0.0
    A: float | None = None

    def __post_init__(self) -> None:
        m = as_real(self.m, "m")
        if m <= 0.0:
            raise ValueError(f"m must be greater than zero; received {m}.")
        exponents = tuple(as_real(value, "exponent") for value in self.exponents)
        if len(exponents) != 4 or min(exponents) < 1.0:
            raise ValueError(
                f"exponents must be four values of at least 1; received {exponents}."
            )
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "exponents", exponents)
        if self.A is None:
            coefficient = self.d**2 * max(self.Cp**exponent for exponent in exponents)
            object.__setattr__(self, "A", float(coefficient))
        elif as_real(self.A, "A") < 0.0:
            raise ValueError(f"A must be non-negative; received {self.A}.")

    @classmethod
    def from_model(
        cls,
        params: PhysicalParams,
        source: SourceModel,
        length: float,
    ) -> "LowerBoundParams":
        """Derive the constants for a domain of the given length."""
        return cls(
            m=min(params.alpha1, params.beta, 1.0),
            exponents=source.beta_exponents,
            Cp=(2.0 * length / math.pi) ** 2,
            d=source.d,
        )

    @property
    def coefficient(self) -> float:
        """Return ``A`` as a float."""
        return float(self.A or 0.0)

    @property
    def r(self) -> float:
        return max(self.exponents)

    @property
    def linear_rate(self) -> float:
        """Return ``c1 = 2 / m``."""
        return 2.0 / self.m

    @property
    def power_rate(self) -> float:
        """Return ``A c1**r``."""
        return self.coefficient * self.linear_rate**self.r

    def growth_bound(self, y: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Return the right side of the growth law at ``y``."""
        values = np.asarray(y, dtype=np.float64)
        total = sum(np.abs(values) ** exponent for exponent in self.exponents)
        return np.asarray(
            self.linear_rate * values + self.power_rate * total,
            dtype=np.float64,
        )


@dataclass(frozen=True)
class LowerBoundReport:
    """Blow-up time lower bound.

    Attributes:
        psi0: ``psi(0)``.
        T_star: Lower bound, ``inf`` when the integral diverges.
        quadrature_error: Estimated absolute error of ``T_star``.
        split: Point separating the finite part from the tail.
        tail: Quadrature of the tail beyond ``split``.
        tail_bracket: Analytic lower and upper bounds on the tail.
        undefined: ``psi(0)`` is not positive while the growth law can blow up,
            so no bound follows and ``T_star`` is ``nan``.
    """

    psi0: float
    T_star: float
    quadrature_error: float = 0.0
    split: float = math.inf
    tail: float = 0.0
    tail_bracket: tuple[float, float] = (0.0, 0.0)
    undefined: bool = False

    @property
    def infinite(self) -> bool:
        return math.isinf(self.T_star)


def psi(state: "StateVector", source: SourceModel) -> float:
    """Return the trapezoid quadrature of ``I(v, p)``."""
    return integral(source.potential(state.v, state.p), state.grid)


def lower_bound_tstar(psi0: float, lb: LowerBoundParams) -> LowerBoundReport:
    """Evaluate the blow-up time lower bound.

    The integral is split at ``Y = max(10 psi0, 10)``. The finite part uses
    adaptive quadrature; the tail is mapped to a finite interval by
    ``u = y**(1 - r) / (r - 1)``.

    Args:
        psi0: Initial source integral.
        lb: Growth-law constants.

    Returns:
        The bound, infinite when ``r <= 1`` or ``A == 0``.

    Raises:
        ValueError: ``psi0`` is not positive for a finite bound.

    Examples:
        >>> lb = LowerBoundParams(m=2.0, exponents=(2, 2, 2, 2), A=0.25)
        >>> round(lower_bound_tstar(1.0, lb).T_star, 8)
        0.69314718
    """
    psi0 = as_real(psi0, "psi0")
    if lb.r <= 1.0 or lb.coefficient == 0.0:
        return LowerBoundReport(psi0=psi0, T_star=math.inf)
    if psi0 <= 0.0:
        raise ValueError(f"psi0 must be greater than zero; received {psi0}.")

    c1 = lb.linear_rate
    scaled = lb.power_rate
    r = lb.r
    exponents = lb.exponents
    split = max(10.0 * psi0, 10.0)

    def integrand(y: float) -> float:
        return 1.0 / (c1 * y + scaled * sum(y**exponent for exponent in exponents))

    finite, finite_error = quad(
        integrand,
        psi0,
        split,
        epsabs=QUAD_TOLERANCE,
        epsrel=QUAD_TOLERANCE,
        limit=200,
    )

    def mapped(u: float) -> float:
        # y**s = ((r - 1) u)**(-s / (r - 1)) for s <= 0
        base = (r - 1.0) * u
        terms = sum(base ** ((r - exponent) / (r - 1.0)) for exponent in exponents)
        return 1.0 / (c1 * base + scaled * terms)

    upper = split ** (1.0 - r) / (r - 1.0)
    tail, tail_error = quad(
        mapped,
        0.0,
        upper,
        epsabs=QUAD_TOLERANCE,
        epsrel=QUAD_TOLERANCE,
        limit=200,
    )
    bracket = (upper / (c1 + len(exponents) * scaled), upper / scaled)
    return LowerBoundReport(
        psi0=psi0,
        T_star=float(finite + tail),
        quadrature_error=float(finite_error + tail_error),
        split=split,
        tail=float(tail),
        tail_bracket=bracket,
    )


def check_psi_ode(series: TimeSeries, lb: LowerBoundParams) -> float:
    """Return the largest excess of ``psi'`` over the growth law.

    ``psi'`` is estimated by central differences. A non-positive result
    means the law holds at every sample.
    """
    if len(series) < 2:
        return 0.0
    derivative = np.gradient(series.psi, series.t)
    return float(np.max(derivative - lb.growth_bound(series.psi)))


def coercivity_violation(series: TimeSeries, m: float) -> float:
    """Return the largest relative excess in the coercivity bound.

    At samples with ``E <= 0`` the bound reads
    ``m (||v_x||^2 + ||gamma v_x - p_x||^2 + ||v_t||^2 + ||p_t||^2) <= 2 psi``.
    Zero means no sample violates it.
    """
    admissible = series.energy <= 0.0
    if not np.any(admissible):
        return 0.0
    lhs = m * (series.grad_v + series.grad_coupled + series.kinetic)[admissible]
    rhs = 2.0 * series.psi[admissible]
    excess = (lhs - rhs) / np.maximum(rhs, np.finfo(np.float64).tiny)
    return float(max(0.0, np.max(excess)))
