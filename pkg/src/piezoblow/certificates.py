"""Energy, the concavity certificate and its numerical checks.

The certificate is built from

    F(t) = (||v||^2 + ||p||^2) / 2 + L(t) / 2 + b (t + t0)^2 / 2,
    L(t) = int_0^t (lambda1 ||v||^2 + lambda2 ||p||^2) ds
           + (T - t) (lambda1 ||v0||^2 + lambda2 ||p0||^2),

and ``G = F**(-sigma)``. When ``G`` is concave with ``G'(0) < 0`` it reaches
zero no later than ``t_m = F(0) / (sigma F'(0))``, bounding the blow-up time
from above.
"""

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import numpy.typing as npt
from scipy.integrate import cumulative_trapezoid

from ._validation import as_real, validate_count, validate_positive
from .grid_ops import grad_norm_sq, integral, l2_norm_sq
from .model import PhysicalParams
from .series import TimeSeries
from .sources import SourceModel

if TYPE_CHECKING:
    from .integrator import StateVector

Column = npt.NDArray[np.float64]

HORIZON_MARGIN = 1e-6
CHECK_TOLERANCE = 1e-6


class CertificateError(ValueError):
    """A certificate precondition does not hold."""


@dataclass(frozen=True)
class EnergySample:
    """Energy of one state.

    Attributes:
        t: Time.
        E: Energy.
        diss: ``-lambda1 ||v_t||^2 - lambda2 ||p_t||^2``.
        source_integral: ``int I(v, p) dx``.
        grad_v: ``||v_x||^2``.
        grad_coupled: ``||gamma v_x - p_x||^2``.
    """

    t: float
    E: float
    diss: float
    source_integral: float
    grad_v: float = 0.0
    grad_coupled: float = 0.0


def energy(
    state: "StateVector",
    params: PhysicalParams,
    source: SourceModel,
    t: float = 0.0,
) -> EnergySample:
    """Return the discrete energy of ``state``.

    Gradient norms use the forward-difference form paired with the second
    difference operator, so the semi-discrete energy decays exactly at the
    damping rate.

    Examples:
        >>> from piezoblow.grid_ops import Grid, sine_mode
        >>> from piezoblow.integrator import StateVector
        >>> from piezoblow.sources import NullSource
        >>> grid = Grid(1.0, 400)
        >>> zero = grid.zeros()
        >>> state = StateVector(grid, sine_mode(grid), zero, zero, zero)
        >>> params = PhysicalParams(lambda1=0.0, lambda2=0.0)
        >>> round(energy(state, params, NullSource()).E, 3)
        0.617
    """
    grid = state.grid
    grad_v = grad_norm_sq(state.v, grid)
    grad_coupled = grad_norm_sq(params.gamma * state.v - state.p, grid)
    vt_sq = l2_norm_sq(state.vt, grid)
    pt_sq = l2_norm_sq(state.pt, grid)
    source_integral = integral(source.potential(state.v, state.p), grid)
    quadratic = params.alpha1 * grad_v + params.beta * grad_coupled + vt_sq + pt_sq
    return EnergySample(
        t=t,
        E=0.5 * quadratic - source_integral,
        diss=-params.lambda1 * vt_sq - params.lambda2 * pt_sq,
        source_integral=source_integral,
        grad_v=grad_v,
        grad_coupled=grad_coupled,
    )


def dissipation_residuals(series: TimeSeries) -> Column:
    """Return ``dE/dt - diss`` per sample, with one-sided ends."""
    if len(series) < 2:
        return np.zeros(len(series))
    rate = np.gradient(series.energy, series.t)
    return np.asarray(rate - series.dissipation, dtype=np.float64)


def dissipation_residual(series: TimeSeries) -> float:
    """Return the largest mismatch between ``dE/dt`` and the dissipation.

    Central differences are taken at interior samples only.

    Raises:
        ValueError: Fewer than three samples.
    """
    if len(series) < 3:
        raise ValueError(
            f"dissipation residual needs at least 3 samples; received {len(series)}."
        )
    return float(np.max(np.abs(dissipation_residuals(series)[1:-1])))


@dataclass(frozen=True)
class CertificateParams:
    """Concavity certificate constants.

    Attributes:
        epsilon: Young's inequality weight in ``(0, eta / 2)``.
        sigma: Exponent of ``G = F**(-sigma)``.
        lambda_cert: Constant in front of ``-E`` in the cross-term bound.
        k: ``eta - 4 lambda_cert (sigma + 1) (1 + 1 / epsilon)``.
        b: Quadratic weight in ``F``.
        t0: Time shift in ``F``.
        T_horizon: Existence horizon inside ``L``.
    """

    epsilon: float
    sigma: float
    lambda_cert: float
    k: float
    b: float
    t0: float
    T_horizon: float


@dataclass(frozen=True)
class Infeasible:
    """No admissible certificate; ``constraint`` names the binding condition."""

    constraint: str
    detail: str


@dataclass(frozen=True)
class CertificateReport:
    """Upper bound derived from a certificate.

    Attributes:
        params: Certificate constants.
        F0: ``F(0)``.
        Fprime0: ``F'(0)``.
        t_m: ``F(0) / (sigma F'(0))``, or ``inf`` when infeasible.
        feasible: Whether ``F'(0) > 0``.
        horizon_consistent: Whether ``T_horizon >= t_m``.
        reason: Why the report is not feasible.
    """

    params: CertificateParams
    F0: float
    Fprime0: float
    t_m: float
    feasible: bool
    horizon_consistent: bool
    reason: str | None = None


def sigma_limit(eta: float, epsilon: float) -> float:
    """Return the exclusive upper bound ``(eta - 2 epsilon) / (2 (1 + epsilon))``."""
    return (eta - 2.0 * epsilon) / (2.0 * (1.0 + epsilon))


def admissible_k(
    eta: float,
    epsilon: float,
    sigma: float,
    lambda_cert: float = 1.0,
) -> float:
    """Return ``eta - 4 lambda_cert (sigma + 1) (1 + 1 / epsilon)``."""
    return eta - 4.0 * lambda_cert * (sigma + 1.0) * (1.0 + 1.0 / epsilon)


def max_b(k: float, E0: float, epsilon: float, sigma: float) -> float:
    """Return the largest ``b`` keeping ``-k E0 - 2 b (sigma + 1) (1 + 1/epsilon)``
    non-negative."""
    return -k * E0 / (2.0 * (sigma + 1.0) * (1.0 + 1.0 / epsilon))


def certificate_for(
    eta: float,
    epsilon: float,
    sigma: float,
    E0: float,
    *,
    cross0: float = 0.0,
    L0_rate: float = 0.0,
    mass0: float = 0.0,
    lambda_cert: float = 1.0,
) -> CertificateParams | Infeasible:
    """Return the certificate for one ``(epsilon, sigma)`` pair.

    ``b`` is half of :func:`max_b` and ``t0`` the smallest value at least 1
    making ``F'(0)`` no smaller than ``b t0 / 2``.

    Examples:
        >>> cert = certificate_for(8.0, 2.0, 1 / 6, -1.0)
        >>> round(cert.k, 12), round(cert.b * 7, 12)
        (1.0, 1.0)
    """
    if E0 >= 0.0:
        raise CertificateError(f"initial energy must be negative; received {E0:.6g}.")
    if not 0.0 < epsilon < eta / 2.0:
        return Infeasible(
            "epsilon", f"epsilon={epsilon:g} is outside (0, {eta / 2:g})."
        )
    if not 0.0 < sigma < sigma_limit(eta, epsilon):
        return Infeasible(
            "sigma",
            f"sigma={sigma:g} is outside (0, {sigma_limit(eta, epsilon):g}).",
        )
    k = admissible_k(eta, epsilon, sigma, lambda_cert)
    if k <= 0.0:
        return Infeasible(
            "k_positive",
            f"k={k:.6g} for epsilon={epsilon:g}, sigma={sigma:g}.",
        )
    b = 0.5 * max_b(k, E0, epsilon, sigma)
    t0 = max(1.0, -2.0 * cross0 / b) if cross0 < 0.0 else 1.0
    denominator = sigma * (cross0 + b * t0) - 0.5 * L0_rate
    if denominator <= 0.0:
        return Infeasible(
            "horizon",
            f"sigma F'(0) = {sigma * (cross0 + b * t0):.6g} does not exceed "
            f"half the initial damping rate {0.5 * L0_rate:.6g}.",
        )
    horizon = (mass0 + 0.5 * b * t0**2) / denominator * (1.0 + HORIZON_MARGIN)
    return CertificateParams(epsilon, sigma, lambda_cert, k, b, t0, horizon)


def select_parameters(
    eta: float,
    lambda1: float,
    lambda2: float,
    E0: float,
    cross0: float,
    L0_rate: float,
    mass0: float,
    *,
    lambda_cert: float = 1.0,
    search_points: int = 64,
) -> CertificateParams | Infeasible:
    """Search ``(epsilon, sigma)`` for the admissible certificate maximizing ``k``.

    Each axis takes ``search_points`` interior values of its open interval.
    Pairs whose horizon fixed point does not resolve are discarded before
    maximizing; ties keep the first pair found.

    Args:
        eta: Source growth exponent.
        lambda1: Damping rate on ``v_t``.
        lambda2: Damping rate on ``p_t``.
        E0: Initial energy, which must be negative.
        cross0: ``int (v0 v1 + p0 p1) dx``.
        L0_rate: ``int (lambda1 v0^2 + lambda2 p0^2) dx``.
        mass0: ``(||v0||^2 + ||p0||^2) / 2``.
        lambda_cert: Constant in the cross-term bound.
        search_points: Interior samples per axis.

    Returns:
        The certificate, or :class:`Infeasible` naming ``"k_positive"`` or
        ``"horizon"``.

    Raises:
        CertificateError: ``E0`` is not negative.
    """
    E0 = as_real(E0, "E0")
    if E0 >= 0.0:
        raise CertificateError(
            f"the certificate requires negative initial energy; received E0={E0:.6g}."
        )
    eta = as_real(eta, "eta")
    if eta <= 2.0:
        raise ValueError(f"eta must be greater than 2; received {eta}.")
    rates = (("lambda1", lambda1), ("lambda2", lambda2), ("L0_rate", L0_rate))
    for name, value in rates:
        if as_real(value, name) < 0.0:
            raise ValueError(f"{name} must be non-negative; received {value}.")
    lambda_cert = validate_positive(lambda_cert, "lambda_cert")
    points = validate_count(search_points, "search_points", 1)

    fractions = np.arange(1, points + 1) / (points + 1)
    epsilon = (eta / 2.0) * fractions[:, np.newaxis]
    sigma = sigma_limit(eta, epsilon) * fractions[np.newaxis, :]
    growth = (sigma + 1.0) * (1.0 + 1.0 / epsilon)
    k = eta - 4.0 * lambda_cert * growth
    with np.errstate(divide="ignore", invalid="ignore"):
        b = -k * E0 / (4.0 * growth)
        t0 = np.where(cross0 < 0.0, np.maximum(1.0, -2.0 * cross0 / b), 1.0)
    denominator = sigma * (cross0 + b * t0) - 0.5 * L0_rate
    positive = k > 0.0
    if not np.any(positive):
        return Infeasible(
            "k_positive",
            f"k = eta - 4 lambda (sigma + 1)(1 + 1/epsilon) stays non-positive; "
            f"largest value {float(np.max(k)):.6g} at eta={eta:g}.",
        )
    feasible = positive & (denominator > 0.0)
    if not np.any(feasible):
        return Infeasible(
            "horizon",
            "sigma F'(0) never exceeds half the initial damping rate "
            f"{0.5 * L0_rate:.6g} among pairs with k > 0.",
        )
    index = np.unravel_index(int(np.argmax(np.where(feasible, k, -np.inf))), k.shape)
    chosen_b = float(b[index])
    chosen_t0 = float(t0[index])
    horizon = (mass0 + 0.5 * chosen_b * chosen_t0**2) / float(denominator[index])
    return CertificateParams(
        epsilon=float(epsilon[index[0], 0]),
        sigma=float(sigma[index]),
        lambda_cert=lambda_cert,
        k=float(k[index]),
        b=chosen_b,
        t0=chosen_t0,
        T_horizon=horizon * (1.0 + HORIZON_MARGIN),
    )


@dataclass(eq=False, frozen=True, slots=True)
class AugmentedSeries:
    """Certificate functionals sampled along a :class:`TimeSeries`."""

    series: TimeSeries
    params: CertificateParams
    L: Column
    Lprime: Column
    Lsecond: Column
    F: Column
    Fprime: Column
    Fsecond: Column
    G: Column
    Gprime: Column

    def __post_init__(self) -> None:
        for name in ("L", "Lprime", "Lsecond", "F", "Fprime", "Fsecond", "G", "Gprime"):
            column = np.array(getattr(self, name), dtype=np.float64)
            column.flags.writeable = False
            object.__setattr__(self, name, column)


def f_of_t(series: TimeSeries, cparams: CertificateParams) -> AugmentedSeries:
    """Sample ``L``, ``F``, ``G`` and their derivatives along ``series``.

    ``F''`` is assembled from the sampled accelerations rather than by
    differencing ``F``.

    Raises:
        CertificateError: ``F`` is negative or not finite somewhere, or
            vanishes away from ``t + t0 = 0``.
    """
    if not len(series):
        raise CertificateError("the series holds no samples.")
    t = series.t
    L0_rate = float(series.rate[0])
    accumulated = cumulative_trapezoid(series.rate, t, initial=0.0)
    L = accumulated + (cparams.T_horizon - t) * L0_rate
    Lprime = series.rate - L0_rate
    Lsecond = 2.0 * series.damped_cross
    shifted = t + cparams.t0
    F = series.mass + 0.5 * L + 0.5 * cparams.b * shifted**2
    Fprime = series.cross + 0.5 * Lprime + cparams.b * shifted
    Fsecond = series.accel_cross + series.kinetic + 0.5 * Lsecond + cparams.b

    if not np.all(np.isfinite(F)) or np.any(F < 0.0):
        raise CertificateError("F must be finite and non-negative along the series.")
    degenerate = F == 0.0
    if np.any(degenerate & (shifted != 0.0)):
        raise CertificateError("F vanishes away from t + t0 = 0.")

    sigma = cparams.sigma
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        G = np.where(degenerate, np.inf, F ** (-sigma))
        Gprime = np.where(degenerate, -np.inf, -sigma * F ** (-sigma - 1.0) * Fprime)
    return AugmentedSeries(
        series=series,
        params=cparams,
        L=L,
        Lprime=Lprime,
        Lsecond=Lsecond,
        F=F,
        Fprime=Fprime,
        Fsecond=Fsecond,
        G=G,
        Gprime=Gprime,
    )


def upper_bound_tm(
    cparams: CertificateParams,
    *,
    mass0: float,
    cross0: float,
    L0_rate: float,
) -> CertificateReport:
    """Return ``t_m = F(0) / (sigma F'(0))`` and the horizon check.

    A non-positive ``F'(0)`` yields an infeasible report, never a patched one.

    Examples:
        >>> cert = CertificateParams(2.0, 1 / 6, 1.0, 1.0, 1.0, 1.0, 10.0)
        >>> report = upper_bound_tm(cert, mass0=0.5, cross0=1.0, L0_rate=0.0)
        >>> round(report.t_m, 12)
        3.0
    """
    F0 = mass0 + 0.5 * cparams.T_horizon * L0_rate + 0.5 * cparams.b * cparams.t0**2
    Fprime0 = cross0 + cparams.b * cparams.t0
    if Fprime0 <= 0.0:
        return CertificateReport(
            params=cparams,
            F0=F0,
            Fprime0=Fprime0,
            t_m=math.inf,
            feasible=False,
            horizon_consistent=False,
            reason=f"F'(0) = {Fprime0:.6g} is not positive; G'(0) < 0 fails.",
        )
    t_m = F0 / (cparams.sigma * Fprime0)
    return CertificateReport(
        params=cparams,
        F0=F0,
        Fprime0=Fprime0,
        t_m=t_m,
        feasible=True,
        horizon_consistent=cparams.T_horizon >= t_m,
    )


@dataclass(frozen=True)
class InequalityChecks:
    """Pass flags of the certificate inequalities at every sample."""

    acceleration_ok: bool
    cross_term_ok: bool
    Q_nonneg_ok: bool
    G_concave_ok: bool

    def all_ok(self) -> bool:
        return all(
            (
                self.acceleration_ok,
                self.cross_term_ok,
                self.Q_nonneg_ok,
                self.G_concave_ok,
            )
        )


def _holds(lhs: Column, rhs: Column, tolerance: float = CHECK_TOLERANCE) -> bool:
    """Return whether ``lhs >= rhs`` within a relative tolerance."""
    scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    with np.errstate(invalid="ignore"):
        return bool(np.all(lhs - rhs >= -tolerance * scale))


def acceleration_lower_bound(
    augmented: AugmentedSeries,
    params: PhysicalParams,
    eta: float,
) -> Column:
    """Return the right side of the lower bound on ``int (v v_tt + p p_tt) dx``."""
    series = augmented.series
    factor = 0.5 * eta - 1.0
    return np.asarray(
        params.alpha1 * factor * series.grad_v
        + params.beta * factor * series.grad_coupled
        - series.damped_cross
        + 0.5 * eta * series.kinetic
        - eta * series.energy,
        dtype=np.float64,
    )


def check_inequalities(
    augmented: AugmentedSeries,
    params: PhysicalParams,
    eta: float,
) -> InequalityChecks:
    """Check the certificate inequalities at every sample.

    Args:
        augmented: Output of :func:`f_of_t`.
        params: Physical coefficients of the run.
        eta: Source growth exponent.

    Returns:
        Flags for the acceleration bound, the cross-term bound, ``Q >= 0``
        with ``Q = F F'' - (sigma + 1) F'^2``, and concavity of ``G``.
    """
    series = augmented.series
    cert = augmented.params
    acceleration = _holds(
        series.accel_cross, acceleration_lower_bound(augmented, params, eta)
    )

    cross_sq = augmented.Fprime**2
    bound = augmented.F * (
        (1.0 + cert.epsilon) * series.kinetic
        + 2.0
        * (1.0 + 1.0 / cert.epsilon)
        * (cert.b - 2.0 * cert.lambda_cert * series.energy)
    )
    cross_term = _holds(bound, cross_sq)

    product = augmented.F * augmented.Fsecond
    penalty = (cert.sigma + 1.0) * augmented.Fprime**2
    q_nonneg = _holds(product, penalty)

    return InequalityChecks(
        acceleration_ok=acceleration,
        cross_term_ok=cross_term,
        Q_nonneg_ok=q_nonneg,
        G_concave_ok=_is_concave(series.t, augmented.G, augmented.Gprime),
    )


def _is_concave(t: Column, G: Column, Gprime: Column) -> bool:
    finite = np.isfinite(G) & np.isfinite(Gprime)
    t, G, Gprime = t[finite], G[finite], Gprime[finite]
    if G.size < 2:
        return True
    secant = G[0] + (t - t[0]) * Gprime[0]
    scale = np.maximum(np.abs(G[0]), np.abs((t - t[0]) * Gprime[0]))
    if np.any(G - secant > CHECK_TOLERANCE * scale):
        return False
    if G.size < 3:
        return True
    h = np.diff(t)
    slopes = np.diff(G) / h
    curvature = 2.0 * np.diff(slopes) / (h[:-1] + h[1:])
    magnitude = 2.0 * (np.abs(slopes[:-1]) + np.abs(slopes[1:])) / (h[:-1] + h[1:])
    return bool(np.all(curvature <= CHECK_TOLERANCE * magnitude))
