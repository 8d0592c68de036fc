"""Uniform grid, boundary-aware difference operators and discrete norms.

Fields are nodal arrays on ``x_j = j * dx`` for ``j = 0..N``. The left end
carries the Dirichlet condition ``u(0) = 0`` and the right end the Neumann
condition ``u_x(L) = 0``, realised by the mirror ghost node
``u[N + 1] = u[N - 1]``.

Two gradient quadratures coexist. :func:`grad_inner` is the staggered
forward-difference form that :func:`dxx` is self-adjoint against,

    inner(dxx(u), w) == -grad_inner(u, w)

so every energy built from it obeys the discrete integration-by-parts
identities exactly. :func:`dx_forward_field` is a nodal second-order
derivative for diagnostics only.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import TypeAlias

import numpy as np
import numpy.typing as npt
from scipy.integrate import trapezoid

from ._validation import validate_count, validate_positive

Field: TypeAlias = npt.NDArray[np.float64]

MIN_CELLS = 8


@dataclass(frozen=True)
class Grid:
    """Uniform grid on ``(0, length)`` with ``cells`` intervals.

    Attributes:
        length: Domain length ``L``.
        cells: Number of cells ``N``; nodes are indexed ``0..N``.
    """

    length: float
    cells: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "length", validate_positive(self.length, "L"))
        object.__setattr__(self, "cells", validate_count(self.cells, "N", MIN_CELLS))

    @property
    def dx(self) -> float:
        return self.length / self.cells

    @property
    def size(self) -> int:
        """Number of nodes, ``N + 1``."""
        return self.cells + 1

    @cached_property
    def nodes(self) -> Field:
        nodes = np.linspace(0.0, self.length, self.size)
        nodes.flags.writeable = False
        return nodes

    def refined(self, factor: int = 2) -> "Grid":
        """Return the grid with ``factor`` times as many cells."""
        return Grid(self.length, self.cells * factor)

    def zeros(self) -> Field:
        return np.zeros(self.size, dtype=np.float64)


def check_field(u: npt.ArrayLike, grid: Grid, name: str = "field") -> Field:
    """Return ``u`` as a float array after checking it matches ``grid``."""
    array = np.asarray(u, dtype=np.float64)
    if array.shape[-1:] != (grid.size,):
        raise ValueError(
            f"{name} must have {grid.size} nodal values on this grid; "
            f"received shape {array.shape}."
        )
    return array


def dxx(u: npt.ArrayLike, grid: Grid) -> Field:
    """Return the second difference with ``u(0) = 0`` and ``u_x(L) = 0``.

    The value at node 0 is taken as zero whatever ``u[0]`` holds, and the
    output there is zero so pinned nodes stay pinned. Leading axes are
    treated as independent fields.
    """
    field = check_field(u, grid).copy()
    field[..., 0] = 0.0
    scale = 1.0 / grid.dx**2
    out = np.empty_like(field)
    out[..., 0] = 0.0
    out[..., 1:-1] = (field[..., 2:] - 2.0 * field[..., 1:-1] + field[..., :-2]) * scale
    out[..., -1] = 2.0 * (field[..., -2] - field[..., -1]) * scale
    return out


def inner(u: npt.ArrayLike, w: npt.ArrayLike, grid: Grid) -> float:
    """Return the trapezoid quadrature of ``u * w`` over ``(0, L)``."""
    product = check_field(u, grid, "u") * check_field(w, grid, "w")
    return float(trapezoid(product, dx=grid.dx))


def integral(u: npt.ArrayLike, grid: Grid) -> float:
    """Return the trapezoid quadrature of ``u`` over ``(0, L)``."""
    return float(trapezoid(check_field(u, grid), dx=grid.dx))


def l2_norm_sq(u: npt.ArrayLike, grid: Grid) -> float:
    """Return the trapezoid quadrature of ``u**2``."""
    return inner(u, u, grid)


def linf(u: npt.ArrayLike) -> float:
    """Return the largest absolute nodal value."""
    array = np.asarray(u, dtype=np.float64)
    return float(np.max(np.abs(array))) if array.size else 0.0


def grad_inner(u: npt.ArrayLike, w: npt.ArrayLike, grid: Grid) -> float:
    """Return ``sum((u[j+1] - u[j]) (w[j+1] - w[j])) / dx``.

    Fields are expected to vanish at node 0.
    """
    du = np.diff(check_field(u, grid, "u"))
    dw = np.diff(check_field(w, grid, "w"))
    return float(np.dot(du, dw)) / grid.dx


def grad_norm_sq(u: npt.ArrayLike, grid: Grid) -> float:
    """Return the compatible squared gradient norm ``grad_inner(u, u)``."""
    return grad_inner(u, u, grid)


def dx_forward_field(u: npt.ArrayLike, grid: Grid) -> Field:
    """Return a nodal first derivative.

    Central differences inside, third-order one-sided differences at both
    ends. Exact on quadratic fields.
    """
    field = check_field(u, grid)
    derivative = np.asarray(np.gradient(field, grid.dx), dtype=np.float64)
    weights = np.array([-11.0, 18.0, -9.0, 2.0]) / (6.0 * grid.dx)
    derivative[0] = weights @ field[:4]
    derivative[-1] = -(weights @ field[:-5:-1])
    return derivative


def poincare_constant(grid: Grid) -> float:
    """Return ``(2 L / pi)**2``, the optimal constant for ``g(0) = 0``."""
    return (2.0 * grid.length / math.pi) ** 2


def mode_wavenumber(mode: int, length: float) -> float:
    """Return ``pi (2 j - 1) / (2 L)``, the wavenumber of sine mode ``j``."""
    if mode < 1:
        raise ValueError(f"mode index must be at least 1; received {mode}.")
    return math.pi * (2 * mode - 1) / (2.0 * length)


def sine_mode(grid: Grid, mode: int = 1, amplitude: float = 1.0) -> Field:
    """Return ``amplitude * sin(k_j x)`` sampled on the grid nodes."""
    k = mode_wavenumber(mode, grid.length)
    field = amplitude * np.sin(k * grid.nodes)
    field[0] = 0.0
    return field
