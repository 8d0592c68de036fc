"""Sampled diagnostics of a run and their CSV encoding."""

from collections.abc import Sequence
from dataclasses import dataclass, fields
from pathlib import Path
from typing import NamedTuple

import numpy as np
import numpy.typing as npt

Column = npt.NDArray[np.float64]

SERIES_COLUMNS = (
    "t",
    "E",
    "diss_residual",
    "linf_v",
    "linf_p",
    "l2_v",
    "l2_p",
    "F",
    "Fprime",
    "G",
    "psi",
)


class DiagnosticSample(NamedTuple):
    """Diagnostics of one state; field order matches :class:`TimeSeries`."""

    t: float
    energy: float
    dissipation: float
    psi: float
    mass: float
    rate: float
    cross: float
    damped_cross: float
    kinetic: float
    accel_cross: float
    grad_v: float
    grad_coupled: float
    linf_v: float
    linf_p: float
    l2_v: float
    l2_p: float


@dataclass(eq=False, frozen=True, slots=True)
class TimeSeries:
    """Read-only columns of sampled diagnostics.

    Attributes:
        t: Sample times.
        energy: Discrete energy ``E``.
        dissipation: ``-lambda1 ||v_t||^2 - lambda2 ||p_t||^2``.
        psi: Source integral ``int I(v, p) dx``.
        mass: ``(||v||^2 + ||p||^2) / 2``.
        rate: ``lambda1 ||v||^2 + lambda2 ||p||^2``.
        cross: ``int (v v_t + p p_t) dx``.
        damped_cross: ``int (lambda1 v v_t + lambda2 p p_t) dx``.
        kinetic: ``||v_t||^2 + ||p_t||^2``.
        accel_cross: ``int (v v_tt + p p_tt) dx``.
        grad_v: ``||v_x||^2``.
        grad_coupled: ``||gamma v_x - p_x||^2``.
        linf_v: Largest ``|v|``.
        linf_p: Largest ``|p|``.
        l2_v: ``||v||``.
        l2_p: ``||p||``.
    """

    t: Column
    energy: Column
    dissipation: Column
    psi: Column
    mass: Column
    rate: Column
    cross: Column
    damped_cross: Column
    kinetic: Column
    accel_cross: Column
    grad_v: Column
    grad_coupled: Column
    linf_v: Column
    linf_p: Column
    l2_v: Column
    l2_p: Column

    def __post_init__(self) -> None:
        size: int | None = None
        for item in fields(self):
            column = np.array(getattr(self, item.name), dtype=np.float64)
            if column.ndim != 1:
                raise ValueError(f"{item.name} must be one-dimensional.")
            if size is None:
                size = column.size
            elif column.size != size:
                raise ValueError(
                    f"{item.name} has {column.size} samples; expected {size}."
                )
            column.flags.writeable = False
            object.__setattr__(self, item.name, column)

    def __len__(self) -> int:
        return int(self.t.size)

    def __repr__(self) -> str:
        if not len(self):
            return "TimeSeries(samples=0)"
        return f"TimeSeries(samples={len(self)}, t=[{self.t[0]:g}, {self.t[-1]:g}])"

    @classmethod
    def from_samples(cls, samples: Sequence[DiagnosticSample]) -> "TimeSeries":
        """Stack per-sample diagnostics into columns."""
        width = len(DiagnosticSample._fields)
        table = np.array(samples, dtype=np.float64).reshape(len(samples), width)
        return cls(*table.T)

    def sample(self, index: int) -> DiagnosticSample:
        return DiagnosticSample(
            *(float(getattr(self, name)[index]) for name in DiagnosticSample._fields)
        )

    def head(self, count: int) -> "TimeSeries":
        """Return the first ``count`` samples."""
        return TimeSeries(
            *(getattr(self, name)[:count] for name in DiagnosticSample._fields)
        )


def write_csv(
    path: Path,
    series: TimeSeries,
    *,
    diss_residual: npt.ArrayLike,
    F: npt.ArrayLike | None = None,
    Fprime: npt.ArrayLike | None = None,
    G: npt.ArrayLike | None = None,
    stride: int = 1,
) -> None:
    """Write the series table without overwriting an existing file.

    Certificate columns are written as ``nan`` when omitted. Every
    ``stride``-th sample is kept, together with the last one.

    Raises:
        FileExistsError: ``path`` already exists.
    """
    size = len(series)
    missing = np.full(size, np.nan)
    table = np.column_stack(
        [
            series.t,
            series.energy,
            np.broadcast_to(np.asarray(diss_residual, dtype=np.float64), (size,)),
            series.linf_v,
            series.linf_p,
            series.l2_v,
            series.l2_p,
            missing if F is None else np.asarray(F, dtype=np.float64),
            missing if Fprime is None else np.asarray(Fprime, dtype=np.float64),
            missing if G is None else np.asarray(G, dtype=np.float64),
            series.psi,
        ]
    )
    rows = np.arange(0, size, max(1, stride))
    if size and rows[-1] != size - 1:
        rows = np.append(rows, size - 1)
    with open(path, "x", encoding="utf-8", newline="\n") as handle:
        np.savetxt(
            handle,
            table[rows],
            fmt="%.17g",
            delimiter=",",
            header=",".join(SERIES_COLUMNS),
            comments="",
        )


def read_csv(path: Path) -> dict[str, Column]:
    """Return the columns of a file written by :func:`write_csv`."""
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().strip().split(",")
        table = np.loadtxt(handle, delimiter=",", ndmin=2)
    if tuple(header) != SERIES_COLUMNS:
        raise ValueError(f"{path} is not a series table; header is {header}.")
    if table.size == 0:
        table = np.empty((0, len(SERIES_COLUMNS)))
    return {name: table[:, index] for index, name in enumerate(SERIES_COLUMNS)}
