"""Source-model types and the abstract source interface."""

from abc import ABC, abstractmethod
from enum import Enum
from typing import ClassVar, TypeAlias

import numpy as np
import numpy.typing as npt

SourceTerms: TypeAlias = tuple[
    npt.NDArray[np.float64],
    npt.NDArray[np.float64],
    npt.NDArray[np.float64],
]
GrowthExponents: TypeAlias = tuple[float, float, float, float]


class SourceKind(str, Enum):
    """Built-in nonlinear source families."""

    POWER_DIFFERENCE = "power-difference"
    NULL = "null"


class SourceModel(ABC):
    """Base class for the nonlinear sources ``f1``, ``f2`` and their potential.

    A source returns the forcing pair together with the potential ``I`` whose
    partial derivatives are ``f1`` (in ``v``) and ``f2`` (in ``p``). Subclasses
    also publish the growth data ``d`` and ``beta_exponents`` certifying
    ``|f1(v, p)| <= d (|v|**b1 + |p|**b2)`` and
    ``|f2(v, p)| <= d (|v|**b3 + |p|**b4)``.

    Examples:
        >>> import numpy as np
        >>> from piezoblow.sources import PowerDifferenceSource
        >>> f1, f2, potential = PowerDifferenceSource(a=1.0, eta=4.0)(2.0, 1.0)
        >>> float(f1), float(f2), float(potential)
        (1.0, -1.0, 0.25)
    """

    kind: ClassVar[SourceKind]
    a: float
    eta: float

    @property
    @abstractmethod
    def d(self) -> float:
        """Growth constant bounding both forcing terms."""

    @property
    @abstractmethod
    def beta_exponents(self) -> GrowthExponents:
        """Growth exponents ``(b1, b2, b3, b4)``."""

    @abstractmethod
    def __call__(self, v: npt.ArrayLike, p: npt.ArrayLike) -> SourceTerms:
        """Return ``(f1, f2, I)`` evaluated elementwise.

        Args:
            v: Displacement values.
            p: Magnetic-current values broadcastable against ``v``.
        """

    def potential(self, v: npt.ArrayLike, p: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Return the source potential ``I(v, p)``."""
        return self(v, p)[2]
