"""Power-of-difference source."""

from dataclasses import dataclass
from typing import ClassVar

import numpy as np
import numpy.typing as npt

from .interface import GrowthExponents, SourceKind, SourceModel, SourceTerms


@dataclass(frozen=True)
class PowerDifferenceSource(SourceModel):
    """Source with potential ``I = (a / eta) |v - p|**eta``.

    The forcing terms are ``f1 = a |v - p|**(eta - 2) (v - p)`` and
    ``f2 = -f1``. At ``v == p`` both are defined as zero, the continuous limit
    for ``eta > 2``.
    """

    a: float = 1.0
    eta: float = 8.0
    kind: ClassVar[SourceKind] = SourceKind.POWER_DIFFERENCE

    @property
    def d(self) -> float:
        # |v - p|**(eta - 1) <= 2**(eta - 2) (|v|**(eta - 1) + |p|**(eta - 1))
        return float(self.a * 2.0 ** (self.eta - 2.0))

    @property
    def beta_exponents(self) -> GrowthExponents:
        exponent = float(self.eta - 1.0)
        return (exponent, exponent, exponent, exponent)

    def __call__(self, v: npt.ArrayLike, p: npt.ArrayLike) -> SourceTerms:
        difference = np.asarray(v, dtype=np.float64) - np.asarray(p, dtype=np.float64)
        magnitude = np.abs(difference)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            f1 = np.where(
                difference == 0.0,
                0.0,
                self.a * magnitude ** (self.eta - 2.0) * difference,
            )
            potential = (self.a / self.eta) * magnitude**self.eta
        return f1, -f1, potential
