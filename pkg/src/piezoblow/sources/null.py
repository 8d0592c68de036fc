"""Source-free model."""

from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np
import numpy.typing as npt

from .interface import GrowthExponents, SourceKind, SourceModel, SourceTerms


@dataclass(frozen=True)
class NullSource(SourceModel):
    """Identically zero forcing, leaving the damped linear system."""

    eta: float = 8.0
    a: float = field(default=0.0, init=False)
    kind: ClassVar[SourceKind] = SourceKind.NULL

    @property
    def d(self) -> float:
        return 0.0

    @property
    def beta_exponents(self) -> GrowthExponents:
        return (1.0, 1.0, 1.0, 1.0)

    def __call__(self, v: npt.ArrayLike, p: npt.ArrayLike) -> SourceTerms:
        zeros = np.zeros(
            np.broadcast_shapes(np.shape(v), np.shape(p)),
            dtype=np.float64,
        )
        return zeros, zeros.copy(), zeros.copy()
