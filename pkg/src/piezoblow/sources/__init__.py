"""Built-in nonlinear sources and the abstract source interface."""

from .interface import SourceKind, SourceModel
from .null import NullSource
from .power import PowerDifferenceSource

__all__ = ["NullSource", "PowerDifferenceSource", "SourceKind", "SourceModel"]
