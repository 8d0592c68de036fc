"""Numerical lab for finite-time blow-up of damped piezoelectric beams.

Use :func:`run` to integrate the semi-discrete system, then
:func:`select_parameters` and :func:`lower_bound_tstar` to bracket the
blow-up time from above and below.

>>> import piezoblow
>>> result = piezoblow.run(
...     piezoblow.InitialData(v0="zero"),
...     piezoblow.PhysicalParams(),
...     piezoblow.PowerDifferenceSource(),
...     piezoblow.SimConfig(t_end=0.1),
...     grid=piezoblow.Grid(1.0, 16),
... )
>>> result.blew_up, float(result.series.energy[-1])
(False, 0.0)
"""

from importlib.metadata import version as _distribution_version

from ._config import parse_config
from .bounds import lower_bound_tstar
from .certificates import energy, select_parameters
from .grid_ops import Grid
from .integrator import SimConfig, run
from .model import InitialData, PhysicalParams
from .sources import NullSource, PowerDifferenceSource

__version__ = _distribution_version("piezoblow")

__all__ = [
    "Grid",
    "InitialData",
    "NullSource",
    "PhysicalParams",
    "PowerDifferenceSource",
    "SimConfig",
    "energy",
    "lower_bound_tstar",
    "parse_config",
    "run",
    "select_parameters",
    "__version__",
]
