from importlib.metadata import version

import piezoblow
from piezoblow.integrator import StateVector
from piezoblow.sources import SourceModel


def test_version_matches_distribution():
    assert piezoblow.__version__ == version("piezoblow")


def test_top_level_exports_are_intentional():
    assert set(piezoblow.__all__) == {
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
    }
    assert not hasattr(piezoblow, "StateVector")
    assert not hasattr(piezoblow, "RunReport")


def test_advanced_interfaces_remain_in_submodules():
    assert StateVector.__module__ == "piezoblow.integrator"
    assert SourceModel.__module__ == "piezoblow.sources.interface"
