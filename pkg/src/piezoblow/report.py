"""Run reports and their JSON encoding."""

import dataclasses
import enum
import json
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .bounds import LowerBoundReport
from .certificates import CertificateReport, Infeasible
from .integrator import BlowupEvent
from .verification import StudyResult


@dataclass
class RunReport:
    """Outcome of one command.

    Attributes:
        command: Subcommand that produced the report.
        config: Echo of every configuration value used.
        blowup: Detected blow-up, if any.
        certificate: Upper bound ``t_m`` and its certificate constants.
        infeasible: Binding constraint when no certificate exists.
        lower_bound: Lower bound ``T*``.
        invariant_flags: Pass flag per named check; each check appears once.
        timings: Wall-clock seconds per phase.
        studies: Convergence study tables.
        summary: Scalar results such as ``E0`` and ``t_final``.
    """

    command: str
    config: Mapping[str, Any]
    blowup: BlowupEvent | None = None
    certificate: CertificateReport | None = None
    infeasible: Infeasible | None = None
    lower_bound: LowerBoundReport | None = None
    invariant_flags: dict[str, bool] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    studies: list[StudyResult] = field(default_factory=list)
    summary: dict[str, float] = field(default_factory=dict)

    def flag(self, name: str, passed: bool) -> None:
        """Record a check result.

        Raises:
            ValueError: ``name`` was already recorded.
        """
        if name in self.invariant_flags:
            raise ValueError(f"invariant flag {name!r} is already recorded.")
        self.invariant_flags[name] = bool(passed)

    @property
    def failed_flags(self) -> list[str]:
        return [name for name, passed in self.invariant_flags.items() if not passed]

    def to_dict(self) -> dict[str, Any]:
        return {
            item.name: _plain(getattr(self, item.name))
            for item in dataclasses.fields(self)
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def write(self, path: Path) -> None:
        """Write the report without overwriting an existing file.

        Raises:
            FileExistsError: ``path`` already exists.
        """
        with open(path, "x", encoding="utf-8", newline="\n") as handle:
            handle.write(self.to_json())


def _plain(value: Any) -> Any:
    """Convert report values to JSON types; non-finite floats become strings."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {
            item.name: _plain(getattr(value, item.name))
            for item in dataclasses.fields(value)
        }
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, Mapping):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, list | tuple):
        return [_plain(item) for item in value]
    if isinstance(value, bool | str) or value is None:
        return value
    if isinstance(value, int | np.integer):
        return int(value)
    if isinstance(value, float | np.floating):
        number = float(value)
        return number if math.isfinite(number) else str(number)
    if isinstance(value, Path):
        return str(value)
    return repr(value)
