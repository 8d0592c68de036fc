"""Sectioned run configuration and sweep grids."""

import configparser
import io
import itertools
import re
from collections.abc import Callable, Iterator
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, TypeVar

import numpy as np

from .grid_ops import Grid
from .integrator import SimConfig
from .model import FIELD_NAMES, FieldSpec, InitialData, PhysicalParams, is_preset
from .model import validate_params
from .sources import NullSource, PowerDifferenceSource, SourceModel

T = TypeVar("T")

SOURCE_KINDS = {
    "power": "power",
    "power-difference": "power",
    "null": "null",
}

# Section -> key -> default, in echo order.
DEFAULTS: dict[str, dict[str, str]] = {
    "domain": {"L": "1.0", "N": "128"},
    "physics": {
        "alpha": "1.0",
        "beta": "1.0",
        "gamma": "0.0",
        "lambda1": "0.1",
        "lambda2": "0.1",
    },
    "source": {"kind": "power", "a": "1.0", "eta": "8.0"},
    "initial": {"v0": "sine", "v1": "zero", "p0": "zero", "p1": "zero"},
    "time": {
        "dt0": "0.01",
        "cfl": "0.9",
        "t_end": "1.0",
        "blowup_threshold": "1e6",
        "dt_min": "1e-12",
        "sample_stride": "1",
    },
    "output": {"dir": "out", "stride": "1"},
    "certificate": {"lambda_cert": "1.0", "search_points": "64"},
}

SWEEP_KEYS = ("a", "eta", "lambda1", "lambda2")


class ConfigError(ValueError):
    """A configuration file is malformed or holds an invalid value."""

    def __init__(
        self,
        message: str,
        *,
        path: Path | None = None,
        line: int | None = None,
        key: str | None = None,
    ) -> None:
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f", line {line}"
            location += ": "
        super().__init__(f"{location}{message}")
        self.path = path
        self.line = line
        self.key = key


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Fully resolved configuration of one run."""

    path: Path | None
    grid: Grid
    params: PhysicalParams
    source: SourceModel
    initial: InitialData
    sim: SimConfig
    output_dir: Path
    output_stride: int = 1
    lambda_cert: float = 1.0
    search_points: int = 64
    descriptors: tuple[str, str, str, str] = ("sine", "zero", "zero", "zero")

    def echo(self) -> dict[str, dict[str, Any]]:
        """Return every value the run uses, defaults included."""
        kind = "power" if isinstance(self.source, PowerDifferenceSource) else "null"
        return {
            "domain": {"L": self.grid.length, "N": self.grid.cells},
            "physics": {
                "alpha": self.params.alpha,
                "beta": self.params.beta,
                "gamma": self.params.gamma,
                "lambda1": self.params.lambda1,
                "lambda2": self.params.lambda2,
            },
            "source": {"kind": kind, "a": self.source.a, "eta": self.source.eta},
            "initial": dict(zip(FIELD_NAMES, self.descriptors, strict=True)),
            "time": {
                "dt0": self.sim.dt0,
                "cfl": self.sim.cfl,
                "t_end": self.sim.t_end,
                "blowup_threshold": self.sim.blowup_threshold,
                "dt_min": self.sim.dt_min,
                "sample_stride": self.sim.sample_stride,
            },
            "output": {"dir": str(self.output_dir), "stride": self.output_stride},
            "certificate": {
                "lambda_cert": self.lambda_cert,
                "search_points": self.search_points,
            },
        }

    def with_overrides(self, overrides: dict[str, float]) -> "RunConfig":
        """Return a copy with the sweep keys in ``overrides`` replaced."""
        params = replace(
            self.params,
            lambda1=overrides.get("lambda1", self.params.lambda1),
            lambda2=overrides.get("lambda2", self.params.lambda2),
        )
        source = self.source
        if "a" in overrides or "eta" in overrides:
            a = overrides.get("a", source.a)
            eta = overrides.get("eta", source.eta)
            source = (
                NullSource(eta=eta)
                if isinstance(source, NullSource)
                else PowerDifferenceSource(a=a, eta=eta)
            )
        return replace(self, params=params, source=source)


def _new_parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(
        interpolation=None,
        comment_prefixes=("#", ";"),
        inline_comment_prefixes=("#", ";"),
        default_section="__defaults__",
    )
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    return parser


def _locate(lines: list[str], section: str, key: str | None = None) -> int | None:
    """Return the 1-based line of ``section`` or of ``key`` inside it."""
    header = re.compile(r"^\s*\[\s*([^\]]+?)\s*\]")
    current: str | None = None
    for number, text in enumerate(lines, start=1):
        match = header.match(text)
        if match:
            current = match.group(1)
            if key is None and current == section:
                return number
            continue
        if key is not None and current == section:
            name = re.split(r"[=:]", text, maxsplit=1)[0].strip()
            if name == key:
                return number
    return None


def _read(text: str, path: Path | None) -> configparser.ConfigParser:
    parser = _new_parser()
    try:
        parser.read_string(text, source=str(path) if path else "<config>")
    except configparser.MissingSectionHeaderError as error:
        raise ConfigError(
            "expected a [section] header before the first key.",
            path=path,
            line=error.lineno,
        ) from error
    except configparser.ParsingError as error:
        line = error.errors[0][0] if error.errors else None
        raise ConfigError("malformed line.", path=path, line=line) from error
    except configparser.DuplicateOptionError as error:
        raise ConfigError(
            f"duplicate key {error.option!r} in [{error.section}].",
            path=path,
            line=error.lineno,
            key=error.option,
        ) from error
    except configparser.DuplicateSectionError as error:
        raise ConfigError(
            f"duplicate section [{error.section}].",
            path=path,
            line=error.lineno,
        ) from error
    except configparser.Error as error:
        raise ConfigError(str(error), path=path) from error
    return parser


class _Reader:
    """Typed access to a parsed configuration with line-numbered errors."""

    def __init__(
        self,
        parser: configparser.ConfigParser,
        lines: list[str],
        path: Path | None,
    ) -> None:
        self.parser = parser
        self.lines = lines
        self.path = path

    def error(self, section: str, key: str | None, message: str) -> ConfigError:
        line = _locate(self.lines, section, key)
        if line is None and key is not None:
            line = _locate(self.lines, section)
        return ConfigError(message, path=self.path, line=line, key=key)

    def raw(self, section: str, key: str) -> str:
        if self.parser.has_option(section, key):
            return self.parser.get(section, key).strip()
        return DEFAULTS[section][key]

    def value(self, section: str, key: str, convert: Callable[[str], T]) -> T:
        text = self.raw(section, key)
        try:
            return convert(text)
        except (TypeError, ValueError) as error:
            raise self.error(
                section,
                key,
                f"invalid value for {key} in [{section}]: {text!r} ({error}).",
            ) from error

    def real(self, section: str, key: str) -> float:
        return self.value(section, key, float)

    def integer(self, section: str, key: str) -> int:
        return self.value(section, key, int)

    def check_known(self, known: dict[str, dict[str, str]]) -> None:
        for section in self.parser.sections():
            if section not in known:
                raise self.error(section, None, f"unknown section [{section}].")
            for key in self.parser.options(section):
                if key not in known[section]:
                    raise self.error(
                        section,
                        key,
                        f"unknown key {key!r} in [{section}]; "
                        f"expected one of {', '.join(known[section])}.",
                    )

    def build(self, section: str, factory: Callable[[], T]) -> T:
        """Run ``factory`` and attribute validation errors to ``section``."""
        try:
            return factory()
        except (TypeError, ValueError) as error:
            key = _mentioned_key(str(error), DEFAULTS[section])
            raise self.error(section, key, f"[{section}] {error}") from error


def _mentioned_key(message: str, keys: dict[str, str]) -> str | None:
    for key in keys:
        if re.search(rf"\b{re.escape(key)}\b", message):
            return key
    return None


def _load_field(
    descriptor: str,
    base: Path,
    reader: _Reader,
    name: str,
) -> FieldSpec:
    if is_preset(descriptor):
        return descriptor
    location = Path(descriptor)
    if not location.is_absolute():
        location = base / location
    try:
        text = location.read_text(encoding="utf-8")
    except FileNotFoundError as error:
        raise reader.error(
            "initial", name, f"{name} file not found: {location}."
        ) from error
    try:
        values = np.loadtxt(io.StringIO(text.replace(",", " ")), ndmin=1)
    except ValueError as error:
        raise reader.error(
            "initial", name, f"{name} file {location} is not numeric."
        ) from error
    return np.asarray(values, dtype=np.float64).ravel()


def parse_config(path: Path | str) -> RunConfig:
    """Read and validate a run configuration.

    Args:
        path: INI-style file with the sections of :data:`DEFAULTS`.

    Returns:
        The resolved configuration with every default filled in.

    Raises:
        FileNotFoundError: ``path`` does not exist.
        ConfigError: The file is malformed, names an unknown section or key,
            or holds a value the model rejects.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_config_text(text, path=path)


def parse_config_text(text: str, *, path: Path | None = None) -> RunConfig:
    """Parse configuration text; relative field files resolve against ``path``."""
    lines = text.splitlines()
    reader = _Reader(_read(text, path), lines, path)
    reader.check_known(DEFAULTS)

    grid = reader.build(
        "domain",
        lambda: Grid(reader.real("domain", "L"), reader.integer("domain", "N")),
    )
    params = PhysicalParams(
        alpha=reader.real("physics", "alpha"),
        beta=reader.real("physics", "beta"),
        gamma=reader.real("physics", "gamma"),
        lambda1=reader.real("physics", "lambda1"),
        lambda2=reader.real("physics", "lambda2"),
    )
    kind = reader.raw("source", "kind").lower()
    if kind not in SOURCE_KINDS:
        raise reader.error(
            "source",
            "kind",
            f"unknown source kind {kind!r}; expected power, power-difference or null.",
        )
    eta = reader.real("source", "eta")
    source: SourceModel
    if SOURCE_KINDS[kind] == "power":
        source = PowerDifferenceSource(a=reader.real("source", "a"), eta=eta)
    else:
        source = NullSource(eta=eta)

    verdict = validate_params(params, source)
    if not verdict:
        first = verdict.violations[0]
        section = "source" if re.match(r"(a|eta|beta\d) ", first) else "physics"
        raise reader.error(
            section,
            _mentioned_key(first, DEFAULTS[section]),
            " ".join(verdict.violations),
        )

    base = path.parent if path is not None else Path.cwd()
    descriptors = tuple(reader.raw("initial", name) for name in FIELD_NAMES)
    specs = [
        _load_field(descriptor, base, reader, name)
        for name, descriptor in zip(FIELD_NAMES, descriptors, strict=True)
    ]
    initial = InitialData(*specs)
    reader.build("initial", lambda: initial.resolve(grid))

    sim = reader.build(
        "time",
        lambda: SimConfig(
            dt0=reader.real("time", "dt0"),
            cfl=reader.real("time", "cfl"),
            t_end=reader.real("time", "t_end"),
            blowup_threshold=reader.real("time", "blowup_threshold"),
            dt_min=reader.real("time", "dt_min"),
            sample_stride=reader.integer("time", "sample_stride"),
        ),
    )
    stride = reader.integer("output", "stride")
    if stride < 1:
        raise reader.error(
            "output", "stride", f"stride must be at least 1; received {stride}."
        )
    lambda_cert = reader.real("certificate", "lambda_cert")
    if lambda_cert <= 0.0:
        raise reader.error(
            "certificate",
            "lambda_cert",
            f"lambda_cert must be greater than zero; received {lambda_cert}.",
        )
    search_points = reader.integer("certificate", "search_points")
    if search_points < 1:
        raise reader.error(
            "certificate",
            "search_points",
            f"search_points must be at least 1; received {search_points}.",
        )

    return RunConfig(
        path=path,
        grid=grid,
        params=params,
        source=source,
        initial=initial,
        sim=sim,
        output_dir=Path(reader.raw("output", "dir")),
        output_stride=stride,
        lambda_cert=lambda_cert,
        search_points=search_points,
        descriptors=(descriptors[0], descriptors[1], descriptors[2], descriptors[3]),
    )


@dataclass(frozen=True)
class SweepGrid:
    """Values per sweep key; points are their Cartesian product."""

    values: dict[str, tuple[float, ...]]
    path: Path | None = None

    def points(self) -> Iterator[dict[str, float]]:
        keys = [key for key in SWEEP_KEYS if key in self.values]
        for combination in itertools.product(*(self.values[key] for key in keys)):
            yield dict(zip(keys, combination, strict=True))

    def check(self, base: RunConfig) -> None:
        """Validate every point against ``base`` before anything runs.

        Raises:
            ConfigError: A point violates a model constraint.
        """
        for index, point in enumerate(self.points()):
            config = base.with_overrides(point)
            verdict = validate_params(config.params, config.source)
            if verdict:
                continue
            values = ", ".join(f"{key}={value:g}" for key, value in point.items())
            key = _mentioned_key(verdict.violations[0], dict.fromkeys(SWEEP_KEYS, ""))
            line: int | None = None
            if self.path is not None and key is not None:
                lines = self.path.read_text(encoding="utf-8").splitlines()
                line = _locate(lines, "sweep", key)
            raise ConfigError(
                f"sweep point {index} ({values}) is invalid: "
                + " ".join(verdict.violations),
                path=self.path,
                line=line,
                key=key,
            )

    def __len__(self) -> int:
        count = 1
        for values in self.values.values():
            count *= len(values)
        return count


def parse_sweep_grid(path: Path | str) -> SweepGrid:
    """Read a ``[sweep]`` section of comma-separated value lists.

    Points are checked against a base configuration by :meth:`SweepGrid.check`.

    Raises:
        FileNotFoundError: ``path`` does not exist.
        ConfigError: The file is malformed or a list is empty or not numeric.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    reader = _Reader(_read(text, path), text.splitlines(), path)
    reader.check_known({"sweep": {key: "" for key in SWEEP_KEYS}})
    values: dict[str, tuple[float, ...]] = {}
    if reader.parser.has_section("sweep"):
        for key in SWEEP_KEYS:
            if not reader.parser.has_option("sweep", key):
                continue
            raw = reader.parser.get("sweep", key)
            items = [item.strip() for item in raw.split(",")]
            try:
                numbers = tuple(float(item) for item in items if item)
            except ValueError as error:
                raise reader.error("sweep", key, f"{key} must list numbers.") from error
            if not numbers:
                raise reader.error("sweep", key, f"{key} lists no values.")
            values[key] = numbers
    if not values:
        raise ConfigError("the sweep grid declares no values.", path=path)
    return SweepGrid(values, path)
