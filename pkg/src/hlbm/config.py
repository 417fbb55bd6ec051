"""Sectioned key-value run configuration.

Example::

    [grid]
    nx = 32
    ny = 32
    [physics]
    tau_lb = 0.8
    [porosity]
    K = inf

Every key has a default except ``grid.nx`` and ``grid.ny`` (required for
``run``).  Parsing reports all problems at once, each with its line.
"""

from __future__ import annotations

import configparser
import datetime as _dt
import math
import os
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional

from hlbm import __version__


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


def _float(text: str) -> float:
    value = float(text)
    if math.isnan(value):
        raise ValueError("nan is not allowed")
    return value


def _int(text: str) -> int:
    return int(text)


def _str(text: str) -> str:
    return text.strip()


def _int_list(text: str) -> tuple:
    return tuple(int(t) for t in re.split(r"[,\s]+", text.strip()) if t)


def _float_list(text: str) -> tuple:
    return tuple(_float(t) for t in re.split(r"[,\s]+", text.strip()) if t)


def _word_list(text: str) -> tuple:
    return tuple(t for t in re.split(r"[,\s]+", text.strip().lower()) if t)


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], Any]
    default: Any
    required: bool = False


SCHEMA: dict[str, dict[str, Key]] = {
    "grid": {"nx": Key(_int, None, True), "ny": Key(_int, None, True)},
    "physics": {
        "tau_lb": Key(_float, 0.8),
        "force_x": Key(_float, 0.0),
        "force_y": Key(_float, 0.0),
        "rho0": Key(_float, 1.0),
        "ux0": Key(_float, 0.0),
        "uy0": Key(_float, 0.0),
    },
    "porosity": {"K": Key(_float, math.inf)},
    "boundary": {"x": Key(_str, "periodic"), "y": Key(_str, "periodic")},
    "output": {
        "name": Key(_str, "run"),
        "steps": Key(_int, 0),
        "every": Key(_int, 0),
        "format": Key(_word_list, ("csv",)),
    },
    "cellperm": {
        "delta": Key(_float, 0.5),
        "resolution": Key(_int, 64),
        "tau": Key(_float, 1.0),
        "tol": Key(_float, 1e-6),
    },
    "bench": {"case": Key(_str, "brinkman_channel"), "ladder": Key(_int_list, ())},
    "regime": {
        "d": Key(_int, 3),
        "C": Key(_float, 1.0),
        "n": Key(_int_list, (1, 2, 3, 4)),
        "eps": Key(_float_list, (0.01, 0.02, 0.05, 0.1, 0.2, 0.5)),
    },
}


def _format_value(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return "inf" if value == math.inf else ("-inf" if value == -math.inf else f"{value:.17g}")
    if isinstance(value, tuple):
        return ", ".join(_format_value(v) for v in value)
    return str(value)


def _timestamp() -> str:
    # SOURCE_DATE_EPOCH pins the stamp for reproducible outputs
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        moment = _dt.datetime.fromtimestamp(int(epoch), tz=_dt.timezone.utc)
    else:
        moment = _dt.datetime.now(tz=_dt.timezone.utc).replace(microsecond=0)
    return moment.isoformat()


@dataclass(frozen=True)
class Provenance:
    tool_version: str
    timestamp: str
    source_text: str


@dataclass(frozen=True)
class ResolvedConfig:
    """Every key resolved; equality ignores provenance."""

    values: dict
    provenance: Provenance = field(compare=False, repr=False, default=None)

    def __getitem__(self, section: str) -> dict:
        return self.values[section]

    def get(self, dotted: str):
        section, key = dotted.split(".", 1)
        return self.values[section][key]

    def serialize(self, sections: Optional[Iterable[str]] = None) -> str:
        lines = []
        for sec in sections or SCHEMA:
            lines.append(f"[{sec}]")
            for key in SCHEMA[sec]:
                value = self.values[sec][key]
                lines.append(f"{key} = {'' if value is None else _format_value(value)}")
            lines.append("")
        return "\n".join(lines)

    def header_lines(self) -> list[str]:
        """Provenance plus the full resolved config, for output file headers."""
        prov = self.provenance
        out = [f"hlbm {prov.tool_version if prov else __version__}"]
        if prov:
            out.append(f"generated {prov.timestamp}")
        out.extend(line for line in self.serialize().splitlines() if line)
        return out

    def simulation_config(self):
        from hlbm.lattice import SimulationConfig

        g, ph, b, o = self["grid"], self["physics"], self["boundary"], self["output"]
        return SimulationConfig(
            nx=g["nx"], ny=g["ny"], tau=ph["tau_lb"], K=self["porosity"]["K"],
            force=(ph["force_x"], ph["force_y"]),
            periodic=(b["x"] == "periodic", b["y"] == "periodic"),
            rho0=ph["rho0"], u0=(ph["ux0"], ph["uy0"]),
            steps=o["steps"], every=o["every"],
        )

    def unit_cell_spec(self):
        from hlbm.cellperm import UnitCellSpec

        c = self["cellperm"]
        return UnitCellSpec(resolution=c["resolution"], delta=c["delta"], tau=c["tau"], tol=c["tol"])

    def benchmark_case(self):
        from hlbm.bench import BenchmarkCase

        return BenchmarkCase(self["bench"]["case"], ladder=self["bench"]["ladder"])


_SECTION = re.compile(r"^\s*\[([^\]]+)\]")
_ENTRY = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")


def _line_index(text: str) -> dict:
    where = {}
    section = None
    for no, line in enumerate(text.splitlines(), start=1):
        m = _SECTION.match(line)
        if m:
            section = m.group(1).strip()
            where.setdefault((section, None), no)
            continue
        m = _ENTRY.match(line)
        if m and section is not None and not line[:1].isspace():
            where.setdefault((section, m.group(1).strip()), no)
    return where


def parse_override(item: str) -> tuple[str, str, str]:
    """``section.key=value`` -> ``(section, key, value)``."""
    if "=" not in item or "." not in item.split("=", 1)[0]:
        raise ConfigError([f"--set {item!r}: expected section.key=value"])
    lhs, value = item.split("=", 1)
    section, key = lhs.strip().split(".", 1)
    return section.strip(), key.strip(), value.strip()


def parse_config(
    text: str,
    overrides: Iterable[str] = (),
    required: bool = True,
) -> ResolvedConfig:
    """Parse, fill defaults and validate.  Raises :class:`ConfigError` listing every problem."""
    errors: list[str] = []
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        prefix = f"line {line}: " if line else ""
        raise ConfigError([prefix + str(exc).splitlines()[0]]) from None
    lines = _line_index(text)

    raw: dict[tuple[str, str], tuple[str, str]] = {}
    for sec in cp.sections():
        if sec not in SCHEMA:
            errors.append(f"line {lines.get((sec, None), '?')}: unknown section [{sec}]")
            continue
        for key, value in cp.items(sec):
            where = f"line {lines.get((sec, key), '?')}"
            if key not in SCHEMA[sec]:
                errors.append(f"{where}: unknown key {sec}.{key}")
                continue
            raw[(sec, key)] = (value, where)
    for item in overrides:
        try:
            sec, key, value = parse_override(item)
        except ConfigError as exc:
            errors.extend(exc.errors)
            continue
        if sec not in SCHEMA or key not in SCHEMA[sec]:
            errors.append(f"--set {item}: unknown key {sec}.{key}")
            continue
        raw[(sec, key)] = (value, f"--set {sec}.{key}")

    values: dict[str, dict] = {}
    where_of: dict[tuple[str, str], str] = {}
    for sec, keys in SCHEMA.items():
        values[sec] = {}
        for key, spec in keys.items():
            if (sec, key) in raw:
                text_value, where = raw[(sec, key)]
                where_of[(sec, key)] = where
                try:
                    values[sec][key] = spec.parse(text_value)
                except (ValueError, TypeError):
                    errors.append(f"{where}: {sec}.{key} = {text_value!r} is not a valid value")
                    values[sec][key] = spec.default
            else:
                if spec.required and required:
                    errors.append(f"missing required key {sec}.{key}")
                values[sec][key] = spec.default

    def fail(sec, key, message):
        errors.append(f"{where_of.get((sec, key), 'default')}: {sec}.{key}: {message}")

    g = values["grid"]
    for key in ("nx", "ny"):
        if g[key] is not None and g[key] < 1:
            fail("grid", key, "must be at least 1")
    ph = values["physics"]
    if not ph["tau_lb"] > 0.5:
        fail("physics", "tau_lb", "relaxation time must exceed 0.5")
    if not ph["rho0"] > 0:
        fail("physics", "rho0", "density must be positive")
    K = values["porosity"]["K"]
    if not K > 0:
        fail("porosity", "K", "permeability must be positive (porosity control varpi = 1 - nu*tau/K needs K > 0)")
    elif ph["tau_lb"] > 0.5 and not math.isinf(K):
        nu = (ph["tau_lb"] - 0.5) / 3.0
        if 1.0 - nu * ph["tau_lb"] / K < 0:
            fail("porosity", "K", "porosity control varpi = 1 - nu*tau/K is negative; raise K or lower tau_lb")
    for key in ("x", "y"):
        if values["boundary"][key] not in ("periodic", "wall"):
            fail("boundary", key, "must be 'periodic' or 'wall'")
    o = values["output"]
    if not re.fullmatch(r"[A-Za-z0-9_.-]+", o["name"] or ""):
        fail("output", "name", "must be a non-empty file-name stem")
    for key in ("steps", "every"):
        if o[key] < 0:
            fail("output", key, "must be non-negative")
    if not o["format"] or set(o["format"]) - {"csv", "vtk"}:
        fail("output", "format", "must list csv and/or vtk")
    c = values["cellperm"]
    if not 0 < c["delta"] < 1:
        fail("cellperm", "delta", "obstacle diameter must lie in (0, 1)")
    if c["resolution"] < 4:
        fail("cellperm", "resolution", "must be at least 4")
    if not c["tau"] > 0.5:
        fail("cellperm", "tau", "relaxation time must exceed 0.5")
    if not c["tol"] > 0:
        fail("cellperm", "tol", "must be positive")
    from hlbm.bench import CASES

    if values["bench"]["case"] not in CASES:
        fail("bench", "case", f"unknown case; choose from {', '.join(sorted(CASES))}")
    r = values["regime"]
    if r["d"] not in (2, 3):
        fail("regime", "d", "must be 2 or 3")
    if not r["C"] > 0:
        fail("regime", "C", "must be positive")
    if not r["n"] or any(n < 1 for n in r["n"]):
        fail("regime", "n", "exponents must be integers >= 1")
    if not r["eps"] or any(not e > 0 for e in r["eps"]):
        fail("regime", "eps", "cell sizes must be positive")

    if errors:
        raise ConfigError(errors)
    return ResolvedConfig(values=values, provenance=Provenance(__version__, _timestamp(), text))


def load_config(path: Optional[str], overrides: Iterable[str] = (), required: bool = True) -> ResolvedConfig:
    text = ""
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError([f"{path}: {exc.strerror}"]) from None
    return parse_config(text, overrides, required=required)
