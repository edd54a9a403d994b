"""Scenario configuration: a flat ``key = value`` text file with ``#`` comments.

Keys are dotted (``grid.n_cells``, ``init.epsilon``, ...); anything not given
takes the default listed in :data:`DEFAULT_DOC`.  ``snapshot_times`` is a
comma-separated list whose entries may be written as multiples of the time
step, e.g. ``0, 1tau, 20tau``.
"""
from __future__ import annotations

import configparser
import dataclasses
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .grid import Boundary, Grid
from .pde import SystemKind
from .scheme import SolverConfig
from .thermo import InvalidParameterError, ThermoParams

__all__ = [
    "ConfigError",
    "GridParams",
    "InitParams",
    "ScenarioConfig",
    "CONFIG_ENV_VAR",
    "CONFIG_FILENAME",
    "load_config",
    "parse_config",
    "write_config",
    "format_config",
    "apply_overrides",
    "find_default_config",
]

CONFIG_ENV_VAR = "HKHYDRO_CONFIG_PATH"
CONFIG_FILENAME = "hkhydro.cfg"
_SECTION = "scenario"


class ConfigError(ValueError):
    def __init__(self, message, key=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"`{key}`")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.key = key
        self.line = line


@dataclass(frozen=True)
class GridParams:
    q_min: float = -50.0
    q_max: float = 50.0
    n_cells: int = 1024
    gamma: float = 1.0
    boundary: Boundary = Boundary.PERIODIC

    def build(self) -> Grid:
        return Grid.from_gamma(self.q_min, self.q_max, self.n_cells, self.gamma, self.boundary)


@dataclass(frozen=True)
class InitParams:
    u_inf: float = 0.5
    v_inf: float = 0.0
    epsilon: float = 0.1
    sigma: float = 1.0
    q0: float = 0.0


@dataclass(frozen=True)
class ScenarioConfig:
    system: SystemKind = SystemKind.MODIFIED_T0
    thermo: ThermoParams = field(default_factory=ThermoParams)
    grid: GridParams = field(default_factory=GridParams)
    init: InitParams = field(default_factory=InitParams)
    solver: SolverConfig = field(default_factory=SolverConfig)
    snapshot_times: tuple = ()
    output_dir: str = "runs"
    seed: int = 0

    @property
    def tau(self) -> float:
        return self.grid.build().tau

    @property
    def horizon(self) -> float:
        return self.solver.max_steps * self.tau

    def with_overrides(self, overrides: dict) -> "ScenarioConfig":
        return parse_config({**flatten(self), **overrides})


_SUBSECTIONS = {"thermo": ThermoParams, "grid": GridParams, "init": InitParams, "solver": SolverConfig}
_TOP_LEVEL = ("system", "snapshot_times", "output_dir", "seed")

DEFAULT_DOC = {
    "system": "nelson | modified-t0 | general-t",
    "thermo.hbar": "reduced Planck constant",
    "thermo.k_B": "Boltzmann constant",
    "thermo.m": "particle mass",
    "thermo.omega": "oscillator frequency",
    "thermo.T": "Kelvin temperature; general-t resolves xi_T from it",
    "grid.q_min": "left end of the domain",
    "grid.q_max": "right end of the domain",
    "grid.n_cells": "number of cells, h = (q_max - q_min) / n_cells",
    "grid.gamma": "tau / h",
    "grid.boundary": "periodic | far-field",
    "init.u_inf": "background diffusion velocity",
    "init.v_inf": "background drift velocity",
    "init.epsilon": "amplitude of the Gaussian bump in u",
    "init.sigma": "width of the bump (>= 2h)",
    "init.q0": "centre of the bump",
    "solver.picard_tol": "relative sup-norm tolerance of the Picard iteration",
    "solver.picard_max_iters": "Picard iteration budget per time level",
    "solver.blowup_factor": "blow-up when sup-norm exceeds factor * max(1, initial sup-norm)",
    "solver.max_steps": "run horizon in time steps",
    "solver.picard_failure_diverges": "report Picard failure as Diverged (else IterationFailed)",
    "snapshot_times": "extra snapshot times, comma separated; '20tau' means 20 time steps",
    "output_dir": "directory for run artifacts",
    "seed": "reserved; the shipped scenarios are deterministic",
}


def _keys() -> list:
    keys = ["system"]
    for name, cls in _SUBSECTIONS.items():
        keys += [f"{name}.{f.name}" for f in dataclasses.fields(cls)]
    return keys + ["snapshot_times", "output_dir", "seed"]


KNOWN_KEYS = _keys()


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, (SystemKind, Boundary)):
        return value.value
    if isinstance(value, tuple):
        return ", ".join(_fmt(float(x)) for x in value)
    return str(value)


def flatten(cfg: ScenarioConfig) -> dict:
    flat = {"system": _fmt(cfg.system)}
    for name in _SUBSECTIONS:
        sub = getattr(cfg, name)
        for f in dataclasses.fields(sub):
            flat[f"{name}.{f.name}"] = _fmt(getattr(sub, f.name))
    flat["snapshot_times"] = _fmt(tuple(cfg.snapshot_times))
    flat["output_dir"] = cfg.output_dir
    flat["seed"] = _fmt(cfg.seed)
    return flat


def format_config(cfg: ScenarioConfig) -> str:
    lines = ["# hkhydro scenario configuration"]
    for key, value in flatten(cfg).items():
        lines.append(f"# {DEFAULT_DOC[key]}")
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def write_config(cfg: ScenarioConfig, path) -> Path:
    path = Path(path)
    path.write_text(format_config(cfg))
    return path


def _convert(key: str, raw: str, ftype):
    text = raw.strip()
    try:
        if ftype is bool:
            low = text.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if ftype is int:
            value = float(text)
            if not value.is_integer():
                raise ValueError(f"not an integer: {text!r}")
            return int(value)
        if ftype is float:
            return float(text)
        return ftype(text)
    except ValueError as exc:
        raise ConfigError(str(exc), key=key) from None


def _field_types(cls) -> dict:
    hints = {"float": float, "int": int, "bool": bool}
    out = {}
    for f in dataclasses.fields(cls):
        t = f.type if not isinstance(f.type, str) else hints.get(f.type, f.type)
        if cls is GridParams and f.name == "boundary":
            t = Boundary
        out[f.name] = t
    return out


def _parse_times(raw: str, tau: float) -> tuple:
    times = []
    for item in raw.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            if item.endswith("tau"):
                mult = item[:-3].strip()
                times.append((float(mult) if mult else 1.0) * tau)
            else:
                times.append(float(item))
        except ValueError:
            raise ConfigError(f"bad time entry {item!r}", key="snapshot_times") from None
    return tuple(sorted(times))


def parse_config(flat: dict) -> ScenarioConfig:
    """Validate a flat ``{key: text}`` mapping and fill in defaults."""
    unknown = sorted(set(flat) - set(KNOWN_KEYS))
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(unknown)}", key=unknown[0])

    subs = {}
    for name, cls in _SUBSECTIONS.items():
        types = _field_types(cls)
        kwargs = {}
        for fname, ftype in types.items():
            key = f"{name}.{fname}"
            if key in flat:
                kwargs[fname] = _convert(key, flat[key], ftype)
        try:
            subs[name] = cls(**kwargs)
        except (InvalidParameterError, ValueError) as exc:
            bad = next((f"{name}.{k}" for k in kwargs if k in str(exc)), name)
            raise ConfigError(str(exc), key=bad) from None

    system = _convert("system", flat.get("system", SystemKind.MODIFIED_T0.value), SystemKind)
    seed = _convert("seed", flat.get("seed", "0"), int)
    output_dir = flat.get("output_dir", "runs").strip()

    try:
        grid = subs["grid"].build()
    except ValueError as exc:
        raise ConfigError(str(exc), key="grid") from None
    init = subs["init"]
    if not (math.isfinite(init.epsilon) and init.epsilon >= 0):
        raise ConfigError(f"must be >= 0, got {init.epsilon!r}", key="init.epsilon")
    if not init.sigma >= 2.0 * grid.h:
        raise ConfigError(f"must be >= 2h = {2.0 * grid.h:.6g}, got {init.sigma!r}", key="init.sigma")

    times = _parse_times(flat.get("snapshot_times", ""), grid.tau)
    horizon = subs["solver"].max_steps * grid.tau
    for t in times:
        if t < 0 or t > horizon * (1 + 1e-12):
            raise ConfigError(f"time {t!r} outside the run horizon [0, {horizon:.6g}]", key="snapshot_times")

    return ScenarioConfig(
        system=system, thermo=subs["thermo"], grid=subs["grid"], init=init,
        solver=subs["solver"], snapshot_times=times, output_dir=output_dir, seed=seed,
    )


def _read_flat(text: str, source: str) -> dict:
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#",), comment_prefixes=("#",),
        delimiters=("=",), strict=True,
    )
    parser.optionxform = str
    try:
        # synthetic section header shifts line numbers by one
        parser.read_string(f"[{_SECTION}]\n" + text, source=source)
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"cannot parse {line.strip()!r}", line=lineno - 1) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError("duplicate key", key=exc.option, line=exc.lineno - 1) from None
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    return dict(parser.items(_SECTION))


def apply_overrides(flat: dict, assignments: Iterable[str]) -> dict:
    flat = dict(flat)
    for item in assignments:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"override must look like key=value, got {item!r}")
        flat[key.strip()] = value.strip()
    return flat


def load_config(path=None, overrides: Iterable[str] = ()) -> ScenarioConfig:
    """Read, override and validate a configuration file (``None`` means all defaults)."""
    flat = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        flat = _read_flat(path.read_text(), str(path))
    return parse_config(apply_overrides(flat, overrides))


def find_default_config() -> Optional[Path]:
    """First ``hkhydro.cfg`` found along ``$HKHYDRO_CONFIG_PATH``."""
    for entry in os.environ.get(CONFIG_ENV_VAR, "").split(os.pathsep):
        if not entry:
            continue
        p = Path(entry)
        if p.is_file():
            return p
        if (p / CONFIG_FILENAME).is_file():
            return p / CONFIG_FILENAME
    return None
