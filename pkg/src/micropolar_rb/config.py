"""Run configuration: strict JSON loading with defaults."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .diagnostics import CHECKS
from .dynamics import Params
from .initial import IC_NAMES, RANDOM_ICS
from .spectral import TWO_PI, Grid
from .timestepper import IntegratorConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GridConfig:
    n: int = 128
    length: float = TWO_PI
    dealias_radius: float | None = None

    def build(self) -> Grid:
        return Grid(self.n, self.length, self.dealias_radius)


@dataclass(frozen=True)
class ICConfig:
    name: str = "taylor-green"
    params: dict = field(default_factory=dict)
    seed: int | None = None


@dataclass(frozen=True)
class DiagnosticsConfig:
    cadence: int = 10
    checks: tuple[str, ...] = CHECKS
    p_norms: tuple[float, ...] = (2.0, 4.0, 8.0, math.inf)
    s_values: tuple[float, ...] = (2.5,)
    bkm_s: float = 2.5
    bkm_p: float = 4.0
    gn_p: float = 4.0
    ceiling: float = math.inf


@dataclass(frozen=True)
class RunConfig:
    params: Params
    grid: GridConfig = GridConfig()
    integrator: IntegratorConfig = IntegratorConfig()
    ic: ICConfig = ICConfig()
    diagnostics: DiagnosticsConfig = DiagnosticsConfig()
    output_dir: str = "output"

    def with_overrides(self, output_dir=None, seed=None, cadence=None) -> RunConfig:
        cfg = self
        if output_dir is not None:
            cfg = replace(cfg, output_dir=str(output_dir))
        if seed is not None:
            cfg = replace(cfg, ic=replace(cfg.ic, seed=int(seed)))
        if cadence is not None:
            if cadence < 1:
                raise ConfigError("diagnostics.cadence: must be >= 1")
            cfg = replace(cfg, diagnostics=replace(cfg.diagnostics, cadence=int(cadence)))
        return cfg


def _number(x, path: str) -> float:
    if isinstance(x, str) and x.lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {x!r}")
    return float(x)


def _section(cls, data, path: str, converters: dict | None = None, required: tuple = ()):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected an object")
    known = {f.name for f in fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown key '{path}.{key}'")
    for key in required:
        if key not in data:
            raise ConfigError(f"missing key '{path}.{key}'")
    kwargs = {}
    for key, value in data.items():
        conv = (converters or {}).get(key)
        kwargs[key] = conv(value, f"{path}.{key}") if conv else value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _int(x, path):
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(f"{path}: expected an integer, got {x!r}")
    return x


def _numbers(x, path):
    if not isinstance(x, list):
        raise ConfigError(f"{path}: expected a list")
    return tuple(_number(v, f"{path}[{i}]") for i, v in enumerate(x))


def _checks(x, path):
    if not isinstance(x, list):
        raise ConfigError(f"{path}: expected a list")
    for i, c in enumerate(x):
        if c not in CHECKS:
            raise ConfigError(f"{path}[{i}]: unknown check {c!r}; known: {', '.join(CHECKS)}")
    return tuple(x)


def _dt(x, path):
    return x if x == "auto" else _number(x, path)


def parse_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config: expected an object")
    top = {f.name for f in fields(RunConfig)}
    for key in data:
        if key not in top:
            raise ConfigError(f"unknown key '{key}'")
    if "params" not in data:
        raise ConfigError("missing key 'params'")
    params = _section(
        Params,
        data["params"],
        "params",
        {k: _number for k in ("kappa", "gamma", "mu")},
        required=("kappa", "gamma", "mu"),
    )
    kw = {"params": params}
    if "grid" in data:
        kw["grid"] = _section(GridConfig, data["grid"], "grid", {"n": _int, "length": _number})
        try:
            kw["grid"].build()
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}") from None
    if "integrator" in data:
        kw["integrator"] = _section(
            IntegratorConfig,
            data["integrator"],
            "integrator",
            {"t_end": _number, "dt": _dt, "cfl_safety": _number},
        )
    if "ic" in data:
        ic = _section(ICConfig, data["ic"], "ic", {"seed": _int})
        if ic.name not in IC_NAMES:
            raise ConfigError(f"ic.name: unknown initial condition {ic.name!r}; known: {', '.join(IC_NAMES)}")
        if not isinstance(ic.params, dict):
            raise ConfigError("ic.params: expected an object")
        kw["ic"] = ic
    if "diagnostics" in data:
        kw["diagnostics"] = _section(
            DiagnosticsConfig,
            data["diagnostics"],
            "diagnostics",
            {
                "cadence": _int,
                "checks": _checks,
                "p_norms": _numbers,
                "s_values": _numbers,
                "bkm_s": _number,
                "bkm_p": _number,
                "gn_p": _number,
                "ceiling": _number,
            },
        )
        if kw["diagnostics"].cadence < 1:
            raise ConfigError("diagnostics.cadence: must be >= 1")
    if "output_dir" in data:
        if not isinstance(data["output_dir"], str):
            raise ConfigError("output_dir: expected a string")
        kw["output_dir"] = data["output_dir"]
    cfg = RunConfig(**kw)
    if cfg.ic.name in RANDOM_ICS and cfg.ic.seed is None:
        raise ConfigError(f"ic.seed: required for randomized initial condition {cfg.ic.name!r}")
    return cfg


def load_config(path) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON: {exc}") from None
    return parse_config(data)
