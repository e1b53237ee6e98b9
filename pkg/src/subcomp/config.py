"""Run configuration: a flat ``key = value`` file with dotted section keys.

Example::

    # VG scenario
    kernel.type = skew
    kernel.beta = 0.0
    subordinator.c = 1
    subordinator.lambda = 1
    subordinator.alpha = 0
    scenario.window = 0.5:inf

Blank lines and ``#`` comments are ignored.  Windows are comma-separated
``lo:hi`` intervals, ``inf`` allowed; lists are comma-separated numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .levy_models import SubordinatorSpec, TemperedStableParams
from .markov import CompoundPoissonKernel, CompoundPoissonParams, SkewBMKernel, SkewParams
from .mc_verify import Scenario

__all__ = ["RunConfig", "ConfigError", "load_config", "parse_config", "dump_config"]

COMMANDS = ("simulate", "density", "verify", "selftest")
FORMATS = ("csv", "json")
KERNELS = ("skew", "compound_poisson")


class ConfigError(ValueError):
    pass


def _key(name, default, kind):
    return field(default=default, metadata={"key": name, "kind": kind})


@dataclass(frozen=True)
class RunConfig:
    command: str = _key("command", "verify", "str")
    kernel: str = _key("kernel.type", "skew", "str")
    beta: float = _key("kernel.beta", 0.0, "float")
    rate: float = _key("kernel.rate", 1.0, "float")
    jump_std: float = _key("kernel.jump_std", 1.0, "float")
    c: float = _key("subordinator.c", 1.0, "float")
    lam: float = _key("subordinator.lambda", 1.0, "float")
    alpha: float = _key("subordinator.alpha", 0.0, "float")
    drift: float = _key("subordinator.drift", 0.0, "float")
    eps: float = _key("subordinator.eps", 1e-4, "float")
    horizon: float = _key("scenario.horizon", 1.0, "float")
    x0: float = _key("scenario.x0", 0.0, "float")
    window: tuple = _key("scenario.window", ((0.5, math.inf),), "window")
    n_paths: int = _key("scenario.paths", 100_000, "int")
    seed: int = _key("scenario.seed", 0, "int")
    coupled: bool = _key("scenario.coupled", False, "bool")
    block_size: int = _key("scenario.block_size", 2000, "int")
    y_min: float = _key("density.y_min", -3.0, "float")
    y_max: float = _key("density.y_max", 3.0, "float")
    n_points: int = _key("density.n_points", 61, "int")
    x_values: tuple = _key("density.x_values", (-1.0, 0.0, 0.3, 2.0), "floats")
    exclude: float = _key("density.exclude", 0.05, "float")
    output_path: str = _key("output.path", "", "str")
    output_format: str = _key("output.format", "json", "str")

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"command must be one of {COMMANDS}")
        if self.output_format not in FORMATS:
            raise ConfigError(f"output.format must be one of {FORMATS}")
        if self.kernel not in KERNELS:
            raise ConfigError(f"kernel.type must be one of {KERNELS}")
        if self.n_points < 2:
            raise ConfigError("density.n_points must be >= 2")
        if not self.exclude > 0:
            raise ConfigError("density.exclude must be positive (densities are singular at 0)")

    # domain objects

    def subordinator(self) -> SubordinatorSpec:
        return SubordinatorSpec(TemperedStableParams(self.c, self.lam, self.alpha),
                                self.drift, self.eps)

    def make_kernel(self):
        if self.kernel == "skew":
            return SkewBMKernel(SkewParams(self.beta))
        return CompoundPoissonKernel(CompoundPoissonParams(self.rate, self.jump_std))

    def scenario(self) -> Scenario:
        return Scenario(self.make_kernel(), self.subordinator(), self.horizon, self.x0,
                        self.window, self.n_paths, self.seed, self.coupled, self.block_size)

    def y_grid(self):
        y = np.linspace(self.y_min, self.y_max, self.n_points)
        return y[np.abs(y) >= self.exclude]

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _fmt_float(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def _format(kind, value) -> str:
    if kind == "float":
        return _fmt_float(value)
    if kind == "int":
        return str(int(value))
    if kind == "bool":
        return "true" if value else "false"
    if kind == "floats":
        return ", ".join(_fmt_float(v) for v in value)
    if kind == "window":
        return ", ".join(f"{_fmt_float(lo)}:{_fmt_float(hi)}" for lo, hi in value)
    return str(value)


def _parse(kind, text: str, key: str):
    try:
        if kind == "float":
            return float(text)
        if kind == "int":
            return int(text)
        if kind == "bool":
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return low in ("true", "1", "yes")
        if kind == "floats":
            return tuple(float(v) for v in text.split(",") if v.strip())
        if kind == "window":
            out = []
            for part in text.split(","):
                if part.strip():
                    lo, hi = part.split(":")
                    out.append((float(lo), float(hi)))
            return tuple(out)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r}") from exc
    return text


_FIELDS = {f.metadata["key"]: f for f in fields(RunConfig)}


def parse_config(text: str) -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        f = _FIELDS[key]
        values[f.name] = _parse(f.metadata["kind"], value, key)
    return RunConfig(**values)


def dump_config(cfg: RunConfig) -> str:
    lines = [f"{f.metadata['key']} = {_format(f.metadata['kind'], getattr(cfg, f.name))}"
             for f in fields(RunConfig)]
    return "\n".join(lines) + "\n"


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
