"""Line-oriented run configuration: "key = value" pairs, '#' comments.

The parser applies defaults, validates every value, and rejects unknown
keys; errors carry the offending line number. format_config_echo renders a
parsed configuration back to canonical text that reparses to an identical
configuration (floats via repr, so the round trip is exact).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Optional

from .characteristics import blowup_bound

__all__ = ["ConfigError", "RunConfigFile", "parse_config", "format_config_echo"]

EXPERIMENTS = ("single", "eps_sweep", "blowup", "convergence", "convcheck")
IC_KINDS = ("bump", "gaussian_truncated", "indicator_smoothed", "custom_csv")


class ConfigError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass
class RunConfigFile:
    """Validated contents of one configuration document."""

    n_nodes: int
    half_width: float
    t_end: float
    epsilon: float = 0.0
    r_coeff: float = 1.0
    cfl: float = 0.4
    dt_min: float = 1e-12
    grad_blowup_factor: float = 1e4
    output_stride: int = 100
    experiment: str = "single"
    ic_kind: str = "bump"
    ic_L: float = 1.0
    ic_amplitude: float = 1.0
    ic_mass: Optional[float] = None
    ic_sigma: Optional[float] = None
    ic_ramp: Optional[float] = None
    ic_path: Optional[str] = None
    snapshot_times: list[float] = field(default_factory=list)
    output_dir: str = "out"
    seed: int = 0

    def derived_blowup_time_upper_bound(self) -> Optional[float]:
        """2L exp(2L)/mass for mass-normalized data, else None."""
        if self.ic_mass is None:
            return None
        return blowup_bound(self.ic_L, self.ic_mass)


_REQUIRED = ("n_nodes", "half_width", "t_end")

_PARSERS = {
    "n_nodes": ("int", None),
    "half_width": ("float", None),
    "t_end": ("float", None),
    "epsilon": ("float", None),
    "r_coeff": ("float", None),
    "cfl": ("float", None),
    "dt_min": ("float", None),
    "grad_blowup_factor": ("float", None),
    "output_stride": ("int", None),
    "experiment": ("str", EXPERIMENTS),
    "ic_kind": ("str", IC_KINDS),
    "ic_L": ("float", None),
    "ic_amplitude": ("float", None),
    "ic_mass": ("float", None),
    "ic_sigma": ("float", None),
    "ic_ramp": ("float", None),
    "ic_path": ("str", None),
    "snapshot_times": ("float_list", None),
    "output_dir": ("str", None),
    "seed": ("int", None),
}


def _convert(key: str, raw: str, lineno: int):
    kind, choices = _PARSERS[key]
    if kind == "int":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {raw!r}", lineno) from None
    if kind == "float":
        try:
            val = float(raw)
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {raw!r}", lineno) from None
        if not math.isfinite(val):
            raise ConfigError(f"{key} must be finite", lineno)
        return val
    if kind == "float_list":
        if not raw.strip():
            return []
        try:
            return [float(tok) for tok in raw.split(",")]
        except ValueError:
            raise ConfigError(f"{key} must be a comma-separated list of numbers", lineno) from None
    if choices is not None and raw not in choices:
        raise ConfigError(f"{key} must be one of {', '.join(choices)}; got {raw!r}", lineno)
    return raw


def parse_config(text: str) -> RunConfigFile:
    """Parse and fully validate a configuration document."""
    seen: dict[str, object] = {}
    lines_of: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {line.strip()!r}", lineno)
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        seen[key] = _convert(key, raw, lineno)
        lines_of[key] = lineno

    for key in _REQUIRED:
        if key not in seen:
            raise ConfigError(f"missing required key {key!r}")

    cfg = RunConfigFile(**seen)

    def bad(key: str, msg: str):
        raise ConfigError(msg, lines_of.get(key))

    if cfg.n_nodes < 8:
        bad("n_nodes", "n_nodes must be >= 8")
    if cfg.half_width <= 0:
        bad("half_width", "half_width must be > 0")
    if cfg.t_end <= 0:
        bad("t_end", "t_end must be > 0")
    if cfg.epsilon < 0:
        bad("epsilon", "epsilon must be >= 0")
    if cfg.r_coeff <= 0:
        bad("r_coeff", "r_coeff must be > 0")
    if not (0.0 < cfg.cfl <= 1.0):
        bad("cfl", "cfl must lie in (0, 1]")
    if cfg.dt_min <= 0:
        bad("dt_min", "dt_min must be > 0")
    if cfg.grad_blowup_factor <= 0:
        bad("grad_blowup_factor", "grad_blowup_factor must be > 0")
    if cfg.output_stride < 1:
        bad("output_stride", "output_stride must be >= 1")
    if cfg.ic_L >= cfg.half_width:
        bad("ic_L", "ic_L must be smaller than half_width")
    if cfg.ic_L <= 0:
        bad("ic_L", "ic_L must be > 0")
    if cfg.ic_mass is not None and cfg.ic_mass <= 0:
        bad("ic_mass", "ic_mass must be > 0")
    if cfg.ic_sigma is not None and cfg.ic_sigma <= 0:
        bad("ic_sigma", "ic_sigma must be > 0")
    if cfg.ic_ramp is not None and not (0.0 < cfg.ic_ramp < cfg.ic_L):
        bad("ic_ramp", "ic_ramp must lie in (0, ic_L)")
    if cfg.ic_kind == "custom_csv" and not cfg.ic_path:
        bad("ic_kind", "ic_kind = custom_csv requires ic_path")
    if cfg.experiment == "convergence" and cfg.t_end > 0.5:
        bad("t_end", "convergence experiment requires t_end <= 0.5")
    if any(t < 0 or t > cfg.t_end for t in cfg.snapshot_times):
        bad("snapshot_times", "snapshot_times must lie in [0, t_end]")
    return cfg


def format_config_echo(cfg: RunConfigFile) -> str:
    """Canonical text form of a configuration; reparses to an equal value."""
    out = []
    for f in fields(RunConfigFile):
        val = getattr(cfg, f.name)
        if val is None:
            continue
        if isinstance(val, bool):
            raise TypeError("unexpected bool field")
        if isinstance(val, float):
            rendered = repr(val)
        elif isinstance(val, list):
            if not val:
                continue
            rendered = ",".join(repr(v) for v in val)
        else:
            rendered = str(val)
        out.append(f"{f.name} = {rendered}")
    return "\n".join(out) + "\n"
