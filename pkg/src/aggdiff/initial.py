"""Initial-condition builders.

The canonical datum is the compactly supported smooth bump
amplitude * exp(-1/(1 - (x/L)^2)) on (-L, L), optionally rescaled so its
trapezoid mass on the actual grid matches a requested value exactly (the
conservation monitors then measure drift against that exact number).
Indicator-style data are provided for stress tests only; they are not
smooth and the theorem-tagged experiments do not use them.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional

import numpy as np

from .grid import Field, Grid

__all__ = [
    "bump_values",
    "gaussian_truncated_values",
    "indicator_smoothed_values",
    "build_initial_condition",
]


def bump_values(x: np.ndarray, length: float, amplitude: float = 1.0) -> np.ndarray:
    u = np.zeros_like(x)
    inside = np.abs(x) < length
    s = x[inside] / length
    u[inside] = amplitude * np.exp(-1.0 / (1.0 - s * s))
    return u


def gaussian_truncated_values(
    x: np.ndarray, sigma: float, length: float, amplitude: float = 1.0
) -> np.ndarray:
    u = amplitude * np.exp(-x * x / (2.0 * sigma * sigma))
    u[np.abs(x) > length] = 0.0
    return u


def indicator_smoothed_values(
    x: np.ndarray, length: float, ramp: float, amplitude: float = 1.0
) -> np.ndarray:
    """Plateau of height `amplitude` on [-L+ramp, L-ramp] with smoothstep edges."""
    if not (0.0 < ramp < length):
        raise ValueError("ramp must lie in (0, length)")
    u = np.zeros_like(x)
    a = np.abs(x)
    u[a <= length - ramp] = 1.0
    edge = (a > length - ramp) & (a < length)
    s = (length - a[edge]) / ramp  # 0 at the outer edge, 1 at the plateau
    u[edge] = s * s * (3.0 - 2.0 * s)
    return amplitude * u


def _custom_csv_values(x: np.ndarray, path: str) -> np.ndarray:
    rows = []
    with open(Path(path), newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != ["x", "u"]:
            raise ValueError(f"custom_csv {path!r} must start with an 'x,u' header")
        for row in reader:
            if not row:
                continue
            rows.append((float(row[0]), float(row[1])))
    if len(rows) < 2:
        raise ValueError(f"custom_csv {path!r} needs at least two samples")
    rows.sort()
    xs = np.array([r[0] for r in rows])
    us = np.array([r[1] for r in rows])
    return np.interp(x, xs, us, left=0.0, right=0.0)


def build_initial_condition(
    grid: Grid,
    kind: str,
    length: float,
    amplitude: float = 1.0,
    mass: Optional[float] = None,
    sigma: Optional[float] = None,
    ramp: Optional[float] = None,
    path: Optional[str] = None,
) -> Field:
    """Sample the requested profile on the grid, optionally mass-normalized.

    With `mass` given, the samples are rescaled so the trapezoid node sum on
    this grid equals `mass` exactly.
    """
    if length >= grid.half_width:
        raise ValueError("initial condition support must satisfy L < half_width")
    x = grid.nodes
    if kind == "bump":
        u = bump_values(x, length, amplitude)
    elif kind == "gaussian_truncated":
        u = gaussian_truncated_values(x, sigma if sigma is not None else length / 3.0, length, amplitude)
    elif kind == "indicator_smoothed":
        u = indicator_smoothed_values(x, length, ramp if ramp is not None else 0.2 * length, amplitude)
    elif kind == "custom_csv":
        if path is None:
            raise ValueError("custom_csv requires a path")
        u = _custom_csv_values(x, path)
    else:
        raise ValueError(f"unknown initial condition kind: {kind!r}")
    if mass is not None:
        current = float(np.sum(grid.quad_weights * u) * grid.spacing)
        if current <= 0:
            raise ValueError("cannot mass-normalize a profile with nonpositive mass")
        u = u * (mass / current)
    return Field(grid, u)
