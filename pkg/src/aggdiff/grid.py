"""Uniform 1D mesh, sampled fields, discrete norms and difference operators.

The domain is the truncated interval [-A, A] with N equally spaced nodes.
Integral quantities use trapezoid weights (half weight at the two endpoint
nodes), which is exact for constants over the full interval and second-order
accurate otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._numba import njit

__all__ = ["Grid", "Field", "lp_norm", "ddx", "interpolate"]


@dataclass(frozen=True)
class Grid:
    """Uniform mesh on [-half_width, +half_width] with n_nodes nodes.

    Attributes
    ----------
    half_width : float
        Domain half width A > 0; the mesh covers [-A, A].
    n_nodes : int
        Node count N >= 8.
    spacing : float
        Mesh width 2A/(N-1), derived.
    nodes : ndarray
        Node coordinates -A + j*spacing; endpoints land on +-A exactly.
    quad_weights : ndarray
        Trapezoid weights: 0.5 at the endpoints, 1.0 in the interior.
    """

    half_width: float
    n_nodes: int
    spacing: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False)
    quad_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise ValueError("half_width must be positive and finite")
        if self.n_nodes < 8:
            raise ValueError("n_nodes must be at least 8")
        dx = 2.0 * self.half_width / (self.n_nodes - 1)
        nodes = np.linspace(-self.half_width, self.half_width, self.n_nodes)
        weights = np.ones(self.n_nodes)
        weights[0] = weights[-1] = 0.5
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "spacing", dx)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "quad_weights", weights)


@dataclass(frozen=True)
class Field:
    """Real-valued samples on the nodes of a Grid.

    The sample array is copied and frozen at construction. ``valid`` is False
    when any sample is NaN or infinite; norm and stencil operations refuse
    invalid fields.
    """

    grid: Grid
    values: np.ndarray
    valid: bool = field(init=False)

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n_nodes,):
            raise ValueError(
                f"values must have shape ({self.grid.n_nodes},), got {vals.shape}"
            )
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "valid", bool(np.isfinite(vals).all()))

    def mass(self) -> float:
        """Trapezoid-weighted node sum, the discrete integral of the field."""
        g = self.grid
        return float(np.sum(g.quad_weights * self.values) * g.spacing)


def lp_norm(f: Field, p: float) -> float:
    """Discrete L^p norm with trapezoid weights.

    Returns (sum_j w_j |u_j|^p dx)^(1/p) for finite p >= 1 and max_j |u_j|
    for p = inf.
    """
    if not f.valid:
        raise ValueError("non-finite field")
    if p == math.inf:
        return float(np.max(np.abs(f.values)))
    if p < 1:
        raise ValueError("p must satisfy p >= 1 or p = inf")
    g = f.grid
    a = np.abs(f.values)
    if p == 1:
        return float(np.sum(g.quad_weights * a) * g.spacing)
    if p == 2:
        return float(math.sqrt(np.sum(g.quad_weights * a * a) * g.spacing))
    # scale by the max to avoid overflow for large p
    amax = float(a.max())
    if amax == 0.0:
        return 0.0
    s = np.sum(g.quad_weights * (a / amax) ** p) * g.spacing
    return float(amax * s ** (1.0 / p))


def ddx(f: Field) -> Field:
    """Discrete spatial derivative: central interior, one-sided second-order ends."""
    if not f.valid:
        raise ValueError("non-finite field")
    n = f.grid.n_nodes
    if n < 3:
        raise ValueError("grid too small")
    u = f.values
    dx = f.grid.spacing
    out = np.empty(n)
    out[1:-1] = (u[2:] - u[:-2]) / (2.0 * dx)
    out[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx)
    out[-1] = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * dx)
    return Field(f.grid, out)


@njit(cache=True)
def _interp_many(xq, values, half_width, dx):
    n = values.shape[0]
    out = np.empty(xq.shape[0])
    for i in range(xq.shape[0]):
        x = xq[i]
        s = (x + half_width) / dx
        j = int(math.floor(s))
        if j < 0:
            j = 0
        if j > n - 2:
            j = n - 2
        frac = s - j
        out[i] = values[j] + frac * (values[j + 1] - values[j])
    return out


def interpolate(f: Field, x) -> float | np.ndarray:
    """Piecewise-linear interpolation at coordinate(s) x inside [-A, A].

    Scalar input returns a float; array input returns an array. Positions
    outside the domain (beyond a one-ulp slack at the ends) are an error.
    """
    if not f.valid:
        raise ValueError("non-finite field")
    g = f.grid
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    slack = 4.0 * np.finfo(float).eps * g.half_width
    if np.any(xa < -g.half_width - slack) or np.any(xa > g.half_width + slack):
        raise ValueError("out of domain")
    out = _interp_many(xa, f.values, g.half_width, g.spacing)
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return float(out[0])
    return out
