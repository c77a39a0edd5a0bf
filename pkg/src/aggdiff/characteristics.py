"""Characteristic lines of the attractive velocity and the blowup-time bound.

Particles labelled by their initial positions are advected by the nonlocal
drift v_a = (dK/dx)*u, one RK2 midpoint update per solver step using the
velocity fields at the step's start and end. For nonnegative data the flow
is order preserving and confines the support; the left support edge moves
right no slower than exp(-2L) times the (conserved) mass, which caps the
survival time of a smooth solution at 2L exp(2L)/mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from ._numba import njit
from .grid import Field, interpolate
from .kernel import KernelSpec, _conv_dk_raw

__all__ = [
    "SupportEdges",
    "support_edges",
    "CharacteristicSet",
    "CharacteristicTracker",
    "CharacteristicEscapeError",
    "advect",
    "boundary_speed_check",
    "blowup_bound",
    "BlowupReport",
]


class CharacteristicEscapeError(RuntimeError):
    """A particle left the truncated domain (half_width too small)."""


class SupportEdges(NamedTuple):
    left: float
    right: float
    empty: bool


def support_edges(u: Field, rel_tol: float = 1e-10) -> SupportEdges:
    """Coordinates of the outermost nodes with |u| above rel_tol * ||u||_inf."""
    if not (0.0 < rel_tol < 1.0):
        raise ValueError("rel_tol must lie in (0, 1)")
    if not u.valid:
        raise ValueError("non-finite field")
    vmax = float(np.max(np.abs(u.values)))
    if vmax == 0.0:
        return SupportEdges(0.0, 0.0, True)
    idx = np.nonzero(np.abs(u.values) > rel_tol * vmax)[0]
    if idx.size == 0:
        return SupportEdges(0.0, 0.0, True)
    x = u.grid.nodes
    return SupportEdges(float(x[idx[0]]), float(x[idx[-1]]), False)


@dataclass(frozen=True)
class CharacteristicSet:
    """Labelled particle positions X(t, alpha) at a single time.

    Labels must be strictly increasing. Positions are expected to stay
    strictly increasing (order preservation); a violation is reported by
    is_ordered(), never repaired.
    """

    labels: np.ndarray
    positions: np.ndarray
    t: float

    def __post_init__(self) -> None:
        lab = np.asarray(self.labels, dtype=float).copy()
        pos = np.asarray(self.positions, dtype=float).copy()
        if lab.ndim != 1 or lab.shape != pos.shape:
            raise ValueError("labels and positions must be 1D arrays of equal length")
        if lab.size >= 2 and not np.all(np.diff(lab) > 0):
            raise ValueError("labels must be strictly increasing")
        lab.setflags(write=False)
        pos.setflags(write=False)
        object.__setattr__(self, "labels", lab)
        object.__setattr__(self, "positions", pos)

    @classmethod
    def seeded(cls, labels) -> "CharacteristicSet":
        lab = np.asarray(labels, dtype=float)
        return cls(lab, lab.copy(), 0.0)

    def is_ordered(self) -> bool:
        if self.positions.size < 2:
            return True
        return bool(np.all(np.diff(self.positions) > 0))


@njit(cache=True)
def _interp_clamped(x, values, half_width, dx):
    n = values.shape[0]
    s = (x + half_width) / dx
    j = int(math.floor(s))
    if j < 0:
        j = 0
    if j > n - 2:
        j = n - 2
    frac = s - j
    return values[j] + frac * (values[j + 1] - values[j])


@njit(cache=True)
def _advect_rk2(pos, va_start, va_end, half_width, dx, dt):
    """One RK2 midpoint update per particle; returns (new_pos, escapee_index)."""
    n = pos.shape[0]
    out = np.empty(n)
    slack = 4.0 * 2.220446049250313e-16 * half_width
    for i in range(n):
        x = pos[i]
        v1 = _interp_clamped(x, va_start, half_width, dx)
        xh = x + 0.5 * dt * v1
        if xh < -half_width - slack or xh > half_width + slack:
            return out, i
        v2 = _interp_clamped(xh, va_start, half_width, dx)
        v3 = _interp_clamped(xh, va_end, half_width, dx)
        xn = x + dt * 0.5 * (v2 + v3)
        if xn < -half_width - slack or xn > half_width + slack:
            return out, i
        out[i] = xn
    return out, -1


def advect(chars: CharacteristicSet, u_start: Field, u_end: Field, dt: float) -> CharacteristicSet:
    """Advance every particle by one RK2 midpoint step through [t, t + dt].

    The predictor uses the start-of-step velocity at the particle; the
    corrector averages the start and end velocities at the predicted
    midpoint. A particle leaving [-A, A] raises CharacteristicEscapeError.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    g = u_start.grid
    spec = KernelSpec.for_grid(g)
    va_s = _conv_dk_raw(u_start.values, g.quad_weights, spec.decay_per_cell, g.spacing)
    va_e = _conv_dk_raw(u_end.values, g.quad_weights, spec.decay_per_cell, g.spacing)
    new_pos, escapee = _advect_rk2(chars.positions, va_s, va_e, g.half_width, g.spacing, dt)
    if escapee >= 0:
        raise CharacteristicEscapeError(
            f"characteristic escaped truncated domain (label {chars.labels[escapee]:.6g})"
        )
    return CharacteristicSet(chars.labels, new_pos, chars.t + dt)


class CharacteristicTracker:
    """Per-step particle advection with snapshots at record times.

    Keeps the full (t, positions) history at snapshot times, counts per-step
    edge-monotonicity violations (leftmost particle moving left or rightmost
    moving right by more than a 1e-12 slack), and records snapshot times at
    which strict ordering failed.
    """

    EDGE_SLACK = 1e-12

    def __init__(self, labels, grid, kernel: Optional[KernelSpec] = None):
        lab = np.asarray(labels, dtype=float)
        if lab.size >= 2 and not np.all(np.diff(lab) > 0):
            raise ValueError("labels must be strictly increasing")
        self.labels = lab
        self.positions = lab.copy()
        self.grid = grid
        self.kernel = kernel if kernel is not None else KernelSpec.for_grid(grid)
        self.history: list[tuple[float, np.ndarray]] = []
        self.order_violations: list[float] = []
        self.left_edge_violations = 0
        self.right_edge_violations = 0
        self._cached_field: Optional[Field] = None
        self._cached_va: Optional[np.ndarray] = None

    def _velocity(self, u: Field) -> np.ndarray:
        if self._cached_field is u:
            return self._cached_va
        g = self.grid
        return _conv_dk_raw(u.values, g.quad_weights, self.kernel.decay_per_cell, g.spacing)

    def on_step(self, u_start: Field, u_end: Field, dt: float) -> None:
        g = self.grid
        va_s = self._velocity(u_start)
        va_e = _conv_dk_raw(u_end.values, g.quad_weights, self.kernel.decay_per_cell, g.spacing)
        self._cached_field = u_end
        self._cached_va = va_e
        new_pos, escapee = _advect_rk2(self.positions, va_s, va_e, g.half_width, g.spacing, dt)
        if escapee >= 0:
            raise CharacteristicEscapeError(
                f"characteristic escaped truncated domain (label {self.labels[escapee]:.6g})"
            )
        if new_pos[0] < self.positions[0] - self.EDGE_SLACK:
            self.left_edge_violations += 1
        if new_pos[-1] > self.positions[-1] + self.EDGE_SLACK:
            self.right_edge_violations += 1
        self.positions = new_pos

    def snapshot(self, t: float) -> None:
        pos = self.positions.copy()
        self.history.append((t, pos))
        if pos.size >= 2 and not np.all(np.diff(pos) > 0):
            self.order_violations.append(t)

    def as_set(self, t: float) -> CharacteristicSet:
        return CharacteristicSet(self.labels, self.positions, t)


def boundary_speed_check(u: Field, x_left: float) -> tuple[float, float]:
    """Observed drift at the left support edge vs. its theoretical floor.

    Returns (observed_speed, lower_bound) with observed = v_a interpolated at
    x_left and lower_bound = exp(-2L) * mass for L = |x_left|, mass the
    trapezoid sum of u. Expects numerically nonnegative data whose support
    lies right of x_left.
    """
    if not u.valid:
        raise ValueError("non-finite field")
    sup = float(np.max(np.abs(u.values)))
    if float(np.min(u.values)) < -1e-10 * sup:
        raise ValueError("field is not numerically nonnegative")
    mass = u.mass()
    if mass < 0:
        raise ValueError("negative mass")
    edges = support_edges(u)
    if not edges.empty and x_left > edges.left + u.grid.spacing:
        raise ValueError("x_left must not exceed the left support edge")
    spec = KernelSpec.for_grid(u.grid)
    g = u.grid
    va = _conv_dk_raw(u.values, g.quad_weights, spec.decay_per_cell, g.spacing)
    observed = interpolate(Field(g, va), x_left)
    lower = math.exp(-2.0 * abs(x_left)) * mass
    return observed, lower


def blowup_bound(L: float, mass: float) -> float:
    """Upper bound 2L exp(2L)/mass on the lifetime of a smooth solution.

    Derived from the edge-speed floor: the left support edge travels at
    least exp(-2L)*mass, and can travel at most 2L before collision.
    """
    if L <= 0:
        raise ValueError("L must be > 0")
    if mass <= 0:
        raise ValueError("mass must be > 0")
    return 2.0 * L / (math.exp(-2.0 * L) * mass)


@dataclass(frozen=True)
class BlowupReport:
    """Derived bound and observed outcome of a blowup experiment.

    The bound fields satisfy
    blowup_time_upper_bound == 2 * support_half_width / boundary_speed_lower_bound
    exactly, by construction.
    """

    support_half_width: float
    initial_mass: float
    boundary_speed_lower_bound: float
    blowup_time_upper_bound: float
    observed_blowup_time: Optional[float]
    observed_final_grad_inf: float
    observed_sup_norm_max: float

    @classmethod
    def build(
        cls,
        support_half_width: float,
        initial_mass: float,
        observed_blowup_time: Optional[float],
        observed_final_grad_inf: float,
        observed_sup_norm_max: float,
    ) -> "BlowupReport":
        lower = math.exp(-2.0 * support_half_width) * initial_mass
        return cls(
            support_half_width=support_half_width,
            initial_mass=initial_mass,
            boundary_speed_lower_bound=lower,
            blowup_time_upper_bound=2.0 * support_half_width / lower,
            observed_blowup_time=observed_blowup_time,
            observed_final_grad_inf=observed_final_grad_inf,
            observed_sup_norm_max=observed_sup_norm_max,
        )
