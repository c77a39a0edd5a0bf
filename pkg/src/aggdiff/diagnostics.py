"""Per-record observers: norms, mass, positivity, and growth-bound monitors.

Every record snapshots the discrete L^1/L^2/L^inf norms, the trapezoid mass,
the max gradient, the support edges and the attractive-velocity amplitude.
check_bounds compares a record against the initial one and reports three
contractual violations:

  (a) the L^2 norm exceeding its exp(t) envelope by more than 5%,
  (b) mass drifting beyond 1e-10 relative,
  (c) negativity beyond 1e-10 of the initial amplitude on runs that started
      from nonnegative data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

from .characteristics import BlowupReport, support_edges
from .grid import ddx, lp_norm
from .kernel import _conv_dk_raw

if TYPE_CHECKING:  # pragma: no cover
    from .solver import SolverConfig, SolverState, Status

__all__ = [
    "DiagnosticsRecord",
    "BoundViolation",
    "RunReport",
    "observe",
    "check_bounds",
    "fit_blowup_time",
]

MASS_TOL = 1e-10
L2_RATIO_TOL = 1.05
POSITIVITY_TOL = 1e-10


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    dt: float
    mass: float
    norm_1: float
    norm_2: float
    norm_inf: float
    grad_inf: float
    min_u: float
    support_left: float
    support_right: float
    l2_bound_ratio: float
    va_inf: float


@dataclass(frozen=True)
class BoundViolation:
    bound: str
    t: float
    measured: float
    allowed: float


@dataclass
class RunReport:
    """Everything one run produced: record series, outcome, and audit trail."""

    records: list[DiagnosticsRecord]
    status: "Status"
    blowup: Optional[BlowupReport]
    config_echo: dict
    bound_violations: list[BoundViolation]
    notes: list[str] = field(default_factory=list)


def observe(state: "SolverState", cfg: "SolverConfig", initial_norm_2: Optional[float] = None) -> DiagnosticsRecord:
    """Compute one diagnostics record from the current state.

    Pure in (state, cfg); initial_norm_2 anchors the L^2 growth ratio and
    defaults to the state's own norm (so the ratio is exactly 1 at t = 0).
    """
    u = state.u
    if not u.valid:
        raise ValueError("non-finite field")
    g = u.grid
    n2 = lp_norm(u, 2)
    ref = n2 if initial_norm_2 is None else initial_norm_2
    edges = support_edges(u)
    va = _conv_dk_raw(u.values, g.quad_weights, cfg.kernel.decay_per_cell, g.spacing)
    ratio = n2 / (ref * math.exp(state.t)) if ref > 0 else 0.0
    return DiagnosticsRecord(
        t=state.t,
        dt=state.dt,
        mass=u.mass(),
        norm_1=lp_norm(u, 1),
        norm_2=n2,
        norm_inf=lp_norm(u, math.inf),
        grad_inf=lp_norm(ddx(u), math.inf),
        min_u=float(np.min(u.values)),
        support_left=edges.left,
        support_right=edges.right,
        l2_bound_ratio=ratio,
        va_inf=float(np.max(np.abs(va))),
    )


def check_bounds(record: DiagnosticsRecord, initial: DiagnosticsRecord) -> list[BoundViolation]:
    """Violations of the growth, conservation and positivity guarantees."""
    out: list[BoundViolation] = []
    if record.l2_bound_ratio > L2_RATIO_TOL:
        out.append(BoundViolation("l2_growth", record.t, record.l2_bound_ratio, L2_RATIO_TOL))
    mass_allowed = MASS_TOL * (1.0 + abs(initial.mass))
    if abs(record.mass - initial.mass) > mass_allowed:
        out.append(
            BoundViolation("mass_conservation", record.t, abs(record.mass - initial.mass), mass_allowed)
        )
    nonneg_start = initial.min_u >= -1e-13 * max(initial.norm_inf, 1.0)
    if nonneg_start and record.min_u < -POSITIVITY_TOL * initial.norm_inf:
        out.append(
            BoundViolation("positivity", record.t, record.min_u, -POSITIVITY_TOL * initial.norm_inf)
        )
    return out


def fit_blowup_time(records: Sequence[DiagnosticsRecord], window: int = 8) -> Optional[float]:
    """Extrapolated divergence time of grad_inf, or None.

    Fits 1/grad_inf linearly against t over the last `window` records and
    returns the t-intercept when the tail is strictly increasing, the fit
    slope is negative, and the intercept lies beyond the last record.
    Advisory only: the model assumes grad_inf ~ c/(T - t).
    """
    if window < 2 or len(records) < window:
        return None
    tail = records[-window:]
    g = np.array([r.grad_inf for r in tail])
    t = np.array([r.t for r in tail])
    if np.any(g <= 0) or np.any(np.diff(g) <= 0):
        return None
    slope, intercept = np.polyfit(t, 1.0 / g, 1)
    if slope >= 0:
        return None
    t_star = -intercept / slope
    if t_star <= t[-1]:
        return None
    return float(t_star)
