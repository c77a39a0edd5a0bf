"""Method-of-lines integrator for the regularized aggregation-diffusion model.

The semi-discrete form is conservative: du/dt is a flux difference with

    F = (r*u^2 + eps) * du/dx  -  u * v_a,        v_a = (dK/dx) * u,

evaluated at half-nodes, with zero flux through both walls. The advected
state at a half-node is reconstructed with a minmod-limited slope and
upwinded on the sign of v_a there; the degenerate diffusive flux uses the
arithmetic-mean coefficient and a two-point difference. Flux differencing
telescopes, so the plain node sum of u is conserved to rounding.

Time stepping is explicit SSP-RK3 with a CFL-limited step recomputed before
every stage triple from the current amplitude and drift speed. Runs stop on
one of: reaching t_end, the max gradient exceeding a configured multiple of
its initial size, or the stable step falling below dt_min (both of the
latter standing in for loss of regularity, which a finite grid cannot
witness directly).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Iterable, Optional

import numpy as np

from ._numba import njit
from .grid import Field, Grid, lp_norm
from .kernel import KernelSpec, _conv_dk_raw
from . import diagnostics as _diag
from .characteristics import CharacteristicTracker

__all__ = [
    "Status",
    "SolverConfig",
    "SolverState",
    "rhs",
    "compute_dt",
    "step",
    "detect_stop",
    "run",
    "mild_residual",
]

_CFL_GUARD = 1e-14
_SUPPORT_TOL = 1e-13


class Status(enum.Enum):
    RUNNING = "running"
    COMPLETED = "completed"
    BLOWUP_DETECTED = "blowup_detected"
    DT_UNDERFLOW = "dt_underflow"


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of one solver run.

    epsilon >= 0 regularizes the degenerate diffusion; epsilon = 0 integrates
    the target equation directly. r_coeff scales the nonlinear diffusion.
    """

    grid: Grid
    t_end: float
    epsilon: float = 0.0
    r_coeff: float = 1.0
    cfl: float = 0.4
    dt_min: float = 1e-12
    grad_blowup_factor: float = 1e4
    output_stride: int = 100
    kernel: Optional[KernelSpec] = None

    def __post_init__(self) -> None:
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.r_coeff <= 0:
            raise ValueError("r_coeff must be > 0")
        if not (0.0 < self.cfl <= 1.0):
            raise ValueError("cfl must lie in (0, 1]")
        if self.dt_min <= 0:
            raise ValueError("dt_min must be > 0")
        if self.t_end <= 0:
            raise ValueError("t_end must be > 0")
        if self.grad_blowup_factor <= 0:
            raise ValueError("grad_blowup_factor must be > 0")
        if self.output_stride < 1:
            raise ValueError("output_stride must be >= 1")
        if self.kernel is None:
            object.__setattr__(self, "kernel", KernelSpec.for_grid(self.grid))


@dataclass(frozen=True)
class SolverState:
    """Evolving state: time, last accepted step, field, counter, status."""

    t: float
    dt: float
    u: Field
    step_index: int
    status: Status

    @classmethod
    def initial(cls, u0: Field) -> "SolverState":
        return cls(t=0.0, dt=0.0, u=u0, step_index=0, status=Status.RUNNING)


@njit(cache=True)
def _rhs_raw(u, va, dx, r_coeff, eps):
    n = u.shape[0]
    # minmod-limited slopes for the advected state
    s = np.zeros(n)
    for j in range(1, n - 1):
        dl = u[j] - u[j - 1]
        dr = u[j + 1] - u[j]
        if dl * dr > 0.0:
            s[j] = dl if abs(dl) < abs(dr) else dr
    out = np.empty(n)
    f_prev = 0.0  # zero flux through the left wall
    for j in range(n - 1):
        um = 0.5 * (u[j] + u[j + 1])
        vh = 0.5 * (va[j] + va[j + 1])
        if vh >= 0.0:
            u_up = u[j] + 0.5 * s[j]
        else:
            u_up = u[j + 1] - 0.5 * s[j + 1]
        flux = (r_coeff * um * um + eps) * (u[j + 1] - u[j]) / dx - u_up * vh
        out[j] = (flux - f_prev) / dx
        f_prev = flux
    out[n - 1] = (0.0 - f_prev) / dx
    return out


@njit(cache=True)
def _ssp_step_raw(u, va0, dt, weights, dx, r_decay, r_coeff, eps):
    k1 = _rhs_raw(u, va0, dx, r_coeff, eps)
    u1 = u + dt * k1
    va1 = _conv_dk_raw(u1, weights, r_decay, dx)
    k2 = _rhs_raw(u1, va1, dx, r_coeff, eps)
    u2 = 0.75 * u + 0.25 * (u1 + dt * k2)
    va2 = _conv_dk_raw(u2, weights, r_decay, dx)
    k3 = _rhs_raw(u2, va2, dx, r_coeff, eps)
    return u / 3.0 + (2.0 / 3.0) * (u2 + dt * k3)


@njit(cache=True)
def _grad_inf_raw(u, dx):
    """Max |du/dx| with the same stencils as ddx (central + one-sided ends)."""
    n = u.shape[0]
    gmax = 0.0
    for j in range(1, n - 1):
        g = abs(u[j + 1] - u[j - 1]) / (2.0 * dx)
        if g > gmax:
            gmax = g
    g = abs(-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx)
    if g > gmax:
        gmax = g
    g = abs(3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * dx)
    if g > gmax:
        gmax = g
    return gmax


def rhs(u: Field, cfg: SolverConfig) -> Field:
    """Semi-discrete right-hand side du/dt on the grid of u."""
    if not u.valid:
        raise ValueError("non-finite field")
    g = u.grid
    va = _conv_dk_raw(u.values, g.quad_weights, cfg.kernel.decay_per_cell, g.spacing)
    return Field(g, _rhs_raw(u.values, va, g.spacing, cfg.r_coeff, cfg.epsilon))


def compute_dt(u: Field, cfg: SolverConfig) -> float:
    """CFL step: cfl * min(diffusive dx^2 limit, advective dx limit)."""
    g = u.grid
    va = _conv_dk_raw(u.values, g.quad_weights, cfg.kernel.decay_per_cell, g.spacing)
    umax = float(np.max(np.abs(u.values)))
    vmax = float(np.max(np.abs(va)))
    dx = g.spacing
    dt_diff = dx * dx / (2.0 * (cfg.r_coeff * umax * umax + cfg.epsilon) + _CFL_GUARD)
    dt_adv = dx / (vmax + _CFL_GUARD)
    return cfg.cfl * min(dt_diff, dt_adv)


def detect_stop(state: SolverState, cfg: SolverConfig, grad0: float) -> Status:
    """Stop decision: gradient threshold, then t_end, then step underflow."""
    if state.u.valid:
        grad = _grad_inf_raw(state.u.values, state.u.grid.spacing)
        if grad > cfg.grad_blowup_factor * grad0:
            return Status.BLOWUP_DETECTED
    if state.t >= cfg.t_end:
        return Status.COMPLETED
    if state.dt < cfg.dt_min and state.step_index > 0:
        return Status.DT_UNDERFLOW
    return Status.RUNNING


def step(state: SolverState, cfg: SolverConfig, grad0: Optional[float] = None) -> SolverState:
    """Advance one SSP-RK3 step and refresh the stop status.

    grad0 is the gradient reference ||du0/dx||_inf + 1; when omitted, the
    gradient stop check is skipped.
    """
    if state.status is not Status.RUNNING:
        raise ValueError("step requires a running state")
    remaining = cfg.t_end - state.t
    if remaining <= 1e-15 * max(1.0, cfg.t_end):
        return replace(state, status=Status.COMPLETED)
    dt_raw = compute_dt(state.u, cfg)
    if dt_raw < cfg.dt_min:
        return replace(state, status=Status.DT_UNDERFLOW)
    dt = min(dt_raw, remaining)
    g = state.u.grid
    u_new = _ssp_step_raw(
        state.u.values,
        _conv_dk_raw(state.u.values, g.quad_weights, cfg.kernel.decay_per_cell, g.spacing),
        dt,
        g.quad_weights,
        g.spacing,
        cfg.kernel.decay_per_cell,
        cfg.r_coeff,
        cfg.epsilon,
    )
    f_new = Field(g, u_new)
    nxt = SolverState(
        t=state.t + dt, dt=dt, u=f_new, step_index=state.step_index + 1, status=Status.RUNNING
    )
    if not f_new.valid:
        return replace(nxt, status=Status.DT_UNDERFLOW)
    if grad0 is None:
        status = Status.COMPLETED if nxt.t >= cfg.t_end else Status.RUNNING
    else:
        status = detect_stop(nxt, cfg, grad0)
    if status is Status.DT_UNDERFLOW:
        status = Status.RUNNING  # dt passed the dt_min gate when it was chosen
    return replace(nxt, status=status)


def mild_residual(u_before: Field, u_after: Field, dt: float, cfg: SolverConfig) -> float:
    """L2 defect of the midpoint relation (u_after - u_before)/dt = rhs(mid).

    O(dt^2) on smooth data; used as a time-consistency probe in tests.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if not (u_before.valid and u_after.valid):
        raise ValueError("non-finite field")
    g = u_before.grid
    mid = Field(g, 0.5 * (u_before.values + u_after.values))
    resid = (u_after.values - u_before.values) / dt - rhs(mid, cfg).values
    return lp_norm(Field(g, resid), 2)


def run(
    u0: Field,
    cfg: SolverConfig,
    sinks: Iterable = (),
    tracker: Optional[CharacteristicTracker] = None,
    config_echo: Optional[dict] = None,
) -> "_diag.RunReport":
    """Integrate from u0 until a stop condition, emitting diagnostics records.

    A record is produced at t = 0, every output_stride accepted steps, and at
    the final step. Sinks may implement on_record(record, state). An optional
    CharacteristicTracker is advected synchronously with every solver step
    and snapshotted at record times.
    """
    if not u0.valid:
        raise ValueError("non-finite field")
    if u0.grid is not cfg.grid and u0.grid != cfg.grid:
        raise ValueError("u0 grid does not match config grid")
    notes: list[str] = []
    grad0 = _grad_inf_raw(u0.values, u0.grid.spacing) + 1.0
    state = SolverState.initial(u0)
    initial = _diag.observe(state, cfg)
    records = [initial]
    violations = list(_diag.check_bounds(initial, initial))
    unreliable = False

    def _support_ok(rec: _diag.DiagnosticsRecord) -> bool:
        edge = 0.95 * cfg.grid.half_width
        if rec.norm_inf == 0.0:
            return True
        return max(abs(rec.support_left), abs(rec.support_right)) < edge

    def _emit(rec: _diag.DiagnosticsRecord, st: SolverState) -> None:
        nonlocal unreliable
        records.append(rec)
        violations.extend(_diag.check_bounds(rec, initial))
        if not unreliable and not _support_ok(rec):
            unreliable = True
            notes.append(
                f"support reached the outermost 5% of nodes at t={rec.t:.6g}; "
                "run marked unreliable (half_width too small)"
            )
        if tracker is not None:
            tracker.snapshot(st.t)
        for sink in sinks:
            on_record = getattr(sink, "on_record", None)
            if on_record is not None:
                on_record(rec, st)

    if not _support_ok(initial):
        unreliable = True
        notes.append("initial support reaches the outermost 5% of nodes; run marked unreliable")
    if tracker is not None:
        tracker.snapshot(0.0)
    for sink in sinks:
        on_record = getattr(sink, "on_record", None)
        if on_record is not None:
            on_record(initial, state)

    while state.status is Status.RUNNING:
        prev = state
        state = step(state, cfg, grad0)
        took_step = state.step_index > prev.step_index
        if not state.u.valid:
            # the last emitted record stays the final (finite) one
            notes.append(f"non-finite field after step {state.step_index}; stopping")
            continue
        if took_step and tracker is not None:
            tracker.on_step(prev.u, state.u, state.dt)
        if took_step and (
            state.step_index % cfg.output_stride == 0 or state.status is not Status.RUNNING
        ):
            _emit(_diag.observe(state, cfg, initial.norm_2), state)
        elif not took_step and state.status is Status.DT_UNDERFLOW:
            notes.append("stable step fell below dt_min; treated as numerical blowup")

    echo = config_echo if config_echo is not None else _default_echo(cfg)
    return _diag.RunReport(
        records=records,
        status=state.status,
        blowup=None,
        config_echo=echo,
        bound_violations=violations,
        notes=notes,
    )


def _default_echo(cfg: SolverConfig) -> dict:
    return {
        "n_nodes": str(cfg.grid.n_nodes),
        "half_width": repr(cfg.grid.half_width),
        "t_end": repr(cfg.t_end),
        "epsilon": repr(cfg.epsilon),
        "r_coeff": repr(cfg.r_coeff),
        "cfl": repr(cfg.cfl),
        "dt_min": repr(cfg.dt_min),
        "grad_blowup_factor": repr(cfg.grad_blowup_factor),
        "output_stride": str(cfg.output_stride),
    }
