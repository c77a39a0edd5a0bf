"""Independent references: quadrature ground truth and a second solver.

quadrature_conv integrates kernel convolutions of a fixed set of analytic
profiles with adaptive Simpson to 1e-10 absolute, splitting at every known
kink so the integrand is smooth on each panel. reference_solve integrates
the nonconservative form of the equation with forward Euler and plain
central differences on a finer grid; agreement between the two unrelated
discretizations is the strongest guard against a shared bug.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._numba import njit
from .grid import Field, Grid
from .kernel import _conv_dk_raw

__all__ = [
    "OracleConfig",
    "Profile",
    "indicator",
    "exponential",
    "gaussian",
    "bump",
    "quadrature_conv",
    "reference_solve",
]

_QUAD_TOL = 1e-10


@dataclass(frozen=True)
class OracleConfig:
    quadrature_points: int = 17
    reference_n_nodes: int = 4097
    reference_cfl: float = 0.1

    def __post_init__(self) -> None:
        if self.quadrature_points < 3:
            raise ValueError("quadrature_points must be >= 3")
        if self.reference_n_nodes < 8:
            raise ValueError("reference_n_nodes must be >= 8")
        if self.reference_cfl <= 0.0:
            raise ValueError("reference_cfl must be > 0")


@dataclass(frozen=True)
class Profile:
    """Analytic density profile with known support and kink locations."""

    kind: str
    params: tuple

    def __call__(self, y: float) -> float:
        if self.kind == "indicator":
            a, b = self.params
            return 1.0 if a <= y <= b else 0.0
        if self.kind == "exponential":
            return math.exp(-abs(y))
        if self.kind == "gaussian":
            (sigma,) = self.params
            return math.exp(-y * y / (2.0 * sigma * sigma))
        if self.kind == "bump":
            (length,) = self.params
            s = y / length
            if abs(s) >= 1.0:
                return 0.0
            return math.exp(-1.0 / (1.0 - s * s))
        raise ValueError(f"unknown profile descriptor: {self.kind!r}")

    def breakpoints(self) -> list[float]:
        if self.kind == "indicator":
            return list(self.params)
        if self.kind == "exponential":
            return [0.0]
        if self.kind == "gaussian":
            return []
        if self.kind == "bump":
            (length,) = self.params
            return [-length, length]
        raise ValueError(f"unknown profile descriptor: {self.kind!r}")

    def integration_window(self, x: float) -> tuple[float, float]:
        if self.kind == "indicator":
            a, b = self.params
            return a, b
        if self.kind == "bump":
            (length,) = self.params
            return -length, length
        if self.kind == "exponential":
            w = abs(x) + 46.0
            return -w, w
        if self.kind == "gaussian":
            (sigma,) = self.params
            w = max(abs(x), 10.0 * sigma) + 10.0 * sigma
            return -w, w
        raise ValueError(f"unknown profile descriptor: {self.kind!r}")


def indicator(a: float, b: float) -> Profile:
    if not a < b:
        raise ValueError("indicator requires a < b")
    return Profile("indicator", (a, b))


def exponential() -> Profile:
    return Profile("exponential", ())


def gaussian(sigma: float) -> Profile:
    if sigma <= 0:
        raise ValueError("gaussian requires sigma > 0")
    return Profile("gaussian", (sigma,))


def bump(length: float) -> Profile:
    if length <= 0:
        raise ValueError("bump requires length > 0")
    return Profile("bump", (length,))


def _simpson(f, a, fa, b, fb):
    m = 0.5 * (a + b)
    fm = f(m)
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive(f, a, fa, b, fb, whole, m, fm, tol, depth):
    lm, flm, left = _simpson(f, a, fa, m, fm)
    rm, frm, right = _simpson(f, m, fm, b, fb)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    return _adaptive(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1) + _adaptive(
        f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1
    )


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float) -> float:
    """Adaptive Simpson quadrature of f over [a, b] to absolute tolerance tol."""
    if b <= a:
        return 0.0
    fa, fb = f(a), f(b)
    m, fm, whole = _simpson(f, a, fa, b, fb)
    return _adaptive(f, a, fa, b, fb, whole, m, fm, tol, 48)


def quadrature_conv(
    u_analytic: Profile,
    x: float,
    kernel_derivative_order: int,
    oracle_cfg: Optional[OracleConfig] = None,
) -> float:
    """Ground-truth convolution value at x for an analytic profile.

    kernel_derivative_order 0 integrates exp(-|x-y|) u(y); order 1
    integrates -sign(x-y) exp(-|x-y|) u(y). The integration interval is
    split at the kernel kink y = x and at the profile's own kinks, then each
    smooth panel is pre-divided per quadrature_points and integrated
    adaptively to 1e-10 absolute overall.
    """
    if kernel_derivative_order not in (0, 1):
        raise ValueError("kernel_derivative_order must be 0 or 1")
    cfg = oracle_cfg if oracle_cfg is not None else OracleConfig()

    if kernel_derivative_order == 0:
        def f(y: float) -> float:
            return math.exp(-abs(x - y)) * u_analytic(y)
    else:
        def f(y: float) -> float:
            d = x - y
            if d == 0.0:
                return 0.0
            return -math.copysign(math.exp(-abs(d)), d) * u_analytic(y)

    lo, hi = u_analytic.integration_window(x)
    cuts = sorted({lo, hi, *(p for p in u_analytic.breakpoints() if lo < p < hi),
                   *( [x] if lo < x < hi else [] )})
    panels_per_segment = max(1, (cfg.quadrature_points - 1) // 2)
    segments: list[tuple[float, float]] = []
    for left, right in zip(cuts[:-1], cuts[1:]):
        edges = np.linspace(left, right, panels_per_segment + 1)
        segments.extend(zip(edges[:-1], edges[1:]))
    tol = _QUAD_TOL / max(1, len(segments))
    return sum(adaptive_simpson(f, a, b, tol) for a, b in segments)


@njit(cache=True)
def _ref_rhs_raw(u, weights, dx, r_decay, r_coeff, eps):
    n = u.shape[0]
    va = _conv_dk_raw(u, weights, r_decay, dx)
    uva = u * va
    out = np.empty(n)
    out[0] = 0.0
    out[n - 1] = 0.0
    for j in range(1, n - 1):
        uxx = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (dx * dx)
        ux = (u[j + 1] - u[j - 1]) / (2.0 * dx)
        duva = (uva[j + 1] - uva[j - 1]) / (2.0 * dx)
        out[j] = (r_coeff * u[j] * u[j] + eps) * uxx + 2.0 * r_coeff * u[j] * ux * ux - duva
    return out


@njit(cache=True)
def _ref_solve_loop(u0, weights, dx, r_decay, r_coeff, eps, cfl, t_end):
    u = u0.copy()
    t = 0.0
    while t < t_end:
        va = _conv_dk_raw(u, weights, r_decay, dx)
        umax = np.max(np.abs(u))
        vmax = np.max(np.abs(va))
        dt = cfl * min(
            dx * dx / (2.0 * (r_coeff * umax * umax + eps) + 1e-14), dx / (vmax + 1e-14)
        )
        if t + dt > t_end:
            dt = t_end - t
        if dt <= 0.0:
            break
        u = u + dt * _ref_rhs_raw(u, weights, dx, r_decay, r_coeff, eps)
        t += dt
    return u


def reference_solve(
    u0: Field,
    cfg,
    oracle_cfg: Optional[OracleConfig] = None,
    ic_fn: Optional[Callable[[Grid], Field]] = None,
) -> Field:
    """Fine-grid forward-Euler solution restricted back to the run grid.

    Integrates the nonconservative form with central differences on a grid
    of reference_n_nodes over the same domain, then restricts to u0's grid
    (exact subsampling when the node counts nest, linear interpolation
    otherwise). ic_fn, when given, samples the initial condition directly on
    the fine grid; otherwise u0 is interpolated up, which adds an O(dx^2)
    imprint of the coarse grid.
    """
    ocfg = oracle_cfg if oracle_cfg is not None else OracleConfig()
    if cfg.t_end > 0.5:
        raise ValueError("reference_solve is restricted to short horizons (t_end <= 0.5)")
    coarse = u0.grid
    if ocfg.reference_n_nodes <= coarse.n_nodes:
        raise ValueError("reference_n_nodes must exceed the run grid's n_nodes")
    fine = Grid(coarse.half_width, ocfg.reference_n_nodes)
    if ic_fn is not None:
        u0_fine = ic_fn(fine)
        if u0_fine.grid != fine:
            raise ValueError("ic_fn must sample on the provided fine grid")
    else:
        u0_fine = Field(fine, np.interp(fine.nodes, coarse.nodes, u0.values))
    r_decay = math.exp(-fine.spacing)
    u_fine = _ref_solve_loop(
        u0_fine.values,
        fine.quad_weights,
        fine.spacing,
        r_decay,
        cfg.r_coeff,
        cfg.epsilon,
        ocfg.reference_cfl,
        cfg.t_end,
    )
    if not np.isfinite(u_fine).all():
        raise RuntimeError("reference diverged; reduce reference_cfl")
    stride, rem = divmod(fine.n_nodes - 1, coarse.n_nodes - 1)
    if rem == 0:
        return Field(coarse, u_fine[::stride])
    return Field(coarse, np.interp(coarse.nodes, fine.nodes, u_fine))
