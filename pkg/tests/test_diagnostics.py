import math

import numpy as np
import pytest

from aggdiff import (
    DiagnosticsRecord,
    Field,
    Grid,
    SolverConfig,
    SolverState,
    check_bounds,
    fit_blowup_time,
    observe,
)

from conftest import make_bump


def _state(u, t=0.0, dt=0.0):
    from aggdiff import Status

    return SolverState(t=t, dt=dt, u=u, step_index=0, status=Status.RUNNING)


def _record(**overrides):
    base = dict(
        t=0.0, dt=0.0, mass=1.0, norm_1=1.0, norm_2=0.8, norm_inf=0.83,
        grad_inf=1.5, min_u=0.0, support_left=-1.0, support_right=1.0,
        l2_bound_ratio=1.0, va_inf=0.4,
    )
    base.update(overrides)
    return DiagnosticsRecord(**base)


def test_observe_zero_field():
    g = Grid(1.0, 33)
    cfg = SolverConfig(grid=g, t_end=1.0)
    rec = observe(_state(Field(g, np.zeros(33))), cfg)
    assert rec.mass == 0.0
    assert rec.norm_1 == rec.norm_2 == rec.norm_inf == 0.0
    assert rec.grad_inf == 0.0
    assert rec.va_inf == 0.0


def test_observe_constant_mass_exact():
    g = Grid(1.0, 41)
    cfg = SolverConfig(grid=g, t_end=1.0)
    rec = observe(_state(Field(g, np.ones(41))), cfg)
    assert rec.mass == pytest.approx(2.0, abs=1e-14)


def test_observe_initial_ratio_is_one():
    g = Grid(2.0, 129)
    cfg = SolverConfig(grid=g, t_end=1.0)
    rec = observe(_state(make_bump(g)), cfg)
    assert rec.l2_bound_ratio == 1.0


def test_observe_is_pure():
    g = Grid(2.0, 129)
    cfg = SolverConfig(grid=g, t_end=1.0)
    st = _state(make_bump(g), t=0.3, dt=1e-4)
    assert observe(st, cfg, 0.6) == observe(st, cfg, 0.6)


def test_check_bounds_clean_baseline():
    rec = _record()
    assert check_bounds(rec, rec) == []


def test_check_bounds_mass_drift():
    initial = _record()
    drifted = _record(t=0.5, mass=1.0 + 1e-6)
    viols = check_bounds(drifted, initial)
    assert [v.bound for v in viols] == ["mass_conservation"]
    assert viols[0].t == 0.5


def test_check_bounds_l2_growth():
    initial = _record()
    # norm_2 growing like exp(1.2 t) crosses the 5%-padded exp(t) envelope
    t = 0.5
    ratio = math.exp(1.2 * t) / math.exp(t)
    bad = _record(t=t, l2_bound_ratio=ratio)
    viols = check_bounds(bad, initial)
    assert [v.bound for v in viols] == ["l2_growth"]


def test_check_bounds_positivity_only_for_nonneg_start():
    initial = _record(min_u=0.0)
    dipped = _record(t=0.2, min_u=-1e-6)
    viols = check_bounds(dipped, initial)
    assert [v.bound for v in viols] == ["positivity"]
    signed_start = _record(min_u=-0.3)
    assert check_bounds(dipped, signed_start) == []


def test_fit_blowup_time_exact_reciprocal():
    recs = [_record(t=t, grad_inf=1.0 / (3.0 - t)) for t in np.linspace(0.0, 2.0, 12)]
    assert fit_blowup_time(recs, window=8) == pytest.approx(3.0, abs=1e-6)


def test_fit_blowup_time_scaled_reciprocal():
    recs = [_record(t=t, grad_inf=2.0 / (5.0 - t)) for t in np.linspace(0.0, 3.0, 12)]
    assert fit_blowup_time(recs, window=8) == pytest.approx(5.0, abs=1e-6)


def test_fit_blowup_time_degenerate_cases():
    flat = [_record(t=t, grad_inf=2.0) for t in np.linspace(0.0, 1.0, 10)]
    assert fit_blowup_time(flat, window=8) is None
    wobbling = [_record(t=t, grad_inf=2.0 + math.sin(10 * t)) for t in np.linspace(0.0, 1.0, 10)]
    assert fit_blowup_time(wobbling, window=8) is None
    assert fit_blowup_time(flat[:3], window=8) is None
