import math

import numpy as np
import pytest

from aggdiff import (
    BlowupReport,
    CharacteristicEscapeError,
    CharacteristicSet,
    CharacteristicTracker,
    Field,
    Grid,
    advect,
    blowup_bound,
    boundary_speed_check,
    support_edges,
)
from aggdiff.characteristics import _advect_rk2

from conftest import make_bump, sampled_indicator


def test_characteristic_set_validation():
    with pytest.raises(ValueError):
        CharacteristicSet(np.array([0.0, 0.0]), np.array([0.0, 0.0]), 0.0)
    cs = CharacteristicSet.seeded(np.linspace(-1, 1, 5))
    assert cs.t == 0.0
    assert cs.is_ordered()
    disordered = CharacteristicSet(np.array([0.0, 1.0]), np.array([1.0, 0.0]), 0.0)
    assert not disordered.is_ordered()  # reported, not repaired


def test_advect_zero_velocity_keeps_positions():
    g = Grid(2.0, 65)
    z = Field(g, np.zeros(65))
    cs = CharacteristicSet.seeded(np.linspace(-1, 1, 9))
    out = advect(cs, z, z, 0.01)
    assert np.array_equal(out.positions, cs.positions)
    assert out.t == pytest.approx(0.01)


def test_advect_center_particle_fixed_for_even_data():
    g = Grid(2.0, 129)
    u = make_bump(g)
    cs = CharacteristicSet.seeded(np.array([0.0]))
    out = advect(cs, u, u, 1e-3)
    assert abs(out.positions[0]) <= 1e-12


def test_advect_requires_positive_dt():
    g = Grid(2.0, 65)
    z = Field(g, np.zeros(65))
    cs = CharacteristicSet.seeded(np.array([0.0]))
    with pytest.raises(ValueError):
        advect(cs, z, z, 0.0)


def test_rk2_exact_on_constant_velocity():
    # drive the RK2 update directly with a frozen constant velocity field
    g = Grid(2.0, 65)
    c = 0.37
    va = np.full(65, c)
    pos = np.array([-0.5])
    t, dt = 0.0, 1e-2
    for _ in range(100):
        pos, escapee = _advect_rk2(pos, va, va, g.half_width, g.spacing, dt)
        assert escapee == -1
        t += dt
    assert pos[0] == pytest.approx(-0.5 + c * t, abs=1e-12)


def test_advect_escape_raises():
    g = Grid(2.0, 65)
    va = np.full(65, 50.0)
    pos, escapee = _advect_rk2(np.array([1.9]), va, va, g.half_width, g.spacing, 0.01)
    assert escapee == 0
    # a heavy spike near the right wall drags a nearby particle past it
    vals = np.zeros(65)
    vals[int(np.argmin(np.abs(g.nodes - 1.9)))] = 200.0
    heavy = Field(g, vals)
    cs = CharacteristicSet.seeded(np.array([1.5]))
    with pytest.raises(CharacteristicEscapeError, match="escaped truncated domain"):
        advect(cs, heavy, heavy, 1.0)


def test_boundary_speed_check_bump():
    g = Grid(2.0, 513)
    u = make_bump(g, length=1.0, mass=1.0)
    observed, lower = boundary_speed_check(u, -1.0)
    assert lower == pytest.approx(math.exp(-2.0), rel=1e-12)
    assert observed >= lower * 0.95


def test_boundary_speed_check_zero_field():
    g = Grid(2.0, 65)
    observed, lower = boundary_speed_check(Field(g, np.zeros(65)), -1.0)
    assert observed == 0.0
    assert lower == 0.0


def test_boundary_speed_check_spike():
    # a single spike of mass m at distance d right of x_left induces
    # velocity about m*exp(-d) there
    g = Grid(4.0, 801)
    x_left = -1.0
    d = 0.75
    j = int(np.argmin(np.abs(g.nodes - (x_left + d))))
    vals = np.zeros(801)
    vals[j] = 1.0
    u = Field(g, vals)
    m = u.mass()
    observed, lower = boundary_speed_check(u, x_left)
    assert observed == pytest.approx(m * math.exp(-d), rel=1e-6)
    assert observed >= m * math.exp(-2.0)


def test_boundary_speed_check_rejects_negative_data():
    g = Grid(2.0, 65)
    with pytest.raises(ValueError):
        boundary_speed_check(Field(g, -np.ones(65)), -1.0)


def test_blowup_bound_values():
    assert blowup_bound(1.0, 1.0) == pytest.approx(2.0 * math.e**2, rel=1e-12)
    assert blowup_bound(0.5, 2.0) == pytest.approx(0.5 * math.e, rel=1e-12)
    # doubling the mass halves the bound exactly
    assert blowup_bound(0.7, 2.0) == blowup_bound(0.7, 1.0) / 2.0
    with pytest.raises(ValueError):
        blowup_bound(0.0, 1.0)
    with pytest.raises(ValueError):
        blowup_bound(1.0, 0.0)


def test_support_edges_cases():
    g = Grid(2.0, 257)
    empty = support_edges(Field(g, np.zeros(257)))
    assert empty.empty and empty.left == 0.0 and empty.right == 0.0
    box = sampled_indicator(g, -1.0, 1.0)
    edges = support_edges(box)
    assert not edges.empty
    assert edges.left == pytest.approx(-1.0, abs=g.spacing)
    assert edges.right == pytest.approx(1.0, abs=g.spacing)
    with pytest.raises(ValueError):
        support_edges(box, rel_tol=2.0)


def test_blowup_report_invariant():
    rep = BlowupReport.build(
        support_half_width=1.0,
        initial_mass=1.0,
        observed_blowup_time=None,
        observed_final_grad_inf=3.0,
        observed_sup_norm_max=0.9,
    )
    assert rep.blowup_time_upper_bound == 2.0 * rep.support_half_width / rep.boundary_speed_lower_bound
    assert rep.blowup_time_upper_bound == pytest.approx(blowup_bound(1.0, 1.0), rel=1e-15)


def test_center_particle_pinned_by_even_data():
    # the drift of even data is odd, so the alpha = 0 particle stays put
    from aggdiff import SolverConfig, SolverState, Status, step

    g = Grid(2.0, 129)
    cfg = SolverConfig(grid=g, t_end=0.5, epsilon=0.0)
    tracker = CharacteristicTracker(np.array([-0.5, 0.0, 0.5]), g, cfg.kernel)
    state = SolverState.initial(make_bump(g))
    while state.status is Status.RUNNING:
        prev = state
        state = step(state, cfg, grad0=1e12)
        tracker.on_step(prev.u, state.u, state.dt)
    assert abs(tracker.positions[1]) <= 1e-9
    assert tracker.positions[0] > -0.5
    assert tracker.positions[2] < 0.5


def test_tracker_snapshot_and_order_accounting():
    g = Grid(2.0, 129)
    tracker = CharacteristicTracker(np.linspace(-1, 1, 8), g)
    u = make_bump(g)
    tracker.snapshot(0.0)
    for _ in range(5):
        tracker.on_step(u, u, 1e-3)
    tracker.snapshot(5e-3)
    assert len(tracker.history) == 2
    assert tracker.order_violations == []
    assert tracker.left_edge_violations == 0
    assert tracker.right_edge_violations == 0
    # inward drift: edge particles moved toward the center
    assert tracker.positions[0] > -1.0
    assert tracker.positions[-1] < 1.0
