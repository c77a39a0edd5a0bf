import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aggdiff import Field, Grid, ddx, interpolate, lp_norm
from aggdiff.oracle import adaptive_simpson


def test_grid_nodes_and_spacing():
    g = Grid(2.0, 65)
    assert g.spacing == pytest.approx(4.0 / 64, abs=0)
    assert g.nodes[0] == -2.0
    assert g.nodes[-1] == 2.0
    assert np.all(np.diff(g.nodes) > 0)
    assert g.quad_weights[0] == 0.5 and g.quad_weights[-1] == 0.5
    assert np.all(g.quad_weights[1:-1] == 1.0)


@pytest.mark.parametrize("n", [2, 7])
def test_grid_rejects_too_few_nodes(n):
    with pytest.raises(ValueError):
        Grid(1.0, n)


def test_grid_rejects_bad_half_width():
    with pytest.raises(ValueError):
        Grid(0.0, 65)
    with pytest.raises(ValueError):
        Grid(math.nan, 65)


def test_field_shape_mismatch():
    g = Grid(1.0, 9)
    with pytest.raises(ValueError):
        Field(g, np.zeros(8))


def test_field_flags_non_finite():
    g = Grid(1.0, 9)
    vals = np.zeros(9)
    vals[3] = np.nan
    assert not Field(g, vals).valid
    assert Field(g, np.zeros(9)).valid


def test_lp_norm_zero_field():
    g = Grid(1.0, 33)
    z = Field(g, np.zeros(33))
    for p in (1, 2, 3, math.inf):
        assert lp_norm(z, p) == 0.0


def test_lp_norm_constant_is_exact():
    # endpoint half-weights make the node sum of a constant exactly the
    # interval length
    g = Grid(1.0, 57)
    one = Field(g, np.ones(57))
    assert lp_norm(one, 1) == pytest.approx(2.0, abs=1e-12)


def test_lp_norm_sine_matches_integral():
    # oracle: integral of sin(pi x)^2 over [-1, 1]
    exact = adaptive_simpson(lambda x: math.sin(math.pi * x) ** 2, -1.0, 1.0, 1e-12)
    assert exact == pytest.approx(1.0, abs=1e-10)
    g = Grid(1.0, 201)
    f = Field(g, np.sin(np.pi * g.nodes))
    assert lp_norm(f, 2) == pytest.approx(math.sqrt(exact), abs=2e-3)


def test_lp_norm_inf_is_max_abs():
    g = Grid(1.0, 9)
    f = Field(g, np.array([0.0, -3.0, 1.0, 0.5, 0.0, 0.0, 2.0, 0.0, 0.0]))
    assert lp_norm(f, math.inf) == 3.0


def test_lp_norm_invalid_inputs():
    g = Grid(1.0, 9)
    f = Field(g, np.zeros(9))
    with pytest.raises(ValueError):
        lp_norm(f, 0.5)
    bad = np.zeros(9)
    bad[0] = np.inf
    with pytest.raises(ValueError, match="non-finite field"):
        lp_norm(Field(g, bad), 2)


@settings(max_examples=30, deadline=None)
@given(
    c=st.floats(min_value=1e-3, max_value=1e3),
    seed=st.integers(min_value=0, max_value=2**31),
    p=st.sampled_from([1.0, 2.0, 3.0, math.inf]),
)
def test_lp_norm_absolute_homogeneity(c, seed, p):
    g = Grid(2.0, 65)
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(65)
    base = lp_norm(Field(g, vals), p)
    scaled = lp_norm(Field(g, c * vals), p)
    assert scaled == pytest.approx(c * base, rel=1e-13)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31), p=st.sampled_from([1.0, 2.0, 4.0]))
def test_lp_norm_discrete_embedding(seed, p):
    # sup norm <= lp norm * dx^(-1/p) for fields vanishing at the walls,
    # where the interior max carries full quadrature weight
    g = Grid(2.0, 65)
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(65)
    vals[0] = vals[-1] = 0.0
    f = Field(g, vals)
    assert lp_norm(f, math.inf) <= lp_norm(f, p) * g.spacing ** (-1.0 / p) * (1 + 1e-12)


def test_ddx_constant_and_linear():
    g = Grid(2.0, 33)
    zero = ddx(Field(g, np.full(33, 4.2)))
    # interior differences cancel exactly; the one-sided ends only to rounding
    assert np.max(np.abs(zero.values)) <= 1e-13
    lin = ddx(Field(g, g.nodes.copy()))
    assert np.max(np.abs(lin.values - 1.0)) <= 1e-12


def test_ddx_quadratic_exact_inside():
    g = Grid(1.0, 41)
    d = ddx(Field(g, g.nodes**2))
    assert np.max(np.abs(d.values[1:-1] - 2.0 * g.nodes[1:-1])) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31))
def test_ddx_parity(seed):
    g = Grid(2.0, 65)
    rng = np.random.default_rng(seed)
    half = rng.standard_normal(33)
    even = np.concatenate([half[:0:-1], half])
    d_even = ddx(Field(g, even)).values
    assert np.max(np.abs(d_even + d_even[::-1])) <= 1e-12  # ddx(even) is odd
    half[0] = 0.0  # an odd field vanishes at the center
    odd = np.concatenate([-half[:0:-1], half])
    d_odd = ddx(Field(g, odd)).values
    assert np.max(np.abs(d_odd - d_odd[::-1])) <= 1e-12  # ddx(odd) is even


def test_ddx_rejects_invalid():
    g = Grid(1.0, 9)
    bad = np.zeros(9)
    bad[4] = np.nan
    with pytest.raises(ValueError, match="non-finite field"):
        ddx(Field(g, bad))


def test_interpolate_at_nodes_and_midpoints():
    g = Grid(2.0, 17)
    rng = np.random.default_rng(0)
    f = Field(g, rng.standard_normal(17))
    for j in (0, 5, 16):
        assert interpolate(f, float(g.nodes[j])) == f.values[j]
    mid = 0.5 * (g.nodes[3] + g.nodes[4])
    assert interpolate(f, float(mid)) == pytest.approx(
        0.5 * (f.values[3] + f.values[4]), rel=1e-14
    )


def test_interpolate_reproduces_linear():
    g = Grid(2.0, 17)
    f = Field(g, g.nodes.copy())
    xs = np.linspace(-2.0, 2.0, 101)
    out = interpolate(f, xs)
    assert np.max(np.abs(out - xs)) <= 1e-12


def test_interpolate_out_of_domain():
    g = Grid(2.0, 17)
    f = Field(g, np.zeros(17))
    with pytest.raises(ValueError, match="out of domain"):
        interpolate(f, 2.5)
