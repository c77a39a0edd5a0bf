import numpy as np
import pytest

from aggdiff import Field, Grid, KernelSpec, build_initial_condition


@pytest.fixture
def grid_symmetric():
    return Grid(4.0, 257)


@pytest.fixture
def kernel_spec(grid_symmetric):
    return KernelSpec.for_grid(grid_symmetric)


def make_bump(grid: Grid, length: float = 1.0, mass: float = 1.0) -> Field:
    return build_initial_condition(grid, "bump", length, mass=mass)


def sampled_indicator(grid: Grid, a: float, b: float) -> Field:
    """Indicator of [a, b] sampled on the nodes.

    Nodes that coincide with a jump carry the midpoint value 1/2, which keeps
    node-sum quadrature of the sampled data second-order accurate.
    """
    x = grid.nodes
    u = np.where((x > a) & (x < b), 1.0, 0.0)
    tol = 1e-12 * grid.half_width
    u[np.abs(x - a) <= tol] = 0.5
    u[np.abs(x - b) <= tol] = 0.5
    return Field(grid, u)


def even_random_field(grid: Grid, rng: np.random.Generator, scale: float = 1.0) -> Field:
    assert grid.n_nodes % 2 == 1
    half = rng.random((grid.n_nodes + 1) // 2)
    return Field(grid, scale * np.concatenate([half[:0:-1], half]))
