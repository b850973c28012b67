import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from morreylip.grid import Grid, GridFunction

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")


@st.composite
def grids(draw, dims=(1, 2), max_extent_1d=12, max_extent_2d=6):
    dim = draw(st.sampled_from(dims))
    hi = max_extent_1d if dim == 1 else max_extent_2d
    extent = draw(st.integers(2, hi))
    if extent % 2:
        # odd extents cannot be centered on [-1,1] without a center at 0
        return Grid(dim, extent, spacing=draw(st.sampled_from([0.25, 1.0])), origin=0.0)
    return Grid.over(dim, extent)


def _values(draw, grid, lo, hi):
    elems = st.floats(lo, hi, allow_nan=False, allow_infinity=False, width=64)
    flat = draw(st.lists(elems, min_size=grid.size, max_size=grid.size))
    return np.array(flat, dtype=np.float64).reshape(grid.shape)


@st.composite
def grid_functions(draw, grid=None, lo=-10.0, hi=10.0):
    g = draw(grids()) if grid is None else grid
    return GridFunction(g, _values(draw, g, lo, hi))


@st.composite
def function_pairs(draw, lo_b=0.0, hi_b=10.0):
    """(b, f) on one grid; b nonnegative by default."""
    g = draw(grids())
    return GridFunction(g, _values(draw, g, lo_b, hi_b)), GridFunction(g, _values(draw, g, -10.0, 10.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def operator_pairs(b, f, mu, q0, beta=0.5, r=1.25):
    """(fast, naive) callables for all seven operators on one instance."""
    from morreylip import operators as op

    return {
        "M": (lambda c: op.hl_maximal(f, c), lambda c: op.naive_hl_maximal(f, c)),
        "local": (lambda c: op.local_maximal(f, q0, c), lambda c: op.naive_local_maximal(f, q0, c)),
        "sharp": (lambda c: op.sharp_maximal(f, c), lambda c: op.naive_sharp_maximal(f, c)),
        "Mb": (lambda c: op.maximal_commutator(b, f, c), lambda c: op.naive_maximal_commutator(b, f, c)),
        "commutator_M": (lambda c: op.commutator_M(b, f, c), lambda c: op.naive_commutator_M(b, f, c)),
        "commutator_sharp": (lambda c: op.commutator_sharp(b, f, c), lambda c: op.naive_commutator_sharp(b, f, c)),
        "fractional": (
            lambda c: op.fractional_maximal(f, mu, beta, r, c),
            lambda c: op.naive_fractional_maximal(f, mu, beta, r, c),
        ),
    }


def same_output(a, b) -> bool:
    """Values bit-identical and, where recorded, identical witnesses."""
    if not np.array_equal(a.values, b.values):
        return False
    if a.witness_side is None or b.witness_side is None:
        return a.witness_side is None and b.witness_side is None
    return np.array_equal(a.witness_side, b.witness_side) and np.array_equal(a.witness_low, b.witness_low)
