from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from morreylip._adjudicate import CommutatorAdjudicator, holder_chain_holds, indicator_norm_holds
from morreylip._exact import to_fixed
from morreylip.grid import Grid, GridFunction, enumerate_cubes
from morreylip.weights import Weight, constant_weight, power_weight

from conftest import function_pairs, grid_functions


def _frac(v) -> Fraction:
    return Fraction(float(v))


def _brute(kind, b, f, cubes, idx):
    """Both sides of a commutator domination at one cell, in exact rationals."""
    bx = _frac(b.values[idx])

    def avg(vals):
        return sum(vals, Fraction(0)) / len(vals)

    def osc(vals):
        m = avg(vals)
        return avg([abs(v - m) for v in vals])

    best = {"mb": None, "mf": None, "mbf": None, "sf": None, "sbf": None}
    for q in cubes.containing(idx):
        bv = [_frac(v) for v in b.values[q.slices].ravel()]
        fv = [_frac(v) for v in f.values[q.slices].ravel()]
        cand = {
            "mb": avg([abs(bx - y) * abs(z) for y, z in zip(bv, fv)]),
            "mf": avg([abs(z) for z in fv]),
            "mbf": avg([abs(y * z) for y, z in zip(bv, fv)]),
            "sf": osc(fv),
            "sbf": osc([y * z for y, z in zip(bv, fv)]),
        }
        for k, v in cand.items():
            best[k] = v if best[k] is None or v > best[k] else best[k]
    if kind == "commM_vs_Mb":
        return abs(bx * best["mf"] - best["mbf"]), best["mb"]
    return abs(bx * best["sf"] - best["sbf"]), 2 * best["mb"]


@given(function_pairs(), st.sampled_from(["commM_vs_Mb", "commSharp_vs_2Mb"]), st.integers(0, 10**6))
def test_commutator_sides_match_rational_brute_force(pair, kind, pick):
    b, f = pair
    cubes = enumerate_cubes(b.grid)
    idx = tuple(int(i) for i in np.unravel_index(pick % b.grid.size, b.grid.shape))
    lhs, rhs = CommutatorAdjudicator(b, f, cubes)(kind, idx)
    unit = Fraction(2) ** (to_fixed(b.values)[1] + to_fixed(f.values)[1])
    ref_l, ref_r = _brute(kind, b, f, cubes, idx)
    assert lhs * unit == ref_l and rhs * unit == ref_r
    assert lhs <= rhs  # the domination itself, for b >= 0


def test_commutator_unknown_kind():
    g = Grid.over(1, 4)
    b = GridFunction.constant(g, 1.0)
    with pytest.raises(ValueError, match="unknown"):
        CommutatorAdjudicator(b, b, enumerate_cubes(g))("lemma26_1", (0,))


@st.composite
def weights(draw):
    f = draw(grid_functions(lo=0.01, hi=100.0))
    return Weight(f)


@given(weights(), st.sampled_from([0.125, 0.25, 0.5, 0.1, 1 / 3]))
def test_indicator_bound_holds_for_every_cube(mu, kappa):
    cubes = enumerate_cubes(mu.grid)
    assert all(indicator_norm_holds(mu, kappa, q, cubes) for q in cubes)


def test_indicator_bound_rejects_bad_kappa():
    g = Grid.over(1, 4)
    cubes = enumerate_cubes(g)
    with pytest.raises(ValueError):
        indicator_norm_holds(constant_weight(g), 1.0, next(iter(cubes)), cubes)


@given(grid_functions(), weights())
def test_holder_chain_exact(b, mu):
    if b.grid != mu.grid:
        mu = constant_weight(b.grid, 1.7)
    assert holder_chain_holds(b, mu, enumerate_cubes(b.grid))


def test_holder_chain_power_weight():
    g = Grid.over(2, 6)
    b = GridFunction(g, np.random.default_rng(3).normal(size=g.shape))
    assert holder_chain_holds(b, power_weight(g, -0.5), enumerate_cubes(g))
