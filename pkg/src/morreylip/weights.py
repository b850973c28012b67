"""Weights, weighted cube measures and A_p / A_1 constant estimates."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import (
    Cube,
    CubeFamily,
    Grid,
    GridFunction,
    check_same_grid,
    family_sup,
    naive_integral,
    window_means,
    window_sums,
    windows,
)
from . import grid as _grid
from ._exact import exact_mean

# per-cube sanity bounds (Jensen, A_p <= A_1) are real-number facts; allow rounding
_ROUND_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class Weight:
    """Strictly positive grid function; ``flags`` carries construction warnings."""

    base: GridFunction
    flags: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not np.all(self.base.values > 0):
            raise ValueError("weight values must be strictly positive")

    @classmethod
    def from_values(cls, grid: Grid, values, flags=()) -> "Weight":
        return cls(GridFunction(grid, values), tuple(flags))

    @property
    def grid(self) -> Grid:
        return self.base.grid

    @property
    def values(self) -> np.ndarray:
        return self.base.values

    @property
    def prefix(self):
        return self.base.prefix

    def power(self, t: float) -> GridFunction:
        return GridFunction(self.grid, self.values**t)


def constant_weight(grid: Grid, c: float = 1.0) -> Weight:
    if not c > 0:
        raise ValueError(f"constant weight needs c > 0, got {c}")
    return Weight(GridFunction.constant(grid, c))


def power_weight(grid: Grid, alpha: float) -> Weight:
    """``|x|**alpha`` at cell centers.

    Flagged ``not-A1`` when ``alpha`` lies outside ``(-dim, 0]``.
    """
    r = np.linalg.norm(grid.centers(), axis=-1)
    flags = () if -grid.dim < alpha <= 0 else ("not-A1",)
    return Weight(GridFunction(grid, r**alpha), flags)


def measure(mu: Weight, cube: Cube) -> float:
    return _grid.integral(mu.base, cube)


def naive_measure(mu: Weight, cube: Cube) -> float:
    return naive_integral(mu.base, cube)


def measures(mu: Weight, side: int) -> np.ndarray:
    """``mu(Q)`` for every ``side``-cube, indexed by low corner."""
    return window_sums(mu.base, side) * mu.grid.cell_volume


@dataclass(frozen=True)
class ApReport:
    p: float
    constant: float
    witness: Cube | None
    flags: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "constant": self.constant,
            "witness": None if self.witness is None else self.witness.to_json(),
            "flags": list(self.flags),
        }


def _dual_exponent(p: float) -> float:
    return p / (p - 1.0)


def ap_constant(mu: Weight, p: float, cubes: CubeFamily) -> ApReport:
    """Sup over the family of ``avg(mu) * avg(mu**(1-p'))**(p-1)``."""
    if not p > 1:
        raise ValueError(f"ap_constant needs p > 1, got {p}")
    t = 1.0 - _dual_exponent(p)
    dual = mu.power(t)
    dim = mu.grid.dim

    def stat(s):
        a = window_means(mu.base, s)
        d = window_means(dual, s)
        expr = a * d ** (p - 1.0)
        mins = windows(mu.values, s).min(axis=tuple(range(dim, 2 * dim)))
        a1 = a / mins
        if np.any(expr < 1.0 - _ROUND_RTOL):
            raise AssertionError("A_p expression below 1 on some cube")
        if np.any(expr > a1 * (1.0 + _ROUND_RTOL)):
            raise AssertionError("A_p expression exceeds the A_1 expression on some cube")
        return expr

    value, witness = family_sup(cubes, stat)
    return ApReport(p, value, witness, mu.flags)


def a1_constant(mu: Weight, cubes: CubeFamily) -> ApReport:
    """Sup over the family of ``avg_Q(mu) / min_Q(mu)``."""
    dim = mu.grid.dim

    def stat(s):
        a = window_means(mu.base, s)
        mins = windows(mu.values, s).min(axis=tuple(range(dim, 2 * dim)))
        return a / mins

    value, witness = family_sup(cubes, stat)
    return ApReport(1.0, value, witness, mu.flags)


def naive_ap_constant(mu: Weight, p: float, cubes: CubeFamily) -> ApReport:
    t = 1.0 - _dual_exponent(p)
    dual = mu.values**t
    best, witness = -math.inf, None
    for q in cubes:
        a = exact_mean(mu.values[q.slices])
        d = exact_mean(dual[q.slices])
        v = float(np.float64(a) * np.float64(d) ** (p - 1.0))
        if v > best:
            best, witness = v, q
    return ApReport(p, best, witness, mu.flags)


def naive_a1_constant(mu: Weight, cubes: CubeFamily) -> ApReport:
    best, witness = -math.inf, None
    for q in cubes:
        cells = mu.values[q.slices].ravel()
        v = exact_mean(cells) / cells.min()
        if v > best:
            best, witness = v, q
    return ApReport(1.0, best, witness, mu.flags)


def ball_measure(w: Weight, center_idx, radius: float) -> float:
    """``w(B(x, radius))`` summing cells whose centers lie in the closed ball."""
    c = w.grid.centers()
    x = c[tuple(center_idx)]
    inside = np.linalg.norm(c - x, axis=-1) <= radius * (1.0 + 1e-12)
    return math.fsum(w.values[inside]) * w.grid.cell_volume


def all_pairs(grid: Grid) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    cells = list(itertools.product(range(grid.extent), repeat=grid.dim))
    return list(itertools.combinations(cells, 2))


def lemma21_constant(b: GridFunction, w: Weight, beta: float, sample_pairs=None) -> float:
    """Max over pairs of ``|b(x)-b(y)| / (w(B(x,|x-y|))**(beta/n) * (w(x)+w(y)))``.

    Balls are approximated by cell-center membership.  Coincident pairs are
    skipped.  With ``sample_pairs=None`` every unordered pair of cells is used.
    """
    if not 0 < beta < 1:
        raise ValueError(f"beta must lie in (0,1), got {beta}")
    g = check_same_grid(b, w.base)
    pairs = all_pairs(g) if sample_pairs is None else sample_pairs
    c = g.centers()
    n = g.dim
    best = 0.0
    for x, y in pairs:
        x, y = tuple(x), tuple(y)
        if x == y:
            continue
        r = float(np.linalg.norm(c[x] - c[y]))
        ball = ball_measure(w, x, r)
        den = ball ** (beta / n) * (w.values[x] + w.values[y])
        best = max(best, abs(b.values[x] - b.values[y]) / den)
    return best
