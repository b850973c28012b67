"""Maximal operators and their commutators on a grid.

Every sup-type operator has a fast path (exact prefix-table window sums plus a
monotone-queue sliding maximum) and a ``naive_*`` path that enumerates the
cube family and averages cells directly.  Both paths produce correctly
rounded cube statistics (exact sum, one division), so they agree bit for bit, including the witness cube
(ties go to the first cube in family order).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ._exact import box_sums, divide_fixed, exact_mean, exact_sum, prefix_table
from .grid import (
    Cube,
    CubeFamily,
    GridFunction,
    Policy,
    check_same_grid,
    cube_axes,
    window_means,
    window_sums,
    windows,
)
from .weights import Weight

OPERATORS = (
    "M",
    "local",
    "sharp",
    "Mb",
    "commutator_M",
    "commutator_sharp",
    "fractional",
)


@dataclass(frozen=True, eq=False)
class OperatorOutput:
    """An operator evaluated at every cell center.

    ``witness_side`` / ``witness_low`` record, per cell, the cube attaining the
    supremum (side 0 where no cube applies).  Signed commutators carry none.
    """

    field: GridFunction
    witness_side: np.ndarray | None = None
    witness_low: np.ndarray | None = None

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    def witness(self, idx) -> Cube | None:
        if self.witness_side is None:
            return None
        idx = tuple(idx)
        s = int(self.witness_side[idx])
        return Cube(s, tuple(self.witness_low[idx])) if s else None

    def witness_records(self) -> list[dict]:
        out = []
        if self.witness_side is None:
            return out
        for idx in np.ndindex(*self.values.shape):
            q = self.witness(idx)
            if q is not None:
                out.append({"point": list(idx), **q.to_json(), "value": float(self.values[idx])})
        return out


# -- sup machinery -----------------------------------------------------------


def _sliding_max(vals, side: int, npoints: int):
    """For each point ``x``, max of ``vals[a]`` over ``x-side+1 <= a <= x``.

    Monotone deque; ties keep the smallest offset.
    """
    L = len(vals)
    out = np.full(npoints, -np.inf)
    arg = np.zeros(npoints, dtype=np.int64)
    q: deque[int] = deque()
    nxt = 0
    for x in range(npoints):
        hi = min(x, L - 1)
        while nxt <= hi:
            v = vals[nxt]
            while q and vals[q[-1]] < v:
                q.pop()
            q.append(nxt)
            nxt += 1
        while q and q[0] < x - side + 1:
            q.popleft()
        if q:
            out[x] = vals[q[0]]
            arg[x] = q[0]
    return out, arg


def _per_point_max(stat: np.ndarray, side: int, extent: int, policy: Policy):
    """Max over family windows containing each cell; returns values and low corners.

    ``stat`` is indexed by ``low // step`` (step 1 for ALL, ``side`` for DYADIC).
    """
    dim = stat.ndim
    if policy is Policy.DYADIC and dim == 1:
        n = stat.shape[0] * side
        vals = np.full(extent, -np.inf)
        vals[:n] = np.repeat(stat, side)
        low = np.zeros((extent, 1), dtype=np.int64)
        low[:n, 0] = np.repeat(np.arange(stat.shape[0]) * side, side)
        return vals, low
    if policy is Policy.DYADIC:
        # exactly one dyadic window of this side contains each cell (or none at the edge)
        k = np.arange(extent) // side
        ok = k < stat.shape[0]
        k = np.where(ok, k, 0)
        idx = np.meshgrid(*([k] * dim), indexing="ij")
        vals = stat[tuple(idx)]
        okm = ok
        for _ in range(dim - 1):
            okm = okm[..., None] & ok
        vals = np.where(okm, vals, -np.inf)
        return vals, np.stack(idx, axis=-1) * side
    if dim == 1:
        v, a = _sliding_max(stat.tolist(), side, extent)
        return v, a[:, None]
    L = stat.shape[0]
    rowmax = np.empty((L, extent))
    rowarg = np.empty((L, extent), dtype=np.int64)
    for a0 in range(L):
        rowmax[a0], rowarg[a0] = _sliding_max(stat[a0].tolist(), side, extent)
    vals = np.empty((extent, extent))
    low = np.empty((extent, extent, 2), dtype=np.int64)
    for x1 in range(extent):
        v, a0 = _sliding_max(rowmax[:, x1].tolist(), side, extent)
        vals[:, x1] = v
        low[:, x1, 0] = a0
        low[:, x1, 1] = rowarg[a0, x1]
    return vals, low


def _sup(cubes: CubeFamily, stat_fn, restrict: Cube | None = None):
    """Pointwise sup of a cube statistic over cubes containing each cell.

    ``stat_fn(side, step)`` returns the statistic for cubes whose low corners
    are multiples of ``step``, indexed by ``low // step``.
    """
    g = cubes.grid
    best = np.full(g.shape, -np.inf)
    wside = np.zeros(g.shape, dtype=np.int64)
    wlow = np.zeros(g.shape + (g.dim,), dtype=np.int64)
    for s in cubes.sides():
        if restrict is not None and s > restrict.side:
            break
        step = cubes.step(s)
        stat = stat_fn(s, step)
        if restrict is not None:
            stat = np.where(_inside_mask(cubes.offsets(s), s, restrict), stat, -np.inf)
        vals, low = _per_point_max(stat, s, g.extent, cubes.policy)
        upd = vals > best
        best[upd] = vals[upd]
        wside[upd] = s
        wlow[upd] = low[upd]
    return best, wside, wlow


def _inside_mask(offsets: np.ndarray, side: int, q0: Cube) -> np.ndarray:
    mask = None
    for a in q0.low:
        m1 = (offsets >= a) & (offsets + side <= a + q0.side)
        mask = m1 if mask is None else mask[..., None] & m1
    return mask


def _naive_sup(cubes: CubeFamily, batch_stat, restrict: Cube | None = None):
    """Reference path: enumerate cubes in family order, strict-greater updates.

    ``batch_stat(qs)`` returns one statistic per cube of ``qs`` (all of one
    side), from the cells gathered cube by cube.
    """
    g = cubes.grid
    best = np.full(g.shape, -np.inf)
    wside = np.zeros(g.shape, dtype=np.int64)
    wlow = np.zeros(g.shape + (g.dim,), dtype=np.int64)
    keep = [q for q in cubes if restrict is None or q.inside(restrict)]
    stats = {}
    for side in sorted({q.side for q in keep}):
        qs = [q for q in keep if q.side == side]
        stats.update(zip(qs, batch_stat(qs)))
    for q in keep:
        v = stats[q]
        region = best[q.slices]
        upd = np.broadcast_to(v, region.shape) > region
        region[upd] = np.broadcast_to(v, region.shape)[upd]
        wside[q.slices][upd] = q.side
        wlow[q.slices][upd] = q.low
    return best, wside, wlow


def _gather(values: np.ndarray, qs) -> np.ndarray:
    """Cells of each cube, stacked: shape ``(len(qs), side, ..., side)``."""
    return np.stack([values[q.slices] for q in qs])


def _cell_axes(dim: int) -> tuple[int, ...]:
    return tuple(range(1, dim + 1))


def _output(g, best, wside, wlow) -> OperatorOutput:
    best = np.where(wside > 0, best, 0.0)
    return OperatorOutput(GridFunction(g, best), wside, wlow)


# -- per-cube statistics (shared by naive paths and witness checks) ------------


def mean_abs(f: GridFunction, q: Cube) -> float:
    return float(_mean_abs_batch(f, [q])[0])


def mean_oscillation(f: GridFunction, q: Cube) -> float:
    return float(_oscillation_batch(f, [q])[0])


def mb_cube_values(b: GridFunction, f: GridFunction, q: Cube) -> np.ndarray:
    """``avg_Q |b(x) - b(.)| |f|`` for every cell ``x`` of ``q``."""
    return _mb_batch(b, f, [q])[0]


def _mean_abs_batch(f: GridFunction, qs) -> np.ndarray:
    return exact_mean(np.abs(_gather(f.values, qs)), axis=_cell_axes(f.grid.dim))


def _oscillation_batch(f: GridFunction, qs) -> np.ndarray:
    axes = _cell_axes(f.grid.dim)
    cells = _gather(f.values, qs)
    return exact_mean(np.abs(cells - exact_mean(cells, axis=axes, keepdims=True)), axis=axes)


def _mb_batch(b: GridFunction, f: GridFunction, qs) -> np.ndarray:
    bq = _gather(b.values, qs)
    k, shape = len(qs), bq.shape[1:]
    bq = bq.reshape(k, -1)
    afq = np.abs(_gather(f.values, qs)).reshape(k, -1)
    rows = np.abs(bq[:, :, None] - bq[:, None, :]) * afq[:, None, :]
    return exact_mean(rows, axis=2).reshape((k,) + shape)


def _fractional_formula(int_g, mu_q, beta: float, r: float, dim: int):
    return (mu_q ** (r * beta / dim - 1.0) * int_g) ** (1.0 / r)


def _fractional_batch(f: GridFunction, mu: Weight, beta: float, r: float, qs) -> np.ndarray:
    g, axes = f.grid, _cell_axes(f.grid.dim)
    dens = np.abs(f.values) ** r * mu.values
    int_g = np.asarray(exact_sum(_gather(dens, qs), axis=axes)) * g.cell_volume
    mu_q = np.asarray(exact_sum(_gather(mu.values, qs), axis=axes)) * g.cell_volume
    return _fractional_formula(int_g, mu_q, beta, r, g.dim)


def fractional_cube_value(f: GridFunction, mu: Weight, beta: float, r: float, q: Cube) -> float:
    return float(_fractional_batch(f, mu, beta, r, [q])[0])


# -- operators ----------------------------------------------------------------


def hl_maximal(f: GridFunction, cubes: CubeFamily) -> OperatorOutput:
    """``M(f)(x)``: max over family cubes containing ``x`` of ``avg_Q |f|``."""
    af = f.map(np.abs)
    return _output(f.grid, *_sup(cubes, lambda s, k: window_means(af, s, k)))


def naive_hl_maximal(f: GridFunction, cubes: CubeFamily) -> OperatorOutput:
    return _output(f.grid, *_naive_sup(cubes, lambda qs: _mean_abs_batch(f, qs)))


def _check_q0(f: GridFunction, q0: Cube):
    if not f.grid.contains(q0):
        raise ValueError(f"{q0} does not lie inside the grid")


def local_maximal(f: GridFunction, q0: Cube, cubes: CubeFamily) -> OperatorOutput:
    """``M_{Q0}(f)``: cubes restricted to ``Q ⊆ Q0``; zero outside ``Q0``."""
    _check_q0(f, q0)
    af = f.map(np.abs)
    return _output(
        f.grid, *_sup(cubes, lambda s, k: window_means(af, s, k), restrict=q0)
    )


def naive_local_maximal(f: GridFunction, q0: Cube, cubes: CubeFamily) -> OperatorOutput:
    _check_q0(f, q0)
    return _output(f.grid, *_naive_sup(cubes, lambda qs: _mean_abs_batch(f, qs), restrict=q0))


def _oscillation_stat(f: GridFunction, s: int, step: int) -> np.ndarray:
    dim = f.grid.dim
    means = window_means(f, s, step)
    win = windows(f.values, s)[(slice(None, None, step),) * dim]
    dev = np.abs(win - means[(...,) + (None,) * dim])
    return exact_mean(dev, axis=cube_axes(dim))


def sharp_maximal(f: GridFunction, cubes: CubeFamily) -> OperatorOutput:
    """``M#(f)(x)``: max over cubes containing ``x`` of ``avg_Q |f - f_Q|``."""
    return _output(f.grid, *_sup(cubes, lambda s, k: _oscillation_stat(f, s, k)))


def naive_sharp_maximal(f: GridFunction, cubes: CubeFamily) -> OperatorOutput:
    return _output(f.grid, *_naive_sup(cubes, lambda qs: _oscillation_batch(f, qs)))


def maximal_commutator(b: GridFunction, f: GridFunction, cubes: CubeFamily) -> OperatorOutput:
    """``M_b(f)(x)``: max over cubes ``Q ∋ x`` of ``avg_Q |b(x) - b(y)| |f(y)|``.

    The integrand depends on ``x``, so each cell gets its own exact prefix
    table over the grid; windows not containing the cell are masked out.
    """
    g = check_same_grid(b, f)
    dim, E, N = g.dim, g.extent, g.size
    bx = b.values.reshape(N, *([1] * dim))
    terms = np.abs(bx - b.values[None]) * np.abs(f.values)[None]
    table, e = prefix_table(terms, lead=1)
    cells = np.array(list(np.ndindex(*g.shape)))  # (N, dim), C order
    best = np.full(N, -np.inf)
    wside = np.zeros(N, dtype=np.int64)
    wlow = np.zeros((N, dim), dtype=np.int64)
    for s in cubes.sides():
        L = E - s + 1
        vals = divide_fixed(box_sums(table, s, lead=1), s**dim, e)  # (N, L, ..)
        pos = np.arange(L)
        mask = cubes.offset_mask(s)[None]
        for ax in range(dim):
            x = cells[:, ax].reshape((N,) + (1,) * dim)
            p = pos.reshape((1,) + tuple(L if k == ax else 1 for k in range(dim)))
            mask = mask & (p <= x) & (x < p + s)
        vals = np.where(mask, vals, -np.inf).reshape(N, -1)
        k = np.argmax(vals, axis=1)
        v = vals[np.arange(N), k]
        upd = v > best
        best[upd] = v[upd]
        wside[upd] = s
        wlow[upd] = np.stack(np.unravel_index(k[upd], (L,) * dim), axis=-1)
    return _output(g, best.reshape(g.shape), wside.reshape(g.shape), wlow.reshape(g.shape + (dim,)))


def naive_maximal_commutator(b: GridFunction, f: GridFunction, cubes: CubeFamily) -> OperatorOutput:
    g = check_same_grid(b, f)
    return _output(g, *_naive_sup(cubes, lambda qs: _mb_batch(b, f, qs)))


def _signed(b: GridFunction, op_f: OperatorOutput, op_bf: OperatorOutput) -> OperatorOutput:
    return OperatorOutput(GridFunction(b.grid, b.values * op_f.values - op_bf.values))


def commutator_M(b: GridFunction, f: GridFunction, cubes: CubeFamily) -> OperatorOutput:
    """``[b,M](f) = b M(f) - M(bf)``."""
    check_same_grid(b, f)
    bf = GridFunction(b.grid, b.values * f.values)
    return _signed(b, hl_maximal(f, cubes), hl_maximal(bf, cubes))


def naive_commutator_M(b: GridFunction, f: GridFunction, cubes: CubeFamily) -> OperatorOutput:
    check_same_grid(b, f)
    bf = GridFunction(b.grid, b.values * f.values)
    return _signed(b, naive_hl_maximal(f, cubes), naive_hl_maximal(bf, cubes))


def commutator_sharp(b: GridFunction, f: GridFunction, cubes: CubeFamily) -> OperatorOutput:
    """``[b,M#](f) = b M#(f) - M#(bf)``."""
    check_same_grid(b, f)
    bf = GridFunction(b.grid, b.values * f.values)
    return _signed(b, sharp_maximal(f, cubes), sharp_maximal(bf, cubes))


def naive_commutator_sharp(b: GridFunction, f: GridFunction, cubes: CubeFamily) -> OperatorOutput:
    check_same_grid(b, f)
    bf = GridFunction(b.grid, b.values * f.values)
    return _signed(b, naive_sharp_maximal(f, cubes), naive_sharp_maximal(bf, cubes))


def _check_r(r: float):
    if not r >= 1:
        raise ValueError(f"fractional maximal needs r >= 1, got {r}")


def fractional_maximal(
    f: GridFunction, mu: Weight, beta: float, r: float, cubes: CubeFamily
) -> OperatorOutput:
    """``M_{beta,mu,r}(f)``: sup of ``(mu(Q)**(r*beta/n - 1) * int_Q |f|**r mu)**(1/r)``."""
    _check_r(r)
    g = check_same_grid(f, mu.base)
    h = g.cell_volume
    gfun = GridFunction(g, np.abs(f.values) ** r * mu.values)

    def stat(s, step):
        return _fractional_formula(
            window_sums(gfun, s, step) * h, window_sums(mu.base, s, step) * h, beta, r, g.dim
        )

    return _output(g, *_sup(cubes, stat))


def naive_fractional_maximal(
    f: GridFunction, mu: Weight, beta: float, r: float, cubes: CubeFamily
) -> OperatorOutput:
    _check_r(r)
    g = check_same_grid(f, mu.base)
    return _output(g, *_naive_sup(cubes, lambda qs: _fractional_batch(f, mu, beta, r, qs)))
