"""Weighted Lebesgue, Morrey and Lipschitz norms and the characterization functionals.

All suprema run over a finite cube family inside a bounded grid, so every value
here is a lower bound for its continuum counterpart.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np

from ._exact import exact_sum
from .grid import (
    Cube,
    CubeFamily,
    GridFunction,
    Policy,
    check_same_grid,
    cube_axes,
    family_sup,
    indicator,
    window_means,
    window_sums,
    windows,
)
from .operators import local_maximal, sharp_maximal
from .weights import Weight, measures


@dataclass(frozen=True)
class ExponentConfig:
    """Exponents ``(n, beta, p, q, kappa, r)`` with ``1/q = 1/p - beta/n`` derived.

    Constraints: ``0 < beta < 1``, ``1 < p < n/beta``, ``0 < kappa < p/q`` and
    ``1 < r < p``.  ``kappa`` defaults to ``p/(2q)`` and ``r`` to ``(1+p)/2``.
    """

    dim: int
    beta: float
    p: float
    kappa: float | None = None
    r: float | None = None
    q: float = field(init=False)

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if not 0 < self.beta < 1:
            raise ValueError(f"constraint 0 < beta < 1 violated (beta={self.beta})")
        if not 1 < self.p < self.dim / self.beta:
            raise ValueError(f"constraint 1 < p < n/beta violated (p={self.p})")
        # derived exponents are correctly rounded images of the rational formulas
        p, beta = Fraction(self.p), Fraction(self.beta)
        q_exact = 1 / (1 / p - beta / self.dim)
        q = float(q_exact)
        object.__setattr__(self, "q", q)
        if self.kappa is None:
            object.__setattr__(self, "kappa", float(p / (2 * q_exact)))
        if self.r is None:
            object.__setattr__(self, "r", (1.0 + self.p) / 2.0)
        if not 0 < self.kappa < self.p / q:
            raise ValueError(f"constraint 0 < kappa < p/q violated (kappa={self.kappa}, p/q={self.p / q})")
        if not 1 < self.r < self.p:
            raise ValueError(f"constraint 1 < r < p violated (r={self.r})")

    @classmethod
    def default(cls, dim: int) -> "ExponentConfig":
        return cls(1, 0.5, 1.5) if dim == 1 else cls(2, 0.5, 2.0)

    @property
    def target_kappa(self) -> float:
        """Morrey index ``kappa*q/p`` of the target space."""
        return self.kappa * self.q / self.p

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in ("dim", "beta", "p", "q", "kappa", "r")}


@dataclass(frozen=True)
class NormValue:
    value: float
    witness: Cube | None = None

    def to_json(self) -> dict:
        return {"value": self.value, "witness": None if self.witness is None else self.witness.to_json()}


def _sup(cubes: CubeFamily, stat) -> NormValue:
    v, w = family_sup(cubes, stat)
    return NormValue(max(v, 0.0) if w is not None else 0.0, w)


def lebesgue_norm(f: GridFunction, mu: Weight, p: float) -> NormValue:
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    g = check_same_grid(f, mu.base)
    total = exact_sum(np.abs(f.values) ** p * mu.values) * g.cell_volume
    return NormValue(total ** (1.0 / p), Cube(g.extent, (0,) * g.dim))


def morrey_norm(
    f: GridFunction, u: Weight, v: Weight, p: float, kappa: float, cubes: CubeFamily
) -> NormValue:
    """``sup_Q (v(Q)**-kappa * int_Q |f|**p u)**(1/p)``."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    g = check_same_grid(f, u.base, v.base)
    h = g.cell_volume
    dens = GridFunction(g, np.abs(f.values) ** p * u.values)

    def stat(s):
        return (measures(v, s) ** (-kappa) * (window_sums(dens, s) * h)) ** (1.0 / p)

    return _sup(cubes, stat)


def _lip_stat(b: GridFunction, mu: Weight, beta: float, p: float):
    g = b.grid
    dim, h = g.dim, g.cell_volume
    axes = cube_axes(dim)

    def stat(s):
        expand = (...,) + (None,) * dim
        bq = window_means(b, s)
        dev = np.abs(windows(b.values, s) - bq[expand])
        muw = windows(mu.values, s)
        mq = measures(mu, s)
        if math.isinf(p):
            inner = (dev / muw).max(axis=axes)
        else:
            inner = (exact_sum(dev**p * muw ** (1.0 - p), axis=axes) * h / mq) ** (1.0 / p)
        return mq ** (-beta / dim) * inner

    return stat


def lipschitz_norm(
    b: GridFunction, mu: Weight, beta: float, p: float, cubes: CubeFamily
) -> NormValue:
    """Weighted Lipschitz seminorm; ``p = math.inf`` uses the max of ``|b - b_Q| / mu``.

    ``b_Q`` is the unweighted cube average.
    """
    if not 0 < beta < 1:
        raise ValueError(f"beta must lie in (0,1), got {beta}")
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    check_same_grid(b, mu.base)
    return _sup(cubes, _lip_stat(b, mu, beta, p))


def lip1_proof_functional(b: GridFunction, mu: Weight, beta: float, cubes: CubeFamily) -> NormValue:
    """``sup_Q mu(Q)**(-1-beta/n) * int_Q |b - b_Q| dx``."""
    if not 0 < beta < 1:
        raise ValueError(f"beta must lie in (0,1), got {beta}")
    g = check_same_grid(b, mu.base)
    dim, h = g.dim, g.cell_volume

    def stat(s):
        bq = window_means(b, s)
        dev = np.abs(windows(b.values, s) - bq[(...,) + (None,) * dim])
        mq = measures(mu, s)
        # grouped as mu(Q)^(-beta/n) * (int / mu(Q)) so it matches the p = 1 seminorm
        return mq ** (-beta / dim) * ((exact_sum(dev, axis=cube_axes(dim)) * h / mq) ** 1.0)

    return _sup(cubes, stat)


def lemma22_constant(b: GridFunction, w: Weight, beta: float, cubes: CubeFamily) -> float:
    """``max_{Q, x in Q} |b(x) - b_Q| / (w(Q)**(beta/n) w(x))`` over ``||b||_Lip``.

    The numerator is the ``p = inf`` seminorm.  Returns NaN when ``b`` has zero
    seminorm (constant ``b``), where the ratio is undefined.
    """
    lip = lipschitz_norm(b, w, beta, 1.0, cubes).value
    if lip == 0.0:
        return math.nan
    return lipschitz_norm(b, w, beta, math.inf, cubes).value / lip


# -- characterization functionals -------------------------------------------------


def _cube_lows(cubes: CubeFamily, side: int) -> np.ndarray:
    offs = cubes.offsets(side)
    mesh = np.meshgrid(*([offs] * cubes.grid.dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _gather_cells(values: np.ndarray, lows: np.ndarray, side: int) -> np.ndarray:
    """Cells of each cube: shape ``(K, side**dim)`` in C order."""
    dim = values.ndim
    k = np.arange(side)
    grids = np.meshgrid(*([k] * dim), indexing="ij")
    idx = tuple(lows[:, j, None] + grids[j].ravel()[None] for j in range(dim))
    return values[idx]


def local_maximal_fields(b: GridFunction, cubes: CubeFamily) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """``M_Q(b)`` on the cells of every family cube ``Q``.

    Returns ``{side: (lows (K, dim), values (K, side**dim))}``.  For the ALL
    family a recursion over sides is used: a proper subcube of ``Q`` lies in
    one of the ``2**dim`` corner subcubes of side ``side - 1``.
    """
    g = b.grid
    dim = g.dim
    out = {}
    if cubes.policy is not Policy.ALL:
        for s in cubes.sides():
            lows = _cube_lows(cubes, s)
            vals = np.stack(
                [
                    local_maximal(b, Cube(s, tuple(a)), cubes).values[Cube(s, tuple(a)).slices].ravel()
                    for a in lows
                ]
            )
            out[s] = (lows, vals)
        return out
    ab = b.map(np.abs)
    prev = None
    for s in range(1, g.extent + 1):
        avg = window_means(ab, s)  # (L,)*dim
        L = g.extent - s + 1
        cur = np.broadcast_to(avg[(...,) + (None,) * dim], (L,) * dim + (s,) * dim).copy()
        if prev is not None:
            for corner in np.ndindex(*(2,) * dim):
                src = prev[tuple(slice(c, c + L) for c in corner)]
                tgt = tuple(slice(c, c + s - 1) for c in corner)
                view = cur[(Ellipsis,) + tgt]
                np.maximum(view, src, out=view)
        prev = cur
        lows = _cube_lows(cubes, s)
        out[s] = (lows, cur.reshape(L**dim, s**dim))
    return out


def _oscillation_batch(vals: np.ndarray) -> np.ndarray:
    mean = vals.mean(axis=-1, keepdims=True)
    return np.abs(vals - mean).mean(axis=-1)


def sharp_indicator_fields(b: GridFunction, cubes: CubeFamily) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """``M#(b chi_Q)`` (global family) on the cells of every family cube ``Q``.

    Only cubes ``Q'`` meeting ``Q`` can contain a cell of ``Q``; for each pair
    of sides the oscillations over all such ``Q'`` are computed in one batch.
    """
    g = b.grid
    dim, E = g.dim, g.extent
    out = {}
    if cubes.policy is not Policy.ALL:
        for s in cubes.sides():
            lows = _cube_lows(cubes, s)
            rows = []
            for a in lows:
                q = Cube(s, tuple(a))
                bq = GridFunction(g, b.values * indicator(g, q).values)
                rows.append(sharp_maximal(bq, cubes).values[q.slices].ravel())
            out[s] = (lows, np.stack(rows))
        return out
    if dim == 1:
        return _sharp_indicator_fields_1d(b, cubes)
    for S in range(1, E + 1):
        L = E - S + 1
        best = np.full((L, L, S, S), -np.inf)
        for sp in range(1, E + 1):
            D = S + sp - 1
            d = np.arange(-(sp - 1), S)
            k = np.arange(sp)
            A = np.arange(L)
            # per-axis layout (A, d, k): absolute cell index and in-Q flag
            cell = np.clip(A[:, None, None] + d[None, :, None] + k[None, None, :], 0, E - 1)
            low_ok = (A[:, None] + d[None, :] >= 0) & (A[:, None] + d[None, :] <= E - sp)
            inq = (d[:, None] + k[None, :] >= 0) & (d[:, None] + k[None, :] < S)
            inq = np.broadcast_to(inq, cell.shape)
            i0 = cell[:, None, :, None, :, None]
            i1 = cell[None, :, None, :, None, :]
            m = inq[:, None, :, None, :, None] & inq[None, :, None, :, None, :]
            gv = (b.values[i0, i1] * m).reshape(L, L, D, D, sp * sp)
            osc = _oscillation_batch(gv)
            ok = low_ok[:, None, :, None] & low_ok[None, :, None, :]
            osc = np.where(ok, osc, -np.inf)  # (L, L, D, D)
            r = np.lib.stride_tricks.sliding_window_view(osc, sp, axis=2).max(axis=-1)
            r = np.lib.stride_tricks.sliding_window_view(r, sp, axis=3).max(axis=-1)
            np.maximum(best, r, out=best)
        out[S] = (_cube_lows(cubes, S), best.reshape(L * L, S * S))
    return out


def _sharp_indicator_fields_1d(b: GridFunction, cubes: CubeFamily):
    # In 1D the restriction of b chi_Q to an interval Q' is b chi_I with I = Q cap Q'
    # a subinterval of Q', so tabulate osc(b chi_I, Q') once per (Q', I).
    E = b.grid.extent
    table = {}
    for sp in range(1, E + 1):
        W = windows(b.values, sp)  # (L', sp)
        P = np.concatenate([np.zeros((W.shape[0], 1)), np.cumsum(W, axis=1)], axis=1)
        i = np.arange(sp)[:, None]
        j = np.arange(sp + 1)[None, :]
        k = np.arange(sp)
        mean = (P[:, None, :] - P[:, :sp, None]) / sp  # (L', i, j)
        inside = (i[..., None] <= k) & (k < j[..., None])  # (i, j, k)
        dev = (np.abs(W[:, None, None, :] - mean[..., None]) * inside).sum(axis=-1)
        table[sp] = (dev + (sp - (j - i)) * np.abs(mean)) / sp
    out = {}
    for S in range(1, E + 1):
        L = E - S + 1
        A = np.arange(L)[:, None]
        best = np.full((L, S), -np.inf)
        for sp in range(1, E + 1):
            d = np.arange(-(sp - 1), S)[None, :]
            a = A + d
            ok = (a >= 0) & (a <= E - sp)
            lo = np.broadcast_to(np.maximum(0, -d), a.shape)
            hi = np.broadcast_to(np.minimum(sp, S - d), a.shape)
            osc = np.where(ok, table[sp][np.clip(a, 0, E - sp), lo, hi], -np.inf)  # (L, D)
            r = np.lib.stride_tricks.sliding_window_view(osc, sp, axis=1).max(axis=-1)
            np.maximum(best, r, out=best)
        out[S] = (_cube_lows(cubes, S), best)
    return out


def _char_sup(b, mu, beta, s_exp, fields, scale) -> NormValue:
    g = b.grid
    dim, h = g.dim, g.cell_volume
    best, witness = -math.inf, None
    for side in sorted(fields):
        lows, F = fields[side]
        bc = _gather_cells(b.values, lows, side)
        mc = _gather_cells(mu.values, lows, side)
        mq = exact_sum(mc, axis=1) * h
        integrand = np.abs(bc - scale * F) ** s_exp * mc ** (1.0 - s_exp)
        vals = mq ** (-beta / dim) * (exact_sum(integrand, axis=1) * h / mq) ** (1.0 / s_exp)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, witness = float(vals[k]), Cube(side, tuple(lows[k]))
    return NormValue(best, witness)


def _check_s(s_exp):
    if not s_exp >= 1:
        raise ValueError(f"s must be >= 1, got {s_exp}")


def char_functional_M(
    b: GridFunction, mu: Weight, cfg: ExponentConfig, s: float | None, cubes: CubeFamily, fields=None
) -> NormValue:
    """``sup_Q mu(Q)**(-beta/n) (mu(Q)**-1 int_Q |b - M_Q b|**s mu**(1-s))**(1/s)``; ``s`` defaults to ``q``."""
    s = cfg.q if s is None else s
    _check_s(s)
    check_same_grid(b, mu.base)
    fields = local_maximal_fields(b, cubes) if fields is None else fields
    return _char_sup(b, mu, cfg.beta, s, fields, 1.0)


def char_functional_sharp(
    b: GridFunction, mu: Weight, cfg: ExponentConfig, s: float | None, cubes: CubeFamily, fields=None
) -> NormValue:
    """Same shape as :func:`char_functional_M` with ``|b - 2 M#(b chi_Q)|``."""
    s = cfg.q if s is None else s
    _check_s(s)
    check_same_grid(b, mu.base)
    fields = sharp_indicator_fields(b, cubes) if fields is None else fields
    return _char_sup(b, mu, cfg.beta, s, fields, 2.0)
