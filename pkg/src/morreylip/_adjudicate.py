"""Exact rational re-evaluation of inequalities at individual cells or cubes.

Float fields are correctly rounded images of exact discrete quantities, so an
inequality that is attained with equality (a monotone symbol on the witness
cube, ``Q' = Q`` for an indicator) can come out one ulp the wrong way.  The
checks compare floats first and send only the rejected cells here, where both
sides are recomputed from the exact binary values of the inputs with Python
integers.  No tolerance is involved.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from ._exact import to_fixed
from .grid import Cube, CubeFamily, GridFunction
from .weights import Weight


def _ints(values) -> tuple[np.ndarray, int]:
    a, e = to_fixed(values)
    return a.astype(object), e


def _osc_sum(v: np.ndarray) -> tuple[int, int]:
    """Mean oscillation ``mean |v - mean(v)|`` as ``(numerator, denominator)`` integers."""
    n = v.size
    s = int(v.sum())
    return int(np.abs(v * n - s).sum()), n * n


def _int_table(v: np.ndarray) -> np.ndarray:
    t = np.zeros(tuple(n + 1 for n in v.shape), dtype=object)
    t[(slice(1, None),) * v.ndim] = v
    for ax in range(v.ndim):
        t = np.cumsum(t, axis=ax)
    return t


class CommutatorAdjudicator:
    """Exact sides of the commutator dominations for one ``(b, f)`` pair.

    All quantities are in the common unit ``2**(eb + ef)``.
    """

    def __init__(self, b: GridFunction, f: GridFunction, cubes: CubeFamily):
        self.cubes = cubes
        self.B, _ = _ints(b.values)
        self.F, _ = _ints(f.values)
        self.AF = np.abs(self.F)
        self.BF = self.B * self.F
        self.t_af = _int_table(self.AF)
        self.t_abf = _int_table(np.abs(self.BF))

    def _lows(self, side: int, idx) -> np.ndarray:
        """Low corners of family cubes of ``side`` containing ``idx``."""
        offs = self.cubes.offsets(side)
        per_axis = [offs[(offs <= i) & (offs + side > i)] for i in idx]
        grids = np.meshgrid(*per_axis, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def _max_avg(self, table, idx) -> Fraction:
        best = None
        for s in self.cubes.sides():
            lows = self._lows(s, idx)
            if len(lows) == 0:
                continue
            v = Fraction(int(_box_int_sums(table, lows, lows + s).max()), s ** len(idx))
            best = v if best is None or v > best else best
        return best

    def __call__(self, kind: str, idx) -> tuple[Fraction, Fraction]:
        idx = tuple(int(i) for i in idx)
        bx = self.B[idx]
        mb = self._max_avg(_int_table(np.abs(bx - self.B) * self.AF), idx)
        if kind == "commM_vs_Mb":
            mf = self._max_avg(self.t_af, idx)
            mbf = self._max_avg(self.t_abf, idx)
            return abs(bx * mf - mbf), mb
        if kind == "commSharp_vs_2Mb":
            qs = self.cubes.containing(idx)
            sf = max(Fraction(*_osc_sum(self.F[q.slices])) for q in qs)
            sbf = max(Fraction(*_osc_sum(self.BF[q.slices])) for q in qs)
            return abs(bx * sf - sbf), 2 * mb
        raise ValueError(f"unknown domination kind {kind!r}")


def commutator_gap(kind: str, b: GridFunction, f: GridFunction, cubes: CubeFamily, idx) -> tuple[Fraction, Fraction]:
    """Exact ``(lhs, rhs)`` of the commutator domination at cell ``idx``."""
    return CommutatorAdjudicator(b, f, cubes)(kind, idx)


def _box_int_sums(table: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Sums over half-open boxes ``[lo[j], hi[j])`` (rows of ``lo``/``hi``) from a prefix table."""
    dim = lo.shape[1]
    total = np.zeros(len(lo), dtype=object)
    for corner in range(1 << dim):
        pick = tuple(np.where(corner >> k & 1, hi[:, k], lo[:, k]) for k in range(dim))
        sign = (-1) ** (dim - bin(corner).count("1"))
        total = total + sign * table[pick]
    return total


def indicator_norm_holds(mu: Weight, kappa: float, q: Cube, cubes: CubeFamily) -> bool:
    """Exact ``sup_{Q'} mu(Q n Q') / mu(Q')**k <= mu(Q)**(1-k)``.

    With ``k = a/c`` in lowest terms this is ``mu(QnQ')**c <= mu(Q')**a * mu(Q)**(c-a)``
    on the integer images of the measures; the cell volume cancels.  For ``k``
    without a small dyadic denominator the sufficient condition
    ``mu(QnQ') <= min(mu(Q), mu(Q'))`` is decided instead.
    """
    W, _ = _ints(mu.values)
    dim = mu.grid.dim
    t = _int_table(W)
    lows = np.array([qq.low for qq in cubes], dtype=np.int64).reshape(-1, dim)
    sides = np.array([qq.side for qq in cubes], dtype=np.int64)[:, None]
    q_lo = np.array(q.low, dtype=np.int64)
    lo = np.maximum(lows, q_lo)
    hi = np.minimum(lows + sides, q_lo + q.side)
    meet = np.all(hi > lo, axis=1)
    lo, hi, lows, sides = lo[meet], hi[meet], lows[meet], sides[meet]
    inter = _box_int_sums(t, lo, hi)
    mqq = _box_int_sums(t, lows, lows + sides)
    mq = _box_int_sums(t, q_lo[None], q_lo[None] + q.side)[0]
    k = Fraction(kappa)
    a, c = k.numerator, k.denominator
    if not 0 < k < 1:
        raise ValueError(f"kappa={kappa} outside (0, 1)")
    if c > 1 << 12:
        return bool(np.all(inter <= mqq) and np.all(inter <= mq))
    rhs = np.array([m**a for m in mqq], dtype=object) * mq ** (c - a)
    return bool(np.all(np.array([v**c for v in inter], dtype=object) <= rhs))


def holder_chain_holds(b: GridFunction, mu: Weight, cubes: CubeFamily) -> bool:
    """Exact per-cube ``Lip^1 term <= Lip^2 term <= Lip^inf term`` for every cube.

    With ``d = b - b_Q`` on ``Q`` the two steps are the rational inequalities
    ``(sum|d|)**2 <= sum(d**2/mu) * sum(mu)`` and
    ``sum(d**2/mu) <= max(|d|/mu)**2 * sum(mu)``; the common factors
    ``mu(Q)**(-beta/n)`` and the cell volume cancel.  Holding on every cube
    implies the chain for the suprema.
    """
    B, _ = _ints(b.values)
    W, _ = _ints(mu.values)
    for q in cubes:
        bv = B[q.slices].ravel()
        wv = W[q.slices].ravel()
        n = bv.size
        d = np.abs(bv * n - int(bv.sum()))  # n * |b - b_Q| in units of 2**eb
        sw = int(wv.sum())
        s1 = int(d.sum())
        s2 = sum((Fraction(int(x) * int(x), int(w)) for x, w in zip(d, wv)), Fraction(0))
        top = max(Fraction(int(x), int(w)) for x, w in zip(d, wv))
        if s1 * s1 > s2 * sw or s2 > top * top * sw:
            return False
    return True
