"""Exact fixed-point accumulation for float arrays.

Every sum in the package is the correctly rounded value of the exact real sum
of its float terms.  That makes a prefix-table window sum bit-identical to
``math.fsum`` over the same cells, so fast paths and brute-force oracles can
be compared with ``==``.

A float array is mapped to integers ``n`` and a shared exponent ``e`` with
``x == n * 2**e`` exactly.  Integers live in int64 when the bit budget allows
(including headroom for ``count`` additions), otherwise in Python ints.
"""

from __future__ import annotations

import numpy as np

_MANT_BITS = 53
_INT64_BUDGET = 62


def to_fixed(values, headroom: int = 1):
    """Return ``(ints, exp)`` with ``values == ints * 2.0**exp`` exactly.

    ``headroom`` is the largest number of terms that will later be added
    together; it only affects the choice between int64 and object ints.
    """
    x = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite value in exact accumulation")
    mant, ex = np.frexp(x)
    m = (mant * 2.0**_MANT_BITS).astype(np.int64)
    ex = ex.astype(np.int64) - _MANT_BITS
    nz = m != 0
    if not nz.any():
        return np.zeros(x.shape, dtype=np.int64), 0
    # strip the common run of trailing zero bits so the integers stay small
    low = m[nz] & -m[nz]
    tz = np.zeros(x.shape, dtype=np.int64)
    tz[nz] = np.round(np.log2(low.astype(np.float64))).astype(np.int64)
    m = m >> tz
    ex = ex + tz
    lowest = int(ex[nz].min())
    shift = np.where(nz, ex - lowest, 0)
    top = int((shift[nz] + _MANT_BITS - tz[nz]).max())
    need = top + max(int(headroom), 1).bit_length() + 1
    if need <= _INT64_BUDGET:
        ints = np.where(nz, m << shift, 0).astype(np.int64)
    else:
        ints = np.left_shift(m.astype(object), shift.astype(object))
        ints[~nz] = 0
    return ints, lowest


def from_fixed(ints, exp: int) -> np.ndarray:
    """Correctly rounded float64 values of ``ints * 2**exp``."""
    a = np.asarray(ints)
    if a.dtype != object:
        # int64 -> float64 rounds to nearest even; ldexp by a power of two is exact
        return np.ldexp(a.astype(np.float64), exp)
    if exp >= 0:
        scaled = np.asarray(a * (1 << exp), dtype=object)
        return np.array([float(v) for v in scaled.ravel()], dtype=np.float64).reshape(a.shape)
    den = 1 << (-exp)
    # int / int true division is correctly rounded in CPython
    return np.array([v / den for v in a.ravel()], dtype=np.float64).reshape(a.shape)


# x87 extended precision holds any int64 exactly; elsewhere longdouble may be plain double
_LONG_OK = np.finfo(np.longdouble).nmant >= 63


def _divide_exact(num, den: int) -> np.ndarray:
    # int / int true division is correctly rounded in CPython
    return np.array([int(v) / den for v in np.ravel(num)], dtype=np.float64)


def divide_fixed(sums, n: int, exp: int):
    """Correctly rounded float of ``sums * 2**exp / n`` (one rounding).

    Integers below ``2**53`` convert to float exactly, so one IEEE division
    suffices.  Larger int64 sums are divided in extended precision; rounding
    that quotient to double is correct unless it sits exactly on a double
    midpoint, and only those entries (plus big ints and subnormal results) go
    through Python's ``int / int``.
    """
    a = np.asarray(sums)
    n = int(n)
    shape = a.shape
    out = None
    if a.dtype != object and a.size:
        big = int(np.abs(a).max()) >= 2**_MANT_BITS
        if not big:
            out = np.array(np.ldexp(a.astype(np.float64) / n, exp))
            redo = np.zeros(shape, dtype=bool)
        elif _LONG_OK:
            z = a.astype(np.longdouble) / n
            y = z.astype(np.float64)
            r = np.abs(z - y.astype(np.longdouble)) * 2
            ay = np.abs(y)
            up = np.spacing(ay).astype(np.longdouble)
            down = (ay - np.nextafter(ay, 0.0)).astype(np.longdouble)
            redo = (r != 0) & ((r == up) | (r == down))
            out = np.array(np.ldexp(y, exp))
        if out is not None:
            redo |= (out != 0) & (np.abs(out) < np.finfo(np.float64).tiny)
            if redo.any():
                obj = np.asarray(a[redo], dtype=object)
                num, den = (obj * (1 << exp), n) if exp >= 0 else (obj, n << -exp)
                out[redo] = _divide_exact(num, den)
            return float(out) if out.ndim == 0 else out
    obj = np.asarray(a, dtype=object)
    if exp >= 0:
        num, den = obj * (1 << exp), n
    else:
        num, den = obj, n << -exp
    out = _divide_exact(num, den).reshape(shape)
    return float(out) if out.ndim == 0 else out


def exact_mean(values, axis=None, keepdims: bool = False):
    """Correctly rounded mean along ``axis``: exact sum, one division."""
    x = np.asarray(values, dtype=np.float64)
    axes = tuple(range(x.ndim)) if axis is None else tuple(np.atleast_1d(axis) % max(x.ndim, 1))
    count = int(np.prod([x.shape[a] for a in axes])) if axes else 1
    ints, e = to_fixed(x, headroom=count)
    s = ints.sum(axis=axes, keepdims=keepdims)
    return divide_fixed(s, count, e)


def exact_sum(values, axis=None) -> np.ndarray | float:
    """Correctly rounded sum along ``axis`` (all axes when None)."""
    x = np.asarray(values, dtype=np.float64)
    count = x.size if axis is None else int(np.prod([x.shape[a] for a in np.atleast_1d(axis)]))
    ints, e = to_fixed(x, headroom=count)
    s = ints.sum(axis=axis)
    out = from_fixed(s, e)
    return float(out) if np.ndim(out) == 0 else out


def prefix_table(values, lead: int = 0) -> tuple[np.ndarray, int]:
    """Exact zero-padded cumulative table over the spatial axes of ``values``.

    The first ``lead`` axes are batch axes and are left alone.  Returns
    ``(table, exp)``; every spatial axis of ``table`` is one longer than the
    input, so a box sum is an inclusion-exclusion of corner entries.
    """
    x = np.asarray(values, dtype=np.float64)
    spatial = x.shape[lead:]
    ints, e = to_fixed(x, headroom=int(np.prod(spatial, dtype=np.int64)))
    # np.pad would insert numpy int64 zeros, which overflow when mixed with big ints
    t = np.zeros(x.shape[:lead] + tuple(n + 1 for n in spatial), dtype=ints.dtype)
    t[(slice(None),) * lead + (slice(1, None),) * len(spatial)] = ints
    for ax in range(lead, x.ndim):
        t = np.cumsum(t, axis=ax, dtype=t.dtype)
    return t, e


def box_sums(table: np.ndarray, side: int, lead: int = 0, step: int = 1) -> np.ndarray:
    """Integer sums of ``side``-wide boxes whose low corners are multiples of ``step``.

    The last ``table.ndim - lead`` axes are spatial; leading axes are batch.
    """
    nsp = table.ndim - lead
    out = table
    for k in range(nsp):
        ax = lead + k
        n = out.shape[ax]
        lows = np.arange(0, n - side, step)
        out = np.take(out, lows + side, axis=ax) - np.take(out, lows, axis=ax)
    return out
