"""Uniform grids, cell-aligned cubes and exact cube integrals."""

from __future__ import annotations

import enum
import itertools
import math
from fractions import Fraction
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._exact import box_sums, divide_fixed, from_fixed, prefix_table


class Policy(str, enum.Enum):
    ALL = "all"
    DYADIC = "dyadic"


@dataclass(frozen=True)
class Grid:
    """``extent`` cells per axis of width ``spacing``, low corner at ``origin``.

    Cell ``i`` has its center at ``origin + (i + 1/2) * spacing`` on every axis;
    no center may sit on a coordinate axis.
    """

    dim: int
    extent: int
    spacing: float = 1.0
    origin: float = 0.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.extent < 2:
            raise ValueError(f"extent must be >= 2, got {self.extent}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        c = self.origin + (np.arange(self.extent) + 0.5) * self.spacing
        if np.any(c == 0.0):
            # power weights |x|^alpha are singular there
            raise ValueError("a cell center lies on a coordinate axis; use an even extent for a symmetric box")

    @classmethod
    def over(cls, dim: int, extent: int, low: float = -1.0, high: float = 1.0) -> "Grid":
        """Grid covering the physical box ``[low, high]^dim``."""
        return cls(dim, extent, (high - low) / extent, low)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.extent,) * self.dim

    @property
    def size(self) -> int:
        return self.extent**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    def centers(self) -> np.ndarray:
        """Cell-center coordinates, shape ``shape + (dim,)``."""
        c = self.origin + (np.arange(self.extent) + 0.5) * self.spacing
        mesh = np.meshgrid(*([c] * self.dim), indexing="ij")
        return np.stack(mesh, axis=-1)

    def volume(self, cube: "Cube") -> float:
        return (cube.side * self.spacing) ** self.dim

    def contains(self, cube: "Cube") -> bool:
        return len(cube.low) == self.dim and all(
            0 <= a and a + cube.side <= self.extent for a in cube.low
        )

    def refined(self, factor: int = 2) -> "Grid":
        """Same physical box, ``factor`` times more cells per axis."""
        return Grid(self.dim, self.extent * factor, self.spacing / factor, self.origin)

    def header(self) -> str:
        return f"# {self.dim},{self.extent},{self.spacing!r},{self.origin!r}"


@dataclass(frozen=True, order=True)
class Cube:
    """Axis-aligned cube of ``side`` cells starting at index ``low``."""

    side: int
    low: tuple[int, ...]

    def __post_init__(self):
        if self.side < 1:
            raise ValueError("cube side must be positive")
        if any(a < 0 for a in self.low):
            raise ValueError("cube low corner must be nonnegative")
        object.__setattr__(self, "low", tuple(int(a) for a in self.low))

    @property
    def slices(self) -> tuple[slice, ...]:
        return tuple(slice(a, a + self.side) for a in self.low)

    @property
    def count(self) -> int:
        return self.side ** len(self.low)

    def contains_cell(self, idx) -> bool:
        return all(a <= i < a + self.side for a, i in zip(self.low, idx))

    def inside(self, other: "Cube") -> bool:
        return all(
            b <= a and a + self.side <= b + other.side for a, b in zip(self.low, other.low)
        )

    def intersection_count(self, other: "Cube") -> int:
        n = 1
        for a, b in zip(self.low, other.low):
            n *= max(0, min(a + self.side, b + other.side) - max(a, b))
        return n

    def to_json(self) -> dict:
        return {"cube_low": list(self.low), "cube_side": self.side}


@dataclass(frozen=True)
class CubeFamily:
    """The cubes a supremum runs over.

    ``ALL`` is every cell-aligned cube inside the grid; ``DYADIC`` keeps sides
    that are powers of two and offsets that are multiples of the side.
    Ordering is side ascending, then lexicographic low corner.
    """

    grid: Grid
    policy: Policy = Policy.ALL

    def sides(self) -> list[int]:
        E = self.grid.extent
        if self.policy is Policy.ALL:
            return list(range(1, E + 1))
        return [1 << k for k in range(E.bit_length()) if (1 << k) <= E]

    def offsets(self, side: int) -> np.ndarray:
        """Allowed low-corner offsets along one axis for ``side``."""
        return np.arange(0, self.grid.extent - side + 1, self.step(side))

    def step(self, side: int) -> int:
        return 1 if self.policy is Policy.ALL else side

    def offset_mask(self, side: int) -> np.ndarray:
        """Boolean mask over all ``extent - side + 1`` positions per axis."""
        n = self.grid.extent - side + 1
        m1 = np.zeros(n, dtype=bool)
        m1[self.offsets(side)] = True
        mask = m1
        for _ in range(self.grid.dim - 1):
            mask = mask[..., None] & m1
        return mask

    @cached_property
    def cubes(self) -> list[Cube]:
        out = []
        for s in self.sides():
            offs = self.offsets(s).tolist()
            for low in itertools.product(offs, repeat=self.grid.dim):
                out.append(Cube(s, low))
        return out

    def __len__(self) -> int:
        return sum(len(self.offsets(s)) ** self.grid.dim for s in self.sides())

    def __iter__(self):
        return iter(self.cubes)

    def containing(self, idx) -> list[Cube]:
        return [q for q in self.cubes if q.contains_cell(idx)]


def enumerate_cubes(grid: Grid, policy: Policy | str = Policy.ALL) -> CubeFamily:
    return CubeFamily(grid, Policy(policy))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real samples, one per cell, stored with shape ``grid.shape``."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "GridFunction":
        return cls(grid, np.full(grid.shape, float(c)))

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "GridFunction":
        """Evaluate ``fn(centers)`` where ``centers`` has shape ``shape + (dim,)``."""
        return cls(grid, fn(grid.centers()))

    @cached_property
    def prefix(self) -> tuple[np.ndarray, int]:
        return prefix_table(self.values)

    def map(self, fn) -> "GridFunction":
        return GridFunction(self.grid, fn(self.values))

    def __eq__(self, other):
        return (
            isinstance(other, GridFunction)
            and self.grid == other.grid
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.grid, self.values.tobytes()))


def check_same_grid(*fns: GridFunction) -> Grid:
    g = fns[0].grid
    for f in fns[1:]:
        if f.grid != g:
            raise ValueError(f"grid mismatch: {g} vs {f.grid}")
    return g


def _check_inside(grid: Grid, cube: Cube):
    if not grid.contains(cube):
        raise ValueError(f"{cube} does not lie inside {grid}")


def cell_sum(f: GridFunction, cube: Cube) -> float:
    """Correctly rounded sum of cell values over ``cube`` via the prefix table."""
    _check_inside(f.grid, cube)
    table, e = f.prefix
    sub = table[tuple(slice(a, a + cube.side + 1) for a in cube.low)]
    return float(from_fixed(box_sums(sub, cube.side).reshape(()), e))


def window_sums(f: GridFunction, side: int, step: int = 1) -> np.ndarray:
    """Cell sums of ``side``-cubes with low corners on multiples of ``step``.

    Indexed by ``low // step`` along each axis.
    """
    table, e = f.prefix
    return from_fixed(box_sums(table, side, step=step), e)


def window_means(f: GridFunction, side: int, step: int = 1) -> np.ndarray:
    """Correctly rounded cube averages, laid out like :func:`window_sums`."""
    table, e = f.prefix
    return divide_fixed(box_sums(table, side, step=step), side**f.grid.dim, e)


def integral(f: GridFunction, cube: Cube) -> float:
    return cell_sum(f, cube) * f.grid.cell_volume


def average(f: GridFunction, cube: Cube) -> float:
    # exact cell sum / cell count, rounded once; the h**dim factors cancel
    _check_inside(f.grid, cube)
    table, e = f.prefix
    sub = table[tuple(slice(a, a + cube.side + 1) for a in cube.low)]
    return float(divide_fixed(box_sums(sub, cube.side).reshape(()), cube.count, e))


def naive_integral(f: GridFunction, cube: Cube) -> float:
    _check_inside(f.grid, cube)
    return math.fsum(f.values[cube.slices].ravel()) * f.grid.cell_volume


def naive_average(f: GridFunction, cube: Cube) -> float:
    _check_inside(f.grid, cube)
    total = sum(map(Fraction, f.values[cube.slices].ravel().tolist()), Fraction(0))
    return float(total / cube.count)


def indicator(grid: Grid, cube: Cube) -> GridFunction:
    _check_inside(grid, cube)
    v = np.zeros(grid.shape)
    v[cube.slices] = 1.0
    return GridFunction(grid, v)


def family_sup(family: CubeFamily, stat) -> tuple[float, Cube | None]:
    """Max of ``stat(side)`` over the family, with the first maximizing cube.

    ``stat(side)`` returns an array indexed by low corner over every position
    of that side; positions outside the family are ignored.
    """
    best, witness = -math.inf, None
    for s in family.sides():
        vals = np.where(family.offset_mask(s), stat(s), -np.inf)
        k = int(np.argmax(vals))
        v = float(vals.flat[k])
        if v > best:
            best = v
            witness = Cube(s, np.unravel_index(k, vals.shape))
    return best, witness


def windows(values: np.ndarray, side: int) -> np.ndarray:
    """View of every ``side``-cube of ``values``: shape ``positions + (side,)*dim``."""
    return np.lib.stride_tricks.sliding_window_view(values, (side,) * values.ndim)


def cube_axes(dim: int) -> tuple[int, ...]:
    return tuple(range(dim, 2 * dim))
