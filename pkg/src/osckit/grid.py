"""Periodic grid domain model.

Functions are sampled on a uniform N-dimensional grid over the unit torus:
axis ``j`` has ``n_j`` cells of width ``1/n_j``, so every cell has measure
``prod(1/n_j)``.  Rectangles are products of periodic arcs (an arc may wrap
around the circle), and rectangle means are served by an N-dimensional
summed-area table.
"""

from __future__ import annotations

import itertools
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "Arc",
    "PeriodicRect",
    "CoordSplit",
    "GridFunction",
    "SummedAreaTable",
    "GFN1Error",
    "all_splits",
    "build_sat",
    "cell_centers",
    "pairwise_cumsum",
    "partial_mean",
    "read_gfn1",
    "rect_mean",
    "write_gfn1",
]


def cell_centers(n: int) -> np.ndarray:
    """Sample points (k + 1/2)/n of the n cells of the unit circle."""
    return (np.arange(n) + 0.5) / n


def pairwise_cumsum(a: np.ndarray, axis: int = 0) -> np.ndarray:
    """Inclusive prefix sum along ``axis`` using a tree-structured scan.

    Plain running sums accumulate O(n) rounding error; the doubling scan
    below combines partial sums in a balanced tree of depth ceil(log2 n),
    which keeps long prefix chains accurate enough for 1e-10 checks.
    """
    out = np.array(a, dtype=np.float64, copy=True)
    out = np.moveaxis(out, axis, -1)
    n = out.shape[-1]
    shift = 1
    while shift < n:
        # RHS is materialized before assignment, so the update is simultaneous.
        out[..., shift:] = out[..., shift:] + out[..., :-shift]
        shift <<= 1
    return np.moveaxis(out, -1, axis)


@dataclass(frozen=True, order=True)
class Arc:
    """A periodic arc on one axis: ``len`` cells starting at cell ``start``.

    The arc wraps modulo the axis size when start + len exceeds it.  The
    continuous length is len/n, always in (0, 1].
    """

    axis: int
    start: int
    len: int

    def validate(self, n: int) -> None:
        if not 0 <= self.start < n:
            raise ValueError(f"arc start {self.start} outside [0, {n})")
        if not 1 <= self.len <= n:
            raise ValueError(f"arc len {self.len} outside [1, {n}]")

    def measure(self, n: int) -> float:
        return self.len / n

    def segments(self, n: int) -> tuple[tuple[int, int], ...]:
        """At most two non-wrapping half-open index ranges covering the arc."""
        end = self.start + self.len
        if end <= n:
            return ((self.start, end),)
        return ((self.start, n), (0, end - n))

    def cells(self, n: int) -> np.ndarray:
        return (self.start + np.arange(self.len)) % n


@dataclass(frozen=True)
class PeriodicRect:
    """Product of arcs on distinct axes, kept sorted by axis."""

    arcs: tuple[Arc, ...]

    def __post_init__(self) -> None:
        arcs = tuple(sorted(self.arcs, key=lambda a: a.axis))
        axes = [a.axis for a in arcs]
        if len(set(axes)) != len(axes):
            raise ValueError(f"duplicate axes in rectangle: {axes}")
        object.__setattr__(self, "arcs", arcs)

    @classmethod
    def full_grid(cls, dims: tuple[int, ...], starts, lens) -> "PeriodicRect":
        return cls(tuple(Arc(j, int(s), int(l)) for j, (s, l) in enumerate(zip(starts, lens))))

    @property
    def axes(self) -> tuple[int, ...]:
        return tuple(a.axis for a in self.arcs)

    def validate(self, dims: tuple[int, ...]) -> None:
        for a in self.arcs:
            if not 0 <= a.axis < len(dims):
                raise ValueError(f"axis {a.axis} outside grid of dimension {len(dims)}")
            a.validate(dims[a.axis])

    def ncells(self, dims: tuple[int, ...]) -> int:
        return int(np.prod([a.len for a in self.arcs], dtype=np.int64))

    def measure(self, dims: tuple[int, ...]) -> float:
        out = 1.0
        for a in self.arcs:
            out *= a.measure(dims[a.axis])
        return out

    def key(self) -> tuple[int, ...]:
        """Flat (axis, start, len) encoding used for deterministic tie-breaks."""
        return tuple(x for a in self.arcs for x in (a.axis, a.start, a.len))


@dataclass(frozen=True)
class CoordSplit:
    """A nonempty proper subset of axes (the averaged ones) and its complement."""

    averaged_axes: tuple[int, ...]
    remaining_axes: tuple[int, ...]

    def __post_init__(self) -> None:
        avg = tuple(sorted(self.averaged_axes))
        rem = tuple(sorted(self.remaining_axes))
        object.__setattr__(self, "averaged_axes", avg)
        object.__setattr__(self, "remaining_axes", rem)
        n = len(avg) + len(rem)
        if not avg or not rem:
            raise ValueError("both sides of a coordinate split must be nonempty")
        if sorted(avg + rem) != list(range(n)):
            raise ValueError(f"axes {avg} + {rem} do not partition 0..{n - 1}")

    @classmethod
    def of(cls, ndim: int, averaged_axes) -> "CoordSplit":
        avg = tuple(sorted(int(a) for a in averaged_axes))
        rem = tuple(j for j in range(ndim) if j not in avg)
        return cls(avg, rem)


def all_splits(ndim: int) -> list[CoordSplit]:
    """Every coordinate split of an ndim-grid, in sorted subset order."""
    subsets: list[tuple[int, ...]] = []
    for r in range(1, ndim):
        subsets.extend(itertools.combinations(range(ndim), r))
    return [CoordSplit.of(ndim, s) for s in sorted(subsets)]


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real values sampled on a periodic uniform grid, immutable once built."""

    dims: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        dims = tuple(int(n) for n in self.dims)
        if len(dims) < 1:
            raise ValueError("grid needs at least one axis")
        if any(n < 2 for n in dims):
            raise ValueError(f"every axis needs at least 2 cells, got {dims}")
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if vals.size != int(np.prod(dims, dtype=np.int64)):
            raise ValueError(f"value count {vals.size} does not match dims {dims}")
        vals = vals.reshape(dims)
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "values", vals)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def ncells(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    @property
    def cell_volume(self) -> float:
        return 1.0 / self.ncells

    def mean(self) -> float:
        return float(np.mean(self.values))

    def _binary(self, other, op) -> "GridFunction":
        if isinstance(other, GridFunction):
            if other.dims != self.dims:
                raise ValueError(f"dims mismatch: {self.dims} vs {other.dims}")
            return GridFunction(self.dims, op(self.values, other.values))
        return GridFunction(self.dims, op(self.values, float(other)))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __radd__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    def __rmul__(self, other):
        return self._binary(other, np.multiply)


@dataclass(frozen=True, eq=False)
class SummedAreaTable:
    """Inclusive prefix sums with one leading zero layer per axis.

    ``prefix[i_1, ..., i_N]`` is the sum of values over the index box
    ``[0, i_1) x ... x [0, i_N)``; any non-wrapping box sum is the usual
    2^N-corner alternating sum.
    """

    dims: tuple[int, ...]
    prefix: np.ndarray

    def box_sum(self, bounds: tuple[tuple[int, int], ...]) -> float:
        ndim = len(self.dims)
        total = 0.0
        for corner in itertools.product((0, 1), repeat=ndim):
            idx = tuple(b[1] if c else b[0] for b, c in zip(bounds, corner))
            sign = 1.0 if (ndim - sum(corner)) % 2 == 0 else -1.0
            total += sign * self.prefix[idx]
        return total

    def rect_sum(self, rect: PeriodicRect) -> float:
        """Cell sum over a periodic rectangle covering all axes.

        Wrapping arcs are split into at most two segments per axis, so the
        query touches at most 2^N plain boxes.
        """
        rect.validate(self.dims)
        if rect.axes != tuple(range(len(self.dims))):
            raise ValueError("rectangle must cover every axis of the table")
        seg_lists = [arc.segments(n) for arc, n in zip(rect.arcs, self.dims)]
        total = 0.0
        for combo in itertools.product(*seg_lists):
            total += self.box_sum(combo)
        return total


def build_sat(f: GridFunction) -> SummedAreaTable:
    inner = f.values
    for ax in range(f.ndim):
        inner = pairwise_cumsum(inner, ax)
    prefix = np.zeros(tuple(n + 1 for n in f.dims))
    prefix[tuple(slice(1, None) for _ in f.dims)] = inner
    prefix.setflags(write=False)
    return SummedAreaTable(f.dims, prefix)


def rect_mean(sat: SummedAreaTable, rect: PeriodicRect) -> float:
    """Average of the cell values over a rectangle covering all axes.

    Cells are uniform, so this equals the continuous mean over the rectangle.
    """
    return sat.rect_sum(rect) / rect.ncells(sat.dims)


class _PartialPrefix:
    """Prefix sums along a chosen axis subset, reused across many queries."""

    def __init__(self, f: GridFunction, averaged_axes: tuple[int, ...]):
        self.dims = f.dims
        self.axes = tuple(sorted(averaged_axes))
        arr = f.values
        for ax in self.axes:
            arr = pairwise_cumsum(arr, ax)
        pad = [(1, 0) if ax in self.axes else (0, 0) for ax in range(f.ndim)]
        self.prefix = np.pad(arr, pad)

    def mean_over(self, rect: PeriodicRect) -> np.ndarray:
        """Mean over the rectangle on the averaged axes, per remaining cell."""
        seg_lists = [arc.segments(self.dims[arc.axis]) for arc in rect.arcs]
        total: np.ndarray | None = None
        k = len(self.axes)
        for combo in itertools.product(*seg_lists):
            for corner in itertools.product((0, 1), repeat=k):
                sub = self.prefix
                for pos, (ax, (lo, hi), bit) in enumerate(zip(self.axes, combo, corner)):
                    sub = np.take(sub, hi if bit else lo, axis=ax - pos)
                sign = 1.0 if (k - sum(corner)) % 2 == 0 else -1.0
                total = sign * sub if total is None else total + sign * sub
        ncells = int(np.prod([a.len for a in rect.arcs], dtype=np.int64))
        return total / ncells


def partial_mean(f: GridFunction, split: CoordSplit, rect: PeriodicRect) -> GridFunction:
    """Average out the split's axes over ``rect``; the result lives on the rest.

    ``rect`` must consist of exactly one arc per averaged axis.
    """
    rect.validate(f.dims)
    if rect.axes != split.averaged_axes:
        raise ValueError(f"rectangle axes {rect.axes} != averaged axes {split.averaged_axes}")
    out = _PartialPrefix(f, split.averaged_axes).mean_over(rect)
    new_dims = tuple(f.dims[j] for j in split.remaining_axes)
    return GridFunction(new_dims, out)


# ---------------------------------------------------------------------------
# GFN1 binary file format: magic "GFN1", u8 axis count, little-endian u32
# dims, then row-major little-endian float64 values.


GFN1_MAGIC = b"GFN1"


class GFN1Error(ValueError):
    """Malformed GFN1 file; ``offset`` is the byte where parsing failed."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def write_gfn1(f: GridFunction, path) -> None:
    with open(path, "wb") as fh:
        fh.write(GFN1_MAGIC)
        fh.write(struct.pack("<B", f.ndim))
        fh.write(np.asarray(f.dims, dtype="<u4").tobytes())
        fh.write(f.values.astype("<f8").tobytes(order="C"))


def read_gfn1(path) -> GridFunction:
    raw = Path(path).read_bytes()
    if raw[:4] != GFN1_MAGIC:
        raise GFN1Error(f"bad magic {raw[:4]!r}, expected {GFN1_MAGIC!r}", 0)
    if len(raw) < 5:
        raise GFN1Error("file truncated before axis count", 4)
    ndim = raw[4]
    if ndim == 0:
        raise GFN1Error("axis count must be positive", 4)
    head = 5 + 4 * ndim
    if len(raw) < head:
        raise GFN1Error(f"file truncated inside dims list of {ndim} axes", len(raw))
    dims = tuple(int(n) for n in np.frombuffer(raw, dtype="<u4", count=ndim, offset=5))
    ncells = int(np.prod(dims, dtype=np.int64)) if dims else 0
    end = head + 8 * ncells
    if len(raw) < end:
        raise GFN1Error(f"payload truncated, expected {8 * ncells} value bytes", len(raw))
    if len(raw) > end:
        raise GFN1Error("trailing bytes after payload", end)
    values = np.frombuffer(raw, dtype="<f8", count=ncells, offset=head)
    return GridFunction(dims, values)
