"""Mean-oscillation norm evaluators over periodic rectangle enumerations.

Four functionals share one sweep engine:

* ``bmo_norm``   -- sup over rectangles R of the mean of |f - m_R f| on R;
* ``star_norm``  -- same with the mean replaced by the best constant, which
  on each rectangle is a median of the cell values;
* ``lmo_norm``   -- oscillation weighted by sum_j log2(4/|I_j|) over the
  rectangle's side lengths;
* ``mean_log_ratio`` -- |m_R f - global mean| divided by the same weight.

The ``_m`` variants take the sup over coordinate splits and rectangles on
the averaged axes of the corresponding norm of the partial mean.  All sups
are computed by exhaustive enumeration, either over every periodic arc per
axis (``EnumMode.EXACT``, n^2 arcs including wrapping ones) or over the
standard dyadic partition arcs plus the full circle (``EnumMode.DYADIC``,
2n - 1 arcs, a lower bound for the exact value).

Sweeps are deterministic: candidates are ranked by value with ties broken
toward the lexicographically smallest (split, start, len, ...) encoding, so
any worker count returns the identical report.
"""

from __future__ import annotations

import itertools
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .grid import (
    Arc,
    CoordSplit,
    GridFunction,
    PeriodicRect,
    SummedAreaTable,
    _PartialPrefix,
    all_splits,
    pairwise_cumsum,
    rect_mean,
)

__all__ = [
    "DEFAULT_BUDGET",
    "EnumMode",
    "BudgetExceeded",
    "NormReport",
    "arcs_for_axis",
    "osc_l1",
    "bmo_norm",
    "star_norm",
    "lmo_norm",
    "bmo_m_norm",
    "lmo_m_norm",
    "lmo_inv_norm",
    "slice_bmo_norm",
    "mean_log_ratio",
]

DEFAULT_BUDGET = 2 ** 24


class EnumMode(Enum):
    EXACT = "exact"
    DYADIC = "dyadic"

    @classmethod
    def parse(cls, name: str) -> "EnumMode":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown enumeration mode {name!r}; use 'exact' or 'dyadic'")


class BudgetExceeded(Exception):
    """An enumeration pass would visit more rectangles than the budget allows."""

    def __init__(self, required: int, cap: int):
        super().__init__(
            f"enumeration of {required} rectangles exceeds the budget of {cap}; "
            "raise the budget or switch to dyadic mode")
        self.required = required
        self.cap = cap


@dataclass(frozen=True)
class NormReport:
    """A computed norm value with its witness rectangle and sweep metadata.

    For the ``_m`` norms, ``argmax_rect`` is the rectangle on the averaged
    axes of ``argmax_split``; re-running the inner norm on the corresponding
    partial mean reproduces ``value``.  For ``lmo_inv_norm`` the rectangle
    pairs the witness arc with a single-cell arc marking the frozen slice.
    """

    value: float
    argmax_rect: PeriodicRect
    argmax_split: Optional[CoordSplit]
    mode: EnumMode
    rect_count: int
    weight_base: int = 2

    def to_json_dict(self) -> dict:
        argmax: dict = {
            "arcs": [{"axis": a.axis, "start": a.start, "len": a.len}
                     for a in self.argmax_rect.arcs],
        }
        if self.argmax_split is not None:
            argmax["split"] = list(self.argmax_split.averaged_axes)
        return {
            "value": self.value,
            "mode": self.mode.value,
            "rect_count": self.rect_count,
            "argmax": argmax,
        }


# ---------------------------------------------------------------------------
# Enumeration and sweep engine


_ARC_CACHE: dict[tuple[int, EnumMode], np.ndarray] = {}
_WEIGHT_CACHE: dict[int, np.ndarray] = {}


def arcs_for_axis(n: int, mode: EnumMode) -> np.ndarray:
    """Canonical (start, len) arc list for one axis, sorted lexicographically.

    Exact mode has n^2 arcs (every start, every length, wrapping included);
    dyadic mode has 2n - 1 (the dyadic partition arcs plus the full circle,
    none wrapping) and requires a power-of-two axis.
    """
    key = (n, mode)
    cached = _ARC_CACHE.get(key)
    if cached is not None:
        return cached
    if mode is EnumMode.EXACT:
        starts = np.repeat(np.arange(n, dtype=np.int64), n)
        lens = np.tile(np.arange(1, n + 1, dtype=np.int64), n)
        arcs = np.column_stack([starts, lens])
    else:
        if n & (n - 1):
            raise ValueError(f"dyadic enumeration needs a power-of-two axis, got {n}")
        pairs = []
        length = n
        while length >= 1:
            pairs.extend((s, length) for s in range(0, n, length))
            length //= 2
        pairs.sort()
        arcs = np.array(pairs, dtype=np.int64)
    arcs.setflags(write=False)
    _ARC_CACHE[key] = arcs
    return arcs


def _weights(n: int) -> np.ndarray:
    """w[len] = log2(4 / (len/n)) for len in 1..n; index 0 unused."""
    w = _WEIGHT_CACHE.get(n)
    if w is None:
        lens = np.arange(n + 1, dtype=np.float64)
        lens[0] = np.nan
        w = np.log2(4.0 * n / lens)
        w.setflags(write=False)
        _WEIGHT_CACHE[n] = w
    return w


def _chunk_bounds(n_units: int, threads: int) -> list[tuple[int, int]]:
    if threads <= 1 or n_units <= 1:
        return [(0, n_units)]
    pieces = min(n_units, threads * 4)
    edges = np.linspace(0, n_units, pieces + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _run_chunked(worker, n_units: int, threads: int):
    """Run worker(lo, hi) -> (value, index) over chunks; max value wins,
    ties go to the smallest index.  Identical output for any thread count."""
    bounds = _chunk_bounds(n_units, threads)
    if len(bounds) == 1:
        results = [worker(*bounds[0])]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(lambda b: worker(*b), bounds))
    best_val = -np.inf
    best_idx = -1
    for val, idx in results:
        if val > best_val or (val == best_val and 0 <= idx < best_idx):
            best_val, best_idx = val, idx
    return best_val, best_idx


_KERNELS = None
_KERNELS_LOCK = threading.Lock()


def _kernels():
    global _KERNELS
    if _KERNELS is None:
        with _KERNELS_LOCK:
            if _KERNELS is None:
                from . import _kernels as mod
                mod.warmup()
                _KERNELS = mod
    return _KERNELS


def _tiled_and_prefix(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    tiled = np.ascontiguousarray(np.tile(values, (2,) * values.ndim))
    inner = tiled
    for ax in range(tiled.ndim):
        inner = pairwise_cumsum(inner, ax)
    prefix = np.zeros(tuple(m + 1 for m in tiled.shape))
    prefix[tuple(slice(1, None) for _ in tiled.shape)] = inner
    return tiled, np.ascontiguousarray(prefix)


def _sweep_array(values: np.ndarray, mode: EnumMode, kind: str, threads: int):
    """Sweep every rectangle of the enumeration over a raw value array.

    Returns (value, per-axis arc indices of the argmax, rectangle count).
    ``kind`` is one of "osc", "lmo", "star", "meanratio".
    """
    ndim = values.ndim
    if ndim <= 2:
        return _numba_sweep(values, mode, kind, threads)
    return _generic_sweep(values, mode, kind, threads)


def _numba_sweep(values: np.ndarray, mode: EnumMode, kind: str, threads: int):
    k = _kernels()
    dims = values.shape
    if values.ndim == 1:
        arcs = arcs_for_axis(dims[0], mode)
        tiled, prefix = _tiled_and_prefix(values)
        w = _weights(dims[0])
        if kind in ("osc", "lmo"):
            weighted = kind == "lmo"
            worker = lambda lo, hi: k.osc_sweep_1d(tiled, prefix, arcs, lo, hi, w, weighted)
        elif kind == "star":
            worker = lambda lo, hi: k.star_sweep_1d(tiled, arcs, lo, hi, dims[0])
        else:
            gmean = float(np.mean(values))
            worker = lambda lo, hi: k.meanratio_sweep_1d(prefix, arcs, lo, hi, w, gmean)
        val, idx = _run_chunked(worker, len(arcs), threads)
        return val, (idx,), len(arcs)

    arcs0 = arcs_for_axis(dims[0], mode)
    arcs1 = arcs_for_axis(dims[1], mode)
    tiled, prefix = _tiled_and_prefix(values)
    w0, w1 = _weights(dims[0]), _weights(dims[1])
    if kind in ("osc", "lmo"):
        weighted = kind == "lmo"
        worker = lambda lo, hi: k.osc_sweep_2d(tiled, prefix, arcs0, arcs1, lo, hi, w0, w1, weighted)
    elif kind == "star":
        worker = lambda lo, hi: k.star_sweep_2d(tiled, arcs0, arcs1, lo, hi, dims[0], dims[1])
    else:
        gmean = float(np.mean(values))
        worker = lambda lo, hi: k.meanratio_sweep_2d(prefix, arcs0, arcs1, lo, hi, w0, w1, gmean)
    val, idx = _run_chunked(worker, len(arcs0), threads)
    return val, (idx // len(arcs1), idx % len(arcs1)), len(arcs0) * len(arcs1)


_GENERIC_BLOCK = 8 << 20  # max floats materialized per window block


def _generic_sweep(values: np.ndarray, mode: EnumMode, kind: str, threads: int):
    """Pure-numpy N-dimensional sweep, grouped by rectangle shape."""
    dims = values.shape
    ndim = values.ndim
    per_axis = [arcs_for_axis(n, mode) for n in dims]
    count = int(np.prod([len(a) for a in per_axis], dtype=np.int64))
    by_len = []
    for arcs in per_axis:
        table: dict[int, tuple[list[int], list[int]]] = {}
        for idx, (s, l) in enumerate(arcs):
            table.setdefault(int(l), ([], []))[0].append(int(s))
            table[int(l)][1].append(idx)
        by_len.append(table)
    tiled = np.tile(values, (2,) * ndim)
    gmean = float(np.mean(values))
    wtabs = [_weights(n) for n in dims]
    shapes = list(itertools.product(*[sorted(t) for t in by_len]))

    def eval_shape(shape):
        starts = [np.asarray(by_len[j][shape[j]][0]) for j in range(ndim)]
        arcidx = [by_len[j][shape[j]][1] for j in range(ndim)]
        cells = int(np.prod(shape, dtype=np.int64))
        weight = sum(float(wtabs[j][shape[j]]) for j in range(ndim))
        sliding = np.lib.stride_tricks.sliding_window_view(tiled, shape)
        rest = int(np.prod([len(s) for s in starts[1:]], dtype=np.int64)) * cells
        block_rows = max(1, _GENERIC_BLOCK // max(rest, 1))
        best = None
        for row0 in range(0, len(starts[0]), block_rows):
            rows = starts[0][row0:row0 + block_rows]
            windows = sliding[np.ix_(rows, *starts[1:])]
            tail = tuple(range(ndim, 2 * ndim))
            if kind == "meanratio":
                vals = np.abs(windows.mean(axis=tail) - gmean) / weight
            elif kind == "star":
                flat = windows.reshape(windows.shape[:ndim] + (cells,))
                med = np.sort(flat, axis=-1)[..., (cells - 1) // 2]
                vals = np.abs(flat - med[..., None]).mean(axis=-1)
            else:
                means = windows.mean(axis=tail)
                vals = np.abs(windows - means[(...,) + (None,) * ndim]).mean(axis=tail)
                if kind == "lmo":
                    vals = vals * weight
            pos = int(np.argmax(vals))
            multi = np.unravel_index(pos, vals.shape)
            key = tuple(arcidx[0][row0 + multi[0]]
                        if j == 0 else arcidx[j][multi[j]]
                        for j in range(ndim))
            cand = (float(vals[multi]), key)
            if best is None or cand[0] > best[0] or (cand[0] == best[0] and cand[1] < best[1]):
                best = cand
        return best

    if threads > 1 and len(shapes) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(eval_shape, shapes))
    else:
        results = [eval_shape(s) for s in shapes]
    best = None
    for cand in results:
        if cand is None:
            continue
        if best is None or cand[0] > best[0] or (cand[0] == best[0] and cand[1] < best[1]):
            best = cand
    return best[0], best[1], count


def _decode_rect(dims, mode, arc_indices) -> PeriodicRect:
    arcs = []
    for axis, idx in enumerate(arc_indices):
        s, l = arcs_for_axis(dims[axis], mode)[idx]
        arcs.append(Arc(axis, int(s), int(l)))
    return PeriodicRect(tuple(arcs))


def _check_budget(dims, mode, budget) -> int:
    count = 1
    for n in dims:
        count *= len(arcs_for_axis(n, mode))
    if count > budget:
        raise BudgetExceeded(count, budget)
    return count


def _full_norm(f: GridFunction, mode: EnumMode, kind: str, budget: int,
               threads: int) -> NormReport:
    _check_budget(f.dims, mode, budget)
    value, arc_idx, count = _sweep_array(f.values, mode, kind, threads)
    rect = _decode_rect(f.dims, mode, arc_idx)
    return NormReport(float(value), rect, None, mode, count)


# ---------------------------------------------------------------------------
# Public evaluators


def osc_l1(f: GridFunction, sat: SummedAreaTable, rect: PeriodicRect) -> float:
    """Mean of |f - m_R f| over the cells of a full-dimensional rectangle."""
    rect.validate(f.dims)
    if rect.axes != tuple(range(f.ndim)):
        raise ValueError("rectangle must cover every axis")
    m = rect_mean(sat, rect)
    cells = f.values[np.ix_(*[a.cells(n) for a, n in zip(rect.arcs, f.dims)])]
    return float(np.mean(np.abs(cells - m)))


def bmo_norm(f: GridFunction, mode: EnumMode = EnumMode.EXACT, *,
             budget: int = DEFAULT_BUDGET, threads: int = 1) -> NormReport:
    """Sup of the rectangle mean oscillation over the enumerated rectangles."""
    return _full_norm(f, mode, "osc", budget, threads)


def star_norm(f: GridFunction, mode: EnumMode = EnumMode.EXACT, *,
              budget: int = DEFAULT_BUDGET, threads: int = 1) -> NormReport:
    """Sup over rectangles of the best-constant L1 oscillation.

    Per rectangle the infimum over constants of the mean of |f - c| is
    attained at a median of the cell values (the lower one on even counts).
    """
    return _full_norm(f, mode, "star", budget, threads)


def lmo_norm(f: GridFunction, mode: EnumMode = EnumMode.EXACT, *,
             budget: int = DEFAULT_BUDGET, threads: int = 1) -> NormReport:
    """Sup of sum_j log2(4/|I_j|) times the rectangle mean oscillation."""
    return _full_norm(f, mode, "lmo", budget, threads)


def mean_log_ratio(f: GridFunction, *, budget: int = DEFAULT_BUDGET,
                   threads: int = 1) -> float:
    """Sup over rectangles of |m_R f - global mean| / sum_j log2(4/|I_j|).

    The global-mean subtraction makes the statistic blind to added constants.
    """
    _check_budget(f.dims, EnumMode.EXACT, budget)
    value, _, _ = _sweep_array(f.values, EnumMode.EXACT, "meanratio", threads)
    return float(value)


def _m_norm(f: GridFunction, mode: EnumMode, kind: str, budget: int,
            threads: int) -> NormReport:
    if f.ndim < 2:
        raise ValueError("mean-split norms need at least 2 axes")
    total_count = 0
    best_val = -np.inf
    best_key = None  # (split position, outer unit index)
    best_rect = None
    best_split = None
    for split_pos, split in enumerate(all_splits(f.ndim)):
        outer_lists = [arcs_for_axis(f.dims[a], mode) for a in split.averaged_axes]
        outer_sizes = [len(a) for a in outer_lists]
        n_outer = int(np.prod(outer_sizes, dtype=np.int64))
        inner_count = 1
        for r in split.remaining_axes:
            inner_count *= len(arcs_for_axis(f.dims[r], mode))
        # The budget bounds each split's enumeration pass (outer x inner).
        if n_outer * inner_count > budget:
            raise BudgetExceeded(n_outer * inner_count, budget)
        total_count += n_outer * inner_count
        pp = _PartialPrefix(f, split.averaged_axes)

        def decode_outer(u: int) -> PeriodicRect:
            arcs = []
            rem = u
            for axis, arcs_arr in zip(reversed(split.averaged_axes), reversed(outer_lists)):
                rem, j = divmod(rem, len(arcs_arr))
                s, l = arcs_arr[j]
                arcs.append(Arc(axis, int(s), int(l)))
            return PeriodicRect(tuple(arcs))

        def worker(lo: int, hi: int):
            w_val = -np.inf
            w_idx = -1
            for u in range(lo, hi):
                pm = pp.mean_over(decode_outer(u))
                val, _, _ = _sweep_array(pm, mode, kind, 1)
                if val > w_val:
                    w_val, w_idx = val, u
            return w_val, w_idx

        val, idx = _run_chunked(worker, n_outer, threads)
        if val > best_val or (val == best_val and (split_pos, idx) < best_key):
            best_val = val
            best_key = (split_pos, idx)
            best_rect = decode_outer(idx)
            best_split = split
    return NormReport(float(best_val), best_rect, best_split, mode, total_count)


def bmo_m_norm(f: GridFunction, mode: EnumMode = EnumMode.EXACT, *,
               budget: int = DEFAULT_BUDGET, threads: int = 1) -> NormReport:
    """Sup over coordinate splits and rectangles on the averaged axes of the
    mean oscillation norm of the partial mean."""
    return _m_norm(f, mode, "osc", budget, threads)


def lmo_m_norm(f: GridFunction, mode: EnumMode = EnumMode.EXACT, *,
               budget: int = DEFAULT_BUDGET, threads: int = 1) -> NormReport:
    """As ``bmo_m_norm`` with the log-weighted oscillation norm inside."""
    return _m_norm(f, mode, "lmo", budget, threads)


def lmo_inv_norm(f: GridFunction, mode: EnumMode = EnumMode.EXACT, *,
                 budget: int = DEFAULT_BUDGET, threads: int = 1) -> NormReport:
    """Sup over 1-D slices of a 2-D function of the slice's log-weighted norm.

    The witness rectangle pairs the argmax arc on the free axis with a
    single-cell arc marking the frozen coordinate; the split records the
    free axis.
    """
    if f.ndim != 2:
        raise ValueError("slice-invariant norm is defined for 2-D grids")
    total = 0
    units = []  # (free_axis, cell)
    for free in (0, 1):
        frozen = 1 - free
        total += f.dims[frozen] * len(arcs_for_axis(f.dims[free], mode))
        units.extend((free, c) for c in range(f.dims[frozen]))
    if total > budget:
        raise BudgetExceeded(total, budget)

    def worker(lo: int, hi: int):
        w_val = -np.inf
        w_key = -1
        for u in range(lo, hi):
            free, cell = units[u]
            line = f.values[cell, :] if free == 1 else f.values[:, cell]
            val, (arc_idx,), _ = _sweep_array(np.ascontiguousarray(line), mode, "lmo", 1)
            if val > w_val:
                w_val, w_key = val, u * (10 ** 9) + arc_idx
        return w_val, w_key

    val, key = _run_chunked(worker, len(units), threads)
    u, arc_idx = divmod(key, 10 ** 9)
    free, cell = units[u]
    frozen = 1 - free
    s, l = arcs_for_axis(f.dims[free], mode)[arc_idx]
    rect = PeriodicRect((Arc(free, int(s), int(l)), Arc(frozen, cell, 1)))
    return NormReport(float(val), rect, CoordSplit.of(2, (free,)), mode, total)


def slice_bmo_norm(f: GridFunction, split: CoordSplit, mode: EnumMode = EnumMode.EXACT, *,
                   budget: int = DEFAULT_BUDGET, threads: int = 1) -> float:
    """Sup over frozen cells of the complement axes of the slice's bmo norm.

    ``split.averaged_axes`` name the slice's free axes (the ones the norm
    runs over); every combination of cells on the remaining axes is frozen.
    """
    if f.ndim < 2:
        raise ValueError("slice norms need at least 2 axes")
    kept = split.averaged_axes
    frozen = split.remaining_axes
    inner_count = 1
    for a in kept:
        inner_count *= len(arcs_for_axis(f.dims[a], mode))
    frozen_cells = list(itertools.product(*[range(f.dims[a]) for a in frozen]))
    if inner_count * len(frozen_cells) > budget:
        raise BudgetExceeded(inner_count * len(frozen_cells), budget)

    def worker(lo: int, hi: int):
        w_val = -np.inf
        for u in range(lo, hi):
            idx: list = [slice(None)] * f.ndim
            for a, c in zip(frozen, frozen_cells[u]):
                idx[a] = c
            line = np.ascontiguousarray(f.values[tuple(idx)])
            val, _, _ = _sweep_array(line, mode, "osc", 1)
            w_val = max(w_val, val)
        return w_val, lo

    val, _ = _run_chunked(worker, len(frozen_cells), threads)
    return float(val)
