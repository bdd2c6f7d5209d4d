"""JIT-compiled sweep kernels for 1-D and 2-D rectangle enumerations.

Every kernel walks a contiguous chunk of the canonical enumeration order and
returns (best value, first global index attaining it).  Rectangle means come
from a prefix table built over the doubled (tiled) value array, so wrapping
arcs are plain contiguous windows.  Kernels release the GIL; thread pools
over disjoint chunks give near-linear scaling and, because each rectangle's
value is computed identically regardless of chunking, bit-identical results
for any worker count.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = [
    "osc_sweep_1d",
    "osc_sweep_2d",
    "star_sweep_1d",
    "star_sweep_2d",
    "meanratio_sweep_1d",
    "meanratio_sweep_2d",
    "warmup",
]


@njit(cache=True, nogil=True)
def osc_sweep_1d(tiled, prefix, arcs, lo, hi, wtab, weighted):
    best = -1.0
    best_idx = -1
    for i in range(lo, hi):
        s = arcs[i, 0]
        l = arcs[i, 1]
        m = (prefix[s + l] - prefix[s]) / l
        acc = 0.0
        for c in range(s, s + l):
            acc += abs(tiled[c] - m)
        val = acc / l
        if weighted:
            val *= wtab[l]
        if val > best:
            best = val
            best_idx = i
    return best, best_idx


@njit(cache=True, nogil=True)
def osc_sweep_2d(tiled, prefix, arcs0, arcs1, lo, hi, w0, w1, weighted):
    n1 = arcs1.shape[0]
    best = -1.0
    best_idx = -1
    for i0 in range(lo, hi):
        s0 = arcs0[i0, 0]
        l0 = arcs0[i0, 1]
        for i1 in range(n1):
            s1 = arcs1[i1, 0]
            l1 = arcs1[i1, 1]
            cells = l0 * l1
            m = (prefix[s0 + l0, s1 + l1] - prefix[s0, s1 + l1]
                 - prefix[s0 + l0, s1] + prefix[s0, s1]) / cells
            acc = 0.0
            for r in range(s0, s0 + l0):
                row = tiled[r]
                for c in range(s1, s1 + l1):
                    acc += abs(row[c] - m)
            val = acc / cells
            if weighted:
                val *= w0[l0] + w1[l1]
            if val > best:
                best = val
                best_idx = i0 * n1 + i1
    return best, best_idx


@njit(cache=True, nogil=True)
def star_sweep_1d(tiled, arcs, lo, hi, n):
    buf = np.empty(n)
    best = -1.0
    best_idx = -1
    for i in range(lo, hi):
        s = arcs[i, 0]
        l = arcs[i, 1]
        for c in range(l):
            buf[c] = tiled[s + c]
        window = buf[:l]
        window.sort()
        med = window[(l - 1) // 2]
        acc = 0.0
        for c in range(l):
            acc += abs(window[c] - med)
        val = acc / l
        if val > best:
            best = val
            best_idx = i
    return best, best_idx


@njit(cache=True, nogil=True)
def star_sweep_2d(tiled, arcs0, arcs1, lo, hi, n0, n1):
    buf = np.empty(n0 * n1)
    narcs1 = arcs1.shape[0]
    best = -1.0
    best_idx = -1
    for i0 in range(lo, hi):
        s0 = arcs0[i0, 0]
        l0 = arcs0[i0, 1]
        for i1 in range(narcs1):
            s1 = arcs1[i1, 0]
            l1 = arcs1[i1, 1]
            cells = l0 * l1
            k = 0
            for r in range(s0, s0 + l0):
                row = tiled[r]
                for c in range(s1, s1 + l1):
                    buf[k] = row[c]
                    k += 1
            window = buf[:cells]
            window.sort()
            med = window[(cells - 1) // 2]
            acc = 0.0
            for c in range(cells):
                acc += abs(window[c] - med)
            val = acc / cells
            if val > best:
                best = val
                best_idx = i0 * narcs1 + i1
    return best, best_idx


@njit(cache=True, nogil=True)
def meanratio_sweep_1d(prefix, arcs, lo, hi, wtab, gmean):
    best = -1.0
    best_idx = -1
    for i in range(lo, hi):
        s = arcs[i, 0]
        l = arcs[i, 1]
        m = (prefix[s + l] - prefix[s]) / l
        val = abs(m - gmean) / wtab[l]
        if val > best:
            best = val
            best_idx = i
    return best, best_idx


@njit(cache=True, nogil=True)
def meanratio_sweep_2d(prefix, arcs0, arcs1, lo, hi, w0, w1, gmean):
    n1 = arcs1.shape[0]
    best = -1.0
    best_idx = -1
    for i0 in range(lo, hi):
        s0 = arcs0[i0, 0]
        l0 = arcs0[i0, 1]
        for i1 in range(n1):
            s1 = arcs1[i1, 0]
            l1 = arcs1[i1, 1]
            m = (prefix[s0 + l0, s1 + l1] - prefix[s0, s1 + l1]
                 - prefix[s0 + l0, s1] + prefix[s0, s1]) / (l0 * l1)
            val = abs(m - gmean) / (w0[l0] + w1[l1])
            if val > best:
                best = val
                best_idx = i0 * n1 + i1
    return best, best_idx


def warmup() -> None:
    """Trigger compilation of every kernel on toy inputs (main thread only)."""
    t1 = np.array([1.0, 0.0, 1.0, 0.0])
    p1 = np.array([0.0, 1.0, 1.0, 2.0, 2.0])
    arcs = np.array([[0, 1], [0, 2]], dtype=np.int64)
    w = np.ones(3)
    osc_sweep_1d(t1, p1, arcs, 0, 2, w, True)
    star_sweep_1d(t1, arcs, 0, 2, 2)
    meanratio_sweep_1d(p1, arcs, 0, 2, w, 0.5)
    t2 = np.array([[1.0, 0.0], [0.0, 1.0]])
    p2 = np.zeros((3, 3))
    p2[1:, 1:] = np.cumsum(np.cumsum(t2, 0), 1)
    osc_sweep_2d(t2, p2, arcs, arcs, 0, 2, w, w, True)
    star_sweep_2d(t2, arcs, arcs, 0, 2, 2, 2)
    meanratio_sweep_2d(p2, arcs, arcs, 0, 2, w, w, 0.5)
