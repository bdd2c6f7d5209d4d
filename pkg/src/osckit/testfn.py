"""Generators for structured test functions on periodic grids.

The main building block is the log-shell bump ``make_log_arc``: a
piecewise-constant function that equals roughly log2(4/|J|) on a base arc J
and steps down by 1 on each doubling shell around it, reaching 2 on the
cells farthest from J.  Tensor sums of these bumps are the standard
witnesses for log-weighted oscillation growth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .grid import Arc, GridFunction, PeriodicRect, cell_centers

__all__ = [
    "LogArcSpec",
    "PRNG_ID",
    "FACTORS",
    "make_log_arc",
    "make_log_rect",
    "make_separable",
    "make_random_dyadic",
    "from_spec",
]

# Seed handling contract for every stochastic generator: one integer seed
# feeds a SeedSequence whose spawned children drive independent Philox
# streams, one per dyadic level.  Reports quote this identifier.
PRNG_ID = "numpy:Philox/SeedSequence.spawn/v1"


@dataclass(frozen=True)
class LogArcSpec:
    """Shell decomposition of the circle around a base arc.

    ``levels`` is the smallest k with 2^k * |J| >= 1; the shells are the
    concentric arcs J = J_0 c J_1 c ... c J_levels = full circle with
    |J_k| = min(2^k |J|, 1).
    """

    n: int
    J: Arc

    def __post_init__(self) -> None:
        self.J.validate(self.n)

    @property
    def axis(self) -> int:
        return self.J.axis

    @property
    def levels(self) -> int:
        k = 0
        while (self.J.len << k) < self.n:
            k += 1
        return k

    def shell_arcs(self) -> list[Arc]:
        """J_0 .. J_levels.  When a length difference is odd, the extra cell
        goes on the lower-index (clockwise) side, consistently."""
        arcs = []
        for k in range(self.levels + 1):
            length = min(self.J.len << k, self.n)
            shift = (length - self.J.len + 1) // 2
            arcs.append(Arc(self.J.axis, (self.J.start - shift) % self.n, length))
        return arcs


def make_log_arc(n: int, J: Arc) -> GridFunction:
    """Log-shell bump on the n-cell circle: value levels+2 on J, stepping
    down by one per shell, value 2 on the outermost shell."""
    spec = LogArcSpec(n, J)
    lvl = spec.levels
    out = np.full(n, 2.0)
    shells = spec.shell_arcs()
    for k in range(lvl - 1, -1, -1):
        out[shells[k].cells(n)] = float(lvl + 2 - k)
    return GridFunction((n,), out)


def make_log_rect(dims: Sequence[int], rect: PeriodicRect) -> GridFunction:
    """Tensor sum of per-axis log-shell bumps over the arcs of ``rect``."""
    dims = tuple(int(n) for n in dims)
    rect.validate(dims)
    if rect.axes != tuple(range(len(dims))):
        raise ValueError("rectangle must cover every axis")
    total = np.zeros(dims)
    for j, arc in enumerate(rect.arcs):
        g = make_log_arc(dims[j], Arc(0, arc.start, arc.len))
        shape = [1] * len(dims)
        shape[j] = dims[j]
        total = total + g.values.reshape(shape)
    return GridFunction(dims, total)


def _factor_cos(t: np.ndarray) -> np.ndarray:
    return np.cos(2.0 * np.pi * t)


def _factor_sawtooth(t: np.ndarray) -> np.ndarray:
    # Triangle profile 1 - 4|t - 1/2|: continuous across the wrap point, so
    # slices stay Lipschitz on the circle (a plain ramp would jump at 0).
    return 1.0 - 4.0 * np.abs(t - 0.5)


def _factor_step(t: np.ndarray) -> np.ndarray:
    return (t < 0.5).astype(np.float64)


FACTORS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "cos": _factor_cos,
    "sawtooth": _factor_sawtooth,
    "step": _factor_step,
}


def make_separable(dims: Sequence[int], factors: Sequence, combine: str = "product") -> GridFunction:
    """Combine per-axis 1-D profiles, sampled at cell centers, by sum or product.

    Each factor is a name from ``FACTORS`` or a callable of the coordinate.
    """
    dims = tuple(int(n) for n in dims)
    if len(factors) != len(dims):
        raise ValueError(f"need one factor per axis, got {len(factors)} for {len(dims)} axes")
    if combine not in ("product", "sum"):
        raise ValueError(f"combine must be 'product' or 'sum', got {combine!r}")
    out = None
    for j, factor in enumerate(factors):
        fn = FACTORS[factor] if isinstance(factor, str) else factor
        line = np.asarray(fn(cell_centers(dims[j])), dtype=np.float64)
        shape = [1] * len(dims)
        shape[j] = dims[j]
        line = line.reshape(shape)
        if out is None:
            out = np.broadcast_to(line, dims).copy()
        elif combine == "product":
            out = out * line
        else:
            out = out + line
    return GridFunction(dims, out)


def make_random_dyadic(dims: Sequence[int], depth: int, amplitude: float = 1.0,
                       seed: int = 0) -> GridFunction:
    """Sum of random +/-amplitude increments, constant on level-k dyadic boxes.

    Level k splits every axis into 2^k equal blocks; each block gets an
    independent sign.  Output is bit-identical for a given seed.
    """
    dims = tuple(int(n) for n in dims)
    exps = []
    for n in dims:
        e = n.bit_length() - 1
        if (1 << e) != n:
            raise ValueError(f"dyadic generator needs power-of-two dims, got {n}")
        exps.append(e)
    if depth < 0 or depth > min(exps):
        raise ValueError(f"depth {depth} outside [0, {min(exps)}] for dims {dims}")
    out = np.zeros(dims)
    children = np.random.SeedSequence(seed).spawn(depth)
    for k in range(1, depth + 1):
        gen = np.random.Generator(np.random.Philox(children[k - 1]))
        signs = gen.integers(0, 2, size=(1 << k,) * len(dims)) * 2.0 - 1.0
        block = signs * amplitude
        for ax, n in enumerate(dims):
            block = np.repeat(block, n >> k, axis=ax)
        out += block
    return GridFunction(dims, out)


def from_spec(dims: Sequence[int], spec: dict, default_seed: int = 0) -> GridFunction:
    """Build a function from a JSON-style generator spec.

    Kinds: log_arc {start, len}, log_rect {arcs | sides}, separable
    {factors, combine}, random {depth, amplitude, seed}, constant {value}.
    """
    dims = tuple(int(n) for n in dims)
    kind = spec.get("kind")
    if kind == "constant":
        return GridFunction(dims, np.full(dims, float(spec.get("value", 0.0))))
    if kind == "log_arc":
        if len(dims) != 1:
            raise ValueError("log_arc spec needs a 1-D grid")
        return make_log_arc(dims[0], Arc(0, int(spec["start"]), int(spec["len"])))
    if kind == "log_rect":
        if "arcs" in spec:
            arcs = tuple(Arc(int(a["axis"]), int(a["start"]), int(a["len"])) for a in spec["arcs"])
        else:
            sides = [int(s) for s in spec["sides"]]
            starts = [int(s) for s in spec.get("starts", [0] * len(sides))]
            arcs = tuple(Arc(j, s, l) for j, (s, l) in enumerate(zip(starts, sides)))
        return make_log_rect(dims, PeriodicRect(arcs))
    if kind == "separable":
        return make_separable(dims, spec["factors"], spec.get("combine", "product"))
    if kind == "random":
        seed = int(spec.get("seed", default_seed))
        return make_random_dyadic(dims, int(spec["depth"]),
                                  float(spec.get("amplitude", 1.0)), seed)
    raise ValueError(
        f"unknown generator kind {kind!r}; expected one of "
        "log_arc, log_rect, separable, random, constant")
