"""Sampled functions on a partitioned interval and scale vectors.

A :class:`GridFunction` stores values on the fine grid of a partition: M
uniform cells per subinterval, N*M + 1 points, every partition node
included.  It can optionally remember the vectorized callable it was sampled
from, which lets the push-forward evaluator query it off-grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import expr as _expr
from .errors import ContractivityError, InvalidArgument, ShapeMismatch
from .partition import Partition

DEFAULT_M = 512

Source = Callable[[np.ndarray], np.ndarray]
FunctionLike = Union[str, float, int, Source, "GridFunction"]


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GridFunction:
    partition: Partition
    M: int
    values: np.ndarray
    source: Optional[Source] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.M < 1:
            raise InvalidArgument(f"M must be >= 1, got {self.M}")
        values = _frozen(self.values)
        expected = self.partition.N * self.M + 1
        if values.shape != (expected,):
            raise ShapeMismatch(f"expected {expected} samples, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidArgument("grid function values must be finite")
        object.__setattr__(self, "values", values)

    @cached_property
    def grid(self) -> np.ndarray:
        g = self.partition.fine_grid(self.M)
        g.setflags(write=False)
        return g

    def __len__(self) -> int:
        return len(self.values)

    def same_grid(self, other: "GridFunction") -> bool:
        return self.M == other.M and self.partition == other.partition

    def at(self, xs) -> np.ndarray:
        """Values at arbitrary points of I: the source if known, else linear interpolation."""
        xs = np.asarray(xs, dtype=float)
        if self.source is not None:
            return np.asarray(self.source(xs), dtype=float).reshape(xs.shape)
        return np.interp(xs, self.grid, self.values)

    def node_values(self) -> np.ndarray:
        return self.values[:: self.M]

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.partition, self.M, values)


def _as_source(fn: FunctionLike) -> Source:
    if isinstance(fn, GridFunction):
        raise TypeError("GridFunction has no callable form")
    if isinstance(fn, str):
        return _expr.compile_expression(fn)
    if isinstance(fn, (int, float)):
        c = float(fn)
        return lambda xs: np.full(np.shape(xs), c)
    if callable(fn):
        return fn
    raise TypeError(f"cannot interpret {fn!r} as a function")


def sample_function(fn: FunctionLike, partition: Partition, M: int = DEFAULT_M) -> GridFunction:
    """Sample an expression string, constant or vectorized callable on the fine grid."""
    if isinstance(fn, GridFunction):
        if fn.partition != partition or fn.M != M:
            raise ShapeMismatch("grid function lives on a different grid")
        return fn
    source = _as_source(fn)
    grid = partition.fine_grid(M)
    values = np.broadcast_to(np.asarray(source(grid), dtype=float), grid.shape)
    return GridFunction(partition, M, values, source)


def zero_function(partition: Partition, M: int = DEFAULT_M) -> GridFunction:
    return sample_function(0.0, partition, M)


def _check_same(g: GridFunction, h: GridFunction) -> None:
    if not g.same_grid(h):
        raise ShapeMismatch("grid functions live on different grids")


def gf_add(g: GridFunction, h: GridFunction) -> GridFunction:
    _check_same(g, h)
    src = None
    if g.source is not None and h.source is not None:
        gs, hs = g.source, h.source
        src = lambda xs: gs(xs) + hs(xs)  # noqa: E731
    return GridFunction(g.partition, g.M, g.values + h.values, src)


def gf_sub(g: GridFunction, h: GridFunction) -> GridFunction:
    _check_same(g, h)
    src = None
    if g.source is not None and h.source is not None:
        gs, hs = g.source, h.source
        src = lambda xs: gs(xs) - hs(xs)  # noqa: E731
    return GridFunction(g.partition, g.M, g.values - h.values, src)


def gf_scale(c: float, g: GridFunction) -> GridFunction:
    c = float(c)
    src = None
    if g.source is not None:
        gs = g.source
        src = lambda xs: c * gs(xs)  # noqa: E731
    return GridFunction(g.partition, g.M, c * g.values, src)


# ------------------------------------------------------------ scale vectors


@dataclass(frozen=True, eq=False)
class ScaleVector:
    """Scale functions alpha_1..alpha_N sampled on the fine grid of I.

    ``values[n-1]`` holds alpha_n on the full fine grid (not only on I_n),
    because the operator evaluates alpha_n at pulled-back points anywhere
    in I.  ``lambda_bound`` is the grid maximum of |alpha_n| over all n, a
    surrogate for the essential supremum resolved to ``grid_spacing``.
    """

    partition: Partition
    M: int
    values: np.ndarray
    lambda_bound: float
    sources: Optional[tuple[Source, ...]] = field(default=None, repr=False)
    constant: Optional[tuple[float, ...]] = None

    @property
    def N(self) -> int:
        return self.partition.N

    @property
    def grid_spacing(self) -> float:
        return float(np.max(np.diff(self.partition.nodes))) / self.M

    def at(self, n: int, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        if self.constant is not None:
            return np.full(ts.shape, self.constant[n - 1])
        if self.sources is not None:
            return np.asarray(self.sources[n - 1](ts), dtype=float).reshape(ts.shape)
        return np.interp(ts, self.partition.fine_grid(self.M), self.values[n - 1])


def _expand(alphas, N: int) -> list:
    if isinstance(alphas, (str, int, float, GridFunction)) or callable(alphas):
        return [alphas] * N
    alphas = list(alphas)
    if len(alphas) == 1:
        return alphas * N
    if len(alphas) != N:
        raise InvalidArgument(f"expected 1 or {N} scale functions, got {len(alphas)}")
    return alphas


def _sample_alphas(alphas, p: Partition, M: int):
    items = _expand(alphas, p.N)
    grid = p.fine_grid(M)
    rows, sources = [], []
    for a in items:
        if isinstance(a, GridFunction):
            if a.partition != p or a.M != M:
                raise ShapeMismatch("scale function lives on a different grid")
            rows.append(np.asarray(a.values))
            sources.append(a.source)
        else:
            src = _as_source(a)
            rows.append(np.broadcast_to(np.asarray(src(grid), dtype=float), grid.shape))
            sources.append(src)
    values = np.vstack(rows)
    if not np.all(np.isfinite(values)):
        raise InvalidArgument("scale function values must be finite")
    constant = None
    if all(isinstance(a, (int, float)) for a in items):
        constant = tuple(float(a) for a in items)
    src_tuple = tuple(sources) if all(s is not None for s in sources) else None
    return values, src_tuple, constant


def compute_lambda(alphas, p: Partition, M: int = DEFAULT_M) -> float:
    """Grid maximum of |alpha_n| over all n; raises ContractivityError if >= 1."""
    if M < 1:
        raise InvalidArgument(f"M must be >= 1, got {M}")
    values, _, _ = _sample_alphas(alphas, p, M)
    lam = float(np.max(np.abs(values)))
    if not lam < 1.0:
        raise ContractivityError(f"Lambda = {lam} violates the contractivity requirement Lambda < 1")
    return lam


def make_scale_vector(alphas, p: Partition, M: int = DEFAULT_M) -> ScaleVector:
    """Build a ScaleVector from one function-like (replicated N times) or N of them."""
    values, sources, constant = _sample_alphas(alphas, p, M)
    lam = float(np.max(np.abs(values)))
    if not lam < 1.0:
        raise ContractivityError(f"Lambda = {lam} violates the contractivity requirement Lambda < 1")
    values = _frozen(values)
    return ScaleVector(p, M, values, lam, sources, constant)


def constant_scale(level: Union[float, Sequence[float]], p: Partition, M: int = DEFAULT_M) -> ScaleVector:
    if isinstance(level, (int, float)):
        level = [float(level)] * p.N
    if any(not math.isfinite(v) for v in level):
        raise InvalidArgument("scale constants must be finite")
    return make_scale_vector([float(v) for v in level], p, M)
