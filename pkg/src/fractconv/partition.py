"""Interval partitions, the affine maps L_n, subinterval lookup and IFS address grids.

Subintervals follow the half-open convention I_1 = [x_0, x_1] and
I_n = (x_{n-1}, x_n] for n >= 2, so every point of I belongs to exactly
one subinterval.  Subinterval indices are 1-based throughout, matching the
usual mathematical labelling of the maps.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import AddressCapExceeded, InvalidArgument, OutOfDomain

DEFAULT_ADDRESS_CAP = 2**22

# relative slack (times |I|) accepted on domain checks so that roundoff from
# map_forward/map_inverse does not trip them
_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class Partition:
    nodes: tuple[float, ...]

    def __post_init__(self) -> None:
        nodes = tuple(float(v) for v in self.nodes)
        if len(nodes) < 3:
            raise InvalidArgument(f"a partition needs N >= 2 subintervals, got {len(nodes) - 1}")
        if not all(math.isfinite(v) for v in nodes):
            raise InvalidArgument("partition nodes must be finite")
        if any(b <= a for a, b in zip(nodes, nodes[1:])):
            raise InvalidArgument("partition nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    @property
    def N(self) -> int:
        return len(self.nodes) - 1

    @property
    def lo(self) -> float:
        return self.nodes[0]

    @property
    def hi(self) -> float:
        return self.nodes[-1]

    @property
    def length(self) -> float:
        return self.nodes[-1] - self.nodes[0]

    @property
    def is_uniform(self) -> bool:
        """True when the nodes are equally spaced up to roundoff."""
        widths = np.diff(self.nodes)
        return bool(np.all(np.abs(widths - widths[0]) <= 1e-12 * self.length))

    def fine_grid(self, M: int) -> np.ndarray:
        """Fine grid with M uniform cells per subinterval; nodes are reproduced exactly."""
        if M < 1:
            raise InvalidArgument(f"samples per subinterval must be >= 1, got {M}")
        j = np.arange(M) / M
        pieces = [a + (b - a) * j for a, b in zip(self.nodes[:-1], self.nodes[1:])]
        grid = np.concatenate(pieces + [np.array([self.nodes[-1]])])
        grid[::M] = self.nodes
        return grid


def make_uniform_partition(interval: Sequence[float], N: int) -> Partition:
    lo, hi = (float(v) for v in interval)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise InvalidArgument("interval bounds must be finite")
    if lo >= hi:
        raise InvalidArgument(f"empty interval [{lo}, {hi}]")
    if int(N) != N or N < 2:
        raise InvalidArgument(f"N must be an integer >= 2, got {N}")
    N = int(N)
    nodes = [lo + j * (hi - lo) / N for j in range(N + 1)]
    nodes[-1] = hi
    return Partition(tuple(nodes))


@dataclass(frozen=True)
class AffineMapFamily:
    """The maps L_n(x) = a_n x + b_n sending I onto [x_{n-1}, x_n]."""

    partition: Partition
    slopes: tuple[float, ...]
    intercepts: tuple[float, ...]

    @property
    def N(self) -> int:
        return self.partition.N

    def _check_index(self, n: int) -> None:
        if not 1 <= n <= self.N:
            raise InvalidArgument(f"map index must lie in 1..{self.N}, got {n}")

    def forward(self, n: int, t):
        """Vectorized L_n without domain checks."""
        x = self.partition.nodes
        return x[n - 1] + self.slopes[n - 1] * (np.asarray(t, dtype=float) - x[0])

    def inverse(self, n: int, x):
        """Vectorized L_n^{-1} without domain checks."""
        nodes = self.partition.nodes
        return nodes[0] + (np.asarray(x, dtype=float) - nodes[n - 1]) / self.slopes[n - 1]


def make_affine_maps(p: Partition) -> AffineMapFamily:
    x = p.nodes
    width = p.length
    slopes = tuple((x[n] - x[n - 1]) / width for n in range(1, p.N + 1))
    intercepts = tuple(x[n - 1] - slopes[n - 1] * x[0] for n in range(1, p.N + 1))
    return AffineMapFamily(p, slopes, intercepts)


def _check_in(p: Partition, x: float, lo: float, hi: float) -> float:
    slack = _DOMAIN_SLACK * p.length
    if not (lo - slack <= x <= hi + slack):
        raise OutOfDomain(f"{x!r} lies outside [{lo}, {hi}]")
    return min(max(x, lo), hi)


def locate_subinterval(p: Partition, x: float) -> int:
    """Index n (1-based) of the subinterval I_n containing x."""
    x = float(x)
    if not (p.lo <= x <= p.hi):
        raise OutOfDomain(f"{x!r} lies outside [{p.lo}, {p.hi}]")
    return max(1, bisect.bisect_left(p.nodes, x))


def locate_subintervals(p: Partition, xs) -> np.ndarray:
    """Array version of :func:`locate_subinterval`."""
    xs = np.asarray(xs, dtype=float)
    if np.any((xs < p.lo) | (xs > p.hi)):
        raise OutOfDomain(f"points outside [{p.lo}, {p.hi}]")
    return np.maximum(1, np.searchsorted(p.nodes, xs, side="left"))


def map_forward(m: AffineMapFamily, n: int, t: float) -> float:
    m._check_index(n)
    p = m.partition
    t = _check_in(p, float(t), p.lo, p.hi)
    return float(m.forward(n, t))


def map_inverse(m: AffineMapFamily, n: int, x: float) -> float:
    m._check_index(n)
    p = m.partition
    x = _check_in(p, float(x), p.nodes[n - 1], p.nodes[n])
    return float(m.inverse(n, x))


@dataclass(frozen=True)
class AddressedPoint:
    address: tuple[int, ...]
    point: float

    @property
    def depth(self) -> int:
        return len(self.address)


@dataclass(frozen=True)
class AddressGrid:
    """All words of one length applied to a set of base points.

    ``addresses[i]`` is the word (n_1, ..., n_k) and ``points[i]`` equals
    L_{n_1} o ... o L_{n_k}(base[base_index[i]]).
    """

    addresses: np.ndarray
    base_index: np.ndarray
    points: np.ndarray
    base: np.ndarray = field(repr=False)

    @property
    def depth(self) -> int:
        return self.addresses.shape[1]

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[AddressedPoint]:
        for word, x in zip(self.addresses, self.points):
            yield AddressedPoint(tuple(int(n) for n in word), float(x))


def address_grid(
    m: AffineMapFamily,
    depth: int,
    base: Sequence[float],
    cap: int = DEFAULT_ADDRESS_CAP,
) -> AddressGrid:
    """Apply every word of length ``depth`` to every base point.

    Words are ordered lexicographically with the base point varying fastest.
    No deduplication is performed.
    """
    if depth < 0:
        raise InvalidArgument(f"depth must be >= 0, got {depth}")
    p = m.partition
    base_arr = np.array([_check_in(p, float(s), p.lo, p.hi) for s in base], dtype=float)
    count = m.N**depth * len(base_arr)
    if count > cap:
        raise AddressCapExceeded(f"{m.N}^{depth} * {len(base_arr)} = {count} points exceeds cap {cap}")

    words = np.array(list(itertools.product(range(1, m.N + 1), repeat=depth)), dtype=np.int64)
    words = words.reshape(m.N**depth, depth)
    points = np.tile(base_arr, (len(words), 1))
    # innermost map first: L_{n_1}(L_{n_2}(... L_{n_k}(s)))
    x = np.asarray(p.nodes)
    slopes = np.asarray(m.slopes)
    for level in range(depth - 1, -1, -1):
        n = words[:, level][:, None]
        points = x[n - 1] + slopes[n - 1] * (points - x[0])
    return AddressGrid(
        addresses=np.repeat(words, len(base_arr), axis=0),
        base_index=np.tile(np.arange(len(base_arr)), len(words)),
        points=points.reshape(-1),
        base=base_arr,
    )
