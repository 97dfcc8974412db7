"""L^p norms, the d_p metric for 0 < p < 1, inner products and set distances.

Integrals use the composite midpoint rule.  With an even number M of cells
per subinterval, adjacent fine cells are paired and the midpoint of each
pair is an odd-indexed grid sample, so no partition node (where attractors
jump) is ever used as a quadrature point and no interpolation is needed.
For odd M the midpoint value of each fine cell is the mean of its end
samples.  The p = inf norm is the grid maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import InvalidArgument, ShapeMismatch
from .functions import GridFunction
from .partition import Partition


@dataclass(frozen=True)
class NormSpec:
    """Which L^p quantity to use: ``norm`` (p >= 1), ``metric`` (0 < p < 1) or ``sup``."""

    p: float

    def __post_init__(self) -> None:
        p = float(self.p)
        if not p > 0.0 or math.isnan(p):
            raise InvalidArgument(f"p must be positive, got {self.p}")
        object.__setattr__(self, "p", p)

    @property
    def mode(self) -> str:
        if math.isinf(self.p):
            return "sup"
        return "norm" if self.p >= 1.0 else "metric"

    @property
    def is_metric(self) -> bool:
        return self.mode == "metric"

    def contraction_factor(self, lam: float) -> float:
        """Lambda for norms, Lambda^p for the d_p metric."""
        return lam**self.p if self.is_metric else lam


def as_spec(p) -> NormSpec:
    return p if isinstance(p, NormSpec) else NormSpec(p)


@lru_cache(maxsize=64)
def _rule(partition: Partition, M: int, coarsen: int = 1) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(left index, right index, weight) per quadrature cell.

    The midpoint value is the mean of the two indexed samples (which
    coincide when the midpoint is itself a grid point).
    """
    cell = 2 * coarsen
    lefts, rights, weights = [], [], []
    for n in range(partition.N):
        width = partition.nodes[n + 1] - partition.nodes[n]
        start = n * M
        if M % cell == 0:
            mids = start + np.arange(cell // 2, M, cell)
            lefts.append(mids)
            rights.append(mids)
            weights.append(np.full(len(mids), width * cell / M))
        else:
            step = coarsen
            if M % step:
                raise InvalidArgument(f"cannot coarsen {M} cells by {coarsen}")
            left = start + np.arange(0, M, step)
            lefts.append(left)
            rights.append(left + step)
            weights.append(np.full(len(left), width * step / M))
    out = tuple(np.concatenate(a) for a in (lefts, rights, weights))
    for a in out:
        a.setflags(write=False)
    return out


def midpoint_samples(g: GridFunction) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint values and cell weights of the quadrature rule for ``g``."""
    left, right, w = _rule(g.partition, g.M)
    return 0.5 * (g.values[left] + g.values[right]), w


def _integral_abs_pow(values: np.ndarray, weights: np.ndarray, p: float) -> float:
    a = np.abs(values)
    if p == 1.0:
        return float(np.dot(weights, a))
    if p == 2.0:
        return float(np.dot(weights, a * a))
    return float(np.dot(weights, a**p))


def abs_power_integral(values: np.ndarray, partition: Partition, M: int, p: float) -> np.ndarray | float:
    """Midpoint-rule integral of |v|^p along the last axis of ``values``."""
    left, right, w = _rule(partition, M)
    v = np.asarray(values, dtype=float)
    mids = np.abs(0.5 * (v[..., left] + v[..., right]))
    if p == 1.0:
        out = mids @ w
    elif p == 2.0:
        out = (mids * mids) @ w
    else:
        out = (mids**p) @ w
    return float(out) if np.ndim(out) == 0 else out


def lp_norm(g: GridFunction, p) -> float:
    """||g||_p by midpoint quadrature, grid max for p = inf.

    For 0 < p < 1 this returns the quasi-norm (int |g|^p)^(1/p).
    """
    p = as_spec(p).p
    if math.isinf(p):
        return float(np.max(np.abs(g.values)))
    mids, w = midpoint_samples(g)
    return _integral_abs_pow(mids, w, p) ** (1.0 / p)


def dp_metric(g: GridFunction, h: GridFunction, p: float) -> float:
    """d_p(g, h) = int |g - h|^p for 0 < p < 1."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise InvalidArgument(f"d_p is defined for 0 < p < 1, got {p}")
    _check(g, h)
    left, right, w = _rule(g.partition, g.M)
    d = g.values - h.values
    return _integral_abs_pow(0.5 * (d[left] + d[right]), w, p)


def inner_product(g: GridFunction, h: GridFunction) -> float:
    _check(g, h)
    mg, w = midpoint_samples(g)
    mh, _ = midpoint_samples(h)
    return float(np.dot(w, mg * mh))


def distance(g: GridFunction, h: GridFunction, p) -> float:
    """||g - h||_p for p >= 1 or p = inf, d_p(g, h) for 0 < p < 1."""
    spec = as_spec(p)
    _check(g, h)
    if spec.is_metric:
        return dp_metric(g, h, spec.p)
    return lp_norm(g.with_values(g.values - h.values), spec.p)


def size(g: GridFunction, p) -> float:
    """Distance from the null function in the sense of :func:`distance`."""
    spec = as_spec(p)
    if spec.is_metric:
        left, right, w = _rule(g.partition, g.M)
        return _integral_abs_pow(0.5 * (g.values[left] + g.values[right]), w, spec.p)
    return lp_norm(g, spec.p)


def quadrature_error(g: GridFunction, p) -> float:
    """Empirical error estimate: change in the size of g when the rule is coarsened 2x.

    Returns 0 for p = inf and when the grid is too coarse to coarsen.
    """
    spec = as_spec(p)
    if spec.mode == "sup":
        return 0.0
    try:
        left, right, w = _rule(g.partition, g.M, 2)
    except InvalidArgument:
        return 0.0
    coarse = _integral_abs_pow(0.5 * (g.values[left] + g.values[right]), w, spec.p)
    if not spec.is_metric:
        coarse = coarse ** (1.0 / spec.p)
    return abs(coarse - size(g, spec))


def _check(g: GridFunction, h: GridFunction) -> None:
    if not g.same_grid(h):
        raise ShapeMismatch("functions live on different grids")


# ------------------------------------------------------------ set distances


def _validate_set(A: Sequence[GridFunction], name: str) -> list[GridFunction]:
    items = list(A)
    if not items:
        raise InvalidArgument(f"function set {name} is empty")
    for g in items[1:]:
        _check(items[0], g)
    return items


def distance_matrix(A: Sequence[GridFunction], C: Sequence[GridFunction], p) -> np.ndarray:
    """D[i, j] = distance(A[i], C[j])."""
    A = _validate_set(A, "A")
    C = _validate_set(C, "C")
    _check(A[0], C[0])
    spec = as_spec(p)
    Va = np.vstack([g.values for g in A])
    Vc = np.vstack([g.values for g in C])
    if spec.mode == "sup":
        return np.vstack([np.max(np.abs(a - Vc), axis=1) for a in Va])
    left, right, w = _rule(A[0].partition, A[0].M)
    # the midpoint value is linear, so take it before differencing
    ma = 0.5 * (Va[:, left] + Va[:, right])
    mc = 0.5 * (Vc[:, left] + Vc[:, right])
    integral = np.empty((len(A), len(C)))
    for i in range(len(A)):
        d = np.abs(ma[i] - mc)
        if spec.p == 1.0:
            integral[i] = d @ w
        elif spec.p == 2.0:
            integral[i] = (d * d) @ w
        else:
            integral[i] = d**spec.p @ w
    return integral if spec.is_metric else integral ** (1.0 / spec.p)


def set_delta(A: Sequence[GridFunction], C: Sequence[GridFunction], p) -> float:
    """delta(A, C) = min over pairs of the distance."""
    return float(np.min(distance_matrix(A, C, p)))


def hausdorff(A: Sequence[GridFunction], C: Sequence[GridFunction], p) -> float:
    """max(sup_a inf_c d(a, c), sup_c inf_a d(a, c)) for finite sets."""
    D = distance_matrix(A, C, p)
    return float(max(np.max(np.min(D, axis=1)), np.max(np.min(D, axis=0))))
