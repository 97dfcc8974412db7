"""Read-Bajraktarevic operator, its fixed point (the fractal convolution) and
two independent ways of evaluating that fixed point.

For x in I_n the operator is

    (T g)(x) = f(x) + alpha_n(L_n^{-1} x) * (g - b)(L_n^{-1} x)

and f *_T b is its unique fixed point.  ``fixed_point`` iterates T on the
fine grid; ``node_values`` solves the node equations in closed form and
``pushforward_eval``/``pushforward_at`` propagate those values along IFS
addresses.  The latter two never touch the iteration and serve as its
oracle.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidArgument, ShapeMismatch, SingularNodeSystem
from .functions import (
    DEFAULT_M,
    FunctionLike,
    GridFunction,
    ScaleVector,
    make_scale_vector,
    sample_function,
    zero_function,
)
from .partition import (
    DEFAULT_ADDRESS_CAP,
    AddressGrid,
    AffineMapFamily,
    Partition,
    address_grid,
    locate_subintervals,
    make_affine_maps,
)

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000


class NonConvergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class _Pullback:
    """Per fine-grid point: subinterval index and the pulled-back location.

    The pulled-back value of a grid function u is
    ``(1 - weight) * u[lo] + weight * u[lo + 1]``; weight is identically 0
    when the grid is closed under the inverse maps.
    """

    n: np.ndarray
    t: np.ndarray
    lo: np.ndarray
    weight: np.ndarray
    interpolated: bool

    def pull(self, u: np.ndarray) -> np.ndarray:
        if not self.interpolated:
            return u[..., self.lo]
        hi = np.minimum(self.lo + 1, u.shape[-1] - 1)
        return (1.0 - self.weight) * u[..., self.lo] + self.weight * u[..., hi]


def _build_pullback(p: Partition, maps: AffineMapFamily, M: int) -> _Pullback:
    N = p.N
    size = N * M + 1
    i = np.arange(size)
    # half-open convention: index 0 -> I_1, indices ((n-1)M, nM] -> I_n
    n = np.maximum(1, (i + M - 1) // M)
    j = i - (n - 1) * M
    if p.is_uniform:
        lo = N * j
        t = p.fine_grid(M)[lo]
        return _Pullback(n, t, lo, np.zeros(size), False)
    grid = p.fine_grid(M)
    t = np.empty(size)
    for k in range(1, N + 1):
        sel = n == k
        t[sel] = maps.inverse(k, grid[sel])
    t = np.clip(t, p.lo, p.hi)
    lo = np.clip(np.searchsorted(grid, t, side="right") - 1, 0, size - 2)
    width = grid[lo + 1] - grid[lo]
    weight = np.clip((t - grid[lo]) / width, 0.0, 1.0)
    exact = weight <= 1e-12
    weight[exact] = 0.0
    near_hi = weight >= 1.0 - 1e-12
    lo[near_hi] += 1
    weight[near_hi] = 0.0
    return _Pullback(n, t, lo, weight, bool(np.any(weight > 0.0)))


@dataclass(frozen=True, eq=False)
class ConvolutionConfig:
    partition: Partition
    maps: AffineMapFamily
    scale: ScaleVector
    f: GridFunction
    b: GridFunction
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self) -> None:
        if not self.tol > 0.0:
            raise InvalidArgument(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise InvalidArgument(f"max_iter must be >= 1, got {self.max_iter}")
        for name, g in (("seed", self.f), ("base", self.b)):
            if g.partition != self.partition or g.M != self.scale.M:
                raise ShapeMismatch(f"{name} function is not on the configuration grid")
        if self.scale.partition != self.partition:
            raise ShapeMismatch("scale vector is not on the configuration grid")

    @property
    def M(self) -> int:
        return self.f.M

    @property
    def N(self) -> int:
        return self.partition.N

    @property
    def lambda_bound(self) -> float:
        return self.scale.lambda_bound

    @cached_property
    def pullback(self) -> _Pullback:
        return _build_pullback(self.partition, self.maps, self.M)

    @cached_property
    def pulled_alpha(self) -> np.ndarray:
        """alpha_n(L_n^{-1} x) at every fine-grid x (n the subinterval of x)."""
        pb = self.pullback
        if not pb.interpolated:
            return self.scale.values[pb.n - 1, pb.lo]
        out = np.empty(len(pb.n))
        for k in range(1, self.N + 1):
            sel = pb.n == k
            out[sel] = self.scale.at(k, pb.t[sel])
        return out

    @property
    def interpolated(self) -> bool:
        return self.pullback.interpolated

    def with_functions(self, f: GridFunction, b: GridFunction) -> "ConvolutionConfig":
        new = dataclasses.replace(self, f=f, b=b)
        # the pullback only depends on the grid; share it
        for attr in ("pullback", "pulled_alpha"):
            object.__setattr__(new, attr, getattr(self, attr))
        return new

    def zero(self) -> GridFunction:
        return zero_function(self.partition, self.M)


def make_config(
    f: FunctionLike,
    b: FunctionLike,
    alpha,
    partition: Partition,
    M: int = DEFAULT_M,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> ConvolutionConfig:
    """Assemble a configuration from function-likes (expressions, constants, callables)."""
    scale = alpha if isinstance(alpha, ScaleVector) else make_scale_vector(alpha, partition, M)
    return ConvolutionConfig(
        partition=partition,
        maps=make_affine_maps(partition),
        scale=scale,
        f=sample_function(f, partition, M),
        b=sample_function(b, partition, M),
        tol=tol,
        max_iter=max_iter,
    )


@dataclass
class IterationLog:
    distances: list[float] = field(default_factory=list)
    residual: float = math.nan
    sweeps: int = 0
    converged: bool = False
    interpolated: bool = False

    def ratios(self, floor: float = 10 * np.finfo(float).eps) -> list[float]:
        """Observed contraction ratios d_{k+1}/d_k for d_k above ``floor``."""
        d = self.distances
        return [d[k + 1] / d[k] for k in range(len(d) - 1) if d[k] > floor]


def _apply(cfg: ConvolutionConfig, g: np.ndarray) -> np.ndarray:
    diff = g - cfg.b.values
    return cfg.f.values + cfg.pulled_alpha * cfg.pullback.pull(diff)


def apply_rb_operator(cfg: ConvolutionConfig, g: GridFunction) -> GridFunction:
    """One application of T; check ``cfg.interpolated`` for the pullback mode."""
    if not g.same_grid(cfg.f):
        raise ShapeMismatch("argument is not on the configuration grid")
    return GridFunction(cfg.partition, cfg.M, _apply(cfg, g.values))


def self_referential_residual(cfg: ConvolutionConfig, g: GridFunction) -> float:
    """sup over the grid of |g - T g|."""
    return float(np.max(np.abs(g.values - _apply(cfg, g.values))))


def fixed_point(cfg: ConvolutionConfig) -> tuple[GridFunction, IterationLog]:
    """Banach iteration g_{k+1} = T g_k from g_0 = f.

    ``IterationLog.distances[k]`` is sup|g_{k+1} - g_k|.
    Stops once d_k * Lambda / (1 - Lambda) <= tol, which bounds the sup
    distance to the true grid fixed point by tol.  On exhaustion of
    ``max_iter`` the last iterate is returned with ``converged=False``.
    """
    out = IterationLog(interpolated=cfg.interpolated)
    g = _iterate(cfg, cfg.f.values, cfg.b.values, out)
    result = GridFunction(cfg.partition, cfg.M, g)
    out.residual = self_referential_residual(cfg, result)
    if not out.converged:
        log.warning("fixed point iteration stopped after %d sweeps, last step %.3g", out.sweeps, out.distances[-1])
    return result, out


def _iterate(cfg: ConvolutionConfig, f: np.ndarray, b: np.ndarray, out: IterationLog) -> np.ndarray:
    """Increment-form Banach iteration; rows of 2-D inputs are solved together."""
    lam = cfg.lambda_bound
    threshold = math.inf if lam == 0.0 else cfg.tol * (1.0 - lam) / lam
    alpha = cfg.pulled_alpha
    pull = cfg.pullback.pull
    g = f
    # T is affine, so the increments obey step_{k+1} = alpha * pull(step_k);
    # propagating them directly avoids cancellation in g_{k+1} - g_k
    step = alpha * pull(f - b)
    for _ in range(cfg.max_iter):
        d = float(np.max(np.abs(step), initial=0.0))
        out.distances.append(d)
        out.sweeps += 1
        g = g + step
        if d <= threshold:
            out.converged = True
            break
        step = alpha * pull(step)
    return g


def convolve(f: GridFunction, b: GridFunction, cfg: ConvolutionConfig) -> GridFunction:
    """f *_T b for the partition and scale vector of ``cfg``."""
    g, info = fixed_point(cfg.with_functions(f, b))
    if not info.converged:
        warnings.warn(f"fractal convolution did not converge in {info.sweeps} sweeps", NonConvergenceWarning)
    return g


def convolve_many(seeds, bases, cfg: ConvolutionConfig) -> np.ndarray:
    """Rows of ``seeds`` convolved with the matching rows of ``bases``.

    Both are (k, N*M+1) arrays (or broadcast to that); the result has the
    same shape.  Every row meets the tolerance of :func:`fixed_point`.
    """
    F = np.asarray(seeds, dtype=float)
    B = np.asarray(bases, dtype=float)
    F, B = np.broadcast_arrays(F, B)
    if F.shape[-1] != cfg.f.values.shape[0]:
        raise ShapeMismatch("rows are not on the configuration grid")
    info = IterationLog(interpolated=cfg.interpolated)
    g = _iterate(cfg, F, B, info)
    if not info.converged:
        warnings.warn(f"fractal convolution did not converge in {info.sweeps} sweeps", NonConvergenceWarning)
    return g


def left_null(b: GridFunction, cfg: ConvolutionConfig) -> GridFunction:
    """0 *_T b."""
    return convolve(cfg.zero(), b, cfg)


def right_null(f: GridFunction, cfg: ConvolutionConfig) -> GridFunction:
    """f *_T 0."""
    return convolve(f, cfg.zero(), cfg)


def iterate_left_null(b: GridFunction, cfg: ConvolutionConfig, k: int) -> list[GridFunction]:
    """[b, 0*b, 0*(0*b), ...] with k applications of the left-null operator."""
    if k < 0:
        raise InvalidArgument(f"k must be >= 0, got {k}")
    seq = [b]
    for _ in range(k):
        seq.append(left_null(seq[-1], cfg))
    return seq


# ------------------------------------------------------- closed-form nodes


def node_values(cfg: ConvolutionConfig) -> np.ndarray:
    """Exact values of f *_T b at x_0, ..., x_N.

    x_0 is fixed by L_1 and x_N by L_N, giving two scalar fixed-point
    equations; every interior node x_n is the image of x_N under L_n.
    """
    N = cfg.N
    alpha = cfg.scale.values
    fn = cfg.f.node_values()
    bn = cfg.b.node_values()
    a_first = alpha[0, 0]
    a_last = alpha[N - 1, -1]
    for a in (a_first, a_last):
        if abs(1.0 - a) < 1e-12:
            raise SingularNodeSystem("1 - alpha at an endpoint vanishes")
    out = np.empty(N + 1)
    out[N] = (fn[N] - a_last * bn[N]) / (1.0 - a_last)
    out[0] = (fn[0] - a_first * bn[0]) / (1.0 - a_first)
    for n in range(1, N):
        out[n] = fn[n] + alpha[n - 1, -1] * (out[N] - bn[N])
    return out


# ------------------------------------------------------- push-forward oracle


def _default_seed_error(cfg: ConvolutionConfig) -> float:
    lam = cfg.lambda_bound
    return lam / (1.0 - lam) * float(np.max(np.abs(cfg.f.values - cfg.b.values)))


@dataclass(frozen=True)
class PushforwardResult:
    grid: AddressGrid
    values: np.ndarray
    valid: np.ndarray
    error_bound: Optional[float]
    interpolated: bool

    @property
    def points(self) -> np.ndarray:
        return self.grid.points


def pushforward_eval(
    cfg: ConvolutionConfig,
    depth: int,
    base: Sequence[float],
    base_values: Optional[Sequence[float]] = None,
    seed_error: Optional[float] = None,
    cap: int = DEFAULT_ADDRESS_CAP,
) -> PushforwardResult:
    """Evaluate the attractor at every depth-``depth`` address of ``base``.

    Uses f~(L_n t) = f(L_n t) + alpha_n(t) (f~(t) - b(t)).  Without
    ``base_values`` the seeds are f(base), whose error is at most
    Lambda/(1-Lambda) sup|f-b|; every level multiplies the error by Lambda.
    Points whose address passes through L_n(x_0) with n >= 2 land on the node
    x_{n-1}, which belongs to I_{n-1}; their value is the one-sided limit
    from the right and they are marked invalid.
    """
    if depth < 1:
        raise InvalidArgument(f"depth must be >= 1, got {depth}")
    ag = address_grid(cfg.maps, depth, base, cap=cap)
    if base_values is None:
        seeds = cfg.f.at(ag.base)
        if seed_error is None:
            seed_error = _default_seed_error(cfg)
    else:
        seeds = np.asarray(base_values, dtype=float)
        if seeds.shape != ag.base.shape:
            raise ShapeMismatch("base_values must match base")
    t = ag.base[ag.base_index]
    v = seeds[ag.base_index]
    valid = np.ones(len(t), dtype=bool)
    lo = cfg.partition.lo
    for level in range(depth - 1, -1, -1):
        n = ag.addresses[:, level]
        valid &= ~((t == lo) & (n >= 2))
        x = np.empty_like(t)
        a = np.empty_like(t)
        for k in range(1, cfg.N + 1):
            sel = n == k
            x[sel] = cfg.maps.forward(k, t[sel])
            a[sel] = cfg.scale.at(k, t[sel])
        v = cfg.f.at(x) + a * (v - cfg.b.at(t))
        t = x
    bound = None if seed_error is None else cfg.lambda_bound**depth * seed_error
    interp = cfg.f.source is None or cfg.b.source is None or (cfg.scale.sources is None and cfg.scale.constant is None)
    return PushforwardResult(ag, v, valid, bound, interp)


def pushforward_at(
    cfg: ConvolutionConfig,
    xs,
    depth: int,
    node_seeds: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Attractor values at chosen points via their own backward address.

    Each x is pulled back along its subinterval address for up to ``depth``
    steps.  An orbit that reaches a partition node is seeded with the exact
    node value; otherwise it is seeded with f at the final point.  The
    values are then pushed forward along the recorded address.  Returns the
    values and a per-point error bound (0 for node-seeded orbits, up to
    roundoff).
    """
    p = cfg.partition
    nodes = np.asarray(p.nodes)
    snap = 1e-12 * p.length
    x = np.asarray(xs, dtype=float).copy()
    count = len(x)
    seeded = np.zeros(count, dtype=bool)
    seed_vals = np.zeros(count)
    exact_nodes = node_values(cfg) if node_seeds else None
    steps: list[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = []
    for _ in range(depth + 1):
        if node_seeds:
            k = np.clip(np.searchsorted(nodes, x), 0, p.N)
            k_prev = np.maximum(k - 1, 0)
            near = np.where(np.abs(nodes[k] - x) <= np.abs(nodes[k_prev] - x), k, k_prev)
            hit = ~seeded & (np.abs(nodes[near] - x) <= snap)
            seed_vals[hit] = exact_nodes[near[hit]]
            seeded |= hit
        if len(steps) == depth or seeded.all():
            break
        active = ~seeded
        n = locate_subintervals(p, np.clip(x, p.lo, p.hi))
        t = x.copy()
        for k_ in range(1, p.N + 1):
            sel = active & (n == k_)
            t[sel] = np.clip(cfg.maps.inverse(k_, x[sel]), p.lo, p.hi)
        steps.append((active, n, t, x.copy()))
        x = t
    unseeded = ~seeded
    seed_vals[unseeded] = cfg.f.at(x[unseeded])
    err = np.zeros(count)
    # unseeded orbits went through every recorded step
    err[unseeded] = cfg.lambda_bound ** len(steps) * _default_seed_error(cfg)
    v = seed_vals
    for active, n, t, xk in reversed(steps):
        a = np.empty(count)
        for k_ in range(1, p.N + 1):
            sel = active & (n == k_)
            a[sel] = cfg.scale.at(k_, t[sel])
        pushed = cfg.f.at(xk[active]) + a[active] * (v[active] - cfg.b.at(t[active]))
        v = v.copy()
        v[active] = pushed
    return v, err


@dataclass(frozen=True)
class OrbitIterates:
    """Left-null iterates u_0 = b, u_k = 0 * u_{k-1} along backward orbits.

    ``values[k]`` holds u_k at the requested points and ``pulled[k]`` holds
    u_k at their first pullbacks ``points1``; ``coef`` is alpha_n at those
    pullbacks, so values[k] = coef * (pulled[k] - pulled[k-1]) for k >= 1.
    """

    points: np.ndarray
    points1: np.ndarray
    coef: np.ndarray
    values: np.ndarray
    pulled: np.ndarray
    depth: int
    truncation_bound: float


def orbit_depth(lam: float, floor: float = 1e-17, cap: int = 400) -> int:
    """Orbit length after which Lambda^depth drops below ``floor``."""
    if lam <= 0.0:
        return 1
    return int(min(cap, max(1, math.ceil(math.log(floor) / math.log(lam)))))


def iterate_left_null_at(cfg: ConvolutionConfig, xs, k: int, depth: Optional[int] = None) -> OrbitIterates:
    """Evaluate the iterates of b -> 0 * b at arbitrary points without a grid.

    Every iterate at x depends only on the iterates along the single backward
    orbit x -> L_n^{-1} x -> ..., so all k iterates are obtained from one
    orbit of length ``depth`` per point, truncated with zeros.  The
    truncation error of u_j is at most Lambda^depth * sup|b| * 2^j.  Points
    that are not IFS-rational (e.g. Gauss nodes) never meet the partition
    nodes, unlike grid points, whose orbits end on node cycles.
    """
    if k < 0:
        raise InvalidArgument(f"k must be >= 0, got {k}")
    p = cfg.partition
    lam = cfg.lambda_bound
    depth = orbit_depth(lam) if depth is None else int(depth)
    if depth < 1:
        raise InvalidArgument("depth must be >= 1")
    x = np.asarray(xs, dtype=float)
    if np.any(x < p.lo) or np.any(x > p.hi):
        raise InvalidArgument("evaluation points must lie in the interval")
    ts = [x]
    coefs = [np.zeros_like(x)]
    for _ in range(depth):
        cur = ts[-1]
        n = locate_subintervals(p, cur)
        t = np.empty_like(cur)
        c = np.empty_like(cur)
        for m in range(1, p.N + 1):
            sel = n == m
            t[sel] = np.clip(cfg.maps.inverse(m, cur[sel]), p.lo, p.hi)
            c[sel] = cfg.scale.at(m, t[sel])
        ts.append(t)
        coefs.append(c)
    T = np.vstack(ts)
    C = np.vstack(coefs)
    prev = np.vstack([cfg.b.at(t) for t in ts])
    vals, pulled = [prev[0]], [prev[1]]
    for _ in range(k):
        cur = np.zeros_like(prev)
        for d in range(depth - 1, -1, -1):
            cur[d] = C[d + 1] * (cur[d + 1] - prev[d + 1])
        vals.append(cur[0])
        pulled.append(cur[1])
        prev = cur
    sup_b = float(np.max(np.abs(cfg.b.values)))
    return OrbitIterates(x, T[1], C[1], np.vstack(vals), np.vstack(pulled), depth, lam**depth * sup_b * 2.0**k)
