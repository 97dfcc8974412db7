"""Fractal families built from orthonormal systems, Gram spectra and frame bounds.

Convolving an orthonormal family member-wise with the null function gives
the fractal systems 0*b_m, f_m*0 and b_m - 0*b_m.  Their Bessel and Riesz
behaviour is diagnosed on finite sections through the spectrum of the Gram
matrix, computed with a hand-written cyclic Jacobi eigensolver.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .engine import DEFAULT_MAX_ITER, ConvolutionConfig, fixed_point, make_config
from .errors import ContractivityError, InvalidArgument, ShapeMismatch
from .functions import DEFAULT_M, GridFunction, ScaleVector, constant_scale, sample_function
from .metrics import midpoint_samples
from .partition import Partition, make_uniform_partition

SIDES = ("left-null", "right-null", "difference")


@dataclass(frozen=True, eq=False)
class FunctionFamily:
    """An ordered family of grid functions on one grid.

    ``schedule`` holds the scale bound used for each member when the family
    came out of :func:`convolve_family`, otherwise None.
    """

    members: tuple[GridFunction, ...]
    provenance: str = "custom"
    schedule: Optional[tuple[float, ...]] = None

    def __post_init__(self) -> None:
        members = tuple(self.members)
        for g in members[1:]:
            if not g.same_grid(members[0]):
                raise ShapeMismatch("family members live on different grids")
        if self.schedule is not None and len(self.schedule) != len(members):
            raise InvalidArgument("schedule length differs from family size")
        object.__setattr__(self, "members", members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]

    @property
    def partition(self) -> Partition:
        return self._first().partition

    @property
    def M(self) -> int:
        return self._first().M

    def _first(self) -> GridFunction:
        if not self.members:
            raise InvalidArgument("family is empty")
        return self.members[0]

    def matrix(self) -> np.ndarray:
        """Member values stacked row-wise."""
        return np.vstack([g.values for g in self.members])


def trig_basis(
    m: int, interval=(0.0, 3.0), N: int = 6, M: int = DEFAULT_M, partition: Optional[Partition] = None
) -> FunctionFamily:
    """First m members of the normalized trigonometric system on [lo, hi].

    Order: 1/sqrt(L), then sqrt(2/L) cos(2 pi k t), sqrt(2/L) sin(2 pi k t) for
    k = 1, 2, ... with t = (x - lo)/L.
    """
    if m < 1:
        raise InvalidArgument(f"family size must be >= 1, got {m}")
    part = partition if partition is not None else make_uniform_partition(list(interval), N)
    lo, hi = part.nodes[0], part.nodes[-1]
    L = hi - lo
    members = []
    for j in range(m):
        if j == 0:
            c = 1.0 / math.sqrt(L)
            fn = lambda x, c=c: np.full(np.shape(x), c)  # noqa: E731
        else:
            k = (j + 1) // 2
            trig = np.cos if j % 2 else np.sin
            c = math.sqrt(2.0 / L)
            fn = lambda x, c=c, k=k, trig=trig: c * trig(2.0 * math.pi * k * (np.asarray(x) - lo) / L)  # noqa: E731
        members.append(sample_function(fn, part, M))
    return FunctionFamily(tuple(members), "trig")


def _member_scales(fam: FunctionFamily, alpha, schedule) -> list[ScaleVector]:
    part, M = fam.partition, fam.M
    if schedule is not None:
        schedule = [float(v) for v in schedule]
        if len(schedule) != len(fam):
            raise InvalidArgument(f"schedule has {len(schedule)} entries for {len(fam)} members")
        bad = [v for v in schedule if not 0.0 <= v < 1.0]
        if bad:
            raise ContractivityError(f"schedule entries must lie in [0, 1), got {bad[0]}")
        return [constant_scale(v, part, M) for v in schedule]
    if isinstance(alpha, ConvolutionConfig):
        alpha = alpha.scale
    scale = make_config(0.0, 0.0, alpha, part, M).scale
    return [scale] * len(fam)


def convolve_family(
    fam: FunctionFamily,
    side: str,
    alpha=0.0,
    schedule: Optional[Sequence[float]] = None,
    tol: float = 1e-12,
    max_iter: int = DEFAULT_MAX_ITER,
) -> FunctionFamily:
    """Member-wise 0*b_m (left-null), f_m*0 (right-null) or b_m - 0*b_m (difference).

    Without ``schedule`` every member uses the scale functions ``alpha``
    (anything :func:`make_config` accepts, a ScaleVector or a configuration).
    With ``schedule`` member m uses the constants alpha_n = Lambda_m.
    """
    if side not in SIDES:
        raise InvalidArgument(f"side must be one of {SIDES}, got {side!r}")
    if not len(fam):
        return FunctionFamily((), f"{fam.provenance}/{side}", ())
    scales = _member_scales(fam, alpha, schedule)
    zero = fam[0].with_values(np.zeros(len(fam[0])))
    base_cfg = make_config(zero, zero, scales[0], fam.partition, fam.M, tol=tol, max_iter=max_iter)
    out = []
    for g, scale in zip(fam, scales):
        cfg = base_cfg if scale is scales[0] else dataclasses.replace(base_cfg, scale=scale)
        if side == "right-null":
            u, _ = fixed_point(cfg.with_functions(g, zero))
        else:
            u, _ = fixed_point(cfg.with_functions(zero, g))
            if side == "difference":
                u = u.with_values(g.values - u.values)
        out.append(u)
    return FunctionFamily(tuple(out), f"{fam.provenance}/{side}", tuple(s.lambda_bound for s in scales))


def gram_matrix(fam: FunctionFamily) -> np.ndarray:
    """G[i, j] = <g_i, g_j> with the quadrature of :func:`metrics.inner_product`."""
    if not len(fam):
        raise InvalidArgument("family is empty")
    mids = []
    for g in fam:
        v, w = midpoint_samples(g)
        mids.append(v)
    V = np.vstack(mids)
    G = (V * w) @ V.T
    return 0.5 * (G + G.T)


def symmetric_eigenvalues(G, rel_tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.

    Sweeps stop once the off-diagonal Frobenius mass is at most
    ``rel_tol`` times the Frobenius norm of G.
    """
    A = np.array(G, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidArgument("matrix entries must be finite")
    n = A.shape[0]
    scale = float(np.linalg.norm(A))
    if np.max(np.abs(A - A.T), initial=0.0) > 1e-12 * max(scale, 1.0):
        raise InvalidArgument("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    target = rel_tol * scale
    eye = np.eye(n, dtype=bool)

    def off() -> float:
        return float(np.linalg.norm(A[~eye]))

    for _ in range(max_sweeps):
        if off() <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
    else:
        if off() > target:
            raise ArithmeticError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    return np.sort(np.diag(A))


def riesz_bounds(fam: FunctionFamily) -> tuple[float, float]:
    """(smallest, largest) Gram eigenvalue: finite-section Riesz/Bessel bounds."""
    ev = symmetric_eigenvalues(gram_matrix(fam))
    return float(ev[0]), float(ev[-1])


def spectral_envelope(side: str, lam: float, constant_modulus: bool = True) -> tuple[float, float]:
    """Interval that must contain the Gram spectrum of a convolved orthonormal family.

    The left-null lower end needs alpha_n = +-Lambda; with
    ``constant_modulus=False`` only the Bessel (upper) bound is asserted.
    """
    if side not in SIDES:
        raise InvalidArgument(f"side must be one of {SIDES}, got {side!r}")
    if not 0.0 <= lam < 1.0:
        raise ContractivityError(f"Lambda must lie in [0, 1), got {lam}")
    if side == "left-null":
        lower = (lam / (1 + lam)) ** 2 if constant_modulus else 0.0
        return lower, (lam / (1 - lam)) ** 2
    return 1.0 / (1 + lam) ** 2, 1.0 / (1 - lam) ** 2


@dataclass
class SpectrumReport:
    size: int
    side: Optional[str]
    lambda_bound: Optional[float]
    lower: float
    upper: float
    envelope: Optional[tuple[float, float]]
    tolerance: float
    spectrum: list = field(repr=False, default_factory=list)

    @property
    def within_envelope(self) -> Optional[bool]:
        if self.envelope is None:
            return None
        lo, hi = self.envelope
        return self.lower >= lo - self.tolerance and self.upper <= hi + self.tolerance

    def to_dict(self) -> dict:
        return asdict(self) | {"within_envelope": self.within_envelope}


def spectrum_report(
    fam: FunctionFamily,
    side: Optional[str] = None,
    lam: Optional[float] = None,
    tolerance: float = 1e-3,
    constant_modulus: bool = True,
) -> SpectrumReport:
    """Gram spectrum of ``fam`` judged against the envelope for ``side`` and ``lam``."""
    ev = symmetric_eigenvalues(gram_matrix(fam))
    env = None
    if side is not None and lam is not None:
        env = spectral_envelope(side, lam, constant_modulus)
    return SpectrumReport(len(fam), side, lam, float(ev[0]), float(ev[-1]), env, tolerance, [float(v) for v in ev])


@dataclass
class PerturbationReport:
    R: float
    empirical: float
    partial_sums: list
    frame_lower: float
    divergent: bool

    @property
    def empirical_within_R(self) -> bool:
        return self.empirical <= self.R * (1 + 1e-9) + 1e-12

    def to_dict(self) -> dict:
        return asdict(self) | {"empirical_within_R": self.empirical_within_R}


def perturbation_R(
    fam: FunctionFamily, schedule: Sequence[float], A: float = 1.0, tol: float = 1e-12
) -> PerturbationReport:
    """R = sum_m (Lambda_m / (1 - Lambda_m))^2 ||f_m||^2 for the family f_m*0.

    Also returns the measured sum of ||f_m*0 - f_m||^2, which the member-wise
    contraction bound keeps below R.  ``divergent`` is set when the partial
    sums exceed the lower frame bound ``A``.
    """
    schedule = [float(v) for v in schedule]
    if len(schedule) != len(fam):
        raise InvalidArgument(f"schedule has {len(schedule)} entries for {len(fam)} members")
    if any(not 0.0 <= v < 1.0 for v in schedule):
        raise ContractivityError("schedule entries must lie in [0, 1)")
    if not len(fam):
        return PerturbationReport(0.0, 0.0, [], A, False)
    norms2 = np.diag(gram_matrix(fam))
    terms = [(v / (1 - v)) ** 2 * n2 for v, n2 in zip(schedule, norms2)]
    partial = np.cumsum(terms)
    conv = convolve_family(fam, "right-null", schedule=schedule, tol=tol)
    diff = FunctionFamily(tuple(u.with_values(u.values - g.values) for u, g in zip(conv, fam)))
    empirical = float(np.sum(np.diag(gram_matrix(diff))))
    return PerturbationReport(
        float(partial[-1]), empirical, [float(s) for s in partial], float(A), bool(np.any(partial > A))
    )


@dataclass(frozen=True)
class FrameReport:
    A: float
    B: float
    R: float
    A_prime: float
    B_prime: float
    feasible: bool

    def to_dict(self) -> dict:
        return asdict(self)


def frame_perturbation_bounds(A: float, B: float, R: float) -> FrameReport:
    """Perturbed frame bounds A(1 - sqrt(R/A))^2 and B(1 + sqrt(R/B))^2.

    Feasible iff R < A; otherwise A' is reported as 0.
    """
    A, B, R = float(A), float(B), float(R)
    if not (A > 0 and B > 0):
        raise InvalidArgument(f"frame bounds must be positive, got A={A}, B={B}")
    if A > B:
        raise InvalidArgument(f"lower frame bound exceeds upper: A={A}, B={B}")
    if not R >= 0:
        raise InvalidArgument(f"R must be nonnegative, got {R}")
    feasible = R < A
    a_prime = A * (1 - math.sqrt(R / A)) ** 2 if feasible else 0.0
    b_prime = B * (1 + math.sqrt(R / B)) ** 2
    return FrameReport(A, B, R, a_prime, b_prime, feasible)


def lambda_schedule(kind: str, param: float, count: int) -> list[float]:
    """Per-member scale bounds: ``"c/m"`` gives c/m for m = 1..count, ``"const"`` repeats param."""
    if count < 0:
        raise InvalidArgument(f"count must be >= 0, got {count}")
    param = float(param)
    if kind == "c/m":
        out = [param / m for m in range(1, count + 1)]
    elif kind in ("const", "constant"):
        out = [param] * count
    else:
        raise InvalidArgument(f"unknown schedule kind {kind!r}")
    for v in out:
        if not 0.0 <= v < 1.0:
            raise ContractivityError(f"schedule entry {v} outside [0, 1)")
    return out


def parse_schedule(text: str, count: int) -> list[float]:
    """Parse ``c/m:C`` or ``const:L`` into a schedule of length ``count``."""
    kind, sep, value = text.partition(":")
    if not sep:
        raise InvalidArgument(f"schedule must look like 'c/m:C' or 'const:L', got {text!r}")
    try:
        param = float(value)
    except ValueError:
        raise InvalidArgument(f"bad schedule parameter {value!r}") from None
    return lambda_schedule(kind.strip(), param, count)


def union_family(a: FunctionFamily, b: FunctionFamily) -> FunctionFamily:
    """Concatenation of two families on the same grid."""
    if len(a) and len(b) and not a[0].same_grid(b[0]):
        raise ShapeMismatch("families live on different grids")
    if not len(b):
        return a
    if not len(a):
        return b
    sched = None
    if a.schedule is not None and b.schedule is not None:
        sched = a.schedule + b.schedule
    return FunctionFamily(a.members + b.members, f"{a.provenance}+{b.provenance}", sched)
