"""Machine checks of the convolution inequalities over randomized ensembles.

Every check compares an attained value ``lhs`` with a bound ``rhs`` and
records the slack ``rhs - lhs``.  A trial is a violation when ``lhs``
exceeds ``rhs`` by more than the check tolerance, which is the larger of
an engine margin (ten times the engine tolerance, carried into the norm)
and a quadrature error estimate.

The quadrature estimate for the single-attractor inequalities is derived
from the *change-of-variables defect* of the discrete rule.  On the
continuum, an attractor u = s * c satisfies

    ||u - s||_p^p = sum_n a_n * int |alpha_n (u - c)|^p,

with a_n = |I_n| / |I|.  Every inequality in this module follows from that
identity, the bound |alpha_n| <= Lambda and the triangle inequality.  The
discrete midpoint rule satisfies the triangle inequality exactly, so the
only way a discrete check can fail is through the discrepancy between the
two sides of the identity, which is computed per trial and multiplied by
the constant of the inequality chain.  It is O(M^-beta) with beta
depending on the roughness of the attractor.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .engine import (
    DEFAULT_MAX_ITER,
    ConvolutionConfig,
    convolve,
    convolve_many,
    fixed_point,
    iterate_left_null_at,
    make_config,
    node_values,
)
from .errors import InvalidArgument
from .functions import DEFAULT_M, GridFunction, make_scale_vector, sample_function
from .metrics import NormSpec, abs_power_integral, as_spec, distance, hausdorff, quadrature_error, set_delta, size
from .partition import Partition, make_uniform_partition

SUITES = ("contraction", "lipschitz", "partial-null", "sets", "interpolation", "membership", "lambda-study")

ALPHA_KINDS = ("signed", "constant", "smooth")


# ----------------------------------------------------------------- configs


@dataclass(frozen=True)
class TrialConfig:
    """Ensemble description.  Each level in ``lambdas`` gets ``trials`` trials."""

    seed: int = 0
    trials: int = 100
    ps: tuple = (1.0, 2.0, math.inf)
    interval: tuple = (0.0, 3.0)
    N: int = 6
    M: int = DEFAULT_M
    lambdas: tuple = (0.1, 0.375, 0.49)
    degree: int = 8
    tol: float = 1e-13
    max_iter: int = DEFAULT_MAX_ITER
    max_M: int = 2**16
    alpha_kinds: tuple = ALPHA_KINDS

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise InvalidArgument(f"ensemble size must be >= 1, got {self.trials}")
        if not self.lambdas:
            raise InvalidArgument("at least one Lambda level is required")
        for lam in self.lambdas:
            if not 0.0 <= lam < 1.0:
                raise InvalidArgument(f"Lambda levels must lie in [0, 1), got {lam}")
        for p in self.ps:
            as_spec(p)
        if self.degree < 0:
            raise InvalidArgument("degree must be >= 0")
        if self.M < 1 or self.max_M < self.M:
            raise InvalidArgument("need 1 <= M <= max_M")
        for k in self.alpha_kinds:
            if k not in ALPHA_KINDS:
                raise InvalidArgument(f"unknown scale-function kind {k!r}")
        object.__setattr__(self, "ps", tuple(float(p) for p in self.ps))
        object.__setattr__(self, "lambdas", tuple(float(x) for x in self.lambdas))
        object.__setattr__(self, "interval", tuple(float(x) for x in self.interval))

    @property
    def partition(self) -> Partition:
        return make_uniform_partition(self.interval, self.N)

    def rng(self, *key: int) -> np.random.Generator:
        """Generator for one trial; independent of the order trials are run in."""
        return np.random.default_rng([self.seed, *key])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ps"] = [_json_float(p) for p in self.ps]
        return d


# ----------------------------------------------------------------- reports


def _json_float(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


@dataclass
class CheckStats:
    name: str
    trials: int = 0
    worst_slack: float = math.inf
    worst_relative_excess: float = -math.inf
    violations: int = 0
    tolerance: float = 0.0

    def record(self, lhs: float, rhs: float, tolerance: float, scale: float = 1.0) -> bool:
        """Add one trial; returns True when it is a violation."""
        slack = rhs - lhs
        self.trials += 1
        self.worst_slack = min(self.worst_slack, slack)
        scale = scale if scale > 0.0 else 1.0
        self.worst_relative_excess = max(self.worst_relative_excess, -slack / scale)
        self.tolerance = max(self.tolerance, tolerance)
        # equality-type chains leave lhs and rhs a few ulps apart
        rounding = 16 * np.finfo(float).eps * (abs(lhs) + abs(rhs))
        bad = not (slack >= -(tolerance + rounding))
        self.violations += bad
        return bad

    def merge(self, other: "CheckStats") -> "CheckStats":
        return CheckStats(
            self.name,
            self.trials + other.trials,
            min(self.worst_slack, other.worst_slack),
            max(self.worst_relative_excess, other.worst_relative_excess),
            self.violations + other.violations,
            max(self.tolerance, other.tolerance),
        )

    def to_dict(self) -> dict:
        return {k: _json_float(v) if isinstance(v, float) else v for k, v in asdict(self).items()}


@dataclass
class SuiteReport:
    suite: str
    config: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)
    seconds: float = 0.0

    def check(self, name: str) -> CheckStats:
        if name not in self.checks:
            self.checks[name] = CheckStats(name)
        return self.checks[name]

    @property
    def violations(self) -> int:
        return sum(c.violations for c in self.checks.values())

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def merge(self, other: "SuiteReport") -> "SuiteReport":
        out = SuiteReport(self.suite, dict(self.config), {}, dict(self.notes), self.seconds + other.seconds)
        for name in list(self.checks) + [n for n in other.checks if n not in self.checks]:
            a, b = self.checks.get(name), other.checks.get(name)
            out.checks[name] = a.merge(b) if a and b else (a or b)
        for k, v in other.notes.items():
            out.notes.setdefault(k, v)
        return out

    def to_dict(self, timing: bool = True) -> dict:
        """JSON-ready form; ``timing=False`` drops wall-clock data so equal runs give equal output."""
        out = {
            "suite": self.suite,
            "passed": self.passed,
            "violations": self.violations,
            "seconds": round(self.seconds, 3),
            "config": self.config,
            "checks": [c.to_dict() for c in self.checks.values()],
            "notes": _jsonable(self.notes),
        }
        if not timing:
            del out["seconds"]
        return out

    def to_json(self, timing: bool = True, **kw) -> str:
        return json.dumps(self.to_dict(timing), indent=2, **kw)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (float, np.floating)):
        return _json_float(float(x))
    if isinstance(x, np.integer):
        return int(x)
    return x


# -------------------------------------------------------- random ensembles


@dataclass(frozen=True)
class RandomTrig:
    """sum_k a_k cos(2 pi k (x - lo)/L) + c_k sin(2 pi k (x - lo)/L)."""

    cos_coef: tuple
    sin_coef: tuple
    interval: tuple

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.interval
        theta = 2.0 * np.pi * (x - lo) / (hi - lo)
        z1 = np.exp(1j * theta)
        z = np.ones_like(z1)
        out = np.zeros_like(x)
        # powers by recurrence: one complex multiply per degree
        for a, c in zip(self.cos_coef, self.sin_coef):
            out = out + a * z.real + c * z.imag
            z = z * z1
        return out


@dataclass(frozen=True)
class RandomPiecewiseLinear:
    knots: tuple
    values: tuple

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.knots, self.values)


def random_trig(rng: np.random.Generator, degree: int, interval) -> RandomTrig:
    d = int(rng.integers(0, degree + 1))
    return RandomTrig(
        tuple(rng.uniform(-1, 1, d + 1)), (0.0,) + tuple(rng.uniform(-1, 1, d)), tuple(interval)
    )


def random_piecewise_linear(rng: np.random.Generator, partition: Partition) -> RandomPiecewiseLinear:
    """N + 1 knots: both endpoints plus N - 1 uniformly placed interior knots."""
    interior = np.sort(rng.uniform(partition.lo, partition.hi, partition.N - 1))
    knots = np.concatenate([[partition.lo], interior, [partition.hi]])
    return RandomPiecewiseLinear(tuple(knots), tuple(rng.uniform(-1, 1, partition.N + 1)))


def random_function(rng: np.random.Generator, tc: TrialConfig):
    if rng.random() < 0.5:
        return random_trig(rng, tc.degree, tc.interval)
    return random_piecewise_linear(rng, tc.partition)


@dataclass(frozen=True)
class _Cosine:
    level: float
    freq: float
    phase: float
    lo: float
    length: float

    def __call__(self, x):
        t = (np.asarray(x, dtype=float) - self.lo) / self.length
        return self.level * np.cos(self.freq * np.pi * t + self.phase)


def random_alphas(rng: np.random.Generator, kind: str, lam: float, partition: Partition) -> list:
    """N scale functions whose sup is Lambda (on the continuum).

    ``signed``: alpha_n = +-Lambda.  ``constant``: alpha_n = Lambda u_n with
    u_n in [-1, 1] and one |u_n| = 1.  ``smooth``: Lambda cos(k pi t + phi)
    with k >= 1, which attains +-Lambda somewhere on I.
    """
    N = partition.N
    if kind == "signed":
        return [float(lam * s) for s in rng.choice([-1.0, 1.0], N)]
    if kind == "constant":
        u = rng.uniform(-1, 1, N)
        u[rng.integers(N)] = rng.choice([-1.0, 1.0])
        return [float(lam * v) for v in u]
    if kind == "smooth":
        return [
            _Cosine(lam, float(rng.integers(1, 4)), float(rng.uniform(0, 2 * np.pi)), partition.lo, partition.length)
            for _ in range(N)
        ]
    raise InvalidArgument(f"unknown scale-function kind {kind!r}")


# ------------------------------------------------------ tolerance helpers


def engine_margin(spec: NormSpec, tol: float, length: float) -> float:
    """Ten engine tolerances measured in the norm (or metric) of ``spec``."""
    e = 10.0 * tol
    if spec.mode == "sup":
        return e
    if spec.is_metric:
        return length * e**spec.p
    return e * length ** (1.0 / spec.p)


def change_of_variables_defect(cfg: ConvolutionConfig, u: np.ndarray, s: np.ndarray, c: np.ndarray, spec: NormSpec) -> float:
    """||u - s|| minus (sum_n a_n ||alpha_n (u - c)||^p)^(1/p) under the discrete rule.

    Zero on the continuum for an exact attractor u = s * c.  Signed; metric
    mode compares the p-th powers directly.
    """
    spec = as_spec(spec)
    e = np.asarray(u) - np.asarray(c)
    alphas = cfg.scale.values
    if spec.mode == "sup":
        return float(np.max(np.abs(np.asarray(u) - np.asarray(s))) - np.max(np.abs(alphas * e)))
    part = cfg.partition
    a = np.diff(np.asarray(part.nodes)) / part.length
    p = spec.p
    lhs = abs_power_integral(np.asarray(u) - np.asarray(s), part, cfg.M, p)
    rhs = float(np.dot(a, abs_power_integral(alphas * e, part, cfg.M, p)))
    if spec.is_metric:
        return lhs - rhs
    return lhs ** (1.0 / p) - rhs ** (1.0 / p)


def _pos(x: float) -> float:
    return x if x > 0.0 else 0.0


def _size_arr(values: np.ndarray, cfg: ConvolutionConfig, spec: NormSpec) -> float:
    spec = as_spec(spec)
    if spec.mode == "sup":
        return float(np.max(np.abs(values)))
    v = abs_power_integral(values, cfg.partition, cfg.M, spec.p)
    return v if spec.is_metric else v ** (1.0 / spec.p)


def _qerr_arr(values: np.ndarray, cfg: ConvolutionConfig, spec: NormSpec) -> float:
    return quadrature_error(GridFunction(cfg.partition, cfg.M, values), spec)


def _check_name(base: str, p: float) -> str:
    return f"{base}[p={'inf' if math.isinf(p) else format(p, 'g')}]"


def _configure(tc: TrialConfig, f, b, alpha, M: Optional[int] = None) -> ConvolutionConfig:
    return make_config(f, b, alpha, tc.partition, M or tc.M, tol=tc.tol, max_iter=tc.max_iter)


def _pick_kind(tc: TrialConfig, t: int) -> str:
    return tc.alpha_kinds[t % len(tc.alpha_kinds)]


# ------------------------------------------------------------ contraction


def _contraction_values(cfg: ConvolutionConfig, ps: Sequence[float]) -> dict:
    u = convolve(cfg.f, cfg.b, cfg).values
    f, b = cfg.f.values, cfg.b.values
    lam = cfg.lambda_bound
    out = {}
    for p in ps:
        spec = as_spec(p)
        L = spec.contraction_factor(lam)
        dfb = _size_arr(f - b, cfg, spec)
        lhs = _size_arr(u - f, cfg, spec)
        rhs = L / (1.0 - L) * dfb
        q = _pos(change_of_variables_defect(cfg, u, f, b, spec)) / (1.0 - L)
        tol = max(engine_margin(spec, cfg.tol, cfg.partition.length), q)
        out[p] = (lhs, rhs, tol, dfb)
    return out


def verify_contraction_bounds(tc: TrialConfig) -> SuiteReport:
    """||f*b - f|| <= Lambda/(1-Lambda) ||f - b|| (Lambda -> Lambda^p in metric mode).

    A trial whose raw inequality fails at the base resolution is re-run at
    4x, 16x, ... the resolution (up to ``max_M``) before it is recorded, so
    near-tight trials are judged where the quadrature error is smallest.
    The relative excess is measured against ||f - b||.
    """
    t0 = time.perf_counter()
    rep = SuiteReport("contraction", tc.to_dict())
    refined = []
    for li, lam in enumerate(tc.lambdas):
        for t in range(tc.trials):
            rng = tc.rng(li, t)
            f, b = random_function(rng, tc), random_function(rng, tc)
            alpha = random_alphas(rng, _pick_kind(tc, t), lam, tc.partition)
            M = tc.M
            vals = _contraction_values(_configure(tc, f, b, alpha, M), tc.ps)
            while any(l > r for l, r, _, _ in vals.values()) and M * 4 <= tc.max_M:
                M *= 4
                vals = _contraction_values(_configure(tc, f, b, alpha, M), tc.ps)
            if M != tc.M:
                refined.append({"lambda": lam, "trial": t, "M": M})
            for p, (lhs, rhs, tol, dfb) in vals.items():
                rep.check(_check_name("contraction", p)).record(lhs, rhs, tol, dfb)
    ratio = figure1_ratio(2.0, tc.M)
    rep.check("figure1_ratio[p=2]").record(ratio, 0.6, 10 * tc.tol)
    rep.notes["refined_trials"] = refined
    rep.notes["figure1_ratio_p2"] = ratio
    rep.seconds = time.perf_counter() - t0
    return rep


def figure1_config(M: int = DEFAULT_M, tol: float = 1e-10) -> ConvolutionConfig:
    """sin(3 pi x) * exp(x) on [0, 3], N = 6, alpha_n(x) = x/8."""
    return make_config("sin(3*pi*x)", "exp(x)", "x/8", make_uniform_partition((0.0, 3.0), 6), M, tol=tol)


def figure1_ratio(p: float = 2.0, M: int = DEFAULT_M) -> float:
    """||f*b - f||_p / ||f - b||_p for sin(3 pi x) convolved with exp(x) under alpha = x/8."""
    cfg = figure1_config(M)
    u = convolve(cfg.f, cfg.b, cfg)
    return distance(u, cfg.f, p) / distance(cfg.f, cfg.b, p)


# -------------------------------------------------------------- lipschitz


def verify_lipschitz(tc: TrialConfig) -> SuiteReport:
    """Continuity of the convolution in each argument and jointly."""
    t0 = time.perf_counter()
    rep = SuiteReport("lipschitz", tc.to_dict())
    for li, lam in enumerate(tc.lambdas):
        for t in range(tc.trials):
            rng = tc.rng(li, t)
            f, f2, b, b2 = (random_function(rng, tc) for _ in range(4))
            alpha = random_alphas(rng, _pick_kind(tc, t), lam, tc.partition)
            cfg = _configure(tc, f, b, alpha)
            F2, B2 = sample_function(f2, tc.partition, tc.M), sample_function(b2, tc.partition, tc.M)
            F, B = cfg.f, cfg.b
            u_fb = convolve(F, B, cfg).values
            u_f2b = convolve(F2, B, cfg).values
            u_fb2 = convolve(F, B2, cfg).values
            u_f2b2 = convolve(F2, B2, cfg).values
            zero = np.zeros_like(u_fb)
            df, db = F.values - F2.values, B.values - B2.values
            for p in tc.ps:
                spec = as_spec(p)
                L = spec.contraction_factor(cfg.lambda_bound)
                eng = engine_margin(spec, tc.tol, cfg.partition.length)
                # f*b - f'*b = (f - f')*0 and f*b - f*b' = 0*(b - b')
                v = u_fb - u_f2b
                w = u_f2b - u_f2b2
                dv = _pos(change_of_variables_defect(cfg, v, df, zero, spec)) / (1.0 - L)
                dw = _pos(change_of_variables_defect(cfg, w, zero, db, spec)) / (1.0 - L)
                nf, nb = _size_arr(df, cfg, spec), _size_arr(db, cfg, spec)
                rep.check(_check_name("seed_lipschitz", p)).record(
                    _size_arr(v, cfg, spec), nf / (1.0 - L), max(eng, dv), nf
                )
                x = u_fb - u_fb2
                dx = _pos(change_of_variables_defect(cfg, x, zero, db, spec)) / (1.0 - L)
                rep.check(_check_name("base_lipschitz", p)).record(
                    _size_arr(x, cfg, spec), L / (1.0 - L) * nb, max(eng, dx), nb
                )
                rep.check(_check_name("joint_lipschitz", p)).record(
                    _size_arr(u_fb - u_f2b2, cfg, spec),
                    (nf + L * nb) / (1.0 - L),
                    max(eng, dv + dw),
                    nf + nb,
                )
    rep.seconds = time.perf_counter() - t0
    return rep


# ----------------------------------------------------------- partial null


def verify_partial_null(tc: TrialConfig, iterate_lambda: float = 0.25, iterate_depth: int = 20) -> SuiteReport:
    """Bounds for b -> 0*b and f -> f*0, the signed-scale equality and the iterate envelope.

    The equality ||0*b|| = Lambda ||0*b - b|| (alpha_n = +-Lambda) is judged
    against an a posteriori quadrature estimate: three times the largest
    change of both sides when the attractor is recomputed at 4M and 16M.
    The factor covers convergence orders down to about 0.4, the slowest
    observed for rough attractors (N Lambda > 1).  The equality is not
    checked for p = inf: grid maxima of rough attractors converge
    erratically and admit no comparable estimate.
    """
    t0 = time.perf_counter()
    rep = SuiteReport("partial-null", tc.to_dict())
    part = tc.partition
    for li, lam in enumerate(tc.lambdas):
        for t in range(tc.trials):
            rng = tc.rng(li, t)
            kind = _pick_kind(tc, t)
            f, b = random_function(rng, tc), random_function(rng, tc)
            alpha = random_alphas(rng, kind, lam, part)
            cfg = _configure(tc, f, b, alpha)
            F, B = cfg.f.values, cfg.b.values
            zero = np.zeros_like(F)
            u = convolve(cfg.zero(), cfg.b, cfg).values  # 0*b
            v = convolve(cfg.f, cfg.zero(), cfg).values  # f*0
            const = cfg.scale.constant is not None
            signed = const and lam > 0 and bool(np.all(np.abs(cfg.scale.values) == cfg.lambda_bound))
            if signed:
                fine = {p: [] for p in tc.ps}
                for factor in (4, 16):
                    cf = _configure(tc, f, b, alpha, factor * tc.M)
                    uf = convolve(cf.zero(), cf.b, cf).values
                    for p in tc.ps:
                        sp = as_spec(p)
                        fine[p].append((_size_arr(uf, cf, sp), _size_arr(uf - cf.b.values, cf, sp)))
            for p in tc.ps:
                spec = as_spec(p)
                Lam = spec.contraction_factor(cfg.lambda_bound)
                eng = engine_margin(spec, tc.tol, part.length)
                du = change_of_variables_defect(cfg, u, zero, B, spec)
                dv = change_of_variables_defect(cfg, v, F, zero, spec)
                up, vp = _pos(du), _pos(dv)
                nb, nf = _size_arr(B, cfg, spec), _size_arr(F, cfg, spec)
                nu, nv = _size_arr(u, cfg, spec), _size_arr(v, cfg, spec)
                nub, nvf = _size_arr(u - B, cfg, spec), _size_arr(v - F, cfg, spec)
                chk = lambda name, lhs, rhs, q, scale: rep.check(_check_name(name, p)).record(
                    lhs, rhs, max(eng, q), scale
                )
                chk("left_null_bound", nu, Lam / (1 - Lam) * nb, up / (1 - Lam), nb)
                chk("left_null_minus_identity", nub, nb / (1 - Lam), up / (1 - Lam), nb)
                chk("right_null_bound", nv, nf / (1 - Lam), vp / (1 - Lam), nf)
                chk("right_null_minus_identity", nvf, Lam / (1 - Lam) * nf, vp / (1 - Lam), nf)
                chk("right_null_self_bound", nvf, Lam * nv, vp, nv)
                chk("right_null_lower", nf, (1 + Lam) * nv, vp, nf)
                if nb > 0 and lam > 0 and kind != "smooth":
                    rep.check(_check_name("left_null_injective", p)).record(0.0, nu, 0.0, nb)
                if const:
                    chk("left_null_constant_scale", nu, Lam * nub, up, nb)
                    chk("identity_minus_left_null_lower", nb, (1 + Lam) * nub, up, nb)
                if signed and spec.mode != "sup":
                    q = 3.0 * max(abs(nu - a) + Lam * abs(nub - c) for a, c in fine[p])
                    rep.check(_check_name("left_null_signed_equality", p)).record(
                        abs(nu - Lam * nub), 0.0, max(eng, q), nb
                    )
                if signed:
                    lower = -du if du < 0 else 0.0
                    chk("left_null_signed_lower", nb, (1 + Lam) / Lam * nu, lower / Lam, nb)
    _iterate_envelope(tc, rep, iterate_lambda, iterate_depth)
    rep.seconds = time.perf_counter() - t0
    return rep


def gauss_points(partition: Partition, M: int) -> tuple[np.ndarray, np.ndarray]:
    """Two-point Gauss-Legendre nodes and weights on the M cells of every subinterval.

    The nodes sit at irrational offsets inside each cell, so their backward
    orbits never meet partition nodes.
    """
    off = 0.5 / math.sqrt(3.0)
    pts, wts = [], []
    for n in range(partition.N):
        a, b = partition.nodes[n], partition.nodes[n + 1]
        h = (b - a) / M
        left = a + h * np.arange(M)
        pts += [left + h * (0.5 - off), left + h * (0.5 + off)]
        wts += [np.full(M, h / 2)] * 2
    x, w = np.concatenate(pts), np.concatenate(wts)
    order = np.argsort(x)
    return x[order], w[order]


def _rule_size(values: np.ndarray, w: np.ndarray, spec: NormSpec) -> float:
    if spec.mode == "sup":
        return float(np.max(np.abs(values)))
    s = float(np.dot(w, np.abs(values) ** spec.p))
    return s if spec.is_metric else s ** (1.0 / spec.p)


def _iterate_envelope(tc: TrialConfig, rep: SuiteReport, lam: float, depth: int) -> None:
    """||(P_0)^k b|| <= (Lambda/(1-Lambda))^k ||b||, k = 1..depth.

    Fine-grid samples are unsuitable here: every grid point is IFS-rational,
    its backward orbit ends on a node cycle, and for k beyond about log_N(M)
    the grid values of the iterates are dominated by those cycles.  The
    iterates are therefore evaluated along backward orbits of Gauss nodes.
    The margin is the change-of-variables defect of that rule, carried
    through the recursion.
    """
    part = tc.partition
    xs, w = gauss_points(part, tc.M)
    worst = []
    for t in range(min(tc.trials, 20)):
        rng = tc.rng(9_999, t)
        b = random_function(rng, tc)
        alpha = random_alphas(rng, _pick_kind(tc, t), lam, part)
        cfg = _configure(tc, 0.0, b, alpha)
        orb = iterate_left_null_at(cfg, xs, depth)
        for p in tc.ps:
            spec = as_spec(p)
            Lam = spec.contraction_factor(cfg.lambda_bound)
            rr = Lam / (1 - Lam)
            trunc = engine_margin(spec, orb.truncation_bound / 10, part.length)
            nb = _rule_size(orb.values[0], w, spec)
            margin = 0.0
            name = _check_name("iterated_left_null_envelope", p)
            ratios = []
            for k in range(1, depth + 1):
                e_x = orb.values[k] - orb.values[k - 1]
                e_t = orb.pulled[k] - orb.pulled[k - 1]
                d = _pos(_rule_size(e_t, w, spec) - _rule_size(e_x, w, spec))
                margin = rr * margin + Lam * d / (1 - Lam) + trunc
                bound = rr**k * nb
                cur = _rule_size(orb.values[k], w, spec)
                rep.check(name).record(cur, bound, margin + 1e-14 * bound, max(bound, 1e-300))
                ratios.append(cur / bound if bound > 0 else 0.0)
            worst.append(max(ratios))
    rep.notes["iterate_envelope_ratio"] = lam / (1 - lam)
    rep.notes["iterate_envelope_worst_attained_fraction"] = max(worst)


# -------------------------------------------------------------------- sets


def _attractor_set(cfg: ConvolutionConfig, seeds: Sequence[GridFunction], bases: Sequence[GridFunction]):
    """[s * c for s in seeds for c in bases]."""
    S = np.repeat(np.vstack([g.values for g in seeds]), len(bases), axis=0)
    C = np.tile(np.vstack([g.values for g in bases]), (len(seeds), 1))
    return [GridFunction(cfg.partition, cfg.M, row) for row in convolve_many(S, C, cfg)]


def verify_set_inequalities(
    F: Sequence, B: Sequence, f, b, cfg: ConvolutionConfig, p,
    F2: Optional[Sequence] = None, B2: Optional[Sequence] = None, report: Optional[SuiteReport] = None,
) -> SuiteReport:
    """Hausdorff and delta bounds for convolution sets of finite sets.

    ``F2``/``B2`` play the roles of the primed sets and default to F and B.
    ``p`` may be one exponent or a sequence; the attractors are shared.
    """
    part, M = cfg.partition, cfg.M
    samp = lambda g: sample_function(g, part, M)
    F = [samp(g) for g in F]
    B = [samp(g) for g in B]
    F2 = F if F2 is None else [samp(g) for g in F2]
    B2 = B if B2 is None else [samp(g) for g in B2]
    if not (F and B and F2 and B2):
        raise InvalidArgument("function sets must be nonempty")
    f, b = samp(f), samp(b)
    rep = report if report is not None else SuiteReport("sets")
    sets = {
        "Fb": _attractor_set(cfg, F, [b]),
        "Fb2": _attractor_set(cfg, F, B2[:1]),
        "fB": _attractor_set(cfg, [f], B),
        "fB_2": _attractor_set(cfg, F2[:1], B),
        "FB": _attractor_set(cfg, F, B),
        "F2B": _attractor_set(cfg, F2, B),
        "FB2": _attractor_set(cfg, F, B2),
        "F2B2": _attractor_set(cfg, F2, B2),
    }
    for q in (p if isinstance(p, (list, tuple)) else [p]):
        _set_checks(as_spec(q), F, B, F2, B2, f, b, cfg, sets, rep)
    return rep


def _set_checks(spec, F, B, F2, B2, f, b, cfg, sets, rep) -> None:
    part = cfg.partition
    Lam = spec.contraction_factor(cfg.lambda_bound)
    c0, c1 = Lam / (1 - Lam), 1 / (1 - Lam)
    bound = lambda S: max(size(g, spec) for g in S)
    MF, MB, MF2, MB2 = bound(F), bound(B), bound(F2), bound(B2)
    nb, nf = size(b, spec), size(f, spec)
    Fb, Fb2, fB, fB_2 = sets["Fb"], sets["Fb2"], sets["fB"], sets["fB_2"]
    FB, F2B, FB2, F2B2 = sets["FB"], sets["F2B"], sets["FB2"], sets["F2B2"]
    attractors = Fb + fB + FB + F2B + FB2 + F2B2
    q = max(quadrature_error(g, spec) for g in attractors) * c1
    tol = max(engine_margin(spec, cfg.tol, part.length), q)
    rec = lambda name, lhs, rhs, scale: rep.check(_check_name(name, spec.p)).record(lhs, rhs, tol, scale)
    rec("hausdorff_set_vs_set_conv_base", hausdorff(F, Fb, spec), c0 * (MF + nb), MF + nb)
    rec("hausdorff_set_vs_seed_conv_set", hausdorff(B, fB, spec), c1 * (MB + nf), MB + nf)
    rec("hausdorff_seeds_vs_product", hausdorff(F, FB, spec), c0 * (MF + MB), MF + MB)
    rec("hausdorff_bases_vs_product", hausdorff(B, FB, spec), c1 * (MB + MF), MB + MF)
    rec("hausdorff_change_seed_set", hausdorff(FB, F2B, spec), c1 * (MF + MF2), MF + MF2)
    rec("hausdorff_change_base_set", hausdorff(FB, FB2, spec), c0 * (MB + MB2), MB + MB2)
    rec(
        "hausdorff_change_both_sets",
        hausdorff(FB, F2B2, spec),
        c1 * ((MF + MF2) + Lam * (MB + MB2)),
        MF + MF2 + MB + MB2,
    )
    # delta bounds: F*b vs F*b' and f*B vs f'*B with b' = B2[0], f' = F2[0]
    b2, f2 = B2[0], F2[0]
    rec("delta_change_base", set_delta(Fb, Fb2, spec), c0 * distance(b, b2, spec), distance(b, b2, spec) or 1.0)
    rec("delta_change_seed", set_delta(fB, fB_2, spec), c1 * distance(f, f2, spec), distance(f, f2, spec) or 1.0)
    rec("delta_set_vs_set_conv_base", set_delta(F, Fb, spec), c0 * (MF + nb), MF + nb)
    rec("delta_set_vs_seed_conv_set", set_delta(B, fB, spec), c1 * (MB + nf), MB + nf)


def random_set_suite(tc: TrialConfig, set_size: int = 5) -> SuiteReport:
    """Set inequalities on random ``set_size``-element sets, one trial per (level, index)."""
    t0 = time.perf_counter()
    rep = SuiteReport("sets", tc.to_dict())
    rep.notes["set_size"] = set_size
    for li, lam in enumerate(tc.lambdas):
        for t in range(tc.trials):
            rng = tc.rng(li, t)
            sets = [[random_function(rng, tc) for _ in range(set_size)] for _ in range(4)]
            f, b = random_function(rng, tc), random_function(rng, tc)
            alpha = random_alphas(rng, _pick_kind(tc, t), lam, tc.partition)
            cfg = _configure(tc, 0.0, 0.0, alpha)
            verify_set_inequalities(sets[0], sets[1], f, b, cfg, list(tc.ps), sets[2], sets[3], report=rep)
            verify_convolution_set_membership(sets[0], sets[0], cfg, report=rep)
            verify_convolution_set_membership(sets[0], sets[1] + sets[0][:2], cfg, report=rep)
    rep.seconds = time.perf_counter() - t0
    return rep


def _sup_dist_to_set(g: GridFunction, S: Sequence[GridFunction]) -> float:
    return min(float(np.max(np.abs(g.values - h.values))) for h in S)


def verify_convolution_set_membership(
    F: Sequence, B: Sequence, cfg: ConvolutionConfig, report: Optional[SuiteReport] = None, tol: Optional[float] = None
) -> SuiteReport:
    """b in F => b in F*b;  f in B => f in f*B;  F and B intersect inside F*B and B*F.

    Membership is decided up to sup-distance ``tol`` (default 10 engine tolerances).
    """
    part, M = cfg.partition, cfg.M
    F = [sample_function(g, part, M) for g in F]
    B = [sample_function(g, part, M) for g in B]
    tol = 10 * cfg.tol if tol is None else tol
    rep = report if report is not None else SuiteReport("membership")
    for b in F:
        Fb = _attractor_set(cfg, F, [b])
        rep.check("base_in_set_conv_base").record(_sup_dist_to_set(b, Fb), 0.0, tol)
    for f in B:
        fB = _attractor_set(cfg, [f], B)
        rep.check("seed_in_seed_conv_set").record(_sup_dist_to_set(f, fB), 0.0, tol)
    common = [g for g in F if _sup_dist_to_set(g, B) <= tol]
    if common:
        FB = _attractor_set(cfg, F, B)
        BF = _attractor_set(cfg, B, F)
        for g in common:
            rep.check("intersection_in_both_products").record(
                max(_sup_dist_to_set(g, FB), _sup_dist_to_set(g, BF)), 0.0, tol
            )
    else:
        rep.check("intersection_in_both_products")
    return rep


def membership_suite(tc: TrialConfig, set_size: int = 3) -> SuiteReport:
    t0 = time.perf_counter()
    rep = SuiteReport("membership", tc.to_dict())
    for li, lam in enumerate(tc.lambdas):
        for t in range(tc.trials):
            rng = tc.rng(li, t)
            F = [random_function(rng, tc) for _ in range(set_size)]
            extra = [random_function(rng, tc) for _ in range(set_size)]
            alpha = random_alphas(rng, _pick_kind(tc, t), lam, tc.partition)
            cfg = _configure(tc, 0.0, 0.0, alpha)
            verify_convolution_set_membership(F, F, cfg, report=rep)
            verify_convolution_set_membership(F, extra + F[:1], cfg, report=rep)
    rep.seconds = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------- interpolation


@dataclass(frozen=True)
class NodeBumps:
    """Piecewise-linear interpolant of the data plus sine bumps vanishing at the nodes."""

    nodes: tuple
    values: tuple
    amplitudes: tuple = ()
    offset: tuple = (0.0, 0.0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self.nodes, self.values)
        if self.amplitudes:
            nodes = np.asarray(self.nodes)
            n = np.clip(np.searchsorted(nodes, x, side="right") - 1, 0, len(nodes) - 2)
            t = (x - nodes[n]) / (nodes[n + 1] - nodes[n])
            for k, a in enumerate(self.amplitudes, start=1):
                out = out + a * np.sin(k * np.pi * t)
        lo, hi = self.nodes[0], self.nodes[-1]
        d0, d1 = self.offset
        if d0 or d1:
            out = out + d0 + (d1 - d0) * (x - lo) / (hi - lo)
        return out


def verify_interpolation(data: Sequence[tuple], tc: TrialConfig) -> SuiteReport:
    """Node interpolation, continuity and the endpoint-mismatch bound for seeds and bases in J_D.

    ``data`` is [(x_0, y_0), ..., (x_N, y_N)] with the partition nodes as
    abscissae.  Continuity is judged by the largest jump between adjacent
    samples at M, 2M, 4M and 8M.  Each level is compared with the level two
    doublings finer: for Hoelder exponents near 0.4 (Lambda close to 1/2 with
    six subintervals) one doubling shrinks the modulus of continuity by only
    about 0.76, less than the fluctuation of a sampled maximum.
    """
    t0 = time.perf_counter()
    xs = np.array([x for x, _ in data], dtype=float)
    ys = np.array([y for _, y in data], dtype=float)
    part = Partition(tuple(xs))
    rep = SuiteReport("interpolation", tc.to_dict())
    rep.config["data"] = [[float(x), float(y)] for x, y in zip(xs, ys)]
    jumps_log = []
    rates: list[float] = []
    for li, lam in enumerate(tc.lambdas):
        for t in range(tc.trials):
            rng = tc.rng(li, t)
            amps_f = tuple(rng.uniform(-1, 1, int(rng.integers(0, 4))))
            amps_b = tuple(rng.uniform(-1, 1, int(rng.integers(1, 4))))
            f = NodeBumps(tuple(xs), tuple(ys), amps_f)
            b = NodeBumps(tuple(xs), tuple(ys), amps_b)
            alpha = random_alphas(rng, _pick_kind(tc, t), lam, part)
            cfg = make_config(f, b, alpha, part, tc.M, tol=tc.tol, max_iter=tc.max_iter)
            nv = node_values(cfg)
            rep.check("node_values_match_data").record(float(np.max(np.abs(nv - ys))), 0.0, 1e-10)
            u, _ = fixed_point(cfg)
            rep.check("fixed_point_matches_node_values").record(
                float(np.max(np.abs(u.node_values() - nv))), 0.0, 2 * tc.tol
            )
            jumps = []
            for k in range(4):
                c = make_config(f, b, alpha, part, tc.M * 2**k, tol=tc.tol, max_iter=tc.max_iter)
                jumps.append(float(np.max(np.abs(np.diff(convolve(c.f, c.b, c).values)))))
            jumps_log.append(jumps)
            for k in range(2, len(jumps)):
                rep.check("max_jump_decreases_under_refinement").record(jumps[k], jumps[k - 2], 0.0, jumps[0])
            if jumps[0] > 0 and jumps[-1] > 0:
                rates.append(math.log2(jumps[0] / jumps[-1]) / (len(jumps) - 1))
            # endpoint mismatch of size eps (1 - Lambda) allows node deviation eps
            eps = float(rng.uniform(0.01, 1.0))
            lam_grid = cfg.lambda_bound
            s0, s1 = rng.choice([-1.0, 1.0], 2)
            shift = eps * (1 - lam_grid)
            b_off = NodeBumps(tuple(xs), tuple(ys), amps_b, (float(s0 * shift), float(s1 * shift)))
            c = make_config(f, b_off, alpha, part, tc.M, tol=tc.tol, max_iter=tc.max_iter)
            dev = float(np.max(np.abs(node_values(c) - ys)))
            rep.check("endpoint_mismatch_node_deviation").record(dev, eps, 1e-12, eps)
    rep.notes["max_jumps_by_doubling"] = jumps_log
    if rates:
        rep.notes["min_empirical_jump_exponent"] = min(rates)
    rep.seconds = time.perf_counter() - t0
    return rep


def default_data(tc: TrialConfig) -> list[tuple]:
    """Random data on the partition nodes (seeded by ``tc``)."""
    part = tc.partition
    ys = tc.rng(7_777).uniform(-1, 1, part.N + 1)
    return list(zip(map(float, part.nodes), map(float, ys)))


# ---------------------------------------------------------- lambda study


@dataclass
class LambdaStudy:
    schedule: list
    distances: list
    envelopes: list
    margins: list
    p: float

    @property
    def under_envelope(self) -> bool:
        return all(d <= e + m for d, e, m in zip(self.distances, self.envelopes, self.margins))

    @property
    def decreasing(self) -> bool:
        return all(b <= a for a, b in zip(self.distances, self.distances[1:]))

    def to_dict(self) -> dict:
        return _jsonable(asdict(self) | {"under_envelope": self.under_envelope, "decreasing": self.decreasing})


def lambda_convergence_study(
    f, b, schedule: Sequence[float], partition: Partition, p=2.0, alpha_shape=None,
    M: int = DEFAULT_M, tol: float = 1e-12,
) -> LambdaStudy:
    """||f*b - f||_p as the scale bound runs through ``schedule``.

    With ``alpha_shape`` the scale functions are alpha_shape * (Lambda_m / Lambda)
    so only the level changes; otherwise alpha_n = Lambda_m.
    """
    spec = as_spec(p)
    sched = [float(x) for x in schedule]
    for lam in sched:
        if not 0.0 <= lam < 1.0:
            raise InvalidArgument(f"schedule entries must lie in [0, 1), got {lam}")
    if alpha_shape is not None:
        shape = make_scale_vector(alpha_shape, partition, M)
        base = shape.values / shape.lambda_bound if shape.lambda_bound > 0 else shape.values
    dists, envs, margins = [], [], []
    for lam in sched:
        if alpha_shape is None:
            alpha = lam
        else:
            scaled = [GridFunction(partition, M, base[n] * lam) for n in range(partition.N)]
            alpha = scaled
        cfg = make_config(f, b, alpha, partition, M, tol=tol)
        u = convolve(cfg.f, cfg.b, cfg).values
        L = spec.contraction_factor(cfg.lambda_bound)
        dists.append(_size_arr(u - cfg.f.values, cfg, spec))
        envs.append(L / (1 - L) * _size_arr(cfg.f.values - cfg.b.values, cfg, spec))
        q = _pos(change_of_variables_defect(cfg, u, cfg.f.values, cfg.b.values, spec)) / (1 - L)
        margins.append(max(engine_margin(spec, tol, partition.length), q))
    return LambdaStudy(sched, dists, envs, margins, spec.p)


def lambda_study_suite(tc: TrialConfig, count: int = 12, c: float = 0.3) -> SuiteReport:
    """Lambda_m = c/m on the sin(3 pi x), exp(x) example and on random pairs."""
    t0 = time.perf_counter()
    rep = SuiteReport("lambda-study", tc.to_dict())
    sched = [c / m for m in range(1, count + 1)]
    fig_part = make_uniform_partition((0.0, 3.0), 6)
    studies = {}
    cases = [("figure1", "sin(3*pi*x)", "exp(x)", fig_part, "x/8")]
    for t in range(min(tc.trials, 10)):
        rng = tc.rng(5_555, t)
        cases.append((f"random{t}", random_function(rng, tc), random_function(rng, tc), tc.partition, None))
    for name, f, b, part, shape in cases:
        for p in tc.ps:
            st = lambda_convergence_study(f, b, sched, part, p, shape, tc.M, max(tc.tol, 1e-13))
            for d, e, m in zip(st.distances, st.envelopes, st.margins):
                rep.check(_check_name("distance_under_envelope", p)).record(d, e, m, max(e, 1e-300))
            scale = max(st.distances[0], 1e-300)
            for a, b_ in zip(st.distances, st.distances[1:]):
                rep.check(_check_name("distance_decreasing", p)).record(b_, a, 0.0, scale)
            studies[f"{name}[p={p:g}]"] = st.to_dict()
    rep.notes["schedule"] = sched
    rep.notes["studies"] = studies
    rep.seconds = time.perf_counter() - t0
    return rep


# ------------------------------------------------------------------ driver


def run_suite(name: str, tc: TrialConfig) -> SuiteReport:
    if name == "contraction":
        return verify_contraction_bounds(tc)
    if name == "lipschitz":
        return verify_lipschitz(tc)
    if name == "partial-null":
        return verify_partial_null(tc)
    if name == "sets":
        return random_set_suite(tc)
    if name == "interpolation":
        return verify_interpolation(default_data(tc), tc)
    if name == "membership":
        return membership_suite(tc)
    if name == "lambda-study":
        return lambda_study_suite(tc)
    if name == "all":
        reports = [run_suite(s, tc) for s in SUITES]
        out = SuiteReport("all", tc.to_dict())
        for r in reports:
            for cname, stats in r.checks.items():
                out.checks[f"{r.suite}/{cname}"] = stats
            out.seconds += r.seconds
        out.notes["suite_violations"] = {r.suite: r.violations for r in reports}
        return out
    raise InvalidArgument(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
