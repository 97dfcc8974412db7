"""Command-line interface: ``fractconv {convolve,verify,basis,frame,figure}``.

Exit status: 0 success, 1 usage or validation error, 2 check violations,
3 fixed-point iteration did not converge.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .analysis import SUITES, TrialConfig, run_suite
from .bases import (
    SIDES,
    convolve_family,
    frame_perturbation_bounds,
    gram_matrix,
    parse_schedule,
    perturbation_R,
    spectrum_report,
    symmetric_eigenvalues,
    trig_basis,
)
from .engine import DEFAULT_MAX_ITER, DEFAULT_TOL, fixed_point, make_config
from .errors import FractConvError
from .fileio import jsonable, write_grid_function, write_json, write_matrix
from .functions import DEFAULT_M
from .metrics import as_spec, distance
from .partition import make_uniform_partition

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, EXIT_NONCONVERGENCE = 0, 1, 2, 3

FIGURES = (
    ("figure1", "sin(3*pi*x)", "exp(x)"),
    ("figure2", "0", "sin(3*pi*x)"),
    ("figure3", "sin(3*pi*x)", "0"),
)
FIGURE_ALPHA = "x/8"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    command: str
    interval: tuple = (0.0, 3.0)
    N: int = 6
    M: int = DEFAULT_M
    p: list = field(default_factory=lambda: [2.0])
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    seed_fn: Optional[str] = None
    base_fn: Optional[str] = None
    alpha: Optional[list] = None
    seed: int = 0
    out: Optional[str] = None
    suite: Optional[str] = None
    trials: Optional[int] = None
    family: Optional[str] = None
    count: Optional[int] = None
    side: Optional[str] = None
    schedule: Optional[str] = None
    A: Optional[float] = None
    B: Optional[float] = None
    R: Optional[float] = None

    def __post_init__(self) -> None:
        lo, hi = self.interval
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise UsageError(f"interval must satisfy lo < hi, got [{lo}, {hi}]")
        if self.N < 2:
            raise UsageError(f"--nodes must be >= 2, got {self.N}")
        if self.M < 1:
            raise UsageError(f"--grid must be >= 1, got {self.M}")
        if not self.tol > 0:
            raise UsageError(f"--tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise UsageError(f"--max-iter must be >= 1, got {self.max_iter}")
        for p in self.p:
            try:
                as_spec(p)
            except FractConvError as exc:
                raise UsageError(str(exc)) from None
        if self.trials is not None and self.trials < 1:
            raise UsageError(f"--trials must be >= 1, got {self.trials}")
        if self.count is not None and self.count < 1:
            raise UsageError(f"--count must be >= 1, got {self.count}")
        if self.alpha is not None and len(self.alpha) not in (1, self.N):
            raise UsageError(f"--alpha needs 1 or {self.N} expressions, got {len(self.alpha)}")

    @property
    def partition(self):
        return make_uniform_partition(list(self.interval), self.N)

    def to_dict(self) -> dict:
        return asdict(self)


def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _split_alpha(text: str) -> list[str]:
    parts = [t.strip() for t in text.split(",")]
    if any(not t for t in parts):
        raise argparse.ArgumentTypeError(f"empty scale expression in {text!r}")
    return parts


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--interval", nargs=2, type=_float, metavar=("LO", "HI"), default=[0.0, 3.0])
    common.add_argument("--nodes", type=int, default=6, metavar="N", help="number of subintervals")
    common.add_argument("--grid", type=int, default=DEFAULT_M, metavar="M", help="fine cells per subinterval")
    common.add_argument("--tol", type=_float, default=DEFAULT_TOL)
    common.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    common.add_argument("--seed", type=int, default=0, help="random seed")
    common.add_argument("--out", default=None, metavar="PATH")

    parser = _Parser(prog="fractconv", description="Fractal convolution of functions on an interval.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("convolve", parents=[common], help="sample f *_T b on the fine grid")
    c.add_argument("--seed-fn", default="sin(3*pi*x)", metavar="EXPR")
    c.add_argument("--base-fn", default="exp(x)", metavar="EXPR")
    c.add_argument("--alpha", type=_split_alpha, default=[FIGURE_ALPHA], metavar="EXPR[,EXPR...]")
    c.add_argument("--p", type=_float, default=2.0, metavar="P")

    v = sub.add_parser("verify", parents=[common], help="run an inequality suite")
    v.add_argument("--suite", choices=SUITES + ("all",), default="all")
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--p", type=_float, nargs="+", default=[1.0, 2.0, math.inf], metavar="P")

    bs = sub.add_parser("basis", parents=[common], help="Gram spectrum of a convolved orthonormal family")
    bs.add_argument("--family", choices=("trig",), default="trig")
    bs.add_argument("--count", type=int, default=16, metavar="M")
    bs.add_argument("--side", choices=SIDES, default="left-null")
    scale = bs.add_mutually_exclusive_group()
    scale.add_argument("--alpha", type=_split_alpha, default=None, metavar="EXPR[,EXPR...]")
    scale.add_argument("--schedule", default=None, metavar="c/m:C|const:L")

    fr = sub.add_parser("frame", parents=[common], help="perturbed frame bounds for f_m *_T 0")
    fr.add_argument("--family", choices=("trig",), default="trig")
    fr.add_argument("--count", type=int, default=64, metavar="M")
    fr.add_argument("--schedule", default="c/m:0.3", metavar="c/m:C|const:L")
    fr.add_argument("--A", type=_float, default=1.0)
    fr.add_argument("--B", type=_float, default=1.0)
    fr.add_argument("--R", type=_float, default=None, help="use this R instead of computing it")

    sub.add_parser("figure", parents=[common], help="sample data for the three example convolutions")
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    d = dict(
        command=args.command,
        interval=tuple(args.interval),
        N=args.nodes,
        M=args.grid,
        tol=args.tol,
        max_iter=args.max_iter,
        seed=args.seed,
        out=args.out,
    )
    for name in ("seed_fn", "base_fn", "alpha", "suite", "trials", "family", "count", "side", "schedule", "A", "B", "R"):
        if hasattr(args, name):
            d[name] = getattr(args, name)
    if hasattr(args, "p"):
        d["p"] = list(args.p) if isinstance(args.p, list) else [args.p]
    if args.command == "figure":
        d["alpha"] = [FIGURE_ALPHA]
    return RunConfig(**d)


def _alpha_arg(alpha: list):
    return alpha[0] if len(alpha) == 1 else alpha


def _sidecar(out: Path) -> Path:
    return out.with_suffix(".json")


def _convolve_files(rc: RunConfig, seed_fn: str, base_fn: str, out: Path) -> dict:
    cfg = make_config(seed_fn, base_fn, _alpha_arg(rc.alpha), rc.partition, rc.M, rc.tol, rc.max_iter)
    u, log = fixed_point(cfg)
    lam = cfg.lambda_bound
    norms = {}
    for p in rc.p:
        key = "inf" if math.isinf(p) else format(p, "g")
        dist = distance(u, cfg.f, p)
        gap = distance(cfg.f, cfg.b, p)
        factor = as_spec(p).contraction_factor(lam)
        norms[key] = {
            "distance_to_seed": dist,
            "seed_base_distance": gap,
            "bound": factor / (1 - factor) * gap,
            "ratio": dist / gap if gap > 0 else 0.0,
        }
    side = {
        "run_config": rc.to_dict(),
        "seed_fn": seed_fn,
        "base_fn": base_fn,
        "lambda": lam,
        "bound_ratio": lam / (1 - lam),
        "sweeps": log.sweeps,
        "converged": log.converged,
        "residual": log.residual,
        "interpolated_pullback": log.interpolated,
        "node_values": u.node_values(),
        "norms": norms,
        "samples": str(out.name),
    }
    write_grid_function(out, u)
    write_json(_sidecar(out), side)
    return side


def cmd_convolve(rc: RunConfig) -> int:
    out = Path(rc.out or "convolution.csv")
    side = _convolve_files(rc, rc.seed_fn, rc.base_fn, out)
    print(f"wrote {out} and {_sidecar(out)}  Lambda={side['lambda']:.6g} sweeps={side['sweeps']}")
    return EXIT_OK if side["converged"] else EXIT_NONCONVERGENCE


def cmd_verify(rc: RunConfig) -> int:
    tc = TrialConfig(
        seed=rc.seed, trials=rc.trials, ps=tuple(rc.p), interval=rc.interval, N=rc.N, M=rc.M,
        max_iter=rc.max_iter,
    )
    rep = run_suite(rc.suite, tc)
    rep.config["run_config"] = rc.to_dict()
    text = rep.to_json(timing=False)
    if rc.out:
        Path(rc.out).write_text(text + "\n")
    else:
        print(text)
    print(f"{rep.suite}: {rep.violations} violation(s) in {rep.seconds:.2f} s", file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_VIOLATION


def cmd_basis(rc: RunConfig) -> int:
    out = Path(rc.out or "basis")
    out.mkdir(parents=True, exist_ok=True)
    fam = trig_basis(rc.count, partition=rc.partition, M=rc.M)
    if rc.schedule is not None:
        schedule = parse_schedule(rc.schedule, rc.count)
        conv = convolve_family(fam, rc.side, schedule=schedule, tol=rc.tol, max_iter=rc.max_iter)
        lam, constant_modulus = None, False
    else:
        alpha = _alpha_arg(rc.alpha or ["0"])
        cfg = make_config(0.0, 0.0, alpha, rc.partition, rc.M)
        conv = convolve_family(fam, rc.side, cfg.scale, tol=rc.tol, max_iter=rc.max_iter)
        lam = cfg.lambda_bound
        constant_modulus = bool(np.all(np.abs(cfg.scale.values) == lam))
    G = gram_matrix(conv)
    rep = spectrum_report(conv, rc.side, lam, constant_modulus=constant_modulus)
    write_matrix(out / "gram.csv", G)
    write_matrix(out / "spectrum.csv", symmetric_eigenvalues(G))
    d = rep.to_dict()
    d.pop("spectrum")
    d["schedule"] = list(conv.schedule)
    d["run_config"] = rc.to_dict()
    write_json(out / "bounds.json", d)
    verdict = {None: "no envelope", True: "within envelope", False: "OUTSIDE envelope"}[rep.within_envelope]
    print(f"spectrum [{rep.lower:.6g}, {rep.upper:.6g}] {verdict}; wrote {out}/gram.csv, spectrum.csv, bounds.json")
    return EXIT_VIOLATION if rep.within_envelope is False else EXIT_OK


def cmd_frame(rc: RunConfig) -> int:
    result: dict = {"run_config": rc.to_dict()}
    if rc.R is not None:
        R = rc.R
    else:
        fam = trig_basis(rc.count, partition=rc.partition, M=rc.M)
        schedule = parse_schedule(rc.schedule, rc.count)
        pr = perturbation_R(fam, schedule, A=rc.A, tol=rc.tol)
        R = pr.R
        result["perturbation"] = pr.to_dict()
    result["frame"] = frame_perturbation_bounds(rc.A, rc.B, R).to_dict()
    if rc.out:
        write_json(rc.out, result)
    else:
        print(json.dumps(jsonable(result), indent=2, sort_keys=True))
    bad = "perturbation" in result and not result["perturbation"]["empirical_within_R"]
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_figure(rc: RunConfig) -> int:
    out = Path(rc.out or "figures")
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    status = EXIT_OK
    for name, seed_fn, base_fn in FIGURES:
        side = _convolve_files(rc, seed_fn, base_fn, out / f"{name}.csv")
        ok = side["residual"] <= 2 * rc.tol
        print(f"{name}: {seed_fn} *_T {base_fn}  residual={side['residual']:.3g} {'ok' if ok else 'TOO LARGE'}")
        if not side["converged"]:
            status = max(status, EXIT_NONCONVERGENCE)
        elif not ok:
            status = max(status, EXIT_VIOLATION)
    print(f"wrote {out}/figure{{1,2,3}}.csv and .json in {time.perf_counter() - t0:.2f} s")
    return status


COMMANDS = {
    "convolve": cmd_convolve,
    "verify": cmd_verify,
    "basis": cmd_basis,
    "frame": cmd_frame,
    "figure": cmd_figure,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        rc = _run_config(args)
        return COMMANDS[rc.command](rc)
    except UsageError as exc:
        print(f"{exc}", file=sys.stderr)
        return EXIT_USAGE
    except FractConvError as exc:
        print(f"fractconv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"fractconv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
