import math
import warnings

import numpy as np
import pytest

from fractconv.engine import (
    NonConvergenceWarning,
    apply_rb_operator,
    convolve,
    convolve_many,
    fixed_point,
    iterate_left_null,
    iterate_left_null_at,
    left_null,
    make_config,
    node_values,
    pushforward_at,
    pushforward_eval,
    right_null,
    self_referential_residual,
)
from fractconv.errors import ShapeMismatch
from fractconv.functions import sample_function, zero_function
from fractconv.partition import Partition, make_uniform_partition

P1 = make_uniform_partition((0, 1), 2)
P3 = make_uniform_partition((0, 3), 6)


def fig1(M=512, tol=1e-10):
    return make_config("sin(3*pi*x)", "exp(x)", "x/8", P3, M, tol=tol)


def test_operator_examples():
    cfg = make_config("sin(x)", "cos(3*x)", "x/8", P3, 32)
    assert np.array_equal(apply_rb_operator(cfg, cfg.b).values, cfg.f.values)
    null = make_config("sin(x)", "cos(3*x)", 0.0, P3, 32)
    g = sample_function("x^2", P3, 32)
    assert np.array_equal(apply_rb_operator(null, g).values, null.f.values)
    const = make_config(1.0, 0.0, 0.5, P1, 16)
    assert np.all(apply_rb_operator(const, zero_function(P1, 16)).values == 1.0)
    with pytest.raises(ShapeMismatch):
        apply_rb_operator(cfg, zero_function(P3, 16))


def test_constant_attractor():
    u, log = fixed_point(make_config(1.0, 0.0, 0.5, P1, 64, tol=1e-12))
    assert log.converged
    assert np.max(np.abs(u.values - 2.0)) <= 1e-12


def test_idempotence_in_one_sweep():
    cfg = make_config("sin(3*x) + x", "sin(3*x) + x", "x/8", P3, 64)
    u, log = fixed_point(cfg)
    assert log.sweeps == 1
    assert np.array_equal(u.values, cfg.f.values)


def test_residual_and_contraction_ratios():
    cfg = fig1(tol=1e-12)
    u, log = fixed_point(cfg)
    assert log.converged
    assert self_referential_residual(cfg, u) <= 2 * cfg.tol
    assert all(r <= cfg.lambda_bound + 1e-10 for r in log.ratios())


def test_nonconvergence_is_flagged():
    cfg = make_config("sin(3*pi*x)", "exp(x)", "x/8", P3, 64, max_iter=3)
    u, log = fixed_point(cfg)
    assert not log.converged and log.sweeps == 3
    with pytest.warns(NonConvergenceWarning):
        convolve(cfg.f, cfg.b, cfg)


def test_node_values_closed_form():
    cfg = make_config("x", 0.0, 0.5, P1, 256, tol=1e-12)
    assert node_values(cfg) == pytest.approx([0.0, 1.5, 2.0], abs=1e-15)
    u, _ = fixed_point(cfg)
    assert np.max(np.abs(u.node_values() - node_values(cfg))) <= 1e-10
    same = make_config("sin(x)", "sin(x)", "x/8", P3, 16)
    assert np.allclose(node_values(same), same.f.node_values(), rtol=0, atol=1e-15)


def test_node_deviation_under_endpoint_mismatch():
    rng = np.random.default_rng(4)
    for _ in range(50):
        lam = rng.uniform(0, 0.95)
        eps = rng.uniform(0.01, 2)
        d0, d1 = rng.uniform(-1, 1, 2) * eps * (1 - lam)
        f = lambda x: np.sin(2 * x) + x  # noqa: E731
        b = lambda x, d0=d0, d1=d1: f(x) + d0 + (d1 - d0) * x / 3 + np.sin(2 * np.pi * x) * 5  # noqa: E731
        alpha = list(rng.uniform(-lam, lam, 6))
        cfg = make_config(f, b, alpha, P3, 16)
        assert np.max(np.abs(node_values(cfg) - cfg.f.node_values())) <= eps + 1e-12


def test_pushforward_idempotent_and_constant():
    same = make_config("cos(x)", "cos(x)", "x/8", P3, 16)
    r = pushforward_eval(same, 3, [0.0, 1.3, 3.0])
    assert np.allclose(r.values, np.cos(r.points), atol=1e-15)
    const = make_config(1.0, 0.0, 0.5, P1, 16)
    for k in (1, 4, 9):
        r = pushforward_eval(const, k, [0.2, 0.7], base_values=[1.0, 1.0])
        # v_{j+1} = 1 + v_j / 2 from v_0 = 1 gives 2 - 2^-k
        assert np.allclose(r.values, 2.0 - 2.0**-k, rtol=0, atol=1e-15)


def test_pushforward_cross_check_figure_config():
    cfg = fig1(M=512, tol=1e-10)
    u, _ = fixed_point(cfg)
    r = pushforward_eval(cfg, 4, list(P3.nodes), base_values=node_values(cfg))
    on_grid = r.valid & np.isclose(r.points * 1024, np.round(r.points * 1024), rtol=0, atol=1e-9)
    idx = np.round(r.points[on_grid] * 1024).astype(int)
    assert on_grid.sum() > 50
    assert np.max(np.abs(u.values[idx] - r.values[on_grid])) <= 2 * cfg.tol


def test_nonuniform_partition_interpolates_and_matches_orbits():
    part = Partition((0.0, 0.7, 1.2, 2.1, 3.0))
    cfg = make_config("sin(3*x)", "x^2/3", "0.3*cos(x)", part, 1024, tol=1e-12)
    u, log = fixed_point(cfg)
    assert log.interpolated
    xs = np.linspace(0, 3, 41)
    ref, err = pushforward_at(cfg, xs, depth=60)
    assert np.max(err) <= 1e-12
    # linear interpolation of a rough attractor: loose but honest agreement
    assert np.max(np.abs(u.at(xs) - ref)) <= 5e-2


def test_convolve_wrappers():
    cfg = make_config("sin(x)", "exp(-x)", "x/8", P3, 64)
    z = cfg.zero()
    assert np.all(left_null(z, cfg).values == 0.0)
    null = make_config("sin(x)", "exp(-x)", 0.0, P3, 64)
    assert np.array_equal(right_null(null.f, null).values, null.f.values)
    assert np.array_equal(convolve(cfg.f, cfg.f, cfg).values, cfg.f.values)
    assert np.array_equal(convolve(null.f, null.b, null).values, null.f.values)


def test_bilinearity():
    tol = 1e-11
    rng = np.random.default_rng(8)
    for _ in range(10):
        alpha = list(rng.uniform(-0.45, 0.45, 6))
        cfg = make_config(0.0, 0.0, alpha, P3, 128, tol=tol)
        f, f2, b, b2 = (sample_function(lambda x, c=rng.normal(size=3): c[0] * np.sin(c[1] * x) + c[2], P3, 128)
                        for _ in range(4))
        gam = rng.normal()
        lhs = convolve(f.with_values(gam * f.values + f2.values), b.with_values(gam * b.values + b2.values), cfg)
        rhs = gam * convolve(f, b, cfg).values + convolve(f2, b2, cfg).values
        assert np.max(np.abs(lhs.values - rhs)) <= 5 * tol * max(1.0, abs(gam))


def test_convolve_many_matches_single():
    cfg = make_config(0.0, 0.0, "x/8", P3, 64, tol=1e-12)
    F = np.vstack([np.sin(k * cfg.f.grid) for k in range(1, 5)])
    B = np.vstack([np.cos(k * cfg.f.grid) for k in range(1, 5)])
    many = convolve_many(F, B, cfg)
    for i in range(4):
        single = convolve(cfg.f.with_values(F[i]), cfg.f.with_values(B[i]), cfg).values
        assert np.max(np.abs(many[i] - single)) <= 2e-12


def test_iterate_left_null_examples():
    cfg = make_config(0.0, "sin(x)", 0.25, P3, 64, tol=1e-13)
    zeros = iterate_left_null(cfg.zero(), cfg, 3)
    assert all(np.all(g.values == 0.0) for g in zeros)
    null = make_config(0.0, "sin(x)", 0.0, P3, 64)
    assert np.all(iterate_left_null(null.b, null, 1)[1].values == 0.0)
    seq = iterate_left_null(cfg.b, cfg, 8)
    sup0 = np.max(np.abs(seq[0].values))
    for k, g in enumerate(seq):
        assert np.max(np.abs(g.values)) <= (1 / 3) ** k * sup0 * (1 + 1e-9) + 1e-12


def test_orbit_iterates_match_grid_iterates():
    cfg = make_config(0.0, "sin(2*x) + x/3", [0.25, -0.25, 0.2, 0.25, -0.1, 0.25], P3, 64, tol=1e-14)
    k = 6
    grid = iterate_left_null(cfg.b, cfg, k)
    xs = cfg.f.grid
    orb = iterate_left_null_at(cfg, xs, k)
    for j in range(k + 1):
        assert np.max(np.abs(orb.values[j] - grid[j].values)) <= orb.truncation_bound + 1e-12
