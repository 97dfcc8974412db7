import math

import numpy as np
import pytest

from fractconv.errors import InvalidArgument, ShapeMismatch
from fractconv.functions import sample_function, zero_function
from fractconv.metrics import (
    NormSpec,
    distance,
    distance_matrix,
    dp_metric,
    hausdorff,
    inner_product,
    lp_norm,
    quadrature_error,
    set_delta,
    size,
)
from fractconv.partition import make_uniform_partition

P3 = make_uniform_partition((0, 3), 6)
P1 = make_uniform_partition((0, 1), 2)


def test_lp_examples():
    assert lp_norm(sample_function(1.0, P3, 64), 2) == pytest.approx(math.sqrt(3), abs=1e-10)
    M = 64
    assert abs(lp_norm(sample_function("x", P1, M), 1) - 0.5) <= M**-2
    assert lp_norm(sample_function(-2.5, P3, 8), math.inf) == 2.5


def test_norm_spec_modes():
    assert NormSpec(0.5).mode == "metric"
    assert NormSpec(1).mode == "norm"
    assert NormSpec(math.inf).mode == "sup"
    assert NormSpec(0.5).contraction_factor(0.4) == pytest.approx(0.4**0.5)
    for bad in (0, -1, float("nan")):
        with pytest.raises(InvalidArgument):
            NormSpec(bad)


def test_dp_metric_examples():
    z, one = zero_function(P1, 32), sample_function(1.0, P1, 32)
    assert dp_metric(z, one, 0.5) == pytest.approx(1.0)
    g = sample_function("sin(7*x)", P1, 32)
    h = sample_function("x^2", P1, 32)
    assert dp_metric(g, g, 0.3) == 0.0
    shift = lambda u: u.with_values(u.values + 2.75)  # noqa: E731
    assert dp_metric(shift(g), shift(h), 0.5) == pytest.approx(dp_metric(g, h, 0.5), abs=1e-12)
    with pytest.raises(InvalidArgument):
        dp_metric(g, h, 1.0)


def test_inner_product_examples():
    M = 512
    one = sample_function(1.0, P3, M)
    assert inner_product(one, one) == pytest.approx(3.0)
    s = sample_function("sin(2*pi*x/3)*sqrt(2/3)", P3, M)
    c = sample_function("cos(2*pi*x/3)*sqrt(2/3)", P3, M)
    assert abs(inner_product(s, c)) <= 1e-8
    g = sample_function("exp(x)", P3, M)
    assert inner_product(g, g) == pytest.approx(lp_norm(g, 2) ** 2, rel=1e-14)
    with pytest.raises(ShapeMismatch):
        inner_product(g, sample_function(1.0, P3, 8))


def test_midpoint_rule_never_samples_nodes():
    # a function that is wild exactly at the nodes and 0 elsewhere integrates to 0
    M = 16
    g = zero_function(P3, M)
    v = g.values.copy()
    v[::M] = 1e6
    assert lp_norm(g.with_values(v), 1) == 0.0


def test_quadrature_converges_second_order():
    errs = []
    for M in (16, 32, 64, 128):
        g = sample_function("exp(x)*sin(x)", P3, M)
        errs.append(quadrature_error(g, 2))
    rates = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(rates) > 1.8


def test_set_distances():
    M = 32
    f = sample_function("sin(x)", P3, M)
    g = sample_function("x/3", P3, M)
    b = sample_function("exp(-x)", P3, M)
    z = zero_function(P3, M)
    for p in (1, 2, math.inf, 0.5):
        assert set_delta([z], [b], p) == pytest.approx(size(b, p))
        assert set_delta([f, g], [f, g], p) == 0.0
        assert set_delta([f], [g], p) == pytest.approx(distance(f, g, p))
        assert hausdorff([f], [g], p) == pytest.approx(distance(f, g, p))
        assert hausdorff([f, g, b], [f, g, b], p) == 0.0
        assert hausdorff([z, f], [z], p) == pytest.approx(size(f, p))
    with pytest.raises(InvalidArgument):
        hausdorff([], [f], 2)


def test_distance_matrix_matches_pairwise():
    rng = np.random.default_rng(2)
    M = 16
    A = [zero_function(P3, M).with_values(rng.normal(size=6 * M + 1)) for _ in range(4)]
    C = [zero_function(P3, M).with_values(rng.normal(size=6 * M + 1)) for _ in range(3)]
    for p in (0.5, 1, 2, 3.5, math.inf):
        D = distance_matrix(A, C, p)
        ref = np.array([[distance(a, c, p) for c in C] for a in A])
        assert np.allclose(D, ref, rtol=1e-13, atol=0)


def test_hausdorff_symmetry_triangle_and_delta():
    rng = np.random.default_rng(5)
    M = 16

    def rand_set():
        return [zero_function(P3, M).with_values(rng.normal(size=6 * M + 1)) for _ in range(rng.integers(1, 5))]

    for _ in range(30):
        A, B, C = rand_set(), rand_set(), rand_set()
        for p in (1, 2, math.inf):
            assert hausdorff(A, B, p) == pytest.approx(hausdorff(B, A, p), rel=1e-14)
            assert hausdorff(A, C, p) <= hausdorff(A, B, p) + hausdorff(B, C, p) + 1e-12
            assert set_delta(A, B, p) <= hausdorff(A, B, p) + 1e-12
