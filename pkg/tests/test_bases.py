import math

import numpy as np
import pytest

from fractconv.bases import (
    FunctionFamily,
    convolve_family,
    frame_perturbation_bounds,
    gram_matrix,
    lambda_schedule,
    parse_schedule,
    perturbation_R,
    riesz_bounds,
    spectral_envelope,
    spectrum_report,
    symmetric_eigenvalues,
    trig_basis,
    union_family,
)
from fractconv.errors import ContractivityError, InvalidArgument


def test_trig_first_member_and_orthonormality():
    fam = trig_basis(1)
    assert np.allclose(fam[0].values, 1 / math.sqrt(3), rtol=0, atol=1e-15)
    G = gram_matrix(trig_basis(8))
    assert np.max(np.abs(G - np.eye(8))) <= 1e-8
    assert np.max(np.abs(np.diag(G) - 1)) <= 1e-10


def test_null_scale_sides():
    fam = trig_basis(4, M=64)
    left = convolve_family(fam, "left-null", alpha=0.0)
    assert all(np.all(g.values == 0.0) for g in left)
    right = convolve_family(fam, "right-null", alpha=0.0)
    assert all(np.array_equal(a.values, b.values) for a, b in zip(right, fam))


def test_left_null_figure_scale_sup_bound():
    fam = trig_basis(5, M=128)
    left = convolve_family(fam, "left-null", alpha="x/8")
    for g, b in zip(left, fam):
        assert np.max(np.abs(g.values)) <= 0.6 * np.max(np.abs(b.values)) + 1e-12


@pytest.mark.parametrize("a,b,c", [(2.0, 1.0, 2.0), (1.0, 0.5, 1.0), (3.0, -2.0, 0.5), (1e-3, 1.0, 5.0)])
def test_jacobi_two_by_two(a, b, c):
    ev = symmetric_eigenvalues([[a, b], [b, c]])
    mid, rad = (a + c) / 2, math.hypot((a - c) / 2, b)
    assert ev == pytest.approx([mid - rad, mid + rad], abs=1e-12)


def test_jacobi_diagonal_identity_and_random():
    assert np.array_equal(symmetric_eigenvalues(np.diag([3.0, -1.0, 2.0])), [-1.0, 2.0, 3.0])
    assert np.array_equal(symmetric_eigenvalues(np.eye(5)), np.ones(5))
    rng = np.random.default_rng(2)
    X = rng.normal(size=(30, 30))
    S = X + X.T
    assert np.max(np.abs(symmetric_eigenvalues(S) - np.linalg.eigvalsh(S))) <= 1e-10
    with pytest.raises(InvalidArgument):
        symmetric_eigenvalues([[1.0, 2.0], [0.0, 1.0]])


def test_union_of_family_with_itself():
    fam = trig_basis(3, M=64)
    ev = symmetric_eigenvalues(gram_matrix(union_family(fam, fam)))
    assert ev == pytest.approx([0, 0, 0, 2, 2, 2], abs=1e-10)


def test_union_with_right_null_family():
    fam = trig_basis(8, M=128)
    alt = [0.2, -0.2] * 3
    lo, hi = riesz_bounds(union_family(fam, convolve_family(fam, "right-null", alpha=alt)))
    assert lo > 1e-6 and hi < 4
    # alpha = +0.2 maps the constant member to a constant: a repeated direction
    lo, _ = riesz_bounds(union_family(fam, convolve_family(fam, "right-null", alpha=0.2)))
    assert abs(lo) <= 1e-12


def test_spectral_envelopes():
    assert spectral_envelope("left-null", 0.3) == pytest.approx(((0.3 / 1.3) ** 2, (0.3 / 0.7) ** 2))
    assert spectral_envelope("right-null", 0.2) == pytest.approx((1 / 1.44, 1 / 0.64))
    assert spectral_envelope("left-null", 0.3, constant_modulus=False)[0] == 0.0
    with pytest.raises(ContractivityError):
        spectral_envelope("right-null", 1.0)
    with pytest.raises(InvalidArgument):
        spectral_envelope("sideways", 0.2)


def test_difference_family_within_envelope():
    fam = trig_basis(8, M=128)
    diff = convolve_family(fam, "difference", alpha=0.25)
    assert spectrum_report(diff, "difference", 0.25).within_envelope


def test_perturbation_constant_schedule():
    rep = perturbation_R(trig_basis(4, M=64), lambda_schedule("const", 1 / 3, 4))
    assert rep.R == pytest.approx(1.0, rel=1e-9)
    assert not rep.divergent and rep.empirical_within_R
    assert perturbation_R(trig_basis(4, M=64), lambda_schedule("const", 0.4, 4)).divergent


def test_frame_bounds_examples():
    r = frame_perturbation_bounds(1, 1, 0)
    assert (r.A_prime, r.B_prime, r.feasible) == (1.0, 1.0, True)
    r = frame_perturbation_bounds(2, 3, 2)
    assert r.A_prime == 0.0 and not r.feasible
    prev = frame_perturbation_bounds(1, 2, 0.0)
    for R in np.linspace(0.05, 0.95, 10):
        cur = frame_perturbation_bounds(1, 2, R)
        assert cur.A_prime < prev.A_prime and cur.B_prime > prev.B_prime
        prev = cur
    for args in [(0, 1, 0.1), (2, 1, 0.1), (1, 1, -0.1)]:
        with pytest.raises(InvalidArgument):
            frame_perturbation_bounds(*args)


def test_schedules():
    assert lambda_schedule("c/m", 0.3, 3) == pytest.approx([0.3, 0.15, 0.1])
    assert parse_schedule("const:0.2", 2) == [0.2, 0.2]
    with pytest.raises(ContractivityError):
        lambda_schedule("c/m", 1.5, 3)
    with pytest.raises(InvalidArgument):
        parse_schedule("0.3", 3)
    with pytest.raises(InvalidArgument):
        lambda_schedule("geometric", 0.3, 3)
