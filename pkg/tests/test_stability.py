from __future__ import annotations

import itertools
import json
import math

import mpmath
import numpy as np
import pytest

from sparseconv.addset import compression_bound_n
from sparseconv.numerics import hermitian_smallest_eigenvalue
from sparseconv.sequences import SparseSeq, Z, convolve, norm, toeplitz_gram
from sparseconv.stability import (
    BudgetExceeded,
    analytic_alpha_log2,
    analytic_alpha_log2_equal,
    analytic_terms,
    corollary_universal_bound,
    rho_min,
    rho_min_support,
    sharp_alpha_alternating,
    sharp_alpha_exhaustive,
    vandermonde_lambda_min_bound,
    vandermonde_min_det,
    vandermonde_min_det_search,
)


def test_rho_min_examples():
    assert rho_min(2, SparseSeq.delta(Z), 4) == pytest.approx(1.0)
    assert rho_min(1, SparseSeq.from_vector([0.5, 0.5]), 4) == pytest.approx(0.5)
    rng = np.random.default_rng(0)
    y = SparseSeq.from_vector(rng.normal(size=5) + 1j * rng.normal(size=5))
    full = np.linalg.eigvalsh(toeplitz_gram(y, 5).matrix)[0]
    assert rho_min(5, y, 5) == pytest.approx(full, abs=1e-12)


def test_rho_min_support_is_lexicographic_and_translation_invariant():
    y = SparseSeq.from_vector([1.0, -1.0])
    val, T = rho_min_support(1, y, 4)
    assert T == (0,) and val == pytest.approx(2.0)
    rng = np.random.default_rng(1)
    for _ in range(20):
        y = SparseSeq(Z, dict(zip([0, 1, 3], rng.normal(size=3) + 1j * rng.normal(size=3))))
        assert rho_min(2, y, 6) == pytest.approx(rho_min(2, y.shift(2), 6), abs=1e-10)


def test_rho_min_matches_jacobi_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(10):
        y = SparseSeq.from_vector(rng.normal(size=4) + 1j * rng.normal(size=4))
        B = toeplitz_gram(y, 6).matrix
        brute = min(
            hermitian_smallest_eigenvalue(B[np.ix_(T, T)]) for T in itertools.combinations(range(6), 3)
        )
        assert rho_min(3, y, 6) == pytest.approx(brute, abs=1e-12)


def test_rho_min_budget():
    with pytest.raises(BudgetExceeded):
        rho_min(12, SparseSeq.delta(Z), 26)


def _fine_grid_oracle_2_2_2():
    # y = (a, b) with a + b = 1; the smaller Gram eigenvalue is a^2 + b^2 - ab
    a = np.linspace(0, 1, 100001)
    b = 1 - a
    return float(np.min(a * a + b * b - a * b))


def test_sharp_two_two_two():
    r = sharp_alpha_exhaustive(2, 2, 2)
    assert _fine_grid_oracle_2_2_2() == pytest.approx(0.25, abs=1e-10)
    assert r.alpha == pytest.approx(0.5, abs=1e-6)
    x = r.witness_x
    y = r.witness_y
    assert abs(abs(x[0]) - abs(x[1])) < 1e-4
    assert abs(abs(y[0]) - 0.5) < 1e-4 and abs(abs(y[1]) - 0.5) < 1e-4


@pytest.mark.parametrize("f,n", [(2, 4), (3, 4), (4, 6)])
def test_sharp_s1_special_case(f, n):
    r = sharp_alpha_exhaustive(1, f, n)
    assert r.log2_alpha == pytest.approx(-0.5 * math.log2(f), abs=1e-6)


def test_sharp_f1_special_case():
    assert sharp_alpha_exhaustive(3, 1, 4).log2_alpha == pytest.approx(0.0, abs=1e-9)


def test_witnesses_reproduce_value(exhaustive):
    for args in [(2, 2, 3), (2, 3, 4), (3, 2, 4)]:
        r = exhaustive(*args)
        assert norm(r.witness_x, 2) == pytest.approx(1.0, rel=1e-12)
        assert norm(r.witness_y, 1) == pytest.approx(1.0, rel=1e-12)
        assert norm(convolve(r.witness_x, r.witness_y), 2) == pytest.approx(r.alpha, rel=1e-9)
        assert r.log2_alpha <= 0
        assert r.alpha > 0


def test_monotone_in_s_f_n(exhaustive):
    vals = {}
    for s, f in itertools.product((1, 2, 3), repeat=2):
        for n in range(max(s, f), 6):
            vals[s, f, n] = exhaustive(s, f, n).alpha
    for (s, f, n), a in vals.items():
        for nb in ((s + 1, f, n), (s, f + 1, n), (s, f, n + 1)):
            if nb in vals:
                assert vals[nb] <= a + 1e-7


def test_rho_min_dominates_sharp_square(exhaustive):
    rng = np.random.default_rng(2)
    n = 5
    for f in (2, 3):
        a2 = exhaustive(2, f, n).alpha ** 2
        for _ in range(30):
            pts = rng.choice(n, size=f, replace=False)
            vals = rng.normal(size=f) + 1j * rng.normal(size=f)
            y = SparseSeq(Z, dict(zip(pts.tolist(), vals)))
            y = y.scale(1 / norm(y, 1))
            assert rho_min(2, y, n) >= a2 - 1e-9


def test_exhaustive_budget_and_preconditions():
    with pytest.raises(BudgetExceeded):
        sharp_alpha_exhaustive(3, 3, 30)
    with pytest.raises(BudgetExceeded):
        sharp_alpha_exhaustive(1, 5, 6)


def test_alternating_upper_bounds_exhaustive(exhaustive):
    for args in [(2, 2, 3), (2, 3, 4), (3, 3, 5), (1, 3, 4)]:
        alt = sharp_alpha_alternating(*args, restarts=8, seed=1)
        assert alt.alpha >= exhaustive(*args).alpha - 1e-6
        assert alt.notes["upper_bound"] is True


def test_alternating_matches_two_two_two_and_is_deterministic():
    a = sharp_alpha_alternating(2, 2, 2, restarts=32, seed=5)
    b = sharp_alpha_alternating(2, 2, 2, restarts=32, seed=5)
    assert a.alpha == pytest.approx(0.5, abs=1e-6)
    assert a.dumps() == b.dumps()


def test_bound_result_json():
    r = sharp_alpha_exhaustive(1, 2, 2)
    data = json.loads(r.dumps())
    assert data["kind"] == "sharp_exhaustive"
    assert data["witness_x"]["group"] == {"type": "Z"}
    assert data["log2_alpha"] == float(f"{r.log2_alpha:.15g}")


def test_analytic_examples():
    assert analytic_alpha_log2(2, 2, 2) == pytest.approx(-7.5, abs=1e-14)
    assert analytic_alpha_log2(1, 4, 9) == pytest.approx(-1.0)
    assert analytic_alpha_log2(5, 1, 9) == 0.0
    # the proof-form expansion 2^{2f^2 - f^2 log(sf) + f log(s/2) - 1.5 log(4f)} n^{-f^2+f-1}
    for s, f, n in [(2, 2, 2), (3, 2, 7), (4, 5, 11)]:
        proof_form = (2 * f * f - f * f * math.log2(s * f) + f * math.log2(s / 2) - 1.5 * math.log2(4 * f)
                      + (-f * f + f - 1) * math.log2(n))
        assert analytic_alpha_log2(s, f, n) == pytest.approx(proof_form, abs=1e-12)
    assert sum(analytic_terms(3, 3, math.log2(7)).values()) == pytest.approx(analytic_alpha_log2(3, 3, 7))


def test_equal_form():
    assert analytic_alpha_log2_equal(2, 2) == pytest.approx(-2.5)
    assert analytic_alpha_log2_equal(2, 1) == pytest.approx(0.0)


def test_corollary_examples():
    assert corollary_universal_bound(1, 1).log2_alpha == 0
    r = corollary_universal_bound(2, 2)
    assert r.n == 3
    assert r.log2_alpha == pytest.approx(analytic_alpha_log2(2, 2, 3))


# log2 of the universal bound for s = f = 3, frozen to 15 significant digits
UNIVERSAL_3_3 = -70.8748959207832


def test_corollary_three_three_pinned_with_mpmath_oracle():
    r = corollary_universal_bound(3, 3)
    assert r.n == compression_bound_n(3, 3).n == 275
    assert float(f"{r.log2_alpha:.15g}") == UNIVERSAL_3_3
    with mpmath.workdps(40):
        lg = lambda v: mpmath.log(v, 2)  # noqa: E731
        oracle = -9 * lg(mpmath.mpf(9) / 4) + 3 * lg(mpmath.mpf(3) / 2) - mpmath.mpf(3) / 2 * lg(12) - 7 * lg(275)
    assert r.log2_alpha == pytest.approx(float(oracle), abs=1e-12)
    # far below the order-of-magnitude remark of 2^-37
    assert r.log2_alpha < -37


def test_vandermonde_min_det_examples():
    assert vandermonde_min_det(2, 4) == pytest.approx(2.0)
    for f in range(2, 6):
        for M in range(2 * f - 1, 40):
            assert vandermonde_min_det(f, M) > 2.0 ** (2 * f * f - 4) * M ** (-f * (f - 1))
    # equality case at the edge of the range
    assert vandermonde_min_det(2, 2) == pytest.approx(2.0 ** 4 * 2.0 ** -2)
    with pytest.raises(Exception):
        vandermonde_min_det(5, 4)


def test_vandermonde_exhaustive_argmin():
    J, val = vandermonde_min_det_search(3, 8, 8 * 3 * 3)
    assert J == (0, 1, 2)
    assert val == pytest.approx(vandermonde_min_det(3, 72), rel=1e-9)


def test_vandermonde_lambda_min_bound():
    b = vandermonde_lambda_min_bound([0], 2)
    assert b.lambda_min == pytest.approx(1.0) and b.bound == pytest.approx(1.0)
    b = vandermonde_lambda_min_bound([0, 1], 4)
    assert b.bound == pytest.approx(2.0 / 4)
    assert b.holds
    rng = np.random.default_rng(3)
    for _ in range(200):
        M = int(rng.integers(2, 65))
        d = int(rng.integers(1, min(5, M) + 1))
        J = rng.choice(M, size=d, replace=False).tolist()
        assert vandermonde_lambda_min_bound(J, M).holds
    with pytest.raises(Exception):
        vandermonde_lambda_min_bound([1, 1], 4)
