from __future__ import annotations

import math
from decimal import Decimal, getcontext

import numpy as np
import pytest

from sparseconv.addset import (
    FreimanMap,
    NotFound,
    PointSet,
    base_expand_compress,
    compress_convolution,
    compression_bound,
    compression_bound_n,
    diffset,
    freiman_dim_exact,
    freiman_dim_formula,
    log_factorial_bound,
    min_diameter_search,
    sumset,
    verify_freiman_order2,
)
from sparseconv.sequences import Group, GroupError, SparseSeq, Z, convolve, norm
from sparseconv.suites import random_seq


def ps(*pts):
    return PointSet(Z, pts)


def test_sumset_examples():
    assert sumset(ps(0), ps(0, 1)).ints() == [0, 1]
    assert sumset(ps(0, 1), ps(0, 1)).ints() == [0, 1, 2]
    assert sumset(ps(0, 1, 3), ps(0, 1, 3)).ints() == [0, 1, 2, 3, 4, 6]


def test_diffset_examples():
    assert diffset(ps(0), ps(0)).ints() == [0]
    assert diffset(ps(0, 1), ps(0, 1)).ints() == [-1, 0, 1]
    assert diffset(ps(0, 1, 3), ps(0, 1, 3)).ints() == [-3, -2, -1, 0, 1, 2, 3]


def test_group_mismatch_and_validation():
    with pytest.raises(GroupError):
        sumset(ps(0), PointSet(Group.lattice(2), [(0, 0)]))
    with pytest.raises(ValueError):
        PointSet(Z, [])
    with pytest.raises(GroupError):
        PointSet(Group.cyclic(4), [0])
    with pytest.raises(ValueError):
        PointSet.from_json({"group": {"type": "Z"}, "points": [[1], [1]]})


def test_verify_freiman_examples():
    A = ps(0, 1, 2)
    assert verify_freiman_order2(FreimanMap(A, {(0,): 0, (1,): 1, (2,): 2}))
    bad = FreimanMap(A, {(0,): 0, (1,): 1, (2,): 3})
    assert not verify_freiman_order2(bad)
    assert not bad.verified
    B = PointSet(Group.lattice(2), [(0, 0), (1, 0), (0, 1)])
    assert base_expand_compress(B).verified


def _quadruple_check(phi):
    pts = list(phi.images)
    for a in pts:
        for b in pts:
            for c in pts:
                for d in pts:
                    same = tuple(x + y for x, y in zip(a, b)) == tuple(x + y for x, y in zip(c, d))
                    img = phi.images[a] + phi.images[b] == phi.images[c] + phi.images[d]
                    if same != img:
                        return False
    return True


def test_pair_partition_check_agrees_with_quadruples():
    rng = np.random.default_rng(0)
    for _ in range(300):
        m = int(rng.integers(1, 7))
        A = PointSet(Z, rng.choice(12, size=m, replace=False).tolist())
        imgs = rng.choice(20, size=len(A), replace=False)
        phi = FreimanMap(A, dict(zip(A.points, imgs.tolist())))
        assert verify_freiman_order2(phi) == _quadruple_check(phi)


def test_freiman_map_must_be_injective():
    with pytest.raises(ValueError):
        FreimanMap(ps(0, 1), {(0,): 0, (1,): 0})


def test_dim_formula_values():
    assert [freiman_dim_formula(m) for m in (1, 2, 3)] == [1, 1, 1]
    assert freiman_dim_formula(4) == 2
    assert freiman_dim_formula(10) == 6
    for m in range(5, 60):
        assert freiman_dim_formula(m) <= m - math.sqrt(m) - 1 + 1


def test_dim_exact_examples():
    b = freiman_dim_exact(ps(0, 1, 2, 3))
    assert (b.sumset_size, b.d_exact) == (7, 1)
    assert freiman_dim_exact(ps(0)).d_exact == 1
    b = freiman_dim_exact(ps(0, 1, 2, 4))
    # |A+A| is 8 here (0..6 and 8), which still needs d = 2
    assert (b.sumset_size, b.diffset_size, b.d_exact) == (8, 9, 2)


def test_dim_exact_can_exceed_formula_for_sidon_sets():
    # {0,1,3} has |A+A| = 6 > 5, so d_exact = 2 while the formula gives 1
    b = freiman_dim_exact(ps(0, 1, 3))
    assert (b.d_exact, b.d_formula) == (2, 1)
    assert not b.consistent


def _decimal_log2(x: Decimal) -> Decimal:
    return x.ln() / Decimal(2).ln()


def test_compression_bound_small_m():
    assert [compression_bound(m).n for m in (1, 2, 3, 4)] == [1, 2, 3, 5]
    assert compression_bound_n(2, 2).n == 3
    assert compression_bound_n(3, 3).m == 5


def test_compression_bound_m5_against_decimal_oracle():
    getcontext().prec = 50
    t = Decimal(5) - Decimal(5).sqrt()
    e = 2 * t * _decimal_log2(t)
    value = (e * Decimal(2).ln()).exp()
    cb = compression_bound(5)
    assert cb.n == int(value) == 275
    assert cb.log2_n == pytest.approx(float(e), rel=1e-15)


def test_compression_bound_monotone_and_overflow_flag():
    ns = [compression_bound(m) for m in range(1, 14)]
    for a, b in zip(ns, ns[1:]):
        assert a.log2_n <= b.log2_n
        if a.n is not None and b.n is not None:
            assert a.n <= b.n
    big = compression_bound(40)
    assert big.exceeds_int_range and big.n is None and big.log2_n > 63


def test_log_factorial_bound():
    assert log_factorial_bound(1) == pytest.approx(2 - 1 / math.log(2))
    assert log_factorial_bound(2) == pytest.approx(3 * math.log2(3) - 2 / math.log(2))
    for d in range(1, 21):
        assert math.log2(math.factorial(d)) <= log_factorial_bound(d)


def test_base_expand_examples():
    A = PointSet(Group.lattice(2), [(0, 0), (1, 0), (0, 1)])
    phi = base_expand_compress(A)
    assert phi.image == [0, 1, 3]
    line = base_expand_compress(ps(5, 7, 12))
    assert line.image == [0, 2, 7]


def test_base_expand_randomized():
    rng = np.random.default_rng(1)
    G = Group.lattice(2)
    for _ in range(100):
        m = int(rng.integers(1, 7))
        pts = {tuple(rng.integers(-5, 6, size=2).tolist()) for _ in range(m)}
        assert base_expand_compress(PointSet(G, pts)).verified


def test_min_diameter_examples():
    assert min_diameter_search(ps(0, 5, 10)).image == [0, 1, 2]
    assert min_diameter_search(ps(0, 1, 2, 4)).diameter == 4
    assert min_diameter_search(ps(0, 1, 2, 4, 8)).diameter == 8


def _brute_min_diameter(A):
    # independent oracle: try every image set in increasing diameter
    import itertools

    pts = list(A.points)
    m = len(pts)
    for D in range(m - 1, 20):
        for rest in itertools.permutations(range(1, D + 1), m - 1):
            for zero_at in range(m):
                imgs = list(rest[:zero_at]) + [0] + list(rest[zero_at:])
                if max(imgs) != D:
                    continue
                phi = FreimanMap(A, dict(zip(pts, imgs)))
                if verify_freiman_order2(phi):
                    return D
    return None


def test_min_diameter_matches_brute_force():
    rng = np.random.default_rng(2)
    for _ in range(15):
        m = int(rng.integers(2, 5))
        A = PointSet(Z, rng.choice(15, size=m, replace=False).tolist())
        assert min_diameter_search(A).diameter == _brute_min_diameter(A)


def test_min_diameter_konyagin_lev_desk_scale(capsys):
    # Sidon sets need a Golomb ruler: 5 marks need length 11 > 2^3
    rng = np.random.default_rng(3)
    exceed = []
    for A in [ps(0, 1, 3, 7, 15)] + [PointSet(Z, rng.choice(30, size=4, replace=False).tolist()) for _ in range(10)]:
        phi = min_diameter_search(A)
        assert phi.verified
        if phi.diameter > 2 ** (len(A) - 2):
            exceed.append((A.ints(), phi.diameter))
    print("sets above 2^(m-2):", exceed)
    assert ([0, 1, 3, 7, 15], 11) in exceed


def test_min_diameter_limits():
    with pytest.raises(NotFound):
        min_diameter_search(ps(0, 1, 3, 7), n_max=5)
    with pytest.raises(ValueError):
        min_diameter_search(PointSet(Z, range(7)))


def test_compress_trivial():
    G = Group.lattice(2)
    d = SparseSeq.delta(G)
    res = compress_convolution(d, d)
    assert res.x_tilde == SparseSeq.delta(Z) and res.y_tilde == SparseSeq.delta(Z)


def test_compress_two_axis_pair():
    rng = np.random.default_rng(4)
    G = Group.lattice(2)
    x = SparseSeq(G, {(0, 0): complex(*rng.normal(size=2)), (1, 0): complex(*rng.normal(size=2))})
    y = SparseSeq(G, {(0, 0): complex(*rng.normal(size=2)), (0, 1): complex(*rng.normal(size=2))})
    for strategy in ("base_expand", "search"):
        res = compress_convolution(x, y, strategy)
        a = norm(convolve(x, y), 2)
        b = norm(convolve(res.x_tilde, res.y_tilde), 2)
        assert a == pytest.approx(b, rel=1e-12)
        assert res.verify(x, y)


def test_compress_randomized_norm_identities():
    rng = np.random.default_rng(5)
    G = Group.lattice(2)
    for _ in range(100):
        x = random_seq(rng, G, 4, 6).shift((-3, 2))
        y = random_seq(rng, G, 4, 6)
        res = compress_convolution(x, y)
        assert res.verify(x, y)
        assert all(0 <= p[0] < res.n for p in list(res.x_tilde) + list(res.y_tilde))
        conv, conv_t = convolve(x, y), convolve(res.x_tilde, res.y_tilde)
        for r in (1.0, 2.0, math.inf):
            assert norm(conv, r) == pytest.approx(norm(conv_t, r), rel=1e-12)
        assert norm(x, 2) == pytest.approx(norm(res.x_tilde, 2), rel=1e-15)
        assert norm(y, 1) == pytest.approx(norm(res.y_tilde, 1), rel=1e-15)
        for g in conv:
            assert conv[g] == pytest.approx(conv_t[res.point_map(g)], abs=1e-14)


def test_compress_rejects_cyclic():
    G = Group.cyclic(5)
    with pytest.raises(GroupError):
        compress_convolution(SparseSeq.delta(G), SparseSeq.delta(G))
