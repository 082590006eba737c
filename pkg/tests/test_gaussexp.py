from __future__ import annotations

import math

import mpmath
import pytest

from sparseconv.gaussexp import (
    CSV_HEADER,
    gaussian_ratio,
    make_pair,
    optimal_sigma,
    pipeline_log_ratio,
    records_to_csv,
    sweep,
)


def mp_log_ratio(s: int, sigma: float, dps: int = 60) -> float:
    """Independent high-precision oracle via direct convolution."""
    with mpmath.workdps(dps):
        h = (s - 1) // 2
        sig = mpmath.mpf(sigma)
        g = {k: mpmath.exp(-mpmath.mpf(k * k) / sig) for k in range(-h, h + 1)}
        conv = {}
        for a in g:
            for b in g:
                conv[a + b] = conv.get(a + b, 0) + (-1) ** (a % 2) * g[a] * g[b]
        num = mpmath.fsum(v * v for v in conv.values())
        g2 = mpmath.fsum(v * v for v in g.values())
        return float(mpmath.log(num) / 2 - mpmath.log(g2))


def test_make_pair_examples():
    p = make_pair(3, 1)
    assert [p.g[k] for k in (-1, 0, 1)] == [math.exp(-1), 1, math.exp(-1)]
    assert p.mg[0] == 1 and p.mg[1] == -math.exp(-1) and p.mg[-1] == -math.exp(-1)
    big = make_pair(71, 35)
    assert len(big.g) == len(big.mg) == 71
    assert all(big.g[k] == big.g[-k] for k in range(36))
    with pytest.raises(ValueError):
        make_pair(4, 1.0)


def test_two_paths_agree_small():
    p = make_pair(3, 1.0)
    r = gaussian_ratio(p)
    assert math.exp(r.log_ratio) == pytest.approx(math.exp(pipeline_log_ratio(p)), rel=1e-12)
    assert r.log_ratio < 0


def test_two_path_consistency_native_regime():
    for s in range(3, 32, 2):
        for sigma in range(2, 17):
            p = make_pair(s, float(sigma))
            r = gaussian_ratio(p, "native")
            if math.exp(r.log_ratio) > 1e-12:
                assert abs(math.expm1(r.log_ratio - pipeline_log_ratio(p))) <= 1e-10


@pytest.mark.parametrize("s,sigma", [(3, 1.0), (11, 5.0), (31, 15.0), (51, 25.0), (71, 35.0)])
def test_extended_matches_mpmath(s, sigma):
    r = gaussian_ratio(make_pair(s, sigma), "extended")
    assert r.log_ratio == pytest.approx(mp_log_ratio(s, sigma), abs=1e-12)


def test_native_precision_breaks_down_at_large_s():
    p = make_pair(71, 35.0)
    assert gaussian_ratio(p).precision_used == "extended"
    native = gaussian_ratio(p, "native").log_ratio
    assert abs(native - mp_log_ratio(71, 35.0)) > 0.1


def test_ratio_at_most_one_and_scale_invariant():
    for s in (3, 7, 15):
        for sigma in (0.5, 2.0, 9.0):
            p = make_pair(s, sigma)
            r = gaussian_ratio(p, "native")
            assert r.log_ratio <= 0
            assert r.log_ratio_l1 <= r.log_ratio
            scaled = gaussian_ratio(p.scaled(1e3), "native")
            assert scaled.log_ratio == pytest.approx(r.log_ratio, abs=1e-12)


def test_s71_midpoint_against_minus_s_over_2():
    r = gaussian_ratio(make_pair(71, 35.0))
    # the e^{-s/2} comparison does not hold at s = 71
    assert r.log_ratio == pytest.approx(-37.4533896437, abs=1e-9)
    assert r.log_ratio < -71 / 2


def test_midpoint_claim_holds_only_for_small_s():
    holds = {s: gaussian_ratio(make_pair(s, (s - 1) / 2)).log_ratio >= -s / 2 for s in range(3, 72, 2)}
    assert all(holds[s] for s in range(3, 16, 2))
    assert not any(holds[s] for s in range(17, 72, 2))


def test_sweep_order_and_signs():
    recs = sweep([3], [0.5, 1.0])
    assert [(r.s, r.sigma) for r in recs] == [(3, 0.5), (3, 1.0)]
    assert all(r.log_ratio < 0 for r in recs)
    recs = sweep([5, 3], [2.0, 1.0])
    assert [(r.s, r.sigma) for r in recs] == [(5, 2.0), (5, 1.0), (3, 2.0), (3, 1.0)]


def test_sweep_parallel_matches_serial():
    a = sweep([3, 11, 35], [1.0, 4.5, 9.0], workers=1)
    b = sweep([3, 11, 35], [1.0, 4.5, 9.0], workers=2)
    assert a == b


def test_grid_argmin_in_band_and_minimum_decreasing():
    grid = [0.5 * k for k in range(1, 101)]
    recs = sweep(list(range(11, 72, 10)), grid)
    minima = []
    for s in range(11, 72, 10):
        rows = [r for r in recs if r.s == s]
        best = min(rows, key=lambda r: r.log_ratio)
        assert 0.3 * s <= best.sigma <= 0.7 * s
        minima.append(best.log_ratio)
    assert all(a > b for a, b in zip(minima, minima[1:]))


def test_optimal_sigma_examples():
    o11 = optimal_sigma(11)
    assert abs(o11.sigma_star - 5) <= 1.0
    o31 = optimal_sigma(31)
    assert abs(o31.sigma_star - 15) <= 1.5
    # the optimum sits below -s/2 already at s = 11
    assert o11.log_ratio_star < -11 / 2
    assert o31.log_ratio_star < -31 / 2


def test_csv_format():
    text = records_to_csv(sweep([3], [1.0]))
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    s, sigma, ln, l2, prec = lines[1].split(",")
    assert (s, sigma, prec) == ("3", "1", "native")
    assert float(l2) == pytest.approx(float(ln) / math.log(2), rel=1e-14)
