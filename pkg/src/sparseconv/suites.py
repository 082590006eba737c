"""Seeded property suites behind ``sparseconv verify``."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .addset import (
    PointSet,
    compress_convolution,
    freiman_dim_exact,
    freiman_dim_formula,
    log_factorial_bound,
    min_diameter_search,
)
from .sequences import Group, SparseSeq, Z, bernstein_check, convolve, norm, young_check
from .stability import vandermonde_lambda_min_bound, vandermonde_min_det, vandermonde_min_det_search

__all__ = ["SUITES", "SuiteReport", "run_suite", "random_seq", "torsion_pairs"]


@dataclass
class SuiteReport:
    name: str
    checks: int = 0
    failures: int = 0
    messages: list[str] = field(default_factory=list)

    def check(self, ok: bool, what: str) -> None:
        self.checks += 1
        if not ok:
            self.failures += 1
            if self.failures <= 10:
                self.messages.append(f"FAIL {what}")

    def note(self, text: str) -> None:
        self.messages.append(f"note {text}")

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def summary(self) -> str:
        status = "ok" if self.ok else "FAILED"
        return f"{self.name}: {self.checks - self.failures}/{self.checks} passed [{status}]"


def _unit_disc(rng: np.random.Generator, k: int) -> np.ndarray:
    r = np.sqrt(rng.uniform(size=k))
    return r * np.exp(2j * np.pi * rng.uniform(size=k))


def random_seq(rng: np.random.Generator, group: Group, max_support: int, width: int) -> SparseSeq:
    """Random sequence with 1..max_support points in ``[0, width)^d``, amplitudes in the unit disc."""
    k = int(rng.integers(1, max_support + 1))
    pts = set()
    while len(pts) < k:
        pts.add(tuple(int(c) for c in rng.integers(0, width, size=group.arity)))
    return SparseSeq(group, dict(zip(sorted(pts), _unit_disc(rng, k))))


def torsion_pairs(N: int) -> dict[str, tuple[SparseSeq, SparseSeq]]:
    """The two cancelling pairs on ``Z_N``, plus the second one as printed."""
    G = Group.cyclic(N)
    pairs = {
        "difference_vs_constant": (
            SparseSeq(G, {0: 1, 1: -1}),
            SparseSeq(G, {i: 1 for i in range(N)}),
        )
    }
    if N % 2 == 0:
        h = N // 2
        pairs["half_period_corrected"] = (SparseSeq(G, {0: 1, h: 1}), SparseSeq(G, {0: 1, h: -1}))
        pairs["half_period_as_printed"] = (SparseSeq(G, {0: 1, h: 1}), SparseSeq(G, {1: 1, h: -1}))
    return pairs


def suite_young(seed: int = 0, trials: int = 1000) -> SuiteReport:
    rep = SuiteReport("young")
    rng = np.random.default_rng(seed)
    triples = [(2.0, 1.0, 2.0), (1.0, 1.0, 1.0), (2.0, 2.0, math.inf), (1.5, 1.5, 3.0)]
    for t in range(trials):
        x = random_seq(rng, Z, 6, 12)
        y = random_seq(rng, Z, 6, 12)
        p, q, r = triples[t % len(triples)]
        res = young_check(x, y, p, q, r)
        rep.check(res.holds, f"trial {t} {(p, q, r)}: {res.lhs} > {res.rhs}")
    return rep


def suite_bernstein(seed: int = 0, trials: int = 1000) -> SuiteReport:
    rep = SuiteReport("bernstein")
    rng = np.random.default_rng(seed)
    for t in range(trials):
        n = int(rng.integers(1, 17))
        k = int(rng.integers(1, n + 2))
        pts = rng.choice(n + 1, size=k, replace=False)
        x = SparseSeq(Z, dict(zip(pts.tolist(), _unit_disc(rng, k))))
        res = bernstein_check(x, n, grid=2048)
        rep.check(res.holds, f"trial {t}: max_dp={res.max_dp} bound={res.bound_angular}")
    return rep


def suite_compression(seed: int = 0, trials: int = 100) -> SuiteReport:
    rep = SuiteReport("compression")
    rng = np.random.default_rng(seed)
    G2 = Group.lattice(2)
    for t in range(trials):
        x = random_seq(rng, G2, 4, 6)
        y = random_seq(rng, G2, 4, 6)
        res = compress_convolution(x, y, "base_expand")
        conv = convolve(x, y)
        conv_t = convolve(res.x_tilde, res.y_tilde)
        pairs = [
            (norm(conv, 2), norm(conv_t, 2)),
            (norm(conv, 1), norm(conv_t, 1)),
            (norm(conv, math.inf), norm(conv_t, math.inf)),
            (norm(x, 2), norm(res.x_tilde, 2)),
            (norm(y, 1), norm(res.y_tilde, 1)),
        ]
        ok = all(abs(a - b) <= 1e-12 * max(a, b) for a, b in pairs)
        rep.check(ok and res.verify(x, y) and res.phi.verified, f"pair {t}: norms {pairs}")
    # desk-scale Konyagin-Lev check; exceeding 2^(m-2) is logged, not failed
    for A in ([0, 1, 2, 4], [0, 1, 2, 4, 8], [0, 5, 10], [0, 1, 3, 7, 15]):
        phi = min_diameter_search(PointSet(Z, A))
        m = len(A)
        rep.check(phi.verified, f"search map for {A} not verified")
        if phi.diameter > 2 ** (m - 2):
            rep.note(f"{A}: minimal diameter {phi.diameter} exceeds 2^(m-2) = {2 ** (m - 2)}")
    return rep


def suite_torsion(seed: int = 0) -> SuiteReport:
    rep = SuiteReport("torsion")
    for N in (4, 6, 8, 100):
        for name, (x, y) in torsion_pairs(N).items():
            conv = convolve(x, y)
            if name == "half_period_as_printed":
                rep.note(f"N={N} printed pair leaves {len(conv)} nonzero entries")
                continue
            rep.check(len(conv) == 0, f"N={N} {name}: {conv}")
        # the same sequences on Z never cancel
        x = SparseSeq(Z, {0: 1, 1: -1})
        y = SparseSeq(Z, {i: 1 for i in range(N)})
        rep.check(len(convolve(x, y)) == 2, f"N={N} line convolution should keep two entries")
    return rep


def suite_vandermonde(seed: int = 0) -> SuiteReport:
    rep = SuiteReport("vandermonde")
    Ms = sorted({n * s * f for n in range(1, 9) for s in (1, 2, 3) for f in (1, 2, 3)})
    for M in Ms:
        for d in range(1, 5):
            for J in itertools.combinations(range(min(8, M)), d):
                b = vandermonde_lambda_min_bound(J, M)
                rep.check(b.holds, f"J={J} M={M}: {b.lambda_min} < {b.bound}")
    for n in range(2, 9):
        for s in (2, 3):
            for f in (2, 3):
                M = n * s * f
                if f > n:
                    continue
                J, val = vandermonde_min_det_search(f, n, M)
                rep.check(J == tuple(range(f)), f"argmin for f={f} n={n} M={M} was {J}")
                closed = vandermonde_min_det(f, M)
                rep.check(abs(closed - val) <= 1e-9 * closed, f"sine product {closed} vs scan {val}")
                lower = 2.0 ** (2 * f * f - 4) * M ** (-f * (f - 1))
                rep.check(closed > lower, f"f={f} M={M}: {closed} <= {lower}")
    return rep


def suite_dimension(seed: int = 0, trials: int = 1000) -> SuiteReport:
    rep = SuiteReport("dimension")
    rng = np.random.default_rng(seed)
    violations = 0
    for t in range(trials):
        m = int(rng.integers(1, 9))
        A = PointSet(Z, rng.choice(40, size=m, replace=False).tolist())
        b = freiman_dim_exact(A)
        if not b.consistent:
            violations += 1
        rep.check(b.consistent, f"A={A.ints()}: d_exact={b.d_exact} > d_formula={b.d_formula}")
    if violations:
        rep.note(f"{violations}/{trials} random sets have d_exact > d_formula")
    for m in (1, 2, 3):
        rep.check(freiman_dim_formula(m) == 1, f"formula at m={m}")
    for d in range(1, 21):
        rep.check(math.log2(math.factorial(d)) <= log_factorial_bound(d), f"log-factorial bound at d={d}")
    return rep


SUITES: dict[str, Callable[..., SuiteReport]] = {
    "young": suite_young,
    "bernstein": suite_bernstein,
    "compression": suite_compression,
    "torsion": suite_torsion,
    "vandermonde": suite_vandermonde,
    "dimension": suite_dimension,
}


def run_suite(name: str, seed: int = 0) -> list[SuiteReport]:
    if name == "all":
        return [fn(seed) for fn in SUITES.values()]
    if name not in SUITES:
        raise KeyError(name)
    return [SUITES[name](seed)]
