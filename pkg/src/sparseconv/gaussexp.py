"""Truncated Gaussian pairs and the cancellation in their convolution.

``g(k) = exp(-k^2 / sigma)`` on ``|k| <= (s-1)/2`` and its modulation
``Mg(k) = (-1)^k g(k)`` have almost disjoint spectra, so ``Mg * g`` is tiny.
The ratio ``||Mg * g||_2 / (||Mg||_2 ||g||_2)`` is computed from the
explicit double sums

    ||Mg * g||^2 = 2 sum_{l=1}^{2h} c_l^2 + c_0^2,
    c_l = sum_{k=l-h}^{h} (-1)^k g(k) g(l-k),

with ``h = (s-1)/2``; every inner sum is accumulated exactly.  For large
``s`` the amplitudes themselves must carry more than double precision,
which the "extended" path provides through double-double exponentials.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .numerics import ExtendedReal, _dd_div, _dd_exp, _dd_mul, _extended_sum_arrays, _two_prod
from .sequences import Z, SparseSeq, convolve, norm

__all__ = [
    "CSV_HEADER",
    "EXTENDED_THRESHOLD",
    "GaussianPair",
    "SweepRecord",
    "gaussian_ratio",
    "make_pair",
    "optimal_sigma",
    "pipeline_log_ratio",
    "records_to_csv",
    "sweep",
]

EXTENDED_THRESHOLD = 1e-7
CSV_HEADER = ["s", "sigma", "log_ratio_nat", "log2_ratio", "precision"]


@dataclass(frozen=True)
class GaussianPair:
    s: int
    sigma: float
    g: SparseSeq
    mg: SparseSeq

    @property
    def half_width(self) -> int:
        return (self.s - 1) // 2

    def scaled(self, c: float) -> "GaussianPair":
        """Same pair with both amplitude vectors multiplied by ``c``."""
        return GaussianPair(self.s, self.sigma, self.g.scale(c), self.mg.scale(c))


def make_pair(s: int, sigma: float) -> GaussianPair:
    if s < 3 or s % 2 == 0:
        raise ValueError(f"s must be odd and >= 3, got {s}")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    h = (s - 1) // 2
    g = {k: math.exp(-k * k / sigma) for k in range(-h, h + 1)}
    mg = {k: (-1) ** (k % 2) * v for k, v in g.items()}
    return GaussianPair(s, float(sigma), SparseSeq(Z, g), SparseSeq(Z, mg))


@dataclass(frozen=True)
class SweepRecord:
    s: int
    sigma: float
    log_ratio: float  # ln(||Mg*g||_2 / (||Mg||_2 ||g||_2))
    precision_used: str
    log_ratio_l1: float  # ln(||Mg*g||_2 / (||Mg||_2 ||g||_1))

    @property
    def log2_ratio(self) -> float:
        return self.log_ratio / math.log(2)

    def csv_row(self) -> list[str]:
        return [str(self.s), f"{self.sigma:.15g}", f"{self.log_ratio:.15g}", f"{self.log2_ratio:.15g}", self.precision_used]


def _index_grid(h: int) -> tuple[np.ndarray, np.ndarray]:
    """``(l, k)`` for ``0 <= l <= 2h`` and ``l - h <= k <= h``."""
    ls, ks = [], []
    for l in range(0, 2 * h + 1):
        for k in range(l - h, h + 1):
            ls.append(l)
            ks.append(k)
    return np.array(ls), np.array(ks)


def _assemble(c_hi: np.ndarray, c_lo: np.ndarray) -> ExtendedReal:
    """``2 sum_{l>=1} c_l^2 + c_0^2`` as a double-double."""
    sq_hi, sq_lo = _dd_mul(c_hi, c_lo, c_hi, c_lo)
    w = np.where(np.arange(len(c_hi)) == 0, 1.0, 2.0)
    return ExtendedReal(*_extended_sum_arrays(sq_hi * w, sq_lo * w))


def _grouped_sums(l_idx: np.ndarray, hi: np.ndarray, lo: np.ndarray, count: int):
    out_hi = np.zeros(count)
    out_lo = np.zeros(count)
    bounds = np.searchsorted(l_idx, np.arange(count + 1))
    for l in range(count):
        a, b = bounds[l], bounds[l + 1]
        out_hi[l], out_lo[l] = _extended_sum_arrays(hi[a:b], lo[a:b])
    return out_hi, out_lo


def _ratio_native(pair: GaussianPair) -> tuple[ExtendedReal, ExtendedReal, float]:
    """Explicit sums over the pair's stored double amplitudes (exact products)."""
    h = pair.half_width
    l_idx, k_idx = _index_grid(h)
    a = np.array([pair.mg[k].real for k in k_idx])
    b = np.array([pair.g[l - k].real for l, k in zip(l_idx, k_idx)])
    p, e = _two_prod(a, b)
    c_hi, c_lo = _grouped_sums(l_idx, p, e, 2 * h + 1)
    num = _assemble(c_hi, c_lo)
    gv = np.array([v.real for v in pair.g.values()])
    mv = np.array([v.real for v in pair.mg.values()])
    g2 = ExtendedReal(*_extended_sum_arrays(*_two_prod(gv, gv)))
    m2 = ExtendedReal(*_extended_sum_arrays(*_two_prod(mv, mv)))
    g1 = math.fsum(np.abs(gv))
    return num, g2 * m2, g1


def _gauss_dd(numer: np.ndarray, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    """``exp(-numer / sigma)`` as double-double arrays (``numer`` integer)."""
    qhi, qlo = _dd_div(numer.astype(float), np.zeros(len(numer)), sigma, 0.0)
    return _dd_exp(-qhi, -qlo)


def _ratio_extended(s: int, sigma: float) -> tuple[ExtendedReal, ExtendedReal, float]:
    """Explicit sums with each product ``g(k) g(l-k)`` evaluated to ~32 digits."""
    h = (s - 1) // 2
    l_idx, k_idx = _index_grid(h)
    numer = k_idx**2 + (l_idx - k_idx) ** 2
    hi, lo = _gauss_dd(numer, sigma)
    sign = np.where(k_idx % 2 == 0, 1.0, -1.0)
    c_hi, c_lo = _grouped_sums(l_idx, sign * hi, sign * lo, 2 * h + 1)
    num = _assemble(c_hi, c_lo)
    k = np.arange(1, h + 1)
    ehi, elo = _gauss_dd(2 * k**2, sigma)
    g2 = ExtendedReal(*_extended_sum_arrays(np.concatenate([[1.0], 2 * ehi]), 2 * elo))
    ghi, glo = _gauss_dd(k**2, sigma)
    g1 = float(ExtendedReal(*_extended_sum_arrays(np.concatenate([[1.0], 2 * ghi]), 2 * glo)))
    return num, g2 * g2, g1


def _predicted_ratio(s: int) -> float:
    return math.exp(-s / 2)


def gaussian_ratio(pair: GaussianPair, precision: str = "auto") -> SweepRecord:
    """Log of the l2-normalised convolution ratio of a Gaussian pair.

    ``precision`` is "native" (stored double amplitudes), "extended"
    (amplitudes recomputed in double-double from ``s`` and ``sigma``) or
    "auto", which escalates when ``exp(-s/2) < 1e-7``.
    """
    if precision == "auto":
        precision = "extended" if _predicted_ratio(pair.s) < EXTENDED_THRESHOLD else "native"
    if precision == "native":
        num, den, g1 = _ratio_native(pair)
    elif precision == "extended":
        num, den, g1 = _ratio_extended(pair.s, pair.sigma)
    else:
        raise ValueError(f"unknown precision {precision!r}")
    if float(num) <= 0.0:
        log_ratio = -math.inf
    else:
        log_ratio = 0.5 * (num.log() - den.log())
    # ||Mg||_2 = ||g||_2 = den^(1/4)
    log_l1 = 0.5 * num.log() - 0.25 * den.log() - math.log(g1) if float(num) > 0 else -math.inf
    return SweepRecord(pair.s, pair.sigma, log_ratio, precision, log_l1)


def pipeline_log_ratio(pair: GaussianPair) -> float:
    """The same ratio through the generic ``convolve`` and ``norm`` functions."""
    conv = convolve(pair.mg, pair.g)
    return math.log(norm(conv, 2)) - math.log(norm(pair.mg, 2)) - math.log(norm(pair.g, 2))


def _one(args) -> SweepRecord:
    s, sigma, precision = args
    return gaussian_ratio(make_pair(s, sigma), precision)


def _workers() -> int:
    raw = os.environ.get("SPARSECONV_THREADS")
    if raw is None or raw == "":
        return 1
    n = int(raw)
    if n == 0:
        return os.cpu_count() or 1
    return max(1, n)


def sweep(
    s_values: Sequence[int],
    sigma_grid: Sequence[float],
    precision: str = "auto",
    workers: int | None = None,
) -> list[SweepRecord]:
    """Cartesian sweep in s-major order.

    ``workers`` defaults to the ``SPARSECONV_THREADS`` setting (unset means
    serial, 0 means one per CPU).
    """
    if not s_values or not sigma_grid:
        raise ValueError("s_values and sigma_grid must be nonempty")
    for s in s_values:
        if s < 3 or s % 2 == 0:
            raise ValueError(f"s must be odd and >= 3, got {s}")
    jobs = [(int(s), float(sig), precision) for s in s_values for sig in sigma_grid]
    n = workers if workers is not None else _workers()
    if n <= 1:
        return [_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(_one, jobs, chunksize=8))


@dataclass(frozen=True)
class OptimalSigma:
    s: int
    sigma_star: float
    log_ratio_star: float
    grid_sigma: float


def optimal_sigma(s: int, lo: float = 0.5, hi: float | None = None, tol: float = 0.1,
                  precision: str = "auto") -> OptimalSigma:
    """Grid search with step 0.5 on ``[lo, hi]``, then golden-section refinement."""
    if hi is None:
        hi = 1.5 * s
    if not 0 < lo < hi:
        raise ValueError("need 0 < lo < hi")

    def val(sig: float) -> float:
        return gaussian_ratio(make_pair(s, sig), precision).log_ratio

    grid = np.arange(lo, hi + 1e-12, 0.5)
    vals = [val(float(g)) for g in grid]
    i = int(np.argmin(vals))
    a = float(grid[max(i - 1, 0)])
    b = float(grid[min(i + 1, len(grid) - 1)])
    invphi = (math.sqrt(5) - 1) / 2
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = val(c), val(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = val(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = val(d)
    best_sig, best_val = (c, fc) if fc < fd else (d, fd)
    if vals[i] < best_val:
        best_sig, best_val = float(grid[i]), vals[i]
    return OptimalSigma(s, best_sig, best_val, float(grid[i]))


def records_to_csv(records: Iterable[SweepRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow(r.csv_row())
    return buf.getvalue()
