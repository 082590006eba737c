"""Lower bounds ``alpha`` with ``||x * y||_2 >= alpha ||x||_2 ||y||_1``.

Three routes are provided:

* ``sharp_alpha_exhaustive``: ground truth at desk scale.  Every pair of
  supports inside ``[0, n)`` is visited; ``y`` is searched over its
  l1-sphere (simplex magnitudes times phases) and ``x`` is eliminated
  exactly through the smallest eigenvalue of a Gram minor.
* ``sharp_alpha_alternating``: heuristic upper bound on the sharp value.
* ``analytic_alpha_log2``: the closed-form lower bound.

Everything is reported in log2, since the analytic values underflow doubles.

Two reductions keep the search small.  Translating either factor inside
``[0, n)`` only translates the convolution, so both supports may be taken
to contain 0.  Multiplying ``y`` by a global phase and modulating both
factors by ``exp(i t k)`` leaves ``||x * y||_2`` unchanged, so the phases of
the first two support points of ``y`` can be fixed to 0.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .addset import compression_bound_n
from .numerics import ContractError, determinant, hermitian_eigh, vandermonde
from .sequences import Z, SparseSeq, convolve, norm, toeplitz_gram

__all__ = [
    "BoundResult",
    "BudgetExceeded",
    "analytic_alpha_log2",
    "analytic_alpha_log2_equal",
    "analytic_terms",
    "corollary_universal_bound",
    "rho_min",
    "rho_min_support",
    "sharp_alpha_alternating",
    "sharp_alpha_exhaustive",
    "vandermonde_lambda_min_bound",
    "vandermonde_min_det",
    "vandermonde_min_det_search",
]

RHO_BUDGET = 10**6
PAIR_BUDGET = 10**4
MAX_EXHAUSTIVE_F = 4
MAX_ALTERNATING_N = 32
REFINE_TOL = 1e-9
_CHUNK = 20000


class BudgetExceeded(RuntimeError):
    """The requested instance is too large for an exhaustive computation."""


@dataclass
class BoundResult:
    s: int
    f: int
    n: int | None
    log2_alpha: float
    kind: str
    witness_x: SparseSeq | None = None
    witness_y: SparseSeq | None = None
    iterations: int = 0
    tolerance: float = 0.0
    notes: dict = field(default_factory=dict)

    @property
    def alpha(self) -> float:
        return 2.0 ** self.log2_alpha

    def to_json(self) -> dict:
        def g(v: float) -> float:
            return float(f"{v:.15g}")

        out = {
            "s": self.s,
            "f": self.f,
            "n": self.n,
            "kind": self.kind,
            "log2_alpha": g(self.log2_alpha),
            "alpha": g(self.alpha),
            "iterations": self.iterations,
            "tolerance": self.tolerance,
            "witness_x": self.witness_x.to_json() if self.witness_x is not None else None,
            "witness_y": self.witness_y.to_json() if self.witness_y is not None else None,
        }
        notes = {}
        for k, v in self.notes.items():
            notes[k] = g(v) if isinstance(v, float) else v
        out["notes"] = notes
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)


# ---------------------------------------------------------------------------
# restricted eigenvalues
# ---------------------------------------------------------------------------


def _check_line_seq(y: SparseSeq, n: int) -> None:
    if y.group.kind != "Z":
        raise ContractError("bounds are defined for sequences on Z")
    for (k,) in y:
        if not 0 <= k < n:
            raise ContractError(f"support point {k} outside [0, {n})")


def rho_min_support(s: int, y: SparseSeq, n: int) -> tuple[float, tuple[int, ...]]:
    """Smallest s-sparse eigenvalue of ``B_y`` and the support achieving it.

    Ties are broken by the lexicographically smallest support.
    """
    _check_line_seq(y, n)
    if not 1 <= s <= n:
        raise ContractError("need 1 <= s <= n")
    if math.comb(n, s) > RHO_BUDGET:
        raise BudgetExceeded(f"C({n},{s}) = {math.comb(n, s)} supports exceed {RHO_BUDGET}; reduce n or s")
    B = toeplitz_gram(y, n).matrix
    best = math.inf
    best_T: tuple[int, ...] = ()
    combos = itertools.combinations(range(n), s)
    while True:
        chunk = list(itertools.islice(combos, _CHUNK))
        if not chunk:
            break
        idx = np.array(chunk)
        minors = B[idx[:, :, None], idx[:, None, :]]
        vals = np.linalg.eigvalsh(minors)[:, 0]
        i = int(np.argmin(vals))
        if vals[i] < best:
            best, best_T = float(vals[i]), chunk[i]
    return best, best_T


def rho_min(s: int, y: SparseSeq, n: int) -> float:
    """Smallest eigenvalue over all ``s x s`` principal minors of ``B_y``."""
    return rho_min_support(s, y, n)[0]


# ---------------------------------------------------------------------------
# batched objective for a fixed pair of supports
# ---------------------------------------------------------------------------


class _PairObjective:
    """``min_{supp x = Tx} ||x * y||^2 / ||x||^2`` for ``y`` on ``Ty``, batched.

    ``y`` values are given as arrays of shape ``(K, f)``; the Gram minor entry
    ``(a, b)`` is ``sum_{p_i - p_j = t_a - t_b} y_i conj(y_j)``.
    """

    def __init__(self, Tx: Sequence[int], Ty: Sequence[int]):
        tx = np.asarray(Tx)
        ty = np.asarray(Ty)
        dx = tx[:, None] - tx[None, :]
        dy = ty[:, None] - ty[None, :]
        self.masks = (dx[:, :, None, None] == dy[None, None, :, :]).astype(float)

    def minors(self, Y: np.ndarray) -> np.ndarray:
        outer = Y[:, :, None] * Y[:, None, :].conj()
        return np.einsum("kij,abij->kab", outer, self.masks)

    def __call__(self, Y: np.ndarray) -> np.ndarray:
        return np.linalg.eigvalsh(self.minors(Y))[:, 0]

    def argmin_x(self, y: np.ndarray) -> tuple[float, np.ndarray]:
        vals, vecs = np.linalg.eigh(self.minors(y[None, :])[0])
        return float(vals[0]), vecs[:, 0]


def _to_y(mags: np.ndarray, phases: np.ndarray) -> np.ndarray:
    return mags * np.exp(1j * phases)


def _simplex_grid(f: int, res: int) -> np.ndarray:
    """All points of the simplex with coordinates in ``{0, 1/res, ..., 1}``."""
    if f == 1:
        return np.ones((1, 1))
    pts = []
    for bars in itertools.combinations(range(res + f - 1), f - 1):
        prev = -1
        parts = []
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(res + f - 2 - prev)
        pts.append(parts)
    return np.array(pts, dtype=float) / res


def _phase_grid(n_free: int, res: int) -> np.ndarray:
    if n_free == 0:
        return np.zeros((1, 0))
    axis = 2 * np.pi * np.arange(res) / res
    return np.array(list(itertools.product(axis, repeat=n_free)))


def _pattern_search(obj, mags: np.ndarray, phases: np.ndarray, free: np.ndarray, step: float, tol: float):
    """Minimize ``obj`` over simplex magnitudes and free phases.

    Moves transfer mass ``h`` between two coordinates or rotate one free
    phase by ``2 pi h``; ``h`` halves whenever no move improves.
    Returns ``(value, mags, phases, evaluations)``.
    """
    f = len(mags)
    cur = float(obj(_to_y(mags, phases)[None, :])[0])
    evals = 1
    h = step
    pairs = [(i, j) for i in range(f) for j in range(f) if i != j]
    free_idx = np.flatnonzero(free)
    while h >= tol:
        cand_m = []
        cand_p = []
        for i, j in pairs:
            t = min(h, mags[i])
            if t <= 0:
                continue
            m = mags.copy()
            m[i] -= t
            m[j] += t
            cand_m.append(m)
            cand_p.append(phases)
        for i in free_idx:
            for sgn in (1.0, -1.0):
                p = phases.copy()
                p[i] += sgn * 2 * np.pi * h
                cand_m.append(mags)
                cand_p.append(p)
        if not cand_m:
            break
        M = np.array(cand_m)
        P = np.array(cand_p)
        vals = obj(_to_y(M, P))
        evals += len(vals)
        k = int(np.argmin(vals))
        if vals[k] < cur - 1e-16 * max(1.0, abs(cur)):
            cur = float(vals[k])
            mags, phases = M[k], P[k]
        else:
            h *= 0.5
    return cur, mags, phases, evals


def _default_grid(f: int) -> int:
    return {1: 1, 2: 64, 3: 32}.get(f, 12)


def _supports_with_zero(n: int, k: int) -> list[tuple[int, ...]]:
    return [(0,) + rest for rest in itertools.combinations(range(1, n), k - 1)]


def _finish(s, f, n, kind, lam, Tx, Ty, xvec, yvec, iterations, tol, notes) -> BoundResult:
    lam = max(lam, 0.0)
    x = SparseSeq(Z, {t: v for t, v in zip(Tx, xvec)})
    y = SparseSeq(Z, {t: v for t, v in zip(Ty, yvec)})
    x = x.scale(1.0 / norm(x, 2))
    y = y.scale(1.0 / norm(y, 1))
    achieved = norm(convolve(x, y), 2)
    log2_alpha = 0.5 * math.log2(lam) if lam > 0 else -math.inf
    # alpha <= 1 by Young; clamp rounding noise above 0
    if log2_alpha > 0 and log2_alpha < 1e-9:
        log2_alpha = 0.0
    notes = dict(notes)
    notes["witness_norm"] = achieved
    notes["support_x"] = list(Tx)
    notes["support_y"] = list(Ty)
    return BoundResult(s, f, n, log2_alpha, kind, x, y, iterations, tol, notes)


def _check_sizes(s: int, f: int, n: int) -> None:
    if s < 1 or f < 1:
        raise ContractError("s and f must be >= 1")
    if s > n or f > n:
        raise ContractError("need s, f <= n")


def sharp_alpha_exhaustive(s: int, f: int, n: int, grid: int | None = None) -> BoundResult:
    """Sharp ``alpha(s, f, n)`` by exhaustive support enumeration.

    For each support pair the magnitudes of ``y`` are scanned on a simplex
    grid with ``grid`` steps per unit, free phases on ``grid`` points per
    turn, and the two best grid points are refined by pattern search down
    to step ``1e-9``.
    """
    _check_sizes(s, f, n)
    if f > MAX_EXHAUSTIVE_F:
        raise BudgetExceeded(f"exhaustive search supports f <= {MAX_EXHAUSTIVE_F}")
    budget = math.comb(n, s) * math.comb(n, f)
    if budget > PAIR_BUDGET:
        raise BudgetExceeded(
            f"C({n},{s})*C({n},{f}) = {budget} support pairs exceed {PAIR_BUDGET}; "
            "reduce n or use the alternating method"
        )
    res = grid or _default_grid(f)
    free = np.zeros(f, dtype=bool)
    free[2:] = True
    mag_grid = _simplex_grid(f, res)
    ph_grid = _phase_grid(int(free.sum()), res)
    full_ph = np.zeros((len(ph_grid), f))
    full_ph[:, free] = ph_grid
    M = np.repeat(mag_grid, len(full_ph), axis=0)
    P = np.tile(full_ph, (len(mag_grid), 1))
    Ygrid = _to_y(M, P)

    best = None
    evals = 0
    for Ty in _supports_with_zero(n, f):
        for Tx in _supports_with_zero(n, s):
            obj = _PairObjective(Tx, Ty)
            vals = np.concatenate([obj(Ygrid[i:i + _CHUNK]) for i in range(0, len(Ygrid), _CHUNK)])
            evals += len(vals)
            starts = np.argsort(vals, kind="stable")[:2]
            for k in starts:
                val, mags, phases, e = _pattern_search(obj, M[k], P[k], free, 1.0 / res, REFINE_TOL)
                evals += e
                key = (val, Tx, Ty)
                if best is None or key < best[0]:
                    best = (key, mags, phases)
    (val, Tx, Ty), mags, phases = best
    yvec = _to_y(mags, phases)
    lam, xvec = _PairObjective(Tx, Ty).argmin_x(yvec)
    notes = {"grid": res, "support_pairs": budget}
    return _finish(s, f, n, "sharp_exhaustive", lam, Tx, Ty, xvec, yvec, evals, REFINE_TOL, notes)


# ---------------------------------------------------------------------------
# alternating heuristic
# ---------------------------------------------------------------------------


def _gram_dense(v: np.ndarray) -> np.ndarray:
    """``S_v^* S_v`` for a dense length-n vector; entry (l, k) is ``b_v(l - k)``."""
    n = len(v)
    S = np.zeros((2 * n - 1, n), dtype=complex)
    for k in range(n):
        S[k:k + n, k] = v
    return S.conj().T @ S


def _best_sparse_eig(B: np.ndarray, k: int) -> tuple[float, tuple[int, ...], np.ndarray]:
    n = B.shape[0]
    idx = np.array(list(itertools.combinations(range(n), k)))
    minors = B[idx[:, :, None], idx[:, None, :]]
    vals, vecs = np.linalg.eigh(minors)
    i = int(np.argmin(vals[:, 0]))
    return float(vals[i, 0]), tuple(idx[i]), vecs[i, :, 0]


def _l1_quadratic_min(B: np.ndarray, y0: np.ndarray, sweeps: int = 200) -> tuple[float, np.ndarray]:
    """Locally minimize ``y^* B y`` over the l1-sphere of a fixed support.

    Alternates exact phase updates (one coordinate at a time) with an exact
    simplex QP over the magnitudes, solved by pairwise mass transfers.
    """
    f = len(y0)
    r = np.abs(y0) / np.abs(y0).sum()
    ph = np.angle(y0)
    val = math.inf
    for _ in range(sweeps):
        y = r * np.exp(1j * ph)
        for j in range(f):
            w = B[j] @ y - B[j, j] * y[j]
            if r[j] > 0 and abs(w) > 0:
                ph[j] = np.angle(w) + np.pi
                y[j] = r[j] * np.exp(1j * ph[j])
        D = np.exp(1j * ph)
        C = (D.conj()[:, None] * B * D[None, :]).real
        for _ in range(50 * f):
            g = C @ r
            active = r > 0
            i = int(np.flatnonzero(active)[np.argmax(g[active])])
            j = int(np.argmin(g))
            gap = g[i] - g[j]
            if gap <= 1e-15 * max(1.0, abs(g[i])):
                break
            curv = C[i, i] + C[j, j] - 2 * C[i, j]
            t = r[i] if curv <= 0 else min(r[i], gap / curv)
            r[i] -= t
            r[j] += t
        new = float(r @ C @ r)
        if val - new <= 1e-14 * max(val, 1e-300):
            val = min(val, new)
            break
        val = new
    return val, r * np.exp(1j * ph)


def _objective(x: np.ndarray, y: np.ndarray) -> float:
    conv = np.convolve(x, y)
    return float(np.vdot(conv, conv).real / (np.vdot(x, x).real * np.sum(np.abs(y)) ** 2))


def _y_step(x: np.ndarray, y: np.ndarray, f: int, keep: int = 8) -> np.ndarray:
    """Improve ``y`` for fixed ``x``; only the most promising supports are refined."""
    n = len(x)
    Bx = _gram_dense(x)
    best_val = _objective(x, y)
    best_y = y
    idx = np.array(list(itertools.combinations(range(n), f)))
    minors = Bx[idx[:, :, None], idx[:, None, :]]
    vals, vecs = np.linalg.eigh(minors)
    cur_T = tuple(np.flatnonzero(np.abs(y) > 0))
    order = list(np.argsort(vals[:, 0], kind="stable")[:keep])
    jobs = [(tuple(idx[k]), vecs[k, :, 0]) for k in order]
    if len(cur_T) == f:
        jobs.append((cur_T, y[list(cur_T)]))
    for T, start in jobs:
        if np.abs(start).sum() == 0:
            continue
        val, yt = _l1_quadratic_min(Bx[np.ix_(T, T)], start)
        if val < best_val - 1e-15 * best_val:
            best_val = val
            best_y = np.zeros(n, dtype=complex)
            best_y[list(T)] = yt
    return best_y


def _alternate(x: np.ndarray, y: np.ndarray, s: int, f: int, max_iter: int = 500):
    n = len(y)
    val = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        lam, T, vec = _best_sparse_eig(_gram_dense(y), s)
        x = np.zeros(n, dtype=complex)
        x[list(T)] = vec
        y = _y_step(x, y, f)
        y = y / np.sum(np.abs(y))
        new = _objective(x, y)
        if val < math.inf and val - new <= 1e-10 * val:
            val = min(val, new)
            break
        val = new
    return val, x, y, it


def _gaussian_start(s: int, n: int) -> np.ndarray:
    # truncated Gaussian with alternating sign, centred in the first s slots
    half = (s - 1) / 2
    k = np.arange(s) - half
    sigma = max(half, 0.5)
    g = np.exp(-(k**2) / sigma) * (-1.0) ** np.arange(s)
    out = np.zeros(n, dtype=complex)
    out[:s] = g
    return out / np.abs(out).sum()


def sharp_alpha_alternating(s: int, f: int, n: int, restarts: int = 16, seed: int = 0) -> BoundResult:
    """Alternating minimization; the result is an upper bound on the sharp alpha.

    Each round sets ``x`` to the eigenvector of the smallest eigenvalue over
    the best s-support of ``B_y``, then improves ``y`` on its l1-sphere for
    the best f-support given ``x``.
    """
    _check_sizes(s, f, n)
    if n > MAX_ALTERNATING_N:
        raise BudgetExceeded(f"alternating method supports n <= {MAX_ALTERNATING_N}")
    rng = np.random.default_rng(seed)
    starts = []
    if s == f and n >= s:
        starts.append(_gaussian_start(f, n))
    for _ in range(restarts):
        y = np.zeros(n, dtype=complex)
        T = np.sort(rng.choice(n, size=f, replace=False))
        y[T] = rng.uniform(0.1, 1.0, f) * np.exp(2j * np.pi * rng.uniform(size=f))
        starts.append(y / np.abs(y).sum())
    best = None
    total_it = 0
    for y0 in starts:
        val, x, y, it = _alternate(np.zeros(n, dtype=complex), y0, s, f)
        total_it += it
        if best is None or val < best[0]:
            best = (val, x, y)
    val, x, y = best
    Tx = tuple(int(i) for i in np.flatnonzero(np.abs(x) > 0))
    Ty = tuple(int(i) for i in np.flatnonzero(np.abs(y) > 0))
    notes = {"restarts": restarts, "seed": seed, "upper_bound": True}
    return _finish(s, f, n, "sharp_alternating", val, Tx, Ty, x[list(Tx)], y[list(Ty)], total_it, 1e-10, notes)


# ---------------------------------------------------------------------------
# closed-form bounds
# ---------------------------------------------------------------------------


def analytic_terms(s: int, f: int, log2_n: float) -> dict[str, float]:
    """Individual log2 terms of the closed-form bound."""
    return {
        "size_term": -f * f * math.log2(s * f / 4),
        "ratio_term": f * math.log2(s / 2),
        "constant_term": -1.5 * math.log2(4 * f),
        "n_term": (-f * f + f - 1) * log2_n,
    }


def _analytic_from_log2n(s: int, f: int, log2_n: float) -> float:
    if s < 1 or f < 1:
        raise ContractError("s and f must be >= 1")
    if f == 1:
        return 0.0
    if s == 1:
        return -0.5 * math.log2(f)
    return math.fsum(analytic_terms(s, f, log2_n).values())


def analytic_alpha_log2(s: int, f: int, n: int) -> float:
    """log2 of the closed-form lower bound on ``alpha(s, f, n)``.

    ``s == 1`` and ``f == 1`` return the exact values ``-log2(f)/2`` and 0.
    """
    if n < 1:
        raise ContractError("n must be >= 1")
    return _analytic_from_log2n(s, f, math.log2(n))


def analytic_alpha_log2_equal(s: int, n: int) -> float:
    """The ``s == f`` specialisation ``-(2s^2-s+1) log2(s/2) + (-s^2+s-1/2) log2 n``.

    It is a separate (weaker) form, not an algebraic rewrite of
    :func:`analytic_alpha_log2` at ``f = s``.
    """
    if s < 1 or n < 1:
        raise ContractError("s and n must be >= 1")
    return -(2 * s * s - s + 1) * math.log2(s / 2) + (-s * s + s - 0.5) * math.log2(n)


def corollary_universal_bound(s: int, f: int) -> BoundResult:
    """Group-independent bound: the closed form at ``n = n(s + f - 1)``."""
    cb = compression_bound_n(s, f)
    log2_n = math.log2(cb.n) if cb.n is not None else cb.log2_n
    value = _analytic_from_log2n(s, f, log2_n)
    notes = {"log2_n": log2_n, "exceeds_int_range": cb.exceeds_int_range}
    if s >= 2 and f >= 2:
        notes["terms"] = {k: float(f"{v:.15g}") for k, v in analytic_terms(s, f, log2_n).items()}
        if s == f:
            notes["equal_form_log2"] = -(2 * s * s - s + 1) * math.log2(s / 2) + (-s * s + s - 0.5) * log2_n
    return BoundResult(s, f, cb.n, value, "analytic", notes=notes)


# ---------------------------------------------------------------------------
# Vandermonde machinery
# ---------------------------------------------------------------------------


def vandermonde_min_det(f: int, M: int) -> float:
    """``|det V_[f]|^2 = prod_{l<k} 4 sin^2(pi (k - l) / M)``."""
    if f < 1 or M < 1:
        raise ContractError("f and M must be >= 1")
    if f > M:
        raise ContractError(f"f = {f} exceeds M = {M}")
    logs = [math.log(4 * math.sin(math.pi * (k - l) / M) ** 2) for l in range(f) for k in range(l + 1, f)]
    return math.exp(math.fsum(logs))


def vandermonde_min_det_search(f: int, n: int, M: int) -> tuple[tuple[int, ...], float]:
    """Scan all ``J`` in ``[n]`` with ``|J| = f``; return the minimiser of ``|det V_J|^2``.

    Values within relative ``1e-9`` of each other count as ties, broken
    lexicographically (translates of a set share the same modulus).
    """
    if n > 12:
        raise BudgetExceeded("exhaustive determinant scan supports n <= 12")
    if f > min(n, M):
        raise ContractError("need f <= min(n, M)")
    best_J: tuple[int, ...] | None = None
    best = math.inf
    for J in itertools.combinations(range(n), f):
        v = abs(determinant(vandermonde(list(J), M))) ** 2
        if v < best * (1 - 1e-9):
            best, best_J = v, J
    return best_J, best


@dataclass(frozen=True)
class VandermondeBound:
    lambda_min: float
    bound: float
    det_abs2: float

    @property
    def holds(self) -> bool:
        return self.lambda_min >= self.bound * (1 - 1e-8)


def vandermonde_lambda_min_bound(J: Sequence[int], M: int) -> VandermondeBound:
    """``lambda_min(V_J^* V_J)`` next to ``|det V_J|^2 / (2d)^(d-1)``."""
    d = len(J)
    if d > 12:
        raise ContractError("|J| must be <= 12")
    V = vandermonde(list(J), M)
    gram = V.conj().T @ V
    gram = 0.5 * (gram + gram.conj().T)
    lam = float(hermitian_eigh(gram)[0][0])
    det2 = abs(determinant(V)) ** 2
    return VandermondeBound(lam, det2 / (2 * d) ** (d - 1), det2)
