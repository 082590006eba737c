"""Small dense complex linear algebra and double-double arithmetic.

Matrices are plain ``numpy`` complex arrays; everything here targets tiny
problems (dimension <= 64) where robustness matters more than speed.

The double-double type ``ExtendedReal`` keeps an unevaluated sum ``hi + lo``
of two doubles, giving about 32 significant decimal digits.  The private
``_dd_*`` helpers operate elementwise on floats *or* numpy arrays so the
Gaussian experiment can run vectorized.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

__all__ = [
    "ContractError",
    "ExtendedReal",
    "determinant",
    "extended_sum",
    "fourier_minor",
    "hermitian_eigh",
    "hermitian_smallest_eigenvalue",
    "vandermonde",
    "vandermonde_det_product",
]

MAX_DIM = 64


class ContractError(ValueError):
    """Input violates an operation's precondition."""


# ---------------------------------------------------------------------------
# error-free transformations
# ---------------------------------------------------------------------------

_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def _quick_two_sum(a, b):
    s = a + b
    e = b - (s - a)
    return s, e


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    e = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, e


def _dd_add(ahi, alo, bhi, blo):
    s, e = _two_sum(ahi, bhi)
    t, f = _two_sum(alo, blo)
    e = e + t
    s, e = _quick_two_sum(s, e)
    e = e + f
    return _quick_two_sum(s, e)


def _dd_mul(ahi, alo, bhi, blo):
    p, e = _two_prod(ahi, bhi)
    e = e + (ahi * blo + alo * bhi)
    return _quick_two_sum(p, e)


def _dd_div(ahi, alo, bhi, blo):
    q1 = ahi / bhi
    phi, plo = _dd_mul(q1, 0.0 * q1, bhi, blo)
    rhi, rlo = _dd_add(ahi, alo, -phi, -plo)
    q2 = rhi / bhi
    phi, plo = _dd_mul(q2, 0.0 * q2, bhi, blo)
    rhi, rlo = _dd_add(rhi, rlo, -phi, -plo)
    q3 = rhi / bhi
    q1, q2 = _quick_two_sum(q1, q2)
    return _dd_add(q1, q2, q3, 0.0 * q3)


def _dd_sqrt(ahi, alo):
    if ahi <= 0.0:
        if ahi == 0.0:
            return 0.0, 0.0
        raise ValueError("square root of a negative ExtendedReal")
    q = math.sqrt(ahi)
    shi, slo = _two_prod(q, q)
    rhi, rlo = _dd_add(ahi, alo, -shi, -slo)
    return _quick_two_sum(q, rhi / (2.0 * q))


# ln 2 split into three doubles; the third keeps k*ln2 exact enough for |k| ~ 1000
_LN2_HI = 6.931471805599452862e-01
_LN2_LO = 2.319046813846299558e-17
_LN2_LO2 = 5.707708438416212066e-34

_EXP_SQUARINGS = 10
_EXP_TERMS = 10


def _inv_factorial_dd(k: int) -> tuple[float, float]:
    exact = Fraction(1, math.factorial(k))
    hi = float(exact)
    return hi, float(exact - Fraction(hi))


_INV_FACT = [_inv_factorial_dd(k) for k in range(_EXP_TERMS + 2)]


def _dd_exp(ahi, alo):
    """exp of a double-double; elementwise on arrays.

    Reduction a = k ln2 + r, r scaled by 2**-10, Taylor series for expm1(r),
    then ten squarings of (1 + t) carried as t -> 2t + t**2.
    """
    ahi = np.asarray(ahi, dtype=float)
    alo = np.asarray(alo, dtype=float)
    k = np.rint(ahi / _LN2_HI)
    phi, plo = _dd_mul(k, np.zeros_like(k), _LN2_HI, _LN2_LO)
    rhi, rlo = _dd_add(ahi, alo, -phi, -plo)
    rhi, rlo = _dd_add(rhi, rlo, -k * _LN2_LO2, np.zeros_like(k))
    scale = 2.0 ** -_EXP_SQUARINGS
    rhi = rhi * scale
    rlo = rlo * scale
    # expm1(r) = r + r^2/2! + ...
    thi, tlo = rhi, rlo
    powhi, powlo = rhi, rlo
    for j in range(2, _EXP_TERMS + 1):
        powhi, powlo = _dd_mul(powhi, powlo, rhi, rlo)
        chi, clo = _INV_FACT[j]
        termhi, termlo = _dd_mul(powhi, powlo, chi, clo)
        thi, tlo = _dd_add(thi, tlo, termhi, termlo)
    for _ in range(_EXP_SQUARINGS):
        sqhi, sqlo = _dd_mul(thi, tlo, thi, tlo)
        thi, tlo = _dd_add(2.0 * thi, 2.0 * tlo, sqhi, sqlo)
    ehi, elo = _dd_add(thi, tlo, np.ones_like(thi), np.zeros_like(tlo))
    ki = k.astype(int)
    return np.ldexp(ehi, ki), np.ldexp(elo, ki)


Number = Union[int, float, "ExtendedReal"]


class ExtendedReal:
    """Double-double real number ``hi + lo`` with ``|lo| <= ulp(hi) / 2``."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi: float = 0.0, lo: float = 0.0):
        hi, lo = _quick_two_sum(float(hi), float(lo))
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "lo", lo)

    def __setattr__(self, name, value):
        raise AttributeError("ExtendedReal is immutable")

    @classmethod
    def from_fraction(cls, value: Fraction) -> "ExtendedReal":
        hi = float(value)
        return cls(hi, float(value - Fraction(hi)))

    @classmethod
    def coerce(cls, value: Number) -> "ExtendedReal":
        if isinstance(value, ExtendedReal):
            return value
        if isinstance(value, int):
            return cls.from_fraction(Fraction(value))
        return cls(float(value), 0.0)

    def __float__(self) -> float:
        return self.hi + self.lo

    def __repr__(self) -> str:
        return f"ExtendedReal({self.hi!r}, {self.lo!r})"

    def as_fraction(self) -> Fraction:
        return Fraction(self.hi) + Fraction(self.lo)

    def __neg__(self) -> "ExtendedReal":
        return ExtendedReal(-self.hi, -self.lo)

    def __abs__(self) -> "ExtendedReal":
        return -self if self.hi < 0.0 else self

    def __add__(self, other: Number) -> "ExtendedReal":
        o = ExtendedReal.coerce(other)
        return ExtendedReal(*_dd_add(self.hi, self.lo, o.hi, o.lo))

    __radd__ = __add__

    def __sub__(self, other: Number) -> "ExtendedReal":
        o = ExtendedReal.coerce(other)
        return ExtendedReal(*_dd_add(self.hi, self.lo, -o.hi, -o.lo))

    def __rsub__(self, other: Number) -> "ExtendedReal":
        return ExtendedReal.coerce(other) - self

    def __mul__(self, other: Number) -> "ExtendedReal":
        o = ExtendedReal.coerce(other)
        return ExtendedReal(*_dd_mul(self.hi, self.lo, o.hi, o.lo))

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "ExtendedReal":
        o = ExtendedReal.coerce(other)
        if o.hi == 0.0:
            raise ZeroDivisionError("ExtendedReal division by zero")
        return ExtendedReal(*_dd_div(self.hi, self.lo, o.hi, o.lo))

    def __rtruediv__(self, other: Number) -> "ExtendedReal":
        return ExtendedReal.coerce(other) / self

    def _cmp(self, other: Number) -> int:
        d = self - other
        return (d.hi > 0.0) - (d.hi < 0.0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, (int, float, ExtendedReal)):
            return NotImplemented
        return self._cmp(other) == 0

    def __lt__(self, other: Number) -> bool:
        return self._cmp(other) < 0

    def __le__(self, other: Number) -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other: Number) -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other: Number) -> bool:
        return self._cmp(other) >= 0

    def __hash__(self) -> int:
        return hash((self.hi, self.lo))

    def sqrt(self) -> "ExtendedReal":
        return ExtendedReal(*_dd_sqrt(self.hi, self.lo))

    def exp(self) -> "ExtendedReal":
        hi, lo = _dd_exp(self.hi, self.lo)
        return ExtendedReal(float(hi), float(lo))

    def log(self) -> float:
        """Natural log, accurate to double precision (enough for reporting)."""
        if self.hi <= 0.0:
            raise ValueError("log of a non-positive ExtendedReal")
        return math.log(self.hi) + math.log1p(self.lo / self.hi)


def _components(terms: Iterable[Number]) -> list[float]:
    comps: list[float] = []
    for t in terms:
        if isinstance(t, ExtendedReal):
            comps.append(t.hi)
            comps.append(t.lo)
        elif isinstance(t, int):
            e = ExtendedReal.coerce(t)
            comps.append(e.hi)
            comps.append(e.lo)
        else:
            comps.append(float(t))
    return comps


def _round_to_dd(comps: list[float]) -> tuple[float, float]:
    # fsum is exactly rounded, so hi = round(S) and lo = round(S - hi).
    hi = math.fsum(comps)
    comps.append(-hi)
    lo = math.fsum(comps)
    comps.pop()
    return hi, lo


def extended_sum(terms: Iterable[Number]) -> ExtendedReal:
    """Sum ``terms`` exactly and round the result to a double-double.

    Accepts floats, ints and ``ExtendedReal`` values.  The exact sum is
    formed with Shewchuk-style expansions (``math.fsum``), so the result
    carries ~106 bits of the true sum irrespective of cancellation.
    """
    comps = _components(terms)
    if not comps:
        return ExtendedReal()
    return ExtendedReal(*_round_to_dd(comps))


def _extended_sum_arrays(hi: np.ndarray, lo: np.ndarray) -> tuple[float, float]:
    comps = list(np.asarray(hi, dtype=float).ravel())
    comps.extend(np.asarray(lo, dtype=float).ravel())
    if not comps:
        return 0.0, 0.0
    return _round_to_dd(comps)


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------


def _as_square(m, name: str = "matrix") -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractError(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] == 0:
        raise ContractError(f"{name} has dimension 0")
    if a.shape[0] > MAX_DIM:
        raise ContractError(f"{name} dimension {a.shape[0]} exceeds {MAX_DIM}")
    return a


def _check_hermitian(a: np.ndarray) -> None:
    scale = np.max(np.abs(a))
    if np.max(np.abs(a - a.conj().T)) > 1e-12 * scale:
        raise ContractError("matrix is not Hermitian")


def _jacobi(a: np.ndarray, tol: float, want_vectors: bool):
    """Cyclic complex Jacobi sweeps; returns (diag, V) with a = V diag V*."""
    a = a.copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex) if want_vectors else None
    norm = np.linalg.norm(a)
    if norm == 0.0:
        return np.zeros(n), v
    # Jacobi converges quadratically; the threshold is on the off-diagonal
    # mass relative to the whole matrix.
    thresh = (tol * norm) ** 2 * 1e-4
    offdiag = ~np.eye(n, dtype=bool)
    for _sweep in range(100):
        off = np.sum(np.abs(a[offdiag]) ** 2)
        if off <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                # phase rotation makes a[p, q] real and positive
                phase = apq / mag
                a[:, q] *= phase.conjugate()
                a[q, :] *= phase
                if v is not None:
                    v[:, q] *= phase.conjugate()
                app = a[p, p].real
                aqq = a[q, q].real
                zeta = (aqq - app) / (2.0 * mag)
                if abs(zeta) > 1e150:
                    t = 0.5 / zeta
                else:
                    t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                colp = a[:, p].copy()
                a[:, p] = c * colp - s * a[:, q]
                a[:, q] = s * colp + c * a[:, q]
                rowp = a[p, :].copy()
                a[p, :] = c * rowp - s * a[q, :]
                a[q, :] = s * rowp + c * a[q, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = app - t * mag
                a[q, q] = aqq + t * mag
                if v is not None:
                    vp = v[:, p].copy()
                    v[:, p] = c * vp - s * v[:, q]
                    v[:, q] = s * vp + c * v[:, q]
    return np.real(np.diag(a)).copy(), v


def hermitian_eigh(m, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and unit eigenvectors (columns) by cyclic Jacobi."""
    a = _as_square(m)
    _check_hermitian(a)
    w, v = _jacobi(a, tol, want_vectors=True)
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def hermitian_smallest_eigenvalue(m, tol: float = 1e-12) -> float:
    """Smallest eigenvalue of a Hermitian matrix (cyclic Jacobi).

    Raises ``ContractError`` for non-square, empty, oversized or
    non-Hermitian input.
    """
    a = _as_square(m)
    _check_hermitian(a)
    w, _ = _jacobi(a, tol, want_vectors=False)
    return float(np.min(w))


def determinant(m) -> complex:
    """Determinant by Gaussian elimination with partial pivoting."""
    a = _as_square(m).copy()
    n = a.shape[0]
    det = 1.0 + 0.0j
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if a[piv, k] == 0:
            return 0.0j
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            det = -det
        det *= a[k, k]
        if k + 1 < n:
            factors = a[k + 1:, k] / a[k, k]
            a[k + 1:, k:] -= np.outer(factors, a[k, k:])
    return complex(det)


def _unit_root(exponent: int, modulus: int) -> complex:
    # exp(-2 pi i e / M) with the exponent reduced first to keep the angle small
    r = exponent % modulus
    return complex(np.exp(-2j * np.pi * r / modulus))


def fourier_minor(d: int, n: int, M: int) -> np.ndarray:
    """First ``d x n`` block of the ``M``-point DFT matrix."""
    if d < 1 or n < 1:
        raise ContractError("fourier_minor needs d >= 1 and n >= 1")
    if n > M:
        raise ContractError(f"n={n} exceeds M={M}")
    out = np.empty((d, n), dtype=complex)
    for l in range(d):
        for k in range(n):
            out[l, k] = _unit_root(l * k, M)
    return out


def _check_index_set(J: Sequence[int], M: int) -> list[int]:
    J = [int(j) for j in J]
    if len(set(J)) != len(J):
        raise ContractError(f"duplicate entries in index list {J}")
    if any(j < 0 or j >= M for j in J):
        raise ContractError(f"index list {J} not inside [0, {M})")
    if not J:
        raise ContractError("empty index list")
    return J


def vandermonde(J: Sequence[int], M: int) -> np.ndarray:
    """``|J| x |J|`` matrix with entry (r, c) = w**(J[c] * r), w = exp(-2 pi i / M)."""
    J = _check_index_set(J, M)
    d = len(J)
    out = np.empty((d, d), dtype=complex)
    for r in range(d):
        for c, j in enumerate(J):
            out[r, c] = _unit_root(j * r, M)
    return out


def vandermonde_det_product(J: Sequence[int], M: int) -> complex:
    """Closed-form Vandermonde determinant prod_{l<k} (w^{j_k} - w^{j_l}).

    The factor order (k minus l) is the one that matches ``det`` for the
    row-power layout used by :func:`vandermonde`; reversing every factor
    changes the sign by ``(-1)**(d(d-1)/2)`` but not the modulus.
    """
    J = _check_index_set(J, M)
    nodes = [_unit_root(j, M) for j in J]
    prod = 1.0 + 0.0j
    for l in range(len(nodes)):
        for k in range(l + 1, len(nodes)):
            prod *= nodes[k] - nodes[l]
    return prod
