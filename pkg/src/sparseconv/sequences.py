"""Finitely supported sequences on Z, Z^d and Z_N.

Convolution is a direct double loop over the two supports.  Every output
entry is accumulated exactly (products split with Dekker's algorithm, then
``math.fsum``), so heavy cancellation -- the whole point of the Gaussian
experiment -- does not destroy the result.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .numerics import _two_prod

__all__ = [
    "Group",
    "SparseSeq",
    "GroupError",
    "autocorrelation",
    "bernstein_check",
    "convolve",
    "norm",
    "shift_matrix",
    "toeplitz_gram",
    "trig_poly",
    "young_check",
]

PRUNE_REL = 1e-30

Point = tuple[int, ...]


class GroupError(ValueError):
    """Sequences live on incompatible or unsupported groups."""


@dataclass(frozen=True)
class Group:
    """``Z`` (kind "Z"), ``Z^d`` (kind "Zd") or the cyclic group ``Z_N`` (kind "ZN")."""

    kind: str
    d: int = 1
    N: int | None = None

    def __post_init__(self):
        if self.kind == "Z":
            if self.d != 1 or self.N is not None:
                raise GroupError("Z has rank 1 and no order")
        elif self.kind == "Zd":
            if self.d < 1:
                raise GroupError("lattice rank must be >= 1")
        elif self.kind == "ZN":
            if self.N is None or self.N < 1:
                raise GroupError("cyclic order must be >= 1")
            if self.d != 1:
                raise GroupError("Z_N has rank 1")
        else:
            raise GroupError(f"unknown group kind {self.kind!r}")

    @classmethod
    def integers(cls) -> "Group":
        return cls("Z")

    @classmethod
    def lattice(cls, d: int) -> "Group":
        return cls("Zd", d=d)

    @classmethod
    def cyclic(cls, N: int) -> "Group":
        return cls("ZN", N=N)

    @property
    def torsion_free(self) -> bool:
        return self.kind != "ZN"

    @property
    def arity(self) -> int:
        return self.d

    def point(self, p) -> Point:
        """Normalize ``p`` (int or tuple) into a valid point of this group."""
        if isinstance(p, (int, np.integer)):
            p = (int(p),)
        p = tuple(int(c) for c in p)
        if len(p) != self.arity:
            raise GroupError(f"point {p} has arity {len(p)}, group {self} needs {self.arity}")
        if self.kind == "ZN":
            p = (p[0] % self.N,)
        return p

    def add(self, a: Point, b: Point) -> Point:
        s = tuple(x + y for x, y in zip(a, b))
        if self.kind == "ZN":
            s = (s[0] % self.N,)
        return s

    def to_json(self) -> dict:
        out = {"type": self.kind}
        if self.kind == "Zd":
            out["d"] = self.d
        if self.kind == "ZN":
            out["N"] = self.N
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> "Group":
        kind = obj.get("type")
        if kind == "Z":
            return cls.integers()
        if kind == "Zd":
            return cls.lattice(int(obj["d"]))
        if kind == "ZN":
            return cls.cyclic(int(obj["N"]))
        raise GroupError(f"unknown group type {kind!r}")


Z = Group.integers()


class SparseSeq:
    """Immutable finitely supported complex sequence on a :class:`Group`.

    Zero amplitudes are never stored, so ``len(seq)`` is the support size.
    """

    __slots__ = ("group", "_entries")

    def __init__(self, group: Group, entries: Mapping | Iterable = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        store: dict[Point, complex] = {}
        for p, v in items:
            q = group.point(p)
            v = complex(v)
            if q in store:
                v += store[q]
            store[q] = v
        store = {p: v for p, v in store.items() if v != 0}
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "_entries", dict(sorted(store.items())))

    def __setattr__(self, name, value):
        raise AttributeError("SparseSeq is immutable")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def delta(cls, group: Group, point=0, value: complex = 1.0) -> "SparseSeq":
        if isinstance(point, int) and group.arity > 1:
            point = (point,) * group.arity
        return cls(group, {point: value})

    @classmethod
    def from_vector(cls, values: Sequence[complex], offset: int = 0, group: Group = Z) -> "SparseSeq":
        """Sequence on Z with ``values[k]`` placed at ``offset + k``."""
        return cls(group, {offset + k: v for k, v in enumerate(values)})

    # -- mapping-ish access ---------------------------------------------------

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[Point]:
        return iter(self._entries)

    def __getitem__(self, p) -> complex:
        return self._entries.get(self.group.point(p), 0j)

    def items(self):
        return self._entries.items()

    def values(self):
        return self._entries.values()

    @property
    def support(self) -> list[Point]:
        return list(self._entries)

    def max_abs(self) -> float:
        return max((abs(v) for v in self._entries.values()), default=0.0)

    def __repr__(self) -> str:
        body = ", ".join(f"{p}: {v:.6g}" for p, v in self._entries.items())
        return f"SparseSeq({self.group.kind}, {{{body}}})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseSeq):
            return NotImplemented
        return self.group == other.group and self._entries == other._entries

    def __hash__(self):
        return hash((self.group, tuple(self._entries.items())))

    def allclose(self, other: "SparseSeq", rtol: float = 1e-12, atol: float = 0.0) -> bool:
        if self.group != other.group:
            return False
        scale = max(self.max_abs(), other.max_abs())
        for p in set(self._entries) | set(other._entries):
            if abs(self[p] - other[p]) > atol + rtol * scale:
                return False
        return True

    # -- algebra --------------------------------------------------------------

    def _combine(self, other: "SparseSeq", sign: float) -> "SparseSeq":
        if self.group != other.group:
            raise GroupError("group mismatch")
        out = dict(self._entries)
        for p, v in other._entries.items():
            out[p] = out.get(p, 0j) + sign * v
        return SparseSeq(self.group, out)

    def __add__(self, other: "SparseSeq") -> "SparseSeq":
        return self._combine(other, 1.0)

    def __sub__(self, other: "SparseSeq") -> "SparseSeq":
        return self._combine(other, -1.0)

    def __neg__(self) -> "SparseSeq":
        return self.scale(-1.0)

    def scale(self, c: complex) -> "SparseSeq":
        return SparseSeq(self.group, {p: c * v for p, v in self._entries.items()})

    def __mul__(self, c: complex) -> "SparseSeq":
        return self.scale(c)

    __rmul__ = __mul__

    def shift(self, offset) -> "SparseSeq":
        off = self.group.point(offset)
        return SparseSeq(self.group, {self.group.add(p, off): v for p, v in self._entries.items()})

    def conj(self) -> "SparseSeq":
        return SparseSeq(self.group, {p: v.conjugate() for p, v in self._entries.items()})

    # -- Z-only dense views ---------------------------------------------------

    def _require_line(self, op: str) -> None:
        if self.group.kind != "Z":
            raise GroupError(f"{op} needs a sequence on Z, got {self.group.kind}")

    def to_vector(self, n: int) -> np.ndarray:
        """Dense length-``n`` vector; support must lie in ``[0, n)``."""
        self._require_line("to_vector")
        out = np.zeros(n, dtype=complex)
        for (k,), v in self._entries.items():
            if not 0 <= k < n:
                raise ValueError(f"support point {k} outside [0, {n})")
            out[k] = v
        return out

    # -- JSON -----------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "group": self.group.to_json(),
            "entries": [
                {"point": list(p), "re": v.real, "im": v.imag} for p, v in self._entries.items()
            ],
        }

    @classmethod
    def from_json(cls, obj: Mapping | str) -> "SparseSeq":
        if isinstance(obj, str):
            obj = json.loads(obj)
        group = Group.from_json(obj["group"])
        seen: set[Point] = set()
        items = []
        for e in obj.get("entries", []):
            if not isinstance(e.get("point"), list):
                raise ValueError("entry point must be an array")
            p = group.point(e["point"])
            if p in seen:
                raise ValueError(f"duplicate point {p} in sequence JSON")
            seen.add(p)
            items.append((p, complex(float(e.get("re", 0.0)), float(e.get("im", 0.0)))))
        return cls(group, items)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def convolve(x: SparseSeq, y: SparseSeq) -> SparseSeq:
    """``(x * y)(g) = sum_h x(h) y(g - h)`` on the common group.

    Entries smaller than ``1e-30 * max|x| * max|y|`` are dropped.
    """
    if x.group != y.group:
        raise GroupError(f"group mismatch: {x.group} vs {y.group}")
    group = x.group
    re_parts: dict[Point, list[float]] = {}
    im_parts: dict[Point, list[float]] = {}
    for h, xv in x.items():
        xr, xi = xv.real, xv.imag
        for k, yv in y.items():
            g = group.add(h, k)
            yr, yi = yv.real, yv.imag
            re = re_parts.setdefault(g, [])
            im = im_parts.setdefault(g, [])
            re.extend(_two_prod(xr, yr))
            p, e = _two_prod(xi, yi)
            re.append(-p)
            re.append(-e)
            im.extend(_two_prod(xr, yi))
            im.extend(_two_prod(xi, yr))
    cutoff = PRUNE_REL * x.max_abs() * y.max_abs()
    out = {}
    for g in re_parts:
        v = complex(math.fsum(re_parts[g]), math.fsum(im_parts[g]))
        if abs(v) > cutoff:
            out[g] = v
    return SparseSeq(group, out)


def norm(x: SparseSeq, p: float = 2.0) -> float:
    """l^p norm over the finite support (``p = math.inf`` for the sup norm)."""
    if p == math.inf:
        return x.max_abs()
    if not p > 0:
        raise ValueError("norm exponent must be positive")
    mags = [abs(v) for v in x.values()]
    if not mags:
        return 0.0
    if p == 2.0:
        return math.sqrt(math.fsum(m * m for m in mags))
    if p == 1.0:
        return math.fsum(mags)
    top = max(mags)
    return top * math.fsum((m / top) ** p for m in mags) ** (1.0 / p)


@dataclass(frozen=True)
class YoungReport:
    lhs: float
    rhs: float
    holds: bool


def _inv(p: float) -> float:
    return 0.0 if p == math.inf else 1.0 / p


def young_check(x: SparseSeq, y: SparseSeq, p: float, q: float, r: float) -> YoungReport:
    """Evaluate both sides of ``||x*y||_r <= ||x||_p ||y||_q``."""
    for e in (p, q, r):
        if not (e >= 1.0):
            raise ValueError(f"Young exponents must lie in [1, inf], got {e}")
    if abs(_inv(p) + _inv(q) - 1.0 - _inv(r)) > 1e-9:
        raise ValueError(f"exponents violate 1/p + 1/q = 1 + 1/r: {(p, q, r)}")
    lhs = norm(convolve(x, y), r)
    rhs = norm(x, p) * norm(y, q)
    return YoungReport(lhs, rhs, lhs <= rhs * (1.0 + 1e-12))


def autocorrelation(y: SparseSeq, k: int) -> complex:
    """``b_y(k) = sum_g y(g + k) conj(y(g))``."""
    if y.group.kind != "Z":
        raise GroupError("autocorrelation is defined here for sequences on Z only")
    acc = 0j
    for (g,), v in y.items():
        w = y[g + k]
        if w:
            acc += w * v.conjugate()
    return acc


def _line_support_check(y: SparseSeq, n: int) -> None:
    if y.group.kind != "Z":
        raise GroupError("shift/Gram matrices need a sequence on Z")
    if n < 1:
        raise ValueError("n must be >= 1")
    for (k,) in y:
        if not 0 <= k < n:
            raise ValueError(f"support point {k} outside [0, {n})")


@dataclass(frozen=True)
class ShiftMatrix:
    """``(2n-1) x n`` matrix whose column k is ``y`` translated by k."""

    n: int
    matrix: np.ndarray


@dataclass(frozen=True)
class ToeplitzGram:
    """``S* S`` for the shift matrix ``S`` of ``y``; entry (l, k) is ``b_y(l - k)``."""

    n: int
    matrix: np.ndarray


def shift_matrix(y: SparseSeq, n: int) -> ShiftMatrix:
    """Shift matrix ``S`` with ``S @ x == (x * y)`` on ``[0, 2n-1)``."""
    _line_support_check(y, n)
    vec = y.to_vector(n)
    S = np.zeros((2 * n - 1, n), dtype=complex)
    for k in range(n):
        S[k:k + n, k] = vec
    return ShiftMatrix(n, S)


def toeplitz_gram(y: SparseSeq, n: int) -> ToeplitzGram:
    _line_support_check(y, n)
    b = {lag: autocorrelation(y, lag) for lag in range(-(n - 1), n)}
    B = np.empty((n, n), dtype=complex)
    for l in range(n):
        for k in range(n):
            B[l, k] = b[l - k]
    return ToeplitzGram(n, B)


def trig_poly(x: SparseSeq, omega):
    """``|sum_k x_k exp(-2 pi i k omega)|**2``; ``omega`` may be an array."""
    x._require_line("trig_poly")
    w = np.asarray(omega, dtype=float)
    acc = np.zeros(w.shape, dtype=complex)
    for (k,), v in x.items():
        acc = acc + v * np.exp(-2j * np.pi * k * w)
    out = np.abs(acc) ** 2
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BernsteinReport:
    max_p: float
    max_dp: float
    degree: int
    bound_angular: float  # 2 pi n max_p, derivative taken in omega
    bound_cycles: float  # n max_p, derivative measured per 2 pi omega
    max_dp_cycles: float  # max_dp / (2 pi)
    holds: bool


def bernstein_check(x: SparseSeq, n: int, grid: int = 4096) -> BernsteinReport:
    """Bernstein inequality for ``p_x = |x^|**2`` on a uniform grid.

    ``p_x`` has frequencies ``|l| <= n``, so ``max|p'| <= 2 pi n max|p|``.
    The derivative is the exact term-wise derivative of the cosine/sine
    expansion.  Since the grid maximum underestimates ``max|p|`` by at most
    ``max|p'| / (2 grid)``, the grid value is inflated by
    ``1 / (1 - pi n / grid)`` before comparing.
    """
    x._require_line("bernstein_check")
    if grid < 2048:
        raise ValueError("grid must be >= 2048")
    for (k,) in x:
        if not 0 <= k <= n:
            raise ValueError(f"support point {k} outside [0, {n}]")
    omega = np.arange(grid) / grid
    lags = range(-n, n + 1)
    p = np.zeros(grid)
    dp = np.zeros(grid)
    for l in lags:
        c = autocorrelation(x, l)
        if c == 0:
            continue
        # c_l exp(-2 pi i l w); real because c_{-l} = conj(c_l)
        phase = np.exp(-2j * np.pi * l * omega)
        p += np.real(c * phase)
        dp += np.real(-2j * np.pi * l * c * phase)
    max_p = float(np.max(np.abs(p)))
    max_dp = float(np.max(np.abs(dp)))
    slack = 1.0 / (1.0 - math.pi * n / grid) if math.pi * n < grid else math.inf
    bound = 2.0 * math.pi * n * max_p * slack
    return BernsteinReport(
        max_p=max_p,
        max_dp=max_dp,
        degree=n,
        bound_angular=2.0 * math.pi * n * max_p,
        bound_cycles=n * max_p,
        max_dp_cycles=max_dp / (2.0 * math.pi),
        holds=max_dp <= bound * (1.0 + 1e-6),
    )
