"""Sumsets, Freiman order-2 maps and the compression of sparse convolutions.

A Freiman isomorphism of order 2 is an injection ``phi`` with
``a1 + a2 == b1 + b2  <=>  phi(a1) + phi(a2) == phi(b1) + phi(b2)``.
Such a map transports a convolution on ``Z^d`` to one on a short interval
of ``Z`` without changing any norm of the result.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import mpmath

from .sequences import Group, GroupError, SparseSeq

__all__ = [
    "CompressionBound",
    "CompressionResult",
    "DimensionBounds",
    "FreimanMap",
    "NotFound",
    "PointSet",
    "base_expand_compress",
    "compress_convolution",
    "compression_bound",
    "compression_bound_n",
    "diffset",
    "freiman_dim_exact",
    "freiman_dim_formula",
    "log_factorial_bound",
    "min_diameter_search",
    "sumset",
    "verify_freiman_order2",
]

Point = tuple[int, ...]

MAX_VERIFY = 24
MAX_SEARCH = 6
MAX_SEARCH_N = 64
INT_LIMIT = 2**63


class NotFound(LookupError):
    """No order-2 isomorphism onto an interval of the requested length exists."""


def _add(a: Point, b: Point) -> Point:
    return tuple(x + y for x, y in zip(a, b))


def _sub(a: Point, b: Point) -> Point:
    return tuple(x - y for x, y in zip(a, b))


@dataclass(frozen=True)
class PointSet:
    """Finite nonempty set of points of ``Z`` or ``Z^d``."""

    group: Group
    points: tuple[Point, ...]

    def __init__(self, group: Group, points: Iterable):
        if not group.torsion_free:
            raise GroupError("point sets live on Z or Z^d only")
        pts = sorted({group.point(p) for p in points})
        if not pts:
            raise ValueError("point set must be nonempty")
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "points", tuple(pts))

    @classmethod
    def of(cls, points: Iterable, d: int | None = None) -> "PointSet":
        """Convenience constructor: ints give a set on Z, tuples one on Z^d."""
        pts = list(points)
        if d is None:
            if pts and not isinstance(pts[0], (int,)):
                d = len(pts[0])
            else:
                d = 1
        group = Group.integers() if d == 1 and all(isinstance(p, int) for p in pts) else Group.lattice(d)
        return cls(group, pts)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, p) -> bool:
        return self.group.point(p) in set(self.points)

    def ints(self) -> list[int]:
        """Points as plain ints (rank-1 groups only)."""
        if self.group.arity != 1:
            raise GroupError("ints() needs a rank-1 group")
        return [p[0] for p in self.points]

    def to_json(self) -> dict:
        return {"group": self.group.to_json(), "points": [list(p) for p in self.points]}

    @classmethod
    def from_json(cls, obj: Mapping) -> "PointSet":
        group = Group.from_json(obj["group"])
        raw = [group.point(p) for p in obj["points"]]
        if len(set(raw)) != len(raw):
            raise ValueError("duplicate point in point set JSON")
        return cls(group, raw)


def _same_group(A: PointSet, B: PointSet) -> Group:
    if A.group.arity != B.group.arity or A.group.kind != B.group.kind:
        raise GroupError(f"group mismatch: {A.group} vs {B.group}")
    return A.group


def sumset(A: PointSet, B: PointSet) -> PointSet:
    g = _same_group(A, B)
    return PointSet(g, {_add(a, b) for a in A for b in B})


def diffset(A: PointSet, B: PointSet) -> PointSet:
    g = _same_group(A, B)
    return PointSet(g, {_sub(a, b) for a in A for b in B})


@dataclass
class FreimanMap:
    """Map from a point set into Z.

    ``verified`` is only ever set by :func:`verify_freiman_order2`.
    """

    domain: PointSet
    images: dict[Point, int]
    verified: bool = field(default=False)

    def __post_init__(self):
        if set(self.images) != set(self.domain.points):
            raise ValueError("images must be defined exactly on the domain")
        if len(set(self.images.values())) != len(self.images):
            raise ValueError("map is not injective")

    def __call__(self, p) -> int:
        return self.images[self.domain.group.point(p)]

    @property
    def image(self) -> list[int]:
        return sorted(self.images.values())

    @property
    def diameter(self) -> int:
        im = self.image
        return im[-1] - im[0]

    def to_json(self) -> dict:
        return {
            "domain": self.domain.to_json(),
            "images": [{"point": list(p), "image": v} for p, v in self.images.items()],
            "diameter": self.diameter,
            "verified": self.verified,
        }


def _pair_partition_consistent(points: list[Point], phi: Callable[[Point], int]) -> bool:
    # a1+a2 = b1+b2 <=> phi-sums equal, checked via the two pair partitions
    by_a: dict[Point, int] = {}
    by_phi: dict[int, Point] = {}
    for i, a in enumerate(points):
        for b in points[i:]:
            sa = _add(a, b)
            sp = phi(a) + phi(b)
            if by_a.setdefault(sa, sp) != sp or by_phi.setdefault(sp, sa) != sa:
                return False
    return True


def verify_freiman_order2(phi: FreimanMap) -> bool:
    """Exhaustively check the order-2 property (both directions).

    Runs in ``O(m^2)`` by comparing the partitions of unordered pairs by
    their A-sum and by their image sum; this is equivalent to the
    quadruple condition.  Sets ``phi.verified`` on success.
    """
    pts = list(phi.domain.points)
    if len(pts) > MAX_VERIFY:
        raise ValueError(f"domain too large for verification ({len(pts)} > {MAX_VERIFY})")
    ok = _pair_partition_consistent(pts, lambda p: phi.images[p])
    phi.verified = ok
    return ok


def freiman_dim_formula(m: int) -> int:
    """``max(1, m - floor(sqrt(2(m-1)) + 0.5))``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return max(1, m - math.floor(math.sqrt(2 * (m - 1)) + 0.5))


@dataclass(frozen=True)
class DimensionBounds:
    m: int
    d_formula: int
    d_exact: int
    sumset_size: int
    diffset_size: int

    @property
    def consistent(self) -> bool:
        """Whether ``d_exact <= d_formula`` (fails for Sidon-type sets)."""
        return self.d_exact <= self.d_formula


def freiman_dim_exact(A: PointSet) -> DimensionBounds:
    """Smallest ``d >= 1`` with ``min(|A+A|, |A-A|) <= (d+1)m - d(d+1)/2``."""
    m = len(A)
    if m > MAX_VERIFY:
        raise ValueError(f"|A| must be <= {MAX_VERIFY}")
    ss = len(sumset(A, A))
    ds = len(diffset(A, A))
    target = min(ss, ds)
    d = 1
    while (d + 1) * m - d * (d + 1) // 2 < target:
        d += 1
    return DimensionBounds(m, freiman_dim_formula(m), d, ss, ds)


@dataclass(frozen=True)
class CompressionBound:
    """Interval length ``n(m)`` guaranteed for any m-point set.

    ``n`` is ``None`` when the value exceeds ``2**63``; ``log2_n`` is the
    unfloored exponent in that case and otherwise.
    """

    m: int
    n: int | None
    log2_n: float
    exceeds_int_range: bool


def compression_bound(m: int) -> CompressionBound:
    """``floor(2^(2(m-sqrt m) log2(m-sqrt m)))`` for ``m >= 5``, ``floor(2^(m-2)+1)`` below."""
    if m < 1:
        raise ValueError("m must be >= 1")
    with mpmath.workdps(50):
        if m >= 5:
            t = m - mpmath.sqrt(m)
            e = 2 * t * mpmath.log(t, 2)
            val = mpmath.power(2, e)
        else:
            e = None
            val = mpmath.power(2, m - 2) + 1
        if e is None:
            e = mpmath.log(val, 2)
        exceeds = val >= INT_LIMIT
        n = None if exceeds else int(mpmath.floor(val))
        return CompressionBound(m, n, float(e), bool(exceeds))


def compression_bound_n(s: int, f: int) -> CompressionBound:
    """:func:`compression_bound` at ``m = s + f - 1``."""
    if s < 1 or f < 1:
        raise ValueError("s and f must be >= 1")
    return compression_bound(s + f - 1)


def log_factorial_bound(d: int) -> float:
    """``(d+1) log2(d+1) - d / ln 2``, an upper bound for ``log2(d!)``."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return (d + 1) * math.log2(d + 1) - d / math.log(2)


def base_expand_compress(A: PointSet) -> FreimanMap:
    """No-carry base expansion ``a -> sum_i a_i M^i`` with ``M = 2 max(w_i) + 1``.

    Pairwise coordinate sums stay below ``M``, so equal image sums force
    equal point sums.  The returned map is verified.
    """
    d = A.group.arity
    lows = [min(p[i] for p in A) for i in range(d)]
    shifted = {p: tuple(p[i] - lows[i] for i in range(d)) for p in A}
    w = max(max(q) for q in shifted.values())
    base = 2 * w + 1
    images = {p: sum(c * base**i for i, c in enumerate(q)) for p, q in shifted.items()}
    phi = FreimanMap(A, images)
    if len(A) <= MAX_VERIFY:
        verify_freiman_order2(phi)
    return phi


def _search_diameter(points: list[Point], D: int) -> dict[Point, int] | None:
    m = len(points)
    assign: dict[Point, int] = {points[0]: 0}
    used = {0}
    by_a: dict[Point, int] = {_add(points[0], points[0]): 0}
    by_phi: dict[int, Point] = {0: _add(points[0], points[0])}

    def place(i: int, lo: int, hi: int) -> bool:
        if i == m:
            return True
        a = points[i]
        # lo/hi track the current image range; new images keep it within D
        for v in range(hi - D, lo + D + 1):
            if v in used:
                continue
            ok = True
            added_a: list[Point] = []
            added_p: list[int] = []
            for b, w in itertools.chain(assign.items(), ((a, v),)):
                sa = _add(a, b)
                sp = v + w
                ea = by_a.get(sa)
                ep = by_phi.get(sp)
                if (ea is not None and ea != sp) or (ep is not None and ep != sa):
                    ok = False
                    break
                if ea is None:
                    by_a[sa] = sp
                    added_a.append(sa)
                if ep is None:
                    by_phi[sp] = sa
                    added_p.append(sp)
            if ok:
                assign[a] = v
                used.add(v)
                if place(i + 1, min(lo, v), max(hi, v)):
                    return True
                del assign[a]
                used.discard(v)
            for sa in added_a:
                del by_a[sa]
            for sp in added_p:
                del by_phi[sp]
        return False

    return dict(assign) if place(1, 0, 0) else None


def min_diameter_search(A: PointSet, n_max: int = MAX_SEARCH_N) -> FreimanMap:
    """Smallest-diameter order-2 isomorphism of ``A`` into ``[0, n_max)``.

    Tries diameters ``m-1, m, ...`` in turn; one point is pinned to 0 and
    candidates are scanned in ascending order, so the result is
    deterministic.  The image is translated to start at 0.

    Raises :class:`NotFound` if no map fits in ``[0, n_max)``.
    """
    m = len(A)
    if m > MAX_SEARCH:
        raise ValueError(f"search supports |A| <= {MAX_SEARCH}, got {m}")
    if n_max > MAX_SEARCH_N:
        raise ValueError(f"n_max must be <= {MAX_SEARCH_N}")
    points = list(A.points)
    for D in range(m - 1, n_max):
        found = _search_diameter(points, D)
        if found is not None:
            low = min(found.values())
            phi = FreimanMap(A, {p: v - low for p, v in found.items()})
            verify_freiman_order2(phi)
            return phi
    raise NotFound(f"no order-2 isomorphism of {m} points into [0, {n_max})")


@dataclass
class CompressionResult:
    """Output of :func:`compress_convolution`.

    ``x_tilde`` and ``y_tilde`` live on Z inside ``[0, n)``.  The original
    sequences were translated by ``-shift_x`` and ``-shift_y`` before the
    map ``phi`` (which has minimum image 0) was applied.
    """

    x_tilde: SparseSeq
    y_tilde: SparseSeq
    phi: FreimanMap
    shift_x: Point
    shift_y: Point
    n: int
    _sum_map: dict[Point, int] = field(repr=False, default_factory=dict)

    def point_map(self, g) -> int:
        """Image in Z of a point ``g`` of ``supp(x) + supp(y)``."""
        return self._sum_map[tuple(g)]

    def verify(self, x: SparseSeq, y: SparseSeq, rtol: float = 1e-12) -> bool:
        from .sequences import convolve

        conv = convolve(x, y)
        conv_t = convolve(self.x_tilde, self.y_tilde)
        scale = max(conv.max_abs(), conv_t.max_abs(), 1e-300)
        hit = set()
        for g, t in self._sum_map.items():
            hit.add(t)
            if abs(conv[g] - conv_t[t]) > rtol * scale:
                return False
        return all(t[0] in hit or abs(v) <= rtol * scale for t, v in conv_t.items())


def compress_convolution(x: SparseSeq, y: SparseSeq, strategy: str = "base_expand") -> CompressionResult:
    """Transport a sparse convolution on Z or Z^d onto a short interval of Z."""
    if x.group != y.group:
        raise GroupError("group mismatch")
    group = x.group
    if not group.torsion_free:
        raise GroupError("compression needs a torsion-free group")
    if len(x) == 0 or len(y) == 0:
        raise ValueError("sequences must be nonzero")
    sx = min(x.support)
    sy = min(y.support)
    xs = {_sub(p, sx): v for p, v in x.items()}
    ys = {_sub(p, sy): v for p, v in y.items()}
    A = PointSet(group, set(xs) | set(ys))
    if strategy == "base_expand":
        if len(A) > MAX_VERIFY:
            raise ValueError(f"combined support must have <= {MAX_VERIFY} points")
        phi = base_expand_compress(A)
    elif strategy == "search":
        phi = min_diameter_search(A)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    low = min(phi.images.values())
    if low != 0:
        phi = FreimanMap(A, {p: v - low for p, v in phi.images.items()})
        verify_freiman_order2(phi)
    line = Group.integers()
    xt = SparseSeq(line, {phi.images[p]: v for p, v in xs.items()})
    yt = SparseSeq(line, {phi.images[p]: v for p, v in ys.items()})
    shift = _add(sx, sy)
    sum_map = {}
    for a in xs:
        for b in ys:
            sum_map[_add(_add(a, b), shift)] = phi.images[a] + phi.images[b]
    return CompressionResult(xt, yt, phi, sx, sy, phi.diameter + 1, sum_map)
