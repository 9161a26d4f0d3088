"""Bounded convex polytopes (vertex form) and the Hörmander lift to cones.

A polytope ``A`` in Q^k lifts to the cone of rays ``{λ(1, x) : λ >= 0, x in A}``
in Q^(k+1); halfspace-style questions about polytopes are answered on the lift.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

from .cones import ConeDomainError, PolyhedralCone, intersect
from .exact import EQ, LPBuilder, Optimal, Vector, lp_solve, rational, vector


@dataclass(frozen=True)
class Polytope:
    dim: int
    vertices: tuple[Vector, ...] | None  # None encodes the empty set

    @classmethod
    def empty(cls, dim: int) -> "Polytope":
        return cls(dim, None)

    @property
    def is_empty(self) -> bool:
        return self.vertices is None

    def __repr__(self) -> str:
        if self.is_empty:
            return f"Polytope(dim={self.dim}, empty)"
        return f"Polytope({[tuple(str(a) for a in v) for v in self.vertices]})"


def _in_hull(p: Vector, points: Sequence[Vector]) -> bool:
    if not points:
        return False
    lp = LPBuilder()
    mu = lp.vars(len(points))
    for i in range(len(p)):
        lp.add({m: q[i] for m, q in zip(mu, points)}, EQ, p[i])
    lp.add({m: 1 for m in mu}, EQ, 1)
    return isinstance(lp_solve(lp.build({})), Optimal)


def convex_hull(points: Iterable[Sequence], dim: int | None = None) -> Polytope:
    """Convex hull of finitely many points, pruned to its extreme points by LP."""
    pts = sorted({vector(p) for p in points})
    if dim is None:
        if not pts:
            raise ValueError("dimension required for an empty point set")
        dim = len(pts[0])
    if not pts:
        return Polytope.empty(dim)
    if any(len(p) != dim for p in pts):
        raise ValueError("point dimension mismatch")
    keep = list(pts)
    for p in pts:
        others = [q for q in keep if q != p]
        if _in_hull(p, others):
            keep = others
    return Polytope(dim, tuple(sorted(keep)))


def box(lo: Sequence, hi: Sequence) -> Polytope:
    lo, hi = vector(lo), vector(hi)
    if len(lo) != len(hi):
        raise ValueError("bounds of different length")
    for i, (a, b) in enumerate(zip(lo, hi)):
        if a > b:
            raise ValueError(f"empty interval in coordinate {i}: [{a}, {b}]")
    corners = {tuple(c) for c in product(*[(a, b) for a, b in zip(lo, hi)])}
    return Polytope(len(lo), tuple(sorted(corners)))


def hull_of_union(polys: Sequence[Polytope]) -> Polytope:
    if not polys:
        raise ValueError("need at least one polytope")
    dims = {p.dim for p in polys}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")
    dim = dims.pop()
    live = [p for p in polys if not p.is_empty]
    if not live:
        return Polytope.empty(dim)
    if len(live) == 1:
        return live[0]
    return convex_hull([v for p in live for v in p.vertices], dim)


def ri_intersect(A: Polytope, B: Polytope) -> tuple[bool, Vector | None]:
    """Decide ``ri A ∩ ri B != ∅`` with strictly positive convex weights."""
    if A.is_empty or B.is_empty:
        raise ValueError("ri_intersect needs nonempty polytopes")
    va, vb = A.vertices, B.vertices
    lp = LPBuilder()
    s = lp.var(free=True)
    la = lp.vars(len(va))
    lb = lp.vars(len(vb))
    for i in range(A.dim):
        row = {v: p[i] for v, p in zip(la, va)}
        for v, p in zip(lb, vb):
            row[v] = -p[i]
        row[s] = sum((p[i] for p in va), Fraction(0)) - sum((p[i] for p in vb), Fraction(0))
        lp.add(row, EQ, 0)
    lp.add({**{v: 1 for v in la}, s: len(va)}, EQ, 1)
    lp.add({**{v: 1 for v in lb}, s: len(vb)}, EQ, 1)
    out = lp_solve(lp.build({s: 1}))
    if not isinstance(out, Optimal) or out.value <= 0:
        return False, None
    x = out.point
    w = [Fraction(0)] * A.dim
    for v, p in zip(la, va):
        for i in range(A.dim):
            w[i] += (x[s] + x[v]) * p[i]
    return True, tuple(w)


def ri_intersect_closure(A: Polytope, B: Polytope) -> Polytope:
    """``cl(ri A ∩ ri B)``: empty when the relative interiors miss, else ``A ∩ B``."""
    if A.dim != B.dim:
        raise ValueError("dimension mismatch")
    if A.is_empty or B.is_empty:
        return Polytope.empty(A.dim)
    meets, _ = ri_intersect(A, B)
    if not meets:
        return Polytope.empty(A.dim)
    return hormander_project(intersect(hormander_lift(A), hormander_lift(B)))


def hormander_lift(A: Polytope) -> PolyhedralCone:
    if A.is_empty:
        return PolyhedralCone.empty(A.dim + 1)
    return PolyhedralCone.from_generators([(Fraction(1),) + tuple(v) for v in A.vertices], A.dim + 1)


def hormander_project(C: PolyhedralCone) -> Polytope:
    """Inverse of :func:`hormander_lift` on lifts of bounded sets."""
    k = C.dim - 1
    if C.is_empty or C.is_zero:
        return Polytope.empty(k)
    if C.lineality:
        raise ConeDomainError("cone with lineality is not the lift of a bounded set")
    pts = []
    for g in C.rays:
        if g[0] <= 0:
            raise ConeDomainError(f"generator {[str(a) for a in g]} has nonpositive first coordinate")
        pts.append(tuple(a / g[0] for a in g[1:]))
    return convex_hull(pts, k)


def polytope_from_strings(points: Iterable[Sequence]) -> Polytope:
    return convex_hull([[rational(a) for a in p] for p in points])
