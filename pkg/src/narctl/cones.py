"""Polyhedral convex cones in Q^d with both generator and halfspace descriptions.

Conversion in either direction is the double description method; since the
halfspace normals of a cone are exactly the generators of its dual, one routine
serves both directions.  Cones are kept in a canonical form (lineality basis in
reduced row echelon form, extreme rays projected onto its orthogonal complement
and scaled to primitive integer vectors) so that equality is exact comparison.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .exact import (
    EQ, GE, LE, LPBuilder, Optimal, Vector, add, dot, is_zero, lexmin_point,
    lp_lexopt, lp_solve, neg, nullspace, primitive, rational, rref, scale, sub,
    unit, vector, zeros,
)


class ConeDomainError(ValueError):
    """An operation was applied outside its domain (e.g. dual of the empty set)."""


# --------------------------------------------------------------------------
# double description
# --------------------------------------------------------------------------

def double_description(constraints: Sequence[Vector], dim: int) -> tuple[list[Vector], list[Vector]]:
    """Extreme rays and lineality basis of ``{x : <a, x> >= 0 for all a}``.

    Incremental double description with a combinatorial adjacency test.  Rays
    are returned modulo the lineality space.
    """
    lineality: list[Vector] = [unit(dim, i) for i in range(dim)]
    rays: list[tuple[Vector, frozenset]] = []
    seen: list[int] = []
    for k, a in enumerate(constraints):
        if is_zero(a):
            continue
        vals = [dot(a, l) for l in lineality]
        piv = next((i for i, v in enumerate(vals) if v != 0), None)
        if piv is not None:
            l0, a0 = lineality[piv], vals[piv]
            if a0 < 0:
                l0, a0 = neg(l0), -a0
            new_lin = [sub(l, scale(v / a0, l0)) for i, (l, v) in enumerate(zip(lineality, vals)) if i != piv]
            new_rays = []
            for r, tight in rays:
                ar = dot(a, r)
                new_rays.append((sub(r, scale(ar / a0, l0)), tight | {k}))
            new_rays.append((l0, frozenset(seen)))
            lineality = new_lin
            rays = [(primitive(r), t) for r, t in new_rays]
            seen.append(k)
            continue
        vals = [dot(a, r) for r, _ in rays]
        pos = [i for i, v in enumerate(vals) if v > 0]
        negs = [i for i, v in enumerate(vals) if v < 0]
        zero = [i for i, v in enumerate(vals) if v == 0]
        new = [rays[i] for i in pos] + [(rays[i][0], rays[i][1] | {k}) for i in zero]
        for p in pos:
            rp, tp = rays[p]
            for q in negs:
                rq, tq = rays[q]
                common = tp & tq
                adjacent = True
                for o, (_, to) in enumerate(rays):
                    if o != p and o != q and common <= to:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                r = sub(scale(vals[p], rq), scale(vals[q], rp))
                new.append((primitive(r), common | {k}))
        rays = new
        seen.append(k)
    out, keys = [], set()
    for r, _ in rays:
        if r not in keys and not is_zero(r):
            keys.add(r)
            out.append(r)
    return out, lineality


def _canonical(rays: Iterable[Vector], lineality: Iterable[Vector], dim: int) -> tuple[tuple[Vector, ...], tuple[Vector, ...]]:
    lin = [tuple(r) for r in rref(list(lineality), dim)[0]] if lineality else []
    lin = [primitive(l) for l in lin]
    if lin:
        # orthogonal projector onto span(lin)^perp applied to each ray
        ortho = nullspace(lin, dim)  # basis of lin^perp
        gram = [[dot(u, v) for v in ortho] for u in ortho]
        proj = []
        for r in rays:
            rhs = [dot(u, r) for u in ortho]
            coeffs = _solve_square(gram, rhs)
            p = zeros(dim)
            for c, u in zip(coeffs, ortho):
                p = add(p, scale(c, u))
            proj.append(primitive(p))
        rays = proj
    uniq = sorted({tuple(r) for r in rays if not is_zero(r)})
    return tuple(uniq), tuple(lin)


def _solve_square(M: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(b)
    if n == 0:
        return []
    red, piv = rref([list(row) + [bi] for row, bi in zip(M, b)], n + 1)
    x = [Fraction(0)] * n
    for row, p in zip(red, piv):
        x[p] = row[n]
    return x


# --------------------------------------------------------------------------
# the cone type
# --------------------------------------------------------------------------

class PolyhedralCone:
    """A closed convex polyhedral cone, or the empty set when ``is_empty``.

    ``rays`` and ``lineality`` generate the cone; ``facets`` and ``equalities``
    are the generators of the dual cone, i.e. the cone is
    ``{x : <f, x> >= 0 for f in facets, <e, x> = 0 for e in equalities}``.
    """

    def __init__(self, dim, rays=(), lineality=(), facets=(), equalities=(), is_empty=False):
        self.dim = dim
        self.is_empty = is_empty
        self.rays = tuple(rays)
        self.lineality = tuple(lineality)
        self.facets = tuple(facets)
        self.equalities = tuple(equalities)

    # construction -------------------------------------------------------
    @classmethod
    def empty(cls, dim: int) -> "PolyhedralCone":
        return cls(dim, is_empty=True)

    @classmethod
    def zero(cls, dim: int) -> "PolyhedralCone":
        return cls(dim, (), (), (), tuple(primitive(unit(dim, i)) for i in range(dim)))

    @classmethod
    def full(cls, dim: int) -> "PolyhedralCone":
        return cls(dim, (), tuple(unit(dim, i) for i in range(dim)), (), ())

    @classmethod
    def orthant(cls, dim: int) -> "PolyhedralCone":
        return cls.from_generators([unit(dim, i) for i in range(dim)], dim)

    @classmethod
    def from_generators(cls, generators: Iterable[Sequence], dim: int | None = None) -> "PolyhedralCone":
        gens = [vector(g) for g in generators]
        if dim is None:
            if not gens:
                raise ValueError("dimension required for an empty generator list")
            dim = len(gens[0])
        if any(len(g) != dim for g in gens):
            raise ValueError("generator dimension mismatch")
        frays, flin = double_description(gens, dim)
        facets, eqs = _canonical(frays, flin, dim)
        hs = list(facets) + list(eqs) + [neg(e) for e in eqs]
        rays, lin = double_description(hs, dim)
        rays, lin = _canonical(rays, lin, dim)
        return cls(dim, rays, lin, facets, eqs)

    @classmethod
    def from_halfspaces(cls, normals: Iterable[Sequence], dim: int | None = None) -> "PolyhedralCone":
        """The cone ``{x : <h, x> >= 0 for each normal h}``."""
        hs = [vector(h) for h in normals]
        if dim is None:
            if not hs:
                raise ValueError("dimension required for an empty halfspace list")
            dim = len(hs[0])
        if any(len(h) != dim for h in hs):
            raise ValueError("halfspace dimension mismatch")
        return cls.from_generators(hs, dim).dual()

    # representations ----------------------------------------------------
    @cached_property
    def generators(self) -> tuple[Vector, ...]:
        """Conic generators: extreme rays plus both signs of each lineality vector."""
        return self.rays + self.lineality + tuple(neg(l) for l in self.lineality)

    @cached_property
    def halfspaces(self) -> tuple[Vector, ...]:
        return self.facets + self.equalities + tuple(neg(e) for e in self.equalities)

    @property
    def is_zero(self) -> bool:
        return not self.is_empty and not self.rays and not self.lineality

    @property
    def is_subspace(self) -> bool:
        return not self.is_empty and not self.rays

    @property
    def is_pointed(self) -> bool:
        return not self.lineality

    @property
    def linear_dim(self) -> int:
        """Dimension of the linear span."""
        return self.dim - len(self.equalities)

    def _require_nonempty(self, what: str) -> None:
        if self.is_empty:
            raise ConeDomainError(f"{what} of the empty set is undefined")

    # predicates ---------------------------------------------------------
    def contains(self, x: Sequence) -> bool:
        if self.is_empty:
            return False
        return all(dot(e, x) == 0 for e in self.equalities) and all(dot(f, x) >= 0 for f in self.facets)

    def contains_in_relative_interior(self, x: Sequence) -> bool:
        if self.is_empty:
            return False
        return all(dot(e, x) == 0 for e in self.equalities) and all(dot(f, x) > 0 for f in self.facets)

    def contains_in_interior(self, x: Sequence) -> bool:
        return not self.equalities and self.contains_in_relative_interior(x)

    def contains_cone(self, other: "PolyhedralCone") -> bool:
        if other.is_empty:
            return True
        if self.is_empty:
            return False
        return all(self.contains(g) for g in other.generators)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyhedralCone):
            return NotImplemented
        if self.dim != other.dim or self.is_empty != other.is_empty:
            return False
        return self.is_empty or (self.rays == other.rays and self.lineality == other.lineality)

    def __hash__(self):
        return hash((self.dim, self.is_empty, self.rays, self.lineality))

    def __repr__(self) -> str:
        if self.is_empty:
            return f"PolyhedralCone(dim={self.dim}, empty)"
        rays = [tuple(str(a) for a in r) for r in self.rays]
        lin = [tuple(str(a) for a in r) for r in self.lineality]
        return f"PolyhedralCone(dim={self.dim}, rays={rays}, lineality={lin})"

    # operations ---------------------------------------------------------
    def dual(self) -> "PolyhedralCone":
        self._require_nonempty("dual")
        return PolyhedralCone(self.dim, self.facets, self.equalities, self.rays, self.lineality)

    def negate(self) -> "PolyhedralCone":
        if self.is_empty:
            return self
        return PolyhedralCone.from_generators([neg(g) for g in self.generators], self.dim)

    def lineality_space(self) -> "PolyhedralCone":
        self._require_nonempty("lineality")
        return PolyhedralCone.from_generators(self.lineality + tuple(neg(l) for l in self.lineality), self.dim)

    def orthogonal_complement(self) -> "PolyhedralCone":
        """``C^perp``: all y with <y, x> = 0 on C."""
        self._require_nonempty("orthogonal complement")
        return self.dual().lineality_space()

    def relative_interior_point(self) -> Vector:
        """Sum of the extreme rays; always a point of ri C."""
        self._require_nonempty("relative interior")
        p = zeros(self.dim)
        for r in self.rays:
            p = add(p, r)
        return p


def _check_dims(cones: Sequence[PolyhedralCone]) -> int:
    dims = {c.dim for c in cones}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def dual(C: PolyhedralCone) -> PolyhedralCone:
    return C.dual()


def lineality(C: PolyhedralCone) -> PolyhedralCone:
    return C.lineality_space()


def conic_hull_of_union(cones: Sequence[PolyhedralCone]) -> PolyhedralCone:
    """Smallest closed convex cone containing every nonempty member."""
    if not cones:
        raise ValueError("need at least one cone")
    dim = _check_dims(cones)
    live = [c for c in cones if not c.is_empty]
    if not live:
        return PolyhedralCone.empty(dim)
    if len(live) == 1:
        return live[0]
    return PolyhedralCone.from_generators([g for c in live for g in c.generators], dim)


def intersect(A: PolyhedralCone, B: PolyhedralCone) -> PolyhedralCone:
    dim = _check_dims([A, B])
    if A.is_empty or B.is_empty:
        return PolyhedralCone.empty(dim)
    return PolyhedralCone.from_halfspaces(A.halfspaces + B.halfspaces, dim)


def minkowski_sum(A: PolyhedralCone, B: PolyhedralCone) -> PolyhedralCone:
    dim = _check_dims([A, B])
    if A.is_empty or B.is_empty:
        return PolyhedralCone.empty(dim)
    return PolyhedralCone.from_generators(A.generators + B.generators, dim)


def ri_intersects(A: PolyhedralCone, B: PolyhedralCone) -> tuple[bool, Vector | None]:
    """Decide ``ri A ∩ ri B != ∅`` and return a common relative-interior point.

    ri cone(g_1..g_k) is the set of combinations with all weights strictly
    positive, so the test is one LP maximising a shared lower bound ``s`` on
    the weights of both generator families, with total weight normalised to 1.
    """
    dim = _check_dims([A, B])
    if A.is_empty or B.is_empty:
        raise ConeDomainError("ri_intersects needs nonempty cones")
    ga, gb = A.generators, B.generators
    if not ga and not gb:
        return True, zeros(dim)
    lp = LPBuilder()
    s = lp.var(free=True)
    la = lp.vars(len(ga))
    lb = lp.vars(len(gb))
    # weights are s + la_k (resp. s + lb_k)
    for i in range(dim):
        row = {}
        for var, g in zip(la, ga):
            row[var] = row.get(var, 0) + g[i]
        for var, g in zip(lb, gb):
            row[var] = row.get(var, 0) - g[i]
        row[s] = sum((g[i] for g in ga), Fraction(0)) - sum((g[i] for g in gb), Fraction(0))
        lp.add(row, EQ, 0)
    norm = {v: 1 for v in la + lb}
    norm[s] = len(ga) + len(gb)
    lp.add(norm, EQ, 1)
    out = lp_solve(lp.build({s: 1}))
    if not isinstance(out, Optimal) or out.value <= 0:
        return False, None
    x = out.point
    w = zeros(dim)
    for var, g in zip(la, ga):
        w = add(w, scale(x[s] + x[var], g))
    return True, w


def proper_separator(A: PolyhedralCone, B: PolyhedralCone) -> Vector:
    """A functional ``v`` with ``<v,a> <= 0 <= <v,b>`` on A and B, not zero on both.

    Chosen deterministically: first maximise the worst-case strict margin
    ``-<v, r>`` over the extreme rays r of A inside the box ``|v_i| <= 1``; if
    that margin is zero, maximise the total separation instead.  Among the
    optimal points the lexicographically smallest is taken, and the result is
    rescaled to a primitive integer vector.
    """
    dim = _check_dims([A, B])
    if A.is_empty or B.is_empty:
        raise ConeDomainError("proper_separator needs nonempty cones")

    def base(extra_margin: bool):
        lp = LPBuilder()
        v = lp.vars(dim, free=True)
        t = lp.var() if extra_margin else None
        for i in range(dim):
            lp.add({v[i]: 1}, LE, 1)
            lp.add({v[i]: 1}, GE, -1)
        for l in A.lineality + B.lineality:
            lp.add({v[i]: l[i] for i in range(dim)}, EQ, 0)
        for r in A.rays:
            row = {v[i]: r[i] for i in range(dim)}
            if t is not None:
                row[t] = 1
            lp.add(row, LE, 0)
        for r in B.rays:
            lp.add({v[i]: r[i] for i in range(dim)}, GE, 0)
        return lp, v, t

    lp, v, t = base(True)
    first = lp_solve(lp.build({t: 1}))
    if isinstance(first, Optimal) and first.value > 0:
        lp.add({t: 1}, EQ, first.value)
        out = lexmin_point(lp.build({}), v)
    else:
        lp, v, _ = base(False)
        total = {}
        for r in B.rays:
            for i in range(dim):
                total[v[i]] = total.get(v[i], 0) + r[i]
        for r in A.rays:
            for i in range(dim):
                total[v[i]] = total.get(v[i], 0) - r[i]
        second = lp_solve(lp.build(total))
        if not isinstance(second, Optimal) or second.value <= 0:
            raise ConeDomainError("relative interiors intersect; no proper separator exists")
        lp.add(total, EQ, second.value)
        out = lexmin_point(lp.build({}), v)
    assert isinstance(out, Optimal)
    return primitive(tuple(out.point[i] for i in v))


def decompose_into_sum(y: Sequence, A: PolyhedralCone, B: PolyhedralCone) -> tuple[Vector, Vector]:
    """Split ``y`` as ``a + b`` with ``a in A`` and ``b in B``.

    The conic weights over A's generators then B's are chosen as the
    lexicographically smallest feasible vector.
    """
    dim = _check_dims([A, B])
    y = vector(y)
    if A.is_empty or B.is_empty:
        raise ConeDomainError("cannot decompose over an empty set")
    ga, gb = A.generators, B.generators
    lp = LPBuilder()
    wa = lp.vars(len(ga))
    wb = lp.vars(len(gb))
    for i in range(dim):
        row = {}
        for var, g in zip(wa, ga):
            row[var] = g[i]
        for var, g in zip(wb, gb):
            row[var] = g[i]
        lp.add(row, EQ, y[i])
    out = lexmin_point(lp.build({}), wa + wb)
    if not isinstance(out, Optimal):
        raise ConeDomainError(f"{[str(c) for c in y]} is not in A + B")
    a = zeros(dim)
    for var, g in zip(wa, ga):
        a = add(a, scale(out.point[var], g))
    return a, sub(y, a)
