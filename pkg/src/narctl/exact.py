"""Exact rational arithmetic: vectors, Gaussian elimination and a simplex LP solver.

Every geometric decision in the package bottoms out here.  Public values are
:class:`fractions.Fraction`; the simplex kernel runs on ``gmpy2.mpq`` for speed
and converts back at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2

Vector = tuple  # tuple[Fraction, ...]

_mpq = gmpy2.mpq


class StructuralError(ValueError):
    """Raised when dimensions of an exact object do not line up."""


# --------------------------------------------------------------------------
# scalars and vectors
# --------------------------------------------------------------------------

def rational(value) -> Fraction:
    """Parse ``value`` into an exact Fraction.

    Accepts ints, Fractions, gmpy2 rationals and strings such as ``"3/4"``,
    ``"-2"`` or ``"0.25"``.  Binary floats are rejected: they rarely denote
    the rational the author had in mind.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational literal: {value!r}") from exc
    if isinstance(value, float):
        raise TypeError(f"binary float {value!r} is not accepted; pass a string")
    if type(value).__name__ in ("mpq", "mpz"):
        return Fraction(int(value.numerator), int(value.denominator))
    raise TypeError(f"cannot interpret {value!r} as a rational")


def vector(values: Iterable) -> Vector:
    return tuple(rational(v) for v in values)


def zeros(n: int) -> Vector:
    return (Fraction(0),) * n


def unit(n: int, i: int) -> Vector:
    return tuple(Fraction(1 if k == i else 0) for k in range(n))


def dot(u: Sequence, v: Sequence):
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def add(u: Sequence, v: Sequence) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Sequence, v: Sequence) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def scale(c, u: Sequence) -> Vector:
    return tuple(c * a for a in u)


def neg(u: Sequence) -> Vector:
    return tuple(-a for a in u)


def is_zero(u: Sequence) -> bool:
    return all(a == 0 for a in u)


def primitive(u: Sequence) -> Vector:
    """Positive rescaling of ``u`` to a coprime integer vector (zero stays zero)."""
    u = [rational(a) for a in u]
    if all(a == 0 for a in u):
        return tuple(Fraction(0) for _ in u)
    den = 1
    for a in u:
        den = den * a.denominator // math.gcd(den, a.denominator)
    ints = [int(a * den) for a in u]
    g = 0
    for a in ints:
        g = math.gcd(g, a)
    return tuple(Fraction(a // g) for a in ints)


def fmt(u: Sequence) -> list[str]:
    return [str(a) for a in u]


# --------------------------------------------------------------------------
# Gaussian elimination
# --------------------------------------------------------------------------

def rref(rows: Sequence[Sequence], ncols: int | None = None) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    m = [[rational(a) for a in r] for r in rows]
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        m[r] = [a / pv for a in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence], ncols: int | None = None) -> int:
    return len(rref(rows, ncols)[1])


def nullspace(rows: Sequence[Sequence], n: int) -> list[Vector]:
    """Basis of ``{x in Q^n : r.x = 0 for every row r}``."""
    if not rows:
        return [unit(n, i) for i in range(n)]
    red, piv = rref(rows, n)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for row, p in zip(red, piv):
            x[p] = -row[f]
        basis.append(tuple(x))
    return basis


@dataclass(frozen=True)
class SolutionSet:
    """Solution set of ``A x = b``: ``point + span(directions)``, or empty."""

    point: Vector | None
    directions: tuple[Vector, ...] = ()

    @property
    def consistent(self) -> bool:
        return self.point is not None

    @property
    def unique(self) -> bool:
        return self.point is not None and not self.directions


def solve_linear_system(A: Sequence[Sequence], b: Sequence) -> SolutionSet:
    if len(A) != len(b):
        raise StructuralError(f"{len(A)} rows but {len(b)} right-hand sides")
    n = len(A[0]) if A else 0
    if any(len(r) != n for r in A):
        raise StructuralError("ragged matrix")
    aug = [list(r) + [rational(bi)] for r, bi in zip(A, b)]
    red, piv = rref(aug, n + 1)
    if n in piv:
        return SolutionSet(None)
    x = [Fraction(0)] * n
    for row, p in zip(red, piv):
        x[p] = row[n]
    return SolutionSet(tuple(x), tuple(nullspace([r[:n] for r in red], n)))


# --------------------------------------------------------------------------
# linear programming
# --------------------------------------------------------------------------

LE, EQ, GE = "<=", "==", ">="


@dataclass(frozen=True)
class LinearProgram:
    """``maximize`` (or minimize) ``objective . x`` subject to row constraints.

    ``free[j]`` marks variable ``j`` as unbounded; all others are ``>= 0``.
    """

    objective: tuple
    rows: tuple
    senses: tuple
    rhs: tuple
    free: tuple = ()
    maximize: bool = True

    def __post_init__(self):
        n = len(self.objective)
        if len(self.rows) != len(self.senses) or len(self.rows) != len(self.rhs):
            raise StructuralError("rows, senses and rhs must have equal length")
        for r in self.rows:
            if len(r) != n:
                raise StructuralError(f"row of length {len(r)} in LP with {n} variables")
        for s in self.senses:
            if s not in (LE, EQ, GE):
                raise StructuralError(f"unknown constraint sense {s!r}")
        if self.free and len(self.free) != n:
            raise StructuralError("free mask has wrong length")

    @property
    def nvars(self) -> int:
        return len(self.objective)

    def is_free(self, j: int) -> bool:
        return bool(self.free) and bool(self.free[j])

    def satisfied_by(self, x: Sequence) -> bool:
        """Exact feasibility check of a candidate point."""
        if len(x) != self.nvars:
            return False
        for j, xj in enumerate(x):
            if not self.is_free(j) and xj < 0:
                return False
        for r, s, b in zip(self.rows, self.senses, self.rhs):
            v = dot(r, x)
            if (s == LE and v > b) or (s == GE and v < b) or (s == EQ and v != b):
                return False
        return True


class LPBuilder:
    """Incremental construction of a :class:`LinearProgram` with sparse rows."""

    def __init__(self):
        self.nvars = 0
        self._free: list[bool] = []
        self._rows: list[tuple[dict, str, Fraction]] = []

    def var(self, free: bool = False) -> int:
        self._free.append(free)
        self.nvars += 1
        return self.nvars - 1

    def vars(self, n: int, free: bool = False) -> list[int]:
        return [self.var(free) for _ in range(n)]

    def add(self, coeffs: dict, sense: str, rhs=0) -> None:
        row: dict[int, Fraction] = {}
        for j, c in coeffs.items():
            c = rational(c)
            if c:
                row[j] = row.get(j, Fraction(0)) + c
        self._rows.append((row, sense, rational(rhs)))

    def build(self, objective: dict, maximize: bool = True) -> LinearProgram:
        n = self.nvars
        obj = [Fraction(0)] * n
        for j, c in objective.items():
            obj[j] += rational(c)
        rows = []
        for coeffs, _, _ in self._rows:
            r = [Fraction(0)] * n
            for j, c in coeffs.items():
                r[j] = c
            rows.append(tuple(r))
        return LinearProgram(
            objective=tuple(obj),
            rows=tuple(rows),
            senses=tuple(s for _, s, _ in self._rows),
            rhs=tuple(b for _, _, b in self._rows),
            free=tuple(self._free),
            maximize=maximize,
        )


@dataclass(frozen=True)
class Optimal:
    value: Fraction
    point: Vector
    dual: Vector = field(default=(), compare=False)
    status: str = "optimal"


@dataclass(frozen=True)
class Infeasible:
    status: str = "infeasible"


@dataclass(frozen=True)
class Unbounded:
    status: str = "unbounded"


LPOutcome = Optimal | Infeasible | Unbounded


def _to_fraction(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


class _Tableau:
    """Dense simplex tableau over mpq with Bland's anti-cycling rule."""

    def __init__(self, rows, rhs, basis, ncols):
        self.T = rows          # list of lists, length ncols
        self.b = rhs           # list
        self.basis = basis     # basic column per row
        self.ncols = ncols

    def pivot(self, r: int, c: int, z: list, zval: list) -> None:
        T = self.T
        prow = T[r]
        pv = prow[c]
        if pv != 1:
            inv = 1 / pv
            prow = [a * inv for a in prow]
            T[r] = prow
            self.b[r] = self.b[r] * inv
        nz = [k for k, a in enumerate(prow) if a]
        br = self.b[r]
        for i in range(len(T)):
            if i == r:
                continue
            row = T[i]
            f = row[c]
            if f:
                for k in nz:
                    row[k] -= f * prow[k]
                self.b[i] -= f * br
        f = z[c]
        if f:
            for k in nz:
                z[k] -= f * prow[k]
            zval[0] -= f * br
        self.basis[r] = c

    def run(self, z: list, zval: list, allowed) -> str:
        """Minimize; ``z`` holds reduced costs, ``zval[0]`` minus the objective."""
        T, b = self.T, self.b
        while True:
            enter = next((j for j in range(self.ncols) if allowed[j] and z[j] < 0), None)
            if enter is None:
                return "optimal"
            best = None
            for i, row in enumerate(T):
                a = row[enter]
                if a > 0:
                    ratio = b[i] / a
                    if best is None or ratio < best[0] or (ratio == best[0] and self.basis[i] < self.basis[best[1]]):
                        best = (ratio, i)
            if best is None:
                return "unbounded"
            self.pivot(best[1], enter, z, zval)


def lp_solve(lp: LinearProgram) -> LPOutcome:
    """Solve ``lp`` exactly by the two-phase simplex method (Bland's rule)."""
    n = lp.nvars
    # column layout: for each variable a positive part, plus a negative part if free
    colmap: list[tuple[int, int]] = []  # (pos column, neg column or -1)
    ncols = 0
    for j in range(n):
        if lp.is_free(j):
            colmap.append((ncols, ncols + 1))
            ncols += 2
        else:
            colmap.append((ncols, -1))
            ncols += 1
    nstruct = ncols
    m = len(lp.rows)
    rows, rhs, flipped, senses = [], [], [], []
    for r, s, bval in zip(lp.rows, lp.senses, lp.rhs):
        row = [_mpq(0)] * nstruct
        for j, a in enumerate(r):
            if a:
                p, q = colmap[j]
                row[p] = _mpq(a)
                if q >= 0:
                    row[q] = -_mpq(a)
        bq = _mpq(bval)
        flip = bq < 0
        if flip:
            row = [-a for a in row]
            bq = -bq
            s = {LE: GE, GE: LE, EQ: EQ}[s]
        rows.append(row)
        rhs.append(bq)
        flipped.append(flip)
        senses.append(s)
    # slack / surplus columns, then artificial columns
    slack_col = [-1] * m
    for i, s in enumerate(senses):
        if s != EQ:
            slack_col[i] = ncols
            ncols += 1
    art_col = [-1] * m
    for i, s in enumerate(senses):
        if s != LE:
            art_col[i] = ncols
            ncols += 1
    T = []
    basis = []
    for i, row in enumerate(rows):
        full = row + [_mpq(0)] * (ncols - nstruct)
        if slack_col[i] >= 0:
            full[slack_col[i]] = _mpq(1) if senses[i] == LE else _mpq(-1)
        if art_col[i] >= 0:
            full[art_col[i]] = _mpq(1)
        T.append(full)
        basis.append(slack_col[i] if senses[i] == LE else art_col[i])
    identity_col = [slack_col[i] if senses[i] == LE else art_col[i] for i in range(m)]
    is_art = [False] * ncols
    for c in art_col:
        if c >= 0:
            is_art[c] = True
    tab = _Tableau(T, rhs, basis, ncols)

    # phase 1
    if any(is_art):
        z = [_mpq(0)] * ncols
        zval = [_mpq(0)]
        for c in range(ncols):
            if is_art[c]:
                z[c] = _mpq(1)
        for i, bc in enumerate(basis):
            if is_art[bc]:
                row = T[i]
                for k in range(ncols):
                    if row[k]:
                        z[k] -= row[k]
                zval[0] -= rhs[i]
        tab.run(z, zval, [True] * ncols)
        if -zval[0] > 0:
            return Infeasible()
        # drive zero-level artificials out of the basis
        origin = list(range(m))
        i = 0
        while i < len(tab.T):
            if is_art[tab.basis[i]]:
                row = tab.T[i]
                c = next((k for k in range(ncols) if not is_art[k] and row[k]), None)
                if c is not None:
                    tab.pivot(i, c, [_mpq(0)] * ncols, [_mpq(0)])
                else:
                    del tab.T[i]
                    del tab.b[i]
                    del tab.basis[i]
                    identity_col[origin.pop(i)] = None
                    continue
            i += 1

    # phase 2: minimise c (negated for maximisation)
    cost = [_mpq(0)] * ncols
    sign = -1 if lp.maximize else 1
    for j in range(n):
        cj = lp.objective[j]
        if cj:
            p, q = colmap[j]
            cost[p] = sign * _mpq(cj)
            if q >= 0:
                cost[q] = -sign * _mpq(cj)
    z = list(cost)
    zval = [_mpq(0)]
    for i, bc in enumerate(tab.basis):
        cb = cost[bc]
        if cb:
            row = tab.T[i]
            for k in range(ncols):
                if row[k]:
                    z[k] -= cb * row[k]
            zval[0] -= cb * tab.b[i]
    allowed = [not is_art[c] for c in range(ncols)]
    status = tab.run(z, zval, allowed)
    if status == "unbounded":
        return Unbounded()
    values = [_mpq(0)] * ncols
    for i, bc in enumerate(tab.basis):
        values[bc] = tab.b[i]
    point = []
    for j in range(n):
        p, q = colmap[j]
        v = values[p] - (values[q] if q >= 0 else 0)
        point.append(_to_fraction(v))
    value = sign * (-zval[0])
    duals = []
    for i in range(m):
        c = identity_col[i]
        if c is None:
            duals.append(Fraction(0))
            continue
        y = -z[c]
        if flipped[i]:
            y = -y
        duals.append(_to_fraction(sign * y))
    return Optimal(_to_fraction(value), tuple(point), tuple(duals))


def lp_lexopt(lp: LinearProgram, objectives: Sequence[Sequence], maximize: bool = False) -> LPOutcome:
    """Lexicographic optimisation: optimise each objective in turn, pinning earlier optima."""
    rows = list(lp.rows)
    senses = list(lp.senses)
    rhs = list(lp.rhs)
    last: LPOutcome = Infeasible()
    for obj in objectives:
        cur = LinearProgram(tuple(rational(c) for c in obj), tuple(rows), tuple(senses), tuple(rhs), lp.free, maximize)
        last = lp_solve(cur)
        if not isinstance(last, Optimal):
            return last
        rows.append(cur.objective)
        senses.append(EQ)
        rhs.append(last.value)
    return last


def lexmin_point(lp: LinearProgram, variables: Sequence[int] | None = None) -> LPOutcome:
    """Lexicographically smallest feasible point over ``variables`` (default: all)."""
    n = lp.nvars
    if variables is None:
        variables = range(n)
    objectives = []
    for j in variables:
        objectives.append(tuple(Fraction(1 if k == j else 0) for k in range(n)))
    return lp_lexopt(lp, objectives, maximize=False)
