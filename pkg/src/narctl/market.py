"""Bid-ask matrices, solvency cones and the bank-account specialisation.

``pi[i][j]`` is the number of units of asset ``i`` paid for one unit of asset
``j``.  Indices are 0-based in code and 1-based in messages.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .cones import PolyhedralCone
from .exact import Vector, rational, sub, unit, scale, vector
from .polytopes import Polytope, box
from .tree import ScenarioTree


class ValidationError(ValueError):
    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class TighteningError(ValueError):
    pass


@dataclass(frozen=True)
class BidAskMatrix:
    entries: tuple[tuple[Fraction, ...], ...]

    @property
    def d(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i][j]

    def interval(self, i: int, j: int) -> tuple[Fraction, Fraction]:
        """Bid and ask price of asset ``j`` in units of asset ``i``."""
        return 1 / self.entries[j][i], self.entries[i][j]

    def degenerate(self, i: int, j: int) -> bool:
        return self.entries[i][j] * self.entries[j][i] == 1

    def as_strings(self) -> list[list[str]]:
        return [[str(a) for a in row] for row in self.entries]


@dataclass(frozen=True)
class BankAccountPrices:
    bid: Vector
    ask: Vector

    @property
    def d(self) -> int:
        return len(self.bid)


def bid_ask_violations(rows: Sequence[Sequence]) -> list[str]:
    m = [[rational(a) for a in r] for r in rows]
    d = len(m)
    out = []
    if d < 2:
        return [f"need at least 2 assets, got {d}"]
    if any(len(r) != d for r in m):
        return ["matrix is not square"]
    for i in range(d):
        for j in range(d):
            if m[i][j] <= 0:
                out.append(f"(i) pi[{i + 1},{j + 1}] = {m[i][j]} is not positive")
        if m[i][i] != 1:
            out.append(f"(ii) pi[{i + 1},{i + 1}] = {m[i][i]} is not 1")
    if out:
        return out
    for i in range(d):
        for k in range(d):
            for j in range(d):
                if m[i][j] > m[i][k] * m[k][j]:
                    out.append(
                        f"(iii) triple (i,k,j)=({i + 1},{k + 1},{j + 1}): "
                        f"pi[{i + 1},{j + 1}]={m[i][j]} > {m[i][k]}*{m[k][j]}"
                    )
    return out


def validate_bid_ask(rows: Sequence[Sequence]) -> BidAskMatrix:
    problems = bid_ask_violations(rows)
    if problems:
        raise ValidationError(problems)
    return BidAskMatrix(tuple(tuple(rational(a) for a in r) for r in rows))


def bank_prices(bid: Sequence, ask: Sequence) -> BankAccountPrices:
    """Validated bank-account prices, bank account first at price 1."""
    bid, ask = vector(bid), vector(ask)
    if len(bid) != len(ask):
        raise ValidationError([f"bid has {len(bid)} entries, ask has {len(ask)}"])
    problems = []
    if not bid or bid[0] != 1 or ask[0] != 1:
        problems.append("bank account prices S^b_1 = S^a_1 = 1 required")
    for i, (b, a) in enumerate(zip(bid, ask)):
        if b <= 0:
            problems.append(f"bid of asset {i + 1} is {b}, must be positive")
        if b > a:
            problems.append(f"asset {i + 1}: bid {b} exceeds ask {a}")
    if len(bid) < 2:
        problems.append("need at least 2 assets")
    if problems:
        raise ValidationError(problems)
    return BankAccountPrices(bid, ask)


def bank_to_matrix(p: BankAccountPrices) -> BidAskMatrix:
    d = p.d
    rows = [[Fraction(1) if i == j else p.ask[j] / p.bid[i] for j in range(d)] for i in range(d)]
    return validate_bid_ask(rows)


def solvency_cone(pi: BidAskMatrix) -> PolyhedralCone:
    """K(Π): conic hull of the unit vectors and the exchange vectors pi^ij e_i - e_j."""
    d = pi.d
    gens = [unit(d, i) for i in range(d)]
    for i in range(d):
        for j in range(d):
            if i != j:
                gens.append(sub(scale(pi[i, j], unit(d, i)), unit(d, j)))
    return PolyhedralCone.from_generators(gens, d)


def dual_solvency_cone(pi: BidAskMatrix) -> PolyhedralCone:
    """K*(Π) from its halfspace description ``w >= 0, pi^ij w_i - w_j >= 0``."""
    d = pi.d
    hs = [unit(d, i) for i in range(d)]
    for i in range(d):
        for j in range(d):
            if i != j:
                hs.append(sub(scale(pi[i, j], unit(d, i)), unit(d, j)))
    return PolyhedralCone.from_halfspaces(hs, d)


def solvency_cone_bank(p: BankAccountPrices) -> PolyhedralCone:
    d = p.d
    e1 = unit(d, 0)
    gens = [unit(d, i) for i in range(d)]
    for i in range(1, d):
        gens.append(sub(unit(d, i), scale(p.bid[i], e1)))
        gens.append(sub(scale(p.ask[i], e1), unit(d, i)))
    return PolyhedralCone.from_generators(gens, d)


def price_box(p: BankAccountPrices) -> Polytope:
    """C = [S^b_2, S^a_2] x ... x [S^b_d, S^a_d]."""
    return box(p.bid[1:], p.ask[1:])


# --------------------------------------------------------------------------
# tightening
# --------------------------------------------------------------------------

def _contract(lo: Fraction, hi: Fraction, lam: Fraction) -> tuple[Fraction, Fraction]:
    mid = (lo + hi) / 2
    half = (hi - lo) / 2 * lam
    return mid - half, mid + half


def is_strict_tightening(tight: BidAskMatrix, orig: BidAskMatrix) -> bool:
    """Every nondegenerate interval of ``tight`` lies in the relative interior of the original."""
    d = orig.d
    for i in range(d):
        for j in range(d):
            if i == j:
                continue
            lo, hi = orig.interval(i, j)
            tlo, thi = tight.interval(i, j)
            if lo == hi:
                if (tlo, thi) != (lo, hi):
                    return False
            elif not (lo < tlo <= thi < hi):
                return False
    return True


def _consistent_contraction(pi: BidAskMatrix, lam: Fraction) -> BidAskMatrix:
    # z in ri K*(Π) gives a frictionless price system c^ij = z_j / z_i inside every
    # interval; relative spreads rho = pi / c >= 1 are pulled towards 1 by the
    # map x -> (1+c)x / (1+cx), which preserves submultiplicativity.
    z = solvency_cone(pi).dual().relative_interior_point()
    c = (1 - lam) / lam
    d = pi.d
    rows = []
    for i in range(d):
        row = []
        for j in range(d):
            if i == j:
                row.append(Fraction(1))
                continue
            base = z[j] / z[i]
            rho = pi[i, j] / base
            row.append(base * (1 + c) * rho / (1 + c * rho))
        rows.append(row)
    return validate_bid_ask(rows)


def tighten(pi: BidAskMatrix, lam=Fraction(1, 2), max_retries: int = 32, fallback: bool = True) -> BidAskMatrix:
    """Contract each nondegenerate bid-ask interval about its midpoint by ``lam``.

    The contraction is applied per unordered pair and re-validated; on failure
    ``lam`` is halved.  If no midpoint contraction is valid after ``max_retries``
    halvings, a contraction towards a frictionless price system inside the
    spreads is used (always valid) unless ``fallback`` is off.
    """
    lam = rational(lam)
    if not 0 < lam < 1:
        raise ValueError(f"contraction factor must lie in (0, 1), got {lam}")
    d = pi.d
    cur = lam
    for _ in range(max_retries + 1):
        rows = [list(r) for r in pi.entries]
        for i in range(d):
            for j in range(i + 1, d):
                lo, hi = pi.interval(i, j)
                if lo == hi:
                    continue
                nlo, nhi = _contract(lo, hi, cur)
                rows[i][j] = nhi
                rows[j][i] = 1 / nlo
        if not bid_ask_violations(rows):
            out = validate_bid_ask(rows)
            if is_strict_tightening(out, pi):
                return out
        cur /= 2
    if fallback:
        out = _consistent_contraction(pi, lam)
        if is_strict_tightening(out, pi):
            return out
    raise TighteningError(f"no valid contraction of the bid-ask matrix found (lambda={lam})")


def tighten_prices(p: BankAccountPrices, lam=Fraction(1, 2)) -> BankAccountPrices:
    """Bank-account tightening: contract every bid/ask interval about its midpoint."""
    lam = rational(lam)
    if not 0 < lam < 1:
        raise ValueError(f"contraction factor must lie in (0, 1), got {lam}")
    bid, ask = [p.bid[0]], [p.ask[0]]
    for b, a in zip(p.bid[1:], p.ask[1:]):
        nb, na = _contract(b, a, lam)
        bid.append(nb)
        ask.append(na)
    return BankAccountPrices(tuple(bid), tuple(ask))


# --------------------------------------------------------------------------
# the model
# --------------------------------------------------------------------------

@dataclass
class MarketModel:
    """A scenario tree carrying a bid-ask matrix (``general``) or bank prices (``bank``) per node."""

    tree: ScenarioTree
    kind: str
    data: Mapping[str, BidAskMatrix | BankAccountPrices]
    _cones: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("general", "bank"):
            raise ValidationError([f"unknown model kind {self.kind!r}"])
        problems = []
        for nid in self.tree.ids:
            if nid not in self.data:
                problems.append(f"node {nid!r} carries no market data")
        for nid, val in self.data.items():
            if nid not in self.tree:
                problems.append(f"market data for unknown node {nid!r}")
            want = BankAccountPrices if self.kind == "bank" else BidAskMatrix
            if not isinstance(val, want):
                problems.append(f"node {nid!r}: expected {want.__name__}")
        dims = {v.d for v in self.data.values()}
        if len(dims) > 1:
            problems.append(f"inconsistent asset counts {sorted(dims)}")
        if problems:
            raise ValidationError(problems)

    @property
    def d(self) -> int:
        return next(iter(self.data.values())).d

    def matrix(self, nid: str) -> BidAskMatrix:
        v = self.data[nid]
        return bank_to_matrix(v) if isinstance(v, BankAccountPrices) else v

    def solvency_cone(self, nid: str) -> PolyhedralCone:
        key = ("K", nid)
        if key not in self._cones:
            v = self.data[nid]
            self._cones[key] = solvency_cone_bank(v) if isinstance(v, BankAccountPrices) else solvency_cone(v)
        return self._cones[key]

    def dual_cone(self, nid: str) -> PolyhedralCone:
        return self.solvency_cone(nid).dual()

    def price_box(self, nid: str) -> Polytope:
        if self.kind != "bank":
            raise ValueError("price boxes exist only for bank-account models")
        return price_box(self.data[nid])

    def as_general(self) -> "MarketModel":
        """The same model with every node carrying its induced bid-ask matrix."""
        return MarketModel(self.tree, "general", {nid: self.matrix(nid) for nid in self.tree.ids})

    def tightened(self, lam=Fraction(1, 2)) -> dict[str, BidAskMatrix]:
        """Per-node tightened bid-ask matrices (price intervals for bank models)."""
        out = {}
        for nid in self.tree.ids:
            v = self.data[nid]
            if isinstance(v, BankAccountPrices):
                out[nid] = bank_to_matrix(tighten_prices(v, lam))
            else:
                out[nid] = tighten(v, lam)
        return out
