"""Robust no-arbitrage criteria on a scenario tree.

Three independent routes to the same verdict:

* :func:`run_recursion` -- backward recursion of dual cones
  ``W_T = K_T*``, ``Y_t = cl conv(children W)``, ``W_t = cl(ri K_t* ∩ ri Y_t)``;
  the verdict holds iff no ``W_t`` is empty (:func:`run_recursion_bank` is
  the same recursion on price boxes for bank-account models);
* :func:`find_consistent_price_process` -- one LP for a martingale ``Z`` with
  ``Z_t`` in ri ``K_t*`` at every node;
* :func:`find_null_strategy` -- one LP for increments ``x_t in -K_t`` summing to
  zero along every path with mass outside the lineality spaces.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .cones import PolyhedralCone, intersect, ri_intersects
from .exact import EQ, LE, LPBuilder, Optimal, Vector, add, dot, is_zero, lp_solve, neg, scale, zeros
from .market import MarketModel
from .polytopes import Polytope, ri_intersect_closure
from .tree import conditional_support


@dataclass
class RecursionTrace:
    """Per-node output of a backward recursion.

    ``values`` holds W (cone traces) or V (box traces); ``supports`` holds Y
    or X at internal nodes.
    """

    model: MarketModel
    kind: str  # "cone" or "box"
    values: dict = field(default_factory=dict)
    supports: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return all(not v.is_empty for v in self.values.values())

    def empty_nodes(self) -> list[str]:
        return [nid for nid in self.model.tree.ids if self.values[nid].is_empty]

    def failure_time(self) -> int | None:
        times = [self.model.tree.node(n).t for n in self.empty_nodes()]
        return max(times) if times else None

    def failure_set(self) -> list[str]:
        n = self.failure_time()
        if n is None:
            return []
        return [nid for nid in self.model.tree.nodes_at(n) if self.values[nid].is_empty]


def _map_level(fn, ids, jobs: int):
    if jobs <= 1 or len(ids) <= 1:
        return [fn(i) for i in ids]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, ids))


def run_recursion(model: MarketModel, jobs: int = 1) -> RecursionTrace:
    tree = model.tree
    trace = RecursionTrace(model, "cone")

    def step(nid):
        kstar = model.dual_cone(nid)
        if tree.is_leaf(nid):
            return nid, kstar, None
        Y = conditional_support(tree, trace.values, nid)
        if Y.is_empty:
            return nid, PolyhedralCone.empty(model.d), Y
        meets, _ = ri_intersects(kstar, Y)
        return nid, (intersect(kstar, Y) if meets else PolyhedralCone.empty(model.d)), Y

    for level in tree.backward_levels():
        for nid, W, Y in _map_level(step, level, jobs):
            trace.values[nid] = W
            if Y is not None:
                trace.supports[nid] = Y
    return trace


def run_recursion_bank(model: MarketModel, jobs: int = 1) -> RecursionTrace:
    if model.kind != "bank":
        raise ValueError("box recursion needs a bank-account model")
    tree = model.tree
    trace = RecursionTrace(model, "box")

    def step(nid):
        C = model.price_box(nid)
        if tree.is_leaf(nid):
            return nid, C, None
        X = conditional_support(tree, trace.values, nid)
        if X.is_empty:
            return nid, Polytope.empty(C.dim), X
        return nid, ri_intersect_closure(C, X), X

    for level in tree.backward_levels():
        for nid, V, X in _map_level(step, level, jobs):
            trace.values[nid] = V
            if X is not None:
                trace.supports[nid] = X
    return trace


# --------------------------------------------------------------------------
# strictly consistent price processes
# --------------------------------------------------------------------------

@dataclass
class ConsistentPriceProcess:
    Z: dict[str, Vector]
    slack: Fraction = Fraction(0)


def find_consistent_price_process(model: MarketModel) -> ConsistentPriceProcess | None:
    """Martingale ``Z`` with ``Z(n)`` in ri K*(n) everywhere, or None.

    ``Z(n)`` is written as a combination of the generators of K*(n) with every
    weight at least a shared slack ``s``; strictly consistent processes exist
    iff the maximal ``s`` is positive.  Normalisation: coordinates of
    ``Z(root)`` sum to 1.
    """
    tree, d = model.tree, model.d
    lp = LPBuilder()
    s = lp.var(free=True)
    weights: dict[str, list[tuple[int, Vector]]] = {}
    for nid in tree.ids:
        gens = model.dual_cone(nid).generators
        weights[nid] = [(lp.var(), g) for g in gens]

    def z_terms(nid, coef, row, i):
        for var, g in weights[nid]:
            if g[i]:
                row[var] = row.get(var, 0) + coef * g[i]
                row[s] = row.get(s, 0) + coef * g[i]

    for nid in tree.ids:
        kids = tree.children(nid)
        if not kids:
            continue
        for i in range(d):
            row: dict = {}
            z_terms(nid, Fraction(1), row, i)
            for c in kids:
                z_terms(c, -tree.conditional_prob(c), row, i)
            lp.add(row, EQ, 0)
    norm: dict = {}
    for i in range(d):
        z_terms(tree.root, Fraction(1), norm, i)
    lp.add(norm, EQ, 1)
    out = lp_solve(lp.build({s: 1}))
    if not isinstance(out, Optimal) or out.value <= 0:
        return None
    x = out.point
    Z = {}
    for nid in tree.ids:
        z = zeros(d)
        for var, g in weights[nid]:
            z = add(z, scale(x[s] + x[var], g))
        Z[nid] = z
    return ConsistentPriceProcess(Z, out.value)


def cpp_violations(model: MarketModel, Z: Mapping[str, Vector]) -> list[str]:
    """Exact audit of a candidate strictly consistent price process."""
    tree, d = model.tree, model.d
    out = []
    for nid in tree.ids:
        if nid not in Z:
            out.append(f"martingale: node {nid!r} has no Z value")
            continue
        if len(Z[nid]) != d:
            out.append(f"martingale: Z({nid}) has dimension {len(Z[nid])}")
            continue
        if not model.dual_cone(nid).contains_in_relative_interior(Z[nid]):
            out.append(f"ri-membership: Z({nid}) is not in ri K*({nid})")
    if out:
        return out
    for nid in tree.ids:
        kids = tree.children(nid)
        if not kids:
            continue
        mean = zeros(d)
        for c in kids:
            mean = add(mean, scale(tree.conditional_prob(c), Z[c]))
        if mean != tuple(Z[nid]):
            out.append(f"martingale: Z({nid}) differs from the conditional mean of its children")
    return out


@dataclass
class BankForm:
    Q: dict[str, Fraction]      # leaf weights of the equivalent measure
    S: dict[str, Vector]        # mid prices of assets 2..d in bank-account units


def cpp_to_bank_form(model: MarketModel, cpp: ConsistentPriceProcess) -> BankForm:
    tree = model.tree
    Z = cpp.Z
    for nid, z in Z.items():
        if z[0] <= 0:
            raise ValueError(f"Z({nid}) has nonpositive bank-account coordinate")
    z0 = Z[tree.root][0]
    Q = {leaf: tree.node(leaf).prob * Z[leaf][0] / z0 for leaf in tree.leaves()}
    S = {nid: tuple(a / z[0] for a in z[1:]) for nid, z in Z.items()}
    return BankForm(Q, S)


def bank_form_to_cpp(model: MarketModel, form: BankForm) -> ConsistentPriceProcess:
    """Z^1_t = E(dQ/dP | F_t), Z^i_t = Z^1_t S^i_t."""
    tree = model.tree
    Z = {}
    for nid in tree.ids:
        below = [nid] if tree.is_leaf(nid) else [n for n in tree.descendants(nid) if tree.is_leaf(n)]
        z1 = sum((form.Q[leaf] for leaf in below), Fraction(0)) / tree.node(nid).prob
        Z[nid] = (z1,) + tuple(z1 * a for a in form.S[nid])
    return ConsistentPriceProcess(Z)


def bank_form_violations(model: MarketModel, form: BankForm) -> list[str]:
    tree = model.tree
    out = []
    if any(q <= 0 for q in form.Q.values()):
        out.append("measure: Q is not equivalent to P")
    if sum(form.Q.values(), Fraction(0)) != 1:
        out.append("measure: Q does not sum to 1")

    def mass(nid):
        if tree.is_leaf(nid):
            return form.Q[nid]
        return sum((form.Q[n] for n in tree.descendants(nid) if tree.is_leaf(n)), Fraction(0))

    for nid in tree.ids:
        p = model.data[nid]
        for i, s in enumerate(form.S[nid], start=1):
            lo, hi = p.bid[i], p.ask[i]
            if not ((lo < s < hi) or (lo == hi == s)):
                out.append(f"ri-membership: S({nid})[{i + 1}] = {s} outside ri[{lo}, {hi}]")
        kids = tree.children(nid)
        if kids:
            m = mass(nid)
            mean = zeros(len(form.S[nid]))
            for c in kids:
                mean = add(mean, scale(mass(c) / m, form.S[c]))
            if mean != tuple(form.S[nid]):
                out.append(f"martingale: S({nid}) is not the Q-mean of its children")
    return out


# --------------------------------------------------------------------------
# null strategies
# --------------------------------------------------------------------------

@dataclass
class NullStrategy:
    x: dict[str, Vector]


def find_null_strategy(model: MarketModel) -> NullStrategy | None:
    """Increments ``x(n) in -K(n)`` with zero sum on every path, not all trivial.

    ``x(n) = -Σ w_g g`` over the generators of K(n); a weight on an extreme ray
    (as opposed to a lineality vector) puts ``x(n)`` outside ``K ∩ -K``.  The
    LP maximises total extreme-ray weight, capped at 1.
    """
    tree, d = model.tree, model.d
    lp = LPBuilder()
    weights: dict[str, list[tuple[int, Vector]]] = {}
    ray_vars = []
    for nid in tree.ids:
        K = model.solvency_cone(nid)
        ws = []
        for g in K.rays:
            v = lp.var()
            ws.append((v, g))
            ray_vars.append(v)
        for g in K.lineality:
            ws.append((lp.var(), g))
            ws.append((lp.var(), neg(g)))
        weights[nid] = ws
    for leaf in tree.leaves():
        path = tree.path_to_root(leaf)
        for i in range(d):
            row: dict = {}
            for nid in path:
                for var, g in weights[nid]:
                    if g[i]:
                        row[var] = row.get(var, 0) + g[i]
            lp.add(row, EQ, 0)
    lp.add({v: 1 for v in ray_vars}, LE, 1)
    out = lp_solve(lp.build({v: 1 for v in ray_vars}))
    if not isinstance(out, Optimal) or out.value <= 0:
        return None
    x = {}
    for nid in tree.ids:
        acc = zeros(d)
        for var, g in weights[nid]:
            acc = add(acc, scale(out.point[var], g))
        x[nid] = neg(acc)
    return NullStrategy(x)


def null_strategy_violations(model: MarketModel, x: Mapping[str, Vector]) -> list[str]:
    """Empty iff ``x`` is adapted, in -K, sums to zero pathwise and is nontrivial somewhere."""
    tree, d = model.tree, model.d
    out = []
    nontrivial = False
    for nid in tree.ids:
        K = model.solvency_cone(nid)
        if not K.contains(neg(x[nid])):
            out.append(f"self-financing: x({nid}) is not in -K({nid})")
        if not K.contains(x[nid]):
            nontrivial = True
    for leaf in tree.leaves():
        total = zeros(d)
        for nid in tree.path_to_root(leaf):
            total = add(total, x[nid])
        if not is_zero(total):
            out.append(f"telescoping: increments along the path to {leaf!r} do not sum to zero")
    if not nontrivial:
        out.append("nontrivial: every increment lies in the lineality space")
    return out


def verdict(model: MarketModel, jobs: int = 1) -> bool:
    return run_recursion(model, jobs).holds
