"""Explicit arbitrage strategies for markets that fail the robust criterion.

Construction, given a failing recursion trace:

1. ``n`` is the last time with an empty W; on those nodes the seed increment
   ``x_n`` properly separates K_n* from Y_n (so ``x_n in -K_n ∩ Y_n*``).
2. The seed is carried forward and split at each later node into a piece of
   K_t (whose negative is ``x_t``) and a remainder in Y_t* pushed to the
   children; leaves absorb the rest.  Increments telescope to zero on every path.
3. At a time ``m`` where some increment leaves the lineality space, a
   nonnegative ``eps`` is added so that the position gains value.  The
   portfolio ``theta_t = sum_{s<=t} (x_s + eps_s)`` ends at ``eps_m >= 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .cones import ConeDomainError, PolyhedralCone, decompose_into_sum, proper_separator
from .engine import RecursionTrace, run_recursion
from .exact import LE, LPBuilder, Optimal, Vector, add, dot, is_zero, lp_lexopt, neg, scale, zeros
from .market import BidAskMatrix, MarketModel, is_strict_tightening, solvency_cone


class ConstructionError(RuntimeError):
    """A step of the construction produced something that fails its own check."""


@dataclass
class ArbitrageCertificate:
    n: int
    failure_set: list[str]
    x: dict[str, Vector]
    m: int
    adjusted: list[str]
    eps: dict[str, Vector]
    eps_mode: dict[str, str]          # "original" or "tightened" per adjusted node
    lam: Fraction
    tightened: dict[str, BidAskMatrix]
    theta: dict[str, Vector] = field(default_factory=dict)
    payoff: dict[str, Vector] = field(default_factory=dict)

    @property
    def arbitrage_under_original(self) -> bool:
        return all(mode == "original" for mode in self.eps_mode.values())


def first_failure(trace: RecursionTrace) -> tuple[int, list[str]]:
    n = trace.failure_time()
    if n is None:
        raise ConeDomainError("the recursion found no empty value; nothing to construct")
    return n, trace.failure_set()


def initial_increment(n: int, failure_set: list[str], trace: RecursionTrace, model: MarketModel) -> dict[str, Vector]:
    out = {}
    for nid in model.tree.nodes_at(n):
        if nid not in failure_set:
            out[nid] = zeros(model.d)
            continue
        Y = trace.supports.get(nid)
        if Y is None or Y.is_empty:
            raise ConstructionError(f"no conditional support at failing node {nid!r}")
        v = proper_separator(model.dual_cone(nid), Y)
        if not model.solvency_cone(nid).contains(neg(v)) or not Y.dual().contains(v):
            raise ConstructionError(f"separator at {nid!r} is not in -K ∩ Y*")
        out[nid] = v
    return out


def decompose_forward(seed: dict[str, Vector], model: MarketModel, trace: RecursionTrace) -> dict[str, Vector]:
    """Increments after the seed time; along every path they sum to minus the seed."""
    tree = model.tree
    out: dict[str, Vector] = {}
    carry = {c: seed[nid] for nid in seed for c in tree.children(nid)}
    while carry:
        nxt = {}
        for nid, y in carry.items():
            K = model.solvency_cone(nid)
            if tree.is_leaf(nid):
                if not K.contains(y):
                    raise ConstructionError(f"terminal remainder at {nid!r} is not in K")
                out[nid] = neg(y)
                continue
            if is_zero(y):
                g, rest = zeros(model.d), y
            else:
                try:
                    g, rest = decompose_into_sum(y, K, trace.supports[nid].dual())
                except ConeDomainError as exc:
                    raise ConstructionError(f"cannot split the carried position at {nid!r}") from exc
            out[nid] = neg(g)
            for c in tree.children(nid):
                nxt[c] = rest
        carry = nxt
    return out


def _lexmax_eps(x: Vector, K: PolyhedralCone) -> Vector:
    """Lexicographically largest ``eps >= 0`` with ``x + eps in -K``."""
    d = len(x)
    lp = LPBuilder()
    e = lp.vars(d)
    for h in K.halfspaces:
        lp.add({e[i]: h[i] for i in range(d)}, LE, -dot(h, x))
    objectives = [tuple(Fraction(int(i == j)) for i in range(d)) for j in range(d)]
    out = lp_lexopt(lp.build({}), objectives, maximize=True)
    if not isinstance(out, Optimal):
        raise ConstructionError("no nonnegative adjustment keeps the increment solvent")
    return tuple(out.point[i] for i in e)


def epsilon_adjust(x: dict[str, Vector], model: MarketModel, lam=Fraction(1, 2)):
    """Pick ``m``, the nodes ``B_m``, the adjustments and the tightened model.

    Preferred: the first time at which some increment admits a nonzero
    adjustment that is still solvent for the original matrices; ``B_m`` is
    then the set of such nodes and each gets its lexicographically largest
    adjustment, so the portfolio is an arbitrage for the original model too.
    Otherwise ``m`` is the first time with an increment outside the lineality
    space and each such node gets half of its largest adjustment solvent for
    the tightened matrix, which keeps the adjusted increment interior.
    """
    tree = model.tree
    tightened = model.tightened(lam)
    outside = {t: [nid for nid in tree.nodes_at(t) if nid in x and not model.solvency_cone(nid).contains(x[nid])]
               for t in range(tree.horizon + 1)}
    first = next((t for t in outside if outside[t]), None)
    if first is None:
        raise ConstructionError("every increment lies in the lineality space")
    for t in range(first, tree.horizon + 1):
        eps = {}
        for nid in outside[t]:
            e = _lexmax_eps(x[nid], model.solvency_cone(nid))
            if not is_zero(e):
                eps[nid] = e
        if eps:
            return t, list(eps), eps, {nid: "original" for nid in eps}, tightened
    eps = {}
    for nid in outside[first]:
        e = _lexmax_eps(x[nid], solvency_cone(tightened[nid]))
        if is_zero(e):
            raise ConstructionError(f"increment at {nid!r} is not interior to the tightened cone")
        eps[nid] = scale(Fraction(1, 2), e)
    return first, outside[first], eps, {nid: "tightened" for nid in eps}, tightened


def assemble(n, failure_set, x, m, B, eps, mode, lam, tightened, model: MarketModel) -> ArbitrageCertificate:
    tree = model.tree
    full = {nid: x.get(nid, zeros(model.d)) for nid in tree.ids}
    theta = {}
    for level in range(tree.horizon + 1):
        for nid in tree.nodes_at(level):
            par = tree.parent(nid)
            prev = theta[par] if par is not None else zeros(model.d)
            theta[nid] = add(add(prev, full[nid]), eps.get(nid, zeros(model.d)))
    return ArbitrageCertificate(
        n=n, failure_set=list(failure_set), x=full, m=m, adjusted=list(B), eps=dict(eps),
        eps_mode=dict(mode), lam=Fraction(lam), tightened=dict(tightened), theta=theta,
        payoff={leaf: theta[leaf] for leaf in tree.leaves()},
    )


def certificate_violations(cert: ArbitrageCertificate, model: MarketModel) -> list[str]:
    """Every invariant of an arbitrage certificate, checked exactly; empty means valid."""
    tree, d = model.tree, model.d
    out = []
    ids = set(tree.ids)
    for name, table in (("x", cert.x), ("theta", cert.theta), ("tightened", cert.tightened)):
        if set(table) != ids:
            out.append(f"structure: {name} is not defined on exactly the tree's nodes")
    if out:
        return out
    for nid in cert.eps:
        if nid not in ids or tree.node(nid).t != cert.m or nid not in cert.adjusted:
            out.append(f"structure: adjustment at {nid!r} outside B_m")
        if any(a < 0 for a in cert.eps[nid]):
            out.append(f"adjustment: eps({nid}) has a negative entry")
    for nid in cert.adjusted:
        if nid not in cert.eps or is_zero(cert.eps[nid]):
            out.append(f"adjustment: eps({nid}) is zero on B_m")

    for nid in tree.ids:
        if tree.node(nid).t < cert.n and not is_zero(cert.x[nid]):
            out.append(f"structure: nonzero increment at {nid!r} before the failure time")
        par = tree.parent(nid)
        prev = cert.theta[par] if par is not None else zeros(d)
        step = tuple(a - b for a, b in zip(cert.theta[nid], prev))
        want = add(cert.x[nid], cert.eps.get(nid, zeros(d)))
        if step != want:
            out.append(f"assembly: theta({nid}) - theta(parent) differs from x + eps")
        if not model.solvency_cone(nid).contains(neg(cert.x[nid])):
            out.append(f"self-financing: x({nid}) is not in -K({nid}) for the original matrix")
        if not solvency_cone(cert.tightened[nid]).contains(neg(step)):
            out.append(f"self-financing: theta increment at {nid!r} is not in -K for the tightened matrix")
        if cert.eps_mode.get(nid, "original") == "original" and not model.solvency_cone(nid).contains(neg(step)):
            out.append(f"self-financing: theta increment at {nid!r} is not in -K for the original matrix")
        if not is_strict_tightening(cert.tightened[nid], model.matrix(nid)):
            out.append(f"tightening: matrix at {nid!r} is not a strict tightening")

    nonzero = False
    for leaf in tree.leaves():
        total = zeros(d)
        for nid in tree.path_to_root(leaf):
            total = add(total, cert.x[nid])
        if not is_zero(total):
            out.append(f"telescoping: increments on the path to {leaf!r} do not sum to zero")
        pay = cert.theta[leaf]
        if any(a < 0 for a in pay):
            out.append(f"terminal: payoff at {leaf!r} has a negative entry")
        if not is_zero(pay):
            nonzero = True
        if cert.payoff.get(leaf, pay) != pay:
            out.append(f"terminal: recorded payoff at {leaf!r} differs from theta")
    if not nonzero:
        out.append("terminal: payoff is zero at every leaf")
    return out


def lemma_diagnostics(cert: ArbitrageCertificate, trace: RecursionTrace) -> list[str]:
    """Check ``y_t = -sum_{s>=t} x_s`` lies in W_t* and in Y*_{t-1} after the failure time."""
    model, tree = trace.model, trace.model.tree
    out = []
    for nid in tree.ids:
        t = tree.node(nid).t
        if t <= cert.n:
            continue
        y = zeros(model.d)
        for anc in tree.path_to_root(nid)[1:]:
            y = add(y, cert.x[anc])
        if not trace.values[nid].dual().contains(y):
            out.append(f"y({nid}) is not in W*")
        if not trace.supports[tree.parent(nid)].dual().contains(y):
            out.append(f"y({nid}) is not in Y* of its parent")
    return out


def build_arbitrage(model: MarketModel, lam=Fraction(1, 2), trace: RecursionTrace | None = None) -> ArbitrageCertificate:
    """Run the whole construction and return a verified certificate."""
    if trace is None:
        trace = run_recursion(model)
    n, A = first_failure(trace)
    seed = initial_increment(n, A, trace, model)
    x = dict(seed)
    x.update(decompose_forward(seed, model, trace))
    m, B, eps, mode, tightened = epsilon_adjust(x, model, lam)
    cert = assemble(n, A, x, m, B, eps, mode, lam, tightened, model)
    problems = certificate_violations(cert, model)
    if problems:
        raise ConstructionError("; ".join(problems))
    return cert
