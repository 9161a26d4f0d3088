"""A two-period, three-asset bank-account market that admits arbitrage.

Assets 2 and 3 trade against the bank account inside the boxes
``[2,6]^2`` at t=0 and ``[4,8]^2`` at t=1; at t=2 they settle at (9,6) in
state ``w1`` and (4,1) in state ``w2``.  The hull of the two terminal points
meets ``[4,8]^2`` only along the segment (7,4)-(8,5), which misses ``[2,6]^2``,
so arbitrage appears at t=0.
"""

from __future__ import annotations

from fractions import Fraction

from .market import MarketModel, bank_prices
from .tree import Node, ScenarioTree


def two_state_tree() -> ScenarioTree:
    half = Fraction(1, 2)
    return ScenarioTree([
        Node("root", 0, None, Fraction(1)),
        Node("u", 1, "root", Fraction(1)),
        Node("w1", 2, "u", half),
        Node("w2", 2, "u", half),
    ])


def worked_model() -> MarketModel:
    data = {
        "root": bank_prices([1, 2, 2], [1, 6, 6]),
        "u": bank_prices([1, 4, 4], [1, 8, 8]),
        "w1": bank_prices([1, 9, 6], [1, 9, 6]),
        "w2": bank_prices([1, 4, 1], [1, 4, 1]),
    }
    return MarketModel(two_state_tree(), "bank", data)


def constant_model(d: int = 3, horizon: int = 1) -> MarketModel:
    """Frictionless market with constant prices 1, 2, ..., d on a binary tree."""
    nodes = [Node("n0", 0, None, Fraction(1))]
    frontier = ["n0"]
    for t in range(1, horizon + 1):
        nxt = []
        for p in frontier:
            prob = next(n.prob for n in nodes if n.id == p) / 2
            for k in range(2):
                nid = f"{p}{k}"
                nodes.append(Node(nid, t, p, prob))
                nxt.append(nid)
        frontier = nxt
    prices = list(range(1, d + 1))
    data = {n.id: bank_prices(prices, prices) for n in nodes}
    return MarketModel(ScenarioTree(nodes), "bank", data)
