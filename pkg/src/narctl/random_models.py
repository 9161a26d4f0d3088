"""Random valid market models for property tests and benchmarks.

General models start from a frictionless price system ``c^ij = z_j / z_i``
and multiply it by relative spreads ``rho^ij >= 1``.  Closing ``rho`` under
min-products keeps ``rho^ij <= rho^ik rho^kj`` and so the result is a valid
bid-ask matrix.  Some pairs get zero spread on purpose.
"""

from __future__ import annotations

import os
import random
from fractions import Fraction

from .market import BankAccountPrices, MarketModel, bank_prices, validate_bid_ask
from .tree import Node, ScenarioTree

SEED_ENV = "NARCTL_SEED"


def default_seed(fallback: int = 20240601) -> int:
    raw = os.environ.get(SEED_ENV)
    return int(raw) if raw else fallback


def random_tree(rng: random.Random, horizon: int, max_branching: int = 3) -> ScenarioTree:
    nodes = [Node("r", 0, None, Fraction(1))]
    frontier = [nodes[0]]
    for t in range(1, horizon + 1):
        nxt = []
        for parent in frontier:
            k = rng.randint(1, max_branching)
            raw = [rng.randint(1, 4) for _ in range(k)]
            total = sum(raw)
            for j, w in enumerate(raw):
                node = Node(f"{parent.id}.{j}", t, parent.id, parent.prob * Fraction(w, total))
                nodes.append(node)
                nxt.append(node)
        frontier = nxt
    return ScenarioTree(nodes)


def _price_path(rng: random.Random, tree: ScenarioTree, d: int) -> dict[str, list[Fraction]]:
    """A positive price vector per node, moving by small multiplicative steps."""
    z = {tree.root: [Fraction(rng.randint(1, 6)) for _ in range(d)]}
    steps = [Fraction(2, 3), Fraction(4, 5), Fraction(1), Fraction(1), Fraction(5, 4), Fraction(3, 2)]
    for t in range(1, tree.horizon + 1):
        for nid in tree.nodes_at(t):
            par = z[tree.parent(nid)]
            z[nid] = [par[0]] + [a * rng.choice(steps) for a in par[1:]]
    return z


def random_bid_ask(rng: random.Random, z: list[Fraction], degenerate_p: float = 0.25):
    d = len(z)
    rho = [[Fraction(1)] * d for _ in range(d)]
    for i in range(d):
        for j in range(i + 1, d):
            if rng.random() < degenerate_p:
                continue
            rho[i][j] = 1 + Fraction(rng.randint(0, 6), 10)
            rho[j][i] = 1 + Fraction(rng.randint(1, 6), 10)
    for k in range(d):
        for i in range(d):
            for j in range(d):
                if rho[i][k] * rho[k][j] < rho[i][j]:
                    rho[i][j] = rho[i][k] * rho[k][j]
    rows = [[Fraction(1) if i == j else z[j] / z[i] * rho[i][j] for j in range(d)] for i in range(d)]
    return validate_bid_ask(rows)


def random_general_model(rng: random.Random, d: int | None = None, horizon: int | None = None,
                         max_branching: int = 3) -> MarketModel:
    d = d if d is not None else rng.choice([2, 3, 4])
    horizon = horizon if horizon is not None else rng.choice([1, 2, 3])
    tree = random_tree(rng, horizon, max_branching)
    z = _price_path(rng, tree, d)
    data = {nid: random_bid_ask(rng, z[nid]) for nid in tree.ids}
    return MarketModel(tree, "general", data)


def random_bank_prices(rng: random.Random, mid: list[Fraction], degenerate_p: float = 0.25) -> BankAccountPrices:
    bid, ask = [Fraction(1)], [Fraction(1)]
    for m in mid[1:]:
        if rng.random() < degenerate_p:
            bid.append(m)
            ask.append(m)
        else:
            bid.append(m * (1 - Fraction(rng.randint(0, 4), 10)))
            ask.append(m * (1 + Fraction(rng.randint(1, 4), 10)))
    return bank_prices(bid, ask)


def random_bank_model(rng: random.Random, d: int | None = None, horizon: int | None = None,
                      max_branching: int = 3) -> MarketModel:
    d = d if d is not None else rng.choice([2, 3, 4])
    horizon = horizon if horizon is not None else rng.choice([1, 2, 3])
    tree = random_tree(rng, horizon, max_branching)
    z = _price_path(rng, tree, d)
    data = {nid: random_bank_prices(rng, [Fraction(1)] + z[nid][1:]) for nid in tree.ids}
    return MarketModel(tree, "bank", data)


def random_deterministic_model(rng: random.Random, d: int | None = None, horizon: int | None = None) -> MarketModel:
    """Single-path tree: the probability space has one point."""
    d = d if d is not None else rng.choice([2, 3, 4])
    horizon = horizon if horizon is not None else rng.choice([1, 2, 3])
    return random_general_model(rng, d, horizon, max_branching=1)
