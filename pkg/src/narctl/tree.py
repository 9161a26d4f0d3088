"""Scenario trees: finite filtered probability spaces with positive node masses.

Nodes at depth ``t`` are the atoms of F_t.  On such a space the conditional
support of a set-valued map at a node is the union of its values over the
node's children, so only the closed convex (or conic) hull of that union is
ever built.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .cones import PolyhedralCone, conic_hull_of_union
from .polytopes import Polytope, hull_of_union


class TreeError(ValueError):
    pass


@dataclass(frozen=True)
class Node:
    id: str
    t: int
    parent: str | None
    prob: Fraction


class ScenarioTree:
    def __init__(self, nodes: Sequence[Node]):
        self._nodes: dict[str, Node] = {}
        self._children: dict[str, list[str]] = {}
        problems = []
        for n in nodes:
            if n.id in self._nodes:
                problems.append(f"duplicate node id {n.id!r}")
                continue
            self._nodes[n.id] = n
            self._children[n.id] = []
        roots = [n for n in self._nodes.values() if n.parent is None]
        if len(roots) != 1:
            problems.append(f"expected exactly one root, found {len(roots)}")
        for n in self._nodes.values():
            if n.prob <= 0:
                problems.append(f"node {n.id!r}: probability {n.prob} is not positive")
            if n.parent is None:
                if n.t != 0:
                    problems.append(f"root {n.id!r} has time {n.t}, expected 0")
                continue
            par = self._nodes.get(n.parent)
            if par is None:
                problems.append(f"node {n.id!r}: unknown parent {n.parent!r}")
                continue
            if par.t != n.t - 1:
                problems.append(f"node {n.id!r} at t={n.t} has parent at t={par.t}")
            self._children[n.parent].append(n.id)
        if problems:
            raise TreeError("; ".join(problems))
        self.root = roots[0].id
        self.horizon = max(n.t for n in self._nodes.values())
        for nid, kids in self._children.items():
            node = self._nodes[nid]
            if not kids:
                if node.t != self.horizon:
                    problems.append(f"leaf {nid!r} at t={node.t} but horizon is {self.horizon}")
                continue
            total = sum((self._nodes[k].prob for k in kids), Fraction(0))
            if total != node.prob:
                problems.append(f"children of {nid!r} carry mass {total}, node has {node.prob}")
        if self._nodes[self.root].prob != 1:
            problems.append(f"root probability is {self._nodes[self.root].prob}, expected 1")
        if problems:
            raise TreeError("; ".join(problems))

    # navigation -----------------------------------------------------------
    def __contains__(self, nid: str) -> bool:
        return nid in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    def node(self, nid: str) -> Node:
        try:
            return self._nodes[nid]
        except KeyError:
            raise TreeError(f"unknown node id {nid!r}") from None

    @property
    def nodes(self) -> list[Node]:
        return list(self._nodes.values())

    @property
    def ids(self) -> list[str]:
        return list(self._nodes)

    def nodes_at(self, t: int) -> list[str]:
        return [n.id for n in self._nodes.values() if n.t == t]

    def children(self, nid: str) -> list[str]:
        self.node(nid)
        return list(self._children[nid])

    def parent(self, nid: str) -> str | None:
        return self.node(nid).parent

    def is_leaf(self, nid: str) -> bool:
        return not self._children[self.node(nid).id]

    def leaves(self) -> list[str]:
        return [nid for nid, kids in self._children.items() if not kids]

    def path_to_root(self, nid: str) -> list[str]:
        path = [self.node(nid).id]
        while self._nodes[path[-1]].parent is not None:
            path.append(self._nodes[path[-1]].parent)
        return path

    def path_from_root(self, nid: str) -> list[str]:
        return self.path_to_root(nid)[::-1]

    def descendants(self, nid: str) -> list[str]:
        out, stack = [], list(self.children(nid))
        while stack:
            c = stack.pop(0)
            out.append(c)
            stack.extend(self._children[c])
        return out

    def conditional_prob(self, nid: str) -> Fraction:
        """P(node | parent); 1 at the root."""
        n = self.node(nid)
        if n.parent is None:
            return Fraction(1)
        return n.prob / self._nodes[n.parent].prob

    def backward_levels(self) -> list[list[str]]:
        return [self.nodes_at(t) for t in range(self.horizon, -1, -1)]


def conditional_support(tree: ScenarioTree, values: Mapping[str, PolyhedralCone | Polytope], nid: str):
    """Closed conic (or convex) hull of the children's values at ``nid``.

    Absorbing emptiness: if any child value is empty the result is empty.
    """
    kids = tree.children(nid)
    if not kids:
        raise TreeError(f"node {nid!r} is a leaf; it has no conditional support")
    vals = [values[k] for k in kids]
    if any(v.is_empty for v in vals):
        return type(vals[0]).empty(vals[0].dim)
    if isinstance(vals[0], Polytope):
        return hull_of_union(vals)
    return conic_hull_of_union(vals)
