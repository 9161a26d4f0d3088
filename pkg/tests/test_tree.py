from fractions import Fraction

import pytest

from narctl.cones import PolyhedralCone
from narctl.polytopes import Polytope, box
from narctl.tree import Node, ScenarioTree, TreeError, conditional_support
from narctl.worked import two_state_tree

H = Fraction(1, 2)


def test_navigation():
    tree = two_state_tree()
    assert tree.root == "root" and tree.horizon == 2
    assert tree.nodes_at(2) == ["w1", "w2"]
    assert tree.children("u") == ["w1", "w2"]
    assert tree.path_from_root("w2") == ["root", "u", "w2"]
    assert tree.conditional_prob("w1") == H
    assert tree.leaves() == ["w1", "w2"]
    assert tree.backward_levels() == [["w1", "w2"], ["u"], ["root"]]
    assert set(tree.descendants("root")) == {"u", "w1", "w2"}


@pytest.mark.parametrize("nodes, fragment", [
    ([Node("a", 0, None, Fraction(1)), Node("b", 1, "a", Fraction(3, 4))], "carry mass"),
    ([Node("a", 0, None, Fraction(1)), Node("b", 0, None, Fraction(1))], "exactly one root"),
    ([Node("a", 0, None, Fraction(1)), Node("b", 2, "a", Fraction(1))], "parent at t=0"),
    ([Node("a", 0, None, Fraction(1)), Node("b", 1, "x", Fraction(1))], "unknown parent"),
    ([Node("a", 0, None, Fraction(1)), Node("b", 1, "a", Fraction(0))], "not positive"),
    ([Node("a", 0, None, Fraction(1, 2))], "root probability"),
    ([Node("a", 0, None, Fraction(1)), Node("a", 1, "a", Fraction(1))], "duplicate"),
])
def test_invalid_trees(nodes, fragment):
    with pytest.raises(TreeError, match=fragment):
        ScenarioTree(nodes)


def test_leaves_must_reach_horizon():
    nodes = [Node("a", 0, None, Fraction(1)), Node("b", 1, "a", H), Node("c", 1, "a", H), Node("d", 2, "b", H)]
    with pytest.raises(TreeError, match="horizon"):
        ScenarioTree(nodes)


def test_conditional_support_cones_and_boxes():
    tree = two_state_tree()
    vals = {"w1": PolyhedralCone.from_generators([(1, 9, 6)]), "w2": PolyhedralCone.from_generators([(1, 4, 1)])}
    Y = conditional_support(tree, vals, "u")
    assert set(Y.rays) == {(1, 9, 6), (1, 4, 1)}
    boxes = {"w1": box((9, 6), (9, 6)), "w2": box((4, 1), (4, 1))}
    assert set(conditional_support(tree, boxes, "u").vertices) == {(9, 6), (4, 1)}


def test_conditional_support_empty_child_and_leaf():
    tree = two_state_tree()
    vals = {"w1": Polytope.empty(2), "w2": box((4, 1), (4, 1))}
    assert conditional_support(tree, vals, "u").is_empty
    with pytest.raises(TreeError):
        conditional_support(tree, vals, "w1")
