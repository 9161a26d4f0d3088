import random
from fractions import Fraction

import pytest

from narctl.arbitrage import decompose_forward
from narctl.cones import decompose_into_sum
from narctl.engine import (BankForm, bank_form_to_cpp, bank_form_violations, cpp_to_bank_form, cpp_violations,
                           find_consistent_price_process, find_null_strategy, null_strategy_violations,
                           run_recursion, run_recursion_bank)
from narctl.exact import add, neg, zeros
from narctl.market import MarketModel, bank_prices
from narctl.polytopes import box, hormander_lift
from narctl.random_models import random_bank_model, random_general_model
from narctl.tree import Node, ScenarioTree


def split_model():
    """Fails inside the subtree of ``a`` at t=1 only; ``b`` is fine."""
    q = Fraction(1, 4)
    nodes = [Node("r", 0, None, Fraction(1)), Node("a", 1, "r", Fraction(1, 2)), Node("b", 1, "r", Fraction(1, 2)),
             Node("a1", 2, "a", q), Node("a2", 2, "a", q), Node("b1", 2, "b", q), Node("b2", 2, "b", q)]
    prices = {"r": (1, 3), "a": (1, 2), "b": (1, 3), "a1": (3, 3), "a2": (4, 4), "b1": (1, 1), "b2": (3, 3)}
    data = {k: bank_prices([1, lo], [1, hi]) for k, (lo, hi) in prices.items()}
    return MarketModel(ScenarioTree(nodes), "bank", data)


def test_worked_cone_recursion(worked):
    tr = run_recursion(worked)
    assert set(tr.supports["u"].rays) == {(1, 4, 1), (1, 9, 6)}
    assert set(tr.values["u"].rays) == {(1, 7, 4), (1, 8, 5)}
    assert tr.values["root"].is_empty
    assert not tr.holds
    assert (tr.failure_time(), tr.failure_set()) == (0, ["root"])


def test_worked_box_recursion(worked):
    tr = run_recursion_bank(worked)
    assert set(tr.supports["u"].vertices) == {(4, 1), (9, 6)}
    assert set(tr.values["u"].vertices) == {(7, 4), (8, 5)}
    assert tr.supports["root"] == tr.values["u"]
    assert tr.values["root"].is_empty


def test_worked_has_no_cpp_and_a_null_strategy(worked):
    assert find_consistent_price_process(worked) is None
    ns = find_null_strategy(worked)
    assert ns is not None and null_strategy_violations(worked, ns.x) == []
    root = ns.x["root"]
    assert root[0] < 0 < root[1]   # buys the second asset with the bank account


def test_constant_model_passes(constant):
    tr = run_recursion(constant)
    assert tr.holds
    assert tr.values["n0"].rays == ((1, 2, 3),)
    cpp = find_consistent_price_process(constant)
    assert cpp is not None and cpp_violations(constant, cpp.Z) == []
    assert len(set(cpp.Z.values())) == 1
    assert find_null_strategy(constant) is None


def test_horizon_zero_model():
    m = MarketModel(ScenarioTree([Node("r", 0, None, Fraction(1))]), "bank", {"r": bank_prices([1, 2, 3], [1, 4, 3])})
    tr = run_recursion_bank(m)
    assert tr.holds and tr.values["r"] == box((2, 3), (4, 3))
    assert find_consistent_price_process(m) is not None


def test_failure_inside_one_subtree():
    m = split_model()
    tr = run_recursion(m)
    assert tr.values["a"].is_empty and not tr.values["b"].is_empty
    assert tr.values["r"].is_empty        # emptiness is absorbed upwards
    assert (tr.failure_time(), tr.failure_set()) == (1, ["a"])


def test_emptiness_is_absorbed_by_ancestors(seed):
    rng = random.Random(seed)
    for _ in range(30):
        m = random_general_model(rng)
        tr = run_recursion(m)
        for nid in tr.empty_nodes():
            assert all(tr.values[a].is_empty for a in m.tree.path_to_root(nid))


def test_leaf_values_are_dual_cones(seed):
    rng = random.Random(seed + 1)
    m = random_general_model(rng)
    tr = run_recursion(m)
    for leaf in m.tree.leaves():
        assert tr.values[leaf] == m.dual_cone(leaf)


def test_parallel_levels_are_deterministic(seed):
    rng = random.Random(seed + 2)
    for _ in range(5):
        m = random_general_model(rng)
        a, b = run_recursion(m, jobs=1), run_recursion(m, jobs=4)
        assert a.values == b.values and a.supports == b.supports


def test_three_routes_agree_small_batch(seed):
    rng = random.Random(seed + 3)
    verdicts = set()
    for _ in range(25):
        m = random_general_model(rng)
        v = run_recursion(m).holds
        cpp = find_consistent_price_process(m)
        ns = find_null_strategy(m)
        assert v == (cpp is not None) == (ns is None)
        if cpp is not None:
            assert cpp_violations(m, cpp.Z) == []
        if ns is not None:
            assert null_strategy_violations(m, ns.x) == []
        verdicts.add(v)
    assert verdicts == {True, False}


def test_box_and_cone_recursions_commute(seed):
    rng = random.Random(seed + 4)
    for _ in range(20):
        m = random_bank_model(rng)
        a, b = run_recursion(m), run_recursion_bank(m)
        for nid in m.tree.ids:
            assert a.values[nid] == hormander_lift(b.values[nid])


def test_bank_form_constant_case(constant):
    cpp = find_consistent_price_process(constant)
    form = cpp_to_bank_form(constant, cpp)
    assert form.Q == {leaf: constant.tree.node(leaf).prob for leaf in constant.tree.leaves()}
    assert set(form.S.values()) == {(2, 3)}


def test_bank_form_round_trip(seed):
    rng = random.Random(seed + 5)
    found = 0
    for _ in range(30):
        m = random_bank_model(rng)
        cpp = find_consistent_price_process(m)
        if cpp is None:
            continue
        found += 1
        form = cpp_to_bank_form(m, cpp)
        assert bank_form_violations(m, form) == []
        back = bank_form_to_cpp(m, form)
        assert cpp_violations(m, back.Z) == []
        z0 = cpp.Z[m.tree.root][0]
        assert back.Z == {k: tuple(a / z0 for a in v) for k, v in cpp.Z.items()}
    assert found > 3


def test_bank_form_rejects_bad_inputs(worked, constant):
    from narctl.engine import ConsistentPriceProcess
    with pytest.raises(ValueError):
        cpp_to_bank_form(constant, ConsistentPriceProcess({nid: (0, 1, 1) for nid in constant.tree.ids}))
    form = BankForm({"w1": Fraction(1, 2), "w2": Fraction(1, 2)},
                    {"root": (4, 4), "u": (6, 4), "w1": (9, 6), "w2": (4, 1)})
    problems = bank_form_violations(worked, form)
    assert any(p.startswith("martingale") for p in problems)


def test_tampered_cpp_is_named(constant):
    cpp = find_consistent_price_process(constant)
    Z = dict(cpp.Z)
    Z["n00"] = tuple(a * 2 for a in Z["n00"])
    assert any(p.startswith("martingale") for p in cpp_violations(constant, Z))
    Z = dict(cpp.Z)
    Z["n0"] = (1, 0, 0)
    assert any(p.startswith("ri-membership") for p in cpp_violations(constant, Z))


def test_dual_of_value_decomposes_into_solvent_pieces(seed):
    # members of W_n* split into an adapted sum of elements of K_t, t >= n
    rng = random.Random(seed + 6)
    checked = 0
    for _ in range(20):
        m = random_general_model(rng)
        tr = run_recursion(m)
        for nid in m.tree.ids:
            if tr.values[nid].is_empty or m.tree.is_leaf(nid):
                continue
            if any(tr.values[k].is_empty for k in m.tree.descendants(nid)):
                continue
            for y in tr.values[nid].dual().generators:
                g, rest = decompose_into_sum(y, m.solvency_cone(nid), tr.supports[nid].dual())
                later = decompose_forward({nid: rest}, m, tr)
                for leaf in m.tree.leaves():
                    path = m.tree.path_to_root(leaf)
                    if nid not in path:
                        continue
                    total = g
                    for k in path[:path.index(nid)]:
                        assert m.solvency_cone(k).contains(neg(later[k]))
                        total = add(total, neg(later[k]))
                    assert total == y
                checked += 1
    assert checked > 10
