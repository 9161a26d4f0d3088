import random
from fractions import Fraction

import pytest

from narctl.market import (BidAskMatrix, MarketModel, TighteningError, ValidationError, _consistent_contraction,
                           bank_prices, bank_to_matrix, bid_ask_violations, dual_solvency_cone, is_strict_tightening,
                           price_box, solvency_cone, solvency_cone_bank, tighten, tighten_prices, validate_bid_ask)
from narctl.cones import PolyhedralCone
from narctl.polytopes import hormander_lift
from narctl.random_models import random_bid_ask, random_general_model
from narctl.worked import two_state_tree


def test_axiom_violations_are_named():
    assert any(v.startswith("(i) pi[1,2]") for v in bid_ask_violations([[1, 0], [1, 1]]))
    assert any(v.startswith("(ii) pi[2,2]") for v in bid_ask_violations([[1, 2], [1, 3]]))
    big = 10
    bad = bid_ask_violations([[1, 4, 2], [big, 1, "1/4"], [big, big, 1]])
    assert any("(i,k,j)=(1,2,3)" in v for v in bad)
    with pytest.raises(ValidationError):
        validate_bid_ask([[1, 2], [1]])


def test_bank_matrix_entries():
    pi = bank_to_matrix(bank_prices([1, 2, 2], [1, 6, 6]))
    assert pi[0, 1] == 6 and pi[1, 0] == Fraction(1, 2) and pi[1, 2] == 3
    t1 = bank_to_matrix(bank_prices([1, 4, 4], [1, 8, 8]))
    for i in range(3):
        for j in range(3):
            if i != j:
                assert t1[i, j] == t1[i, 0] * t1[0, j]


def test_bank_price_validation():
    with pytest.raises(ValidationError, match="exceeds ask"):
        bank_prices([1, 5], [1, 4])
    with pytest.raises(ValidationError, match="S\\^b_1"):
        bank_prices([2, 5], [2, 6])


def test_worked_dual_cones():
    d1 = solvency_cone(bank_to_matrix(bank_prices([1, 4, 4], [1, 8, 8]))).dual()
    assert set(d1.rays) == {(1, 4, 4), (1, 8, 4), (1, 4, 8), (1, 8, 8)}
    d2 = solvency_cone(bank_to_matrix(bank_prices([1, 9, 6], [1, 9, 6]))).dual()
    assert d2.rays == ((1, 9, 6),) and d2.lineality == ()


def test_dual_halfspace_formula_matches_generators(seed):
    rng = random.Random(seed)
    for _ in range(30):
        d = rng.randint(2, 4)
        pi = random_bid_ask(rng, [Fraction(rng.randint(1, 5)) for _ in range(d)])
        assert dual_solvency_cone(pi) == solvency_cone(pi).dual()


def test_bank_cone_is_lift_of_price_box(seed):
    rng = random.Random(seed + 1)
    for _ in range(30):
        d = rng.randint(2, 4)
        bid = [1] + [Fraction(rng.randint(1, 8)) for _ in range(d - 1)]
        ask = [1] + [b + Fraction(rng.randint(0, 3)) for b in bid[1:]]
        p = bank_prices(bid, ask)
        assert solvency_cone_bank(p) == solvency_cone(bank_to_matrix(p))
        assert solvency_cone_bank(p).dual() == hormander_lift(price_box(p))


def _ri_by_ratios(pi: BidAskMatrix, w) -> bool:
    if any(a <= 0 for a in w):
        return False
    for i in range(pi.d):
        for j in range(pi.d):
            if i == j:
                continue
            lo, hi = pi.interval(i, j)
            r = w[j] / w[i]
            if lo == hi and r != lo:
                return False
            if lo < hi and not lo < r < hi:
                return False
    return True


def test_relative_interior_matches_ratio_description(seed):
    rng = random.Random(seed + 2)
    hits = 0
    for _ in range(40):
        d = rng.randint(2, 4)
        z = [Fraction(rng.randint(1, 5)) for _ in range(d)]
        pi = random_bid_ask(rng, z)
        K_star = solvency_cone(pi).dual()
        for w in [tuple(z)] + [tuple(a * Fraction(rng.randint(8, 12), 10) for a in z) for _ in range(5)]:
            assert K_star.contains_in_relative_interior(w) == _ri_by_ratios(pi, w)
            hits += _ri_by_ratios(pi, w)
    assert hits > 40


def test_tighten_prices_midpoint():
    p = tighten_prices(bank_prices([1, 2, 2], [1, 6, 6]), Fraction(1, 2))
    assert p.bid == (1, 3, 3) and p.ask == (1, 5, 5)


def test_tighten_keeps_degenerate_pairs_and_is_strict(seed):
    rng = random.Random(seed + 3)
    for _ in range(40):
        d = rng.randint(2, 4)
        pi = random_bid_ask(rng, [Fraction(rng.randint(1, 5)) for _ in range(d)])
        t = tighten(pi)
        assert is_strict_tightening(t, pi)
        for i in range(d):
            for j in range(d):
                if pi.degenerate(i, j):
                    assert t[i, j] == pi[i, j]
        # a larger cone of solvent positions: K(pi) inside K(tight)
        assert solvency_cone(t).contains_cone(solvency_cone(pi))


def test_tighten_bank_type_matrix_uses_valid_contraction():
    pi = bank_to_matrix(bank_prices([1, 2, 2], [1, 6, 6]))
    t = tighten(pi)
    assert is_strict_tightening(t, pi)
    assert not bid_ask_violations(t.entries)


def test_consistent_contraction_always_valid(seed):
    rng = random.Random(seed + 4)
    for _ in range(20):
        d = rng.randint(2, 4)
        pi = random_bid_ask(rng, [Fraction(rng.randint(1, 5)) for _ in range(d)])
        for lam in (Fraction(1, 10), Fraction(1, 2), Fraction(9, 10)):
            assert is_strict_tightening(_consistent_contraction(pi, lam), pi)


def test_tighten_errors():
    pi = validate_bid_ask([[1, 2], [1, 1]])
    with pytest.raises(ValueError):
        tighten(pi, 1)
    with pytest.raises(TighteningError):
        tighten(bank_to_matrix(bank_prices([1, 2, 2], [1, 6, 6])), max_retries=0, fallback=False)


def test_model_validation():
    tree = two_state_tree()
    good = bank_prices([1, 1], [1, 2])
    with pytest.raises(ValidationError, match="no market data"):
        MarketModel(tree, "bank", {"root": good})
    data = {nid: good for nid in tree.ids}
    data["w1"] = bank_prices([1, 1, 1], [1, 2, 2])
    with pytest.raises(ValidationError, match="inconsistent asset counts"):
        MarketModel(tree, "bank", data)
    with pytest.raises(ValidationError, match="expected BidAskMatrix"):
        MarketModel(tree, "general", {nid: good for nid in tree.ids})


def test_random_general_models_are_valid(seed):
    rng = random.Random(seed + 5)
    for _ in range(20):
        m = random_general_model(rng)
        for nid in m.tree.ids:
            assert not bid_ask_violations(m.matrix(nid).entries)
            assert isinstance(m.solvency_cone(nid), PolyhedralCone)
