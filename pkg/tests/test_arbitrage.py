import random
from dataclasses import replace
from fractions import Fraction

import pytest

from narctl.arbitrage import (ConstructionError, assemble, build_arbitrage, certificate_violations,
                              decompose_forward, epsilon_adjust, first_failure, initial_increment, lemma_diagnostics)
from narctl.cones import ConeDomainError
from narctl.engine import run_recursion
from narctl.exact import add, is_zero, neg, zeros
from narctl.market import solvency_cone
from narctl.random_models import random_bank_model, random_general_model

from test_engine import split_model


def test_worked_construction_steps(worked):
    tr = run_recursion(worked)
    n, A = first_failure(tr)
    assert (n, A) == (0, ["root"])
    seed = initial_increment(n, A, tr, worked)
    assert seed == {"root": (-7, 1, 0)}
    later = decompose_forward(seed, worked, tr)
    assert later == {"u": (4, 0, -1), "w1": (3, -1, 1), "w2": (3, -1, 1)}
    x = {**seed, **later}
    m, B, eps, mode, _ = epsilon_adjust(x, worked)
    assert (m, B, eps, mode) == (0, ["root"], {"root": (1, 0, 0)}, {"root": "original"})


def test_worked_certificate(worked):
    cert = build_arbitrage(worked)
    assert cert.payoff == {"w1": (1, 0, 0), "w2": (1, 0, 0)}
    assert cert.theta["root"] == (-6, 1, 0)     # the adjusted first step
    assert cert.arbitrage_under_original
    assert lemma_diagnostics(cert, run_recursion(worked)) == []


@pytest.mark.parametrize("lam", [Fraction(1, 10), Fraction(1, 2), Fraction(9, 10)])
def test_worked_certificate_survives_other_contractions(worked, lam):
    cert = build_arbitrage(worked, lam)
    assert cert.payoff == {"w1": (1, 0, 0), "w2": (1, 0, 0)}
    assert certificate_violations(cert, worked) == []


def test_first_failure_needs_a_failure(constant):
    with pytest.raises(ConeDomainError):
        first_failure(run_recursion(constant))


def test_failure_at_time_one():
    m = split_model()
    tr = run_recursion(m)
    assert first_failure(tr) == (1, ["a"])
    cert = build_arbitrage(m)
    assert cert.x["r"] == (0, 0) and cert.x["b"] == (0, 0)
    assert cert.payoff["b1"] == cert.payoff["b2"] == (0, 0)
    assert any(not is_zero(cert.payoff[k]) for k in ("a1", "a2"))


def test_orthogonal_toy_increment():
    # two assets: the box at the root misses the terminal price entirely
    m = split_model()
    tr = run_recursion(m)
    x = initial_increment(1, ["a"], tr, m)["a"]
    assert x[0] <= 0 <= x[1]


def test_zero_seed_gives_zero_increments(worked):
    tr = run_recursion(worked)
    later = decompose_forward({"root": zeros(3)}, worked, tr)
    assert all(is_zero(v) for v in later.values())


def test_zero_increments_are_rejected(worked):
    with pytest.raises(ConstructionError):
        epsilon_adjust({nid: zeros(3) for nid in worked.tree.ids}, worked)
    cert = build_arbitrage(worked)
    empty = assemble(0, ["root"], {}, 0, [], {}, {}, Fraction(1, 2), cert.tightened, worked)
    problems = certificate_violations(empty, worked)
    assert "terminal: payoff is zero at every leaf" in problems


def test_tampered_certificates_name_the_broken_invariant(worked):
    cert = build_arbitrage(worked)
    x = dict(cert.x)
    x["w1"] = (x["w1"][0] + Fraction(1, 1000),) + x["w1"][1:]
    problems = certificate_violations(replace(cert, x=x), worked)
    assert any(p.startswith("self-financing") for p in problems)
    assert any(p.startswith("telescoping") for p in problems)
    theta = dict(cert.theta)
    theta["w2"] = (Fraction(-1), 0, 0)
    assert any(p.startswith("terminal") for p in certificate_violations(replace(cert, theta=theta), worked))


def _failing_models(seed, count):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        m = random_general_model(rng) if len(out) % 2 else random_bank_model(rng)
        tr = run_recursion(m)
        if not tr.holds:
            out.append((m, tr))
    return out


def test_random_failures_yield_verified_certificates(seed):
    for m, tr in _failing_models(seed, 30):
        cert = build_arbitrage(m, trace=tr)
        assert certificate_violations(cert, m) == []
        assert lemma_diagnostics(cert, tr) == []
        for leaf in m.tree.leaves():
            total = zeros(m.d)
            for nid in m.tree.path_to_root(leaf):
                total = add(total, cert.x[nid])
            assert is_zero(total)
        n = cert.n
        for nid in m.tree.nodes_at(n):
            x = cert.x[nid]
            assert m.solvency_cone(nid).contains(neg(x))
            if nid in cert.failure_set:
                assert run_recursion(m).supports[nid].dual().contains(x)


def test_tightened_adjustments_are_interior(seed):
    seen = 0
    for m, tr in _failing_models(seed + 1, 40):
        cert = build_arbitrage(m, trace=tr)
        for nid, mode in cert.eps_mode.items():
            if mode != "tightened":
                continue
            step = add(cert.x[nid], cert.eps[nid])
            assert solvency_cone(cert.tightened[nid]).contains_in_interior(neg(step))
            seen += 1
    assert seen > 0
