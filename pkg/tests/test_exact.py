from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from narctl.exact import (EQ, GE, LE, Infeasible, LPBuilder, LinearProgram, Optimal, StructuralError, Unbounded,
                          lexmin_point, lp_solve, nullspace, primitive, rank, rational, rref, solve_linear_system)


def test_rational_parsing():
    assert rational("7/2") == Fraction(7, 2)
    assert rational("-0.25") == Fraction(-1, 4)
    assert rational(3) == 3
    with pytest.raises(TypeError):
        rational(0.5)
    with pytest.raises(TypeError):
        rational(True)
    with pytest.raises(ValueError):
        rational("abc")


def test_primitive_scaling():
    assert primitive((Fraction(1, 2), Fraction(3, 4), 0)) == (2, 3, 0)
    assert primitive((0, 0)) == (0, 0)


def test_rref_rank_nullspace():
    rows = [[1, 2, 3], [2, 4, 6], [1, 0, 1]]
    assert rank(rows) == 2
    _, piv = rref(rows)
    assert piv == [0, 1]
    ns = nullspace(rows, 3)
    assert len(ns) == 1
    for r in rows:
        assert sum(a * b for a, b in zip(r, ns[0])) == 0


# worked example: -x0 = x1 + x2 with x1 in -K1 and x2 in -K2; unknowns (x1, x2)
SPLIT_EQ = [[1, 0, 0, 1, 0, 0], [0, 1, 0, 0, 1, 0], [0, 0, 1, 0, 0, 1]]
SPLIT_RHS = [7, -1, 0]
SPLIT_LE = [[1, 4, 4, 0, 0, 0], [1, 8, 4, 0, 0, 0], [1, 4, 8, 0, 0, 0], [1, 8, 8, 0, 0, 0],
            [0, 0, 0, 1, 9, 6], [0, 0, 0, 1, 4, 1]]


def test_linear_system_unique_solution():
    active = [SPLIT_LE[0], SPLIT_LE[1], SPLIT_LE[4], SPLIT_LE[5]]
    sol = solve_linear_system(SPLIT_EQ + active, SPLIT_RHS + [0, 0, 0, 0])
    assert sol.unique
    assert sol.point == (4, 0, -1, 3, -1, 1)


def test_split_system_pins_every_coordinate():
    # the full system (with inequalities) has exactly one point: min = max per coordinate
    for j in range(6):
        vals = []
        for maximize in (True, False):
            lp = LPBuilder()
            x = lp.vars(6, free=True)
            for row, b in zip(SPLIT_EQ, SPLIT_RHS):
                lp.add({x[i]: row[i] for i in range(6)}, EQ, b)
            for row in SPLIT_LE:
                lp.add({x[i]: row[i] for i in range(6)}, LE, 0)
            vals.append(lp_solve(lp.build({x[j]: 1}, maximize=maximize)).value)
        assert vals[0] == vals[1] == (4, 0, -1, 3, -1, 1)[j]


def test_linear_system_inconsistent():
    sol = solve_linear_system([[1, 1], [1, 1]], [1, 2])
    assert not sol.consistent


def test_lp_basic_outcomes():
    lp = LPBuilder()
    x = lp.var()
    lp.add({x: 1}, LE, 3)
    out = lp_solve(lp.build({x: 1}))
    assert isinstance(out, Optimal) and out.value == 3

    lp = LPBuilder()
    x = lp.var()
    lp.add({x: 1}, GE, 2)
    lp.add({x: 1}, LE, 1)
    assert isinstance(lp_solve(lp.build({x: 1})), Infeasible)

    lp = LPBuilder()
    x = lp.var()
    lp.add({x: 1}, GE, 1)
    assert isinstance(lp_solve(lp.build({x: 1})), Unbounded)


def test_lp_duals_certify_optimality():
    # max 3x + 2y  s.t. x + y <= 4, x + 3y <= 6, x <= 3
    lp = LPBuilder()
    x, y = lp.vars(2)
    lp.add({x: 1, y: 1}, LE, 4)
    lp.add({x: 1, y: 3}, LE, 6)
    lp.add({x: 1}, LE, 3)
    out = lp_solve(lp.build({x: 3, y: 2}))
    assert out.value == 11
    assert out.dual == (2, 0, 1)
    assert 4 * out.dual[0] + 6 * out.dual[1] + 3 * out.dual[2] == out.value


def test_lexmin_point():
    lp = LPBuilder()
    x, y = lp.vars(2)
    lp.add({x: 1, y: 1}, EQ, 2)
    out = lexmin_point(lp.build({}))
    assert out.point == (0, 2)


def test_free_variables():
    lp = LPBuilder()
    x = lp.var(free=True)
    lp.add({x: 1}, GE, -5)
    out = lp_solve(lp.build({x: 1}, maximize=False))
    assert out.value == -5


def test_structural_errors():
    with pytest.raises(StructuralError):
        LinearProgram((1, 2), ((1,),), (LE,), (0,))
    with pytest.raises(StructuralError):
        LinearProgram((1,), ((1,),), ("<",), (0,))


def _brute_force(A, b, c):
    """Optimum of max c.x, Ax <= b, x >= 0 in two variables by vertex enumeration."""
    rows = [list(r) for r in A] + [[-1, 0], [0, -1]]
    rhs = list(b) + [0, 0]
    best = None
    for i, j in combinations(range(len(rows)), 2):
        sol = solve_linear_system([rows[i], rows[j]], [rhs[i], rhs[j]])
        if not sol.unique:
            continue
        p = sol.point
        if all(r[0] * p[0] + r[1] * p[1] <= h for r, h in zip(rows, rhs)):
            v = c[0] * p[0] + c[1] * p[1]
            best = v if best is None else max(best, v)
    return best


small = st.integers(-4, 6)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5), st.integers(1, 12)), min_size=1, max_size=4),
       st.tuples(small, small))
def test_lp_matches_vertex_enumeration(cons, c):
    # positive rows with the box x, y <= 10 keep the problem bounded and feasible
    A = [(a, b) for a, b, _ in cons] + [(1, 0), (0, 1)]
    b = [h for _, _, h in cons] + [10, 10]
    lp = LPBuilder()
    x = lp.vars(2)
    for row, h in zip(A, b):
        lp.add({x[0]: row[0], x[1]: row[1]}, LE, h)
    out = lp_solve(lp.build({x[0]: c[0], x[1]: c[1]}))
    assert isinstance(out, Optimal)
    assert out.value == _brute_force(A, b, c)
    assert lp.build({}).satisfied_by(out.point)
