import random
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from enlab.compiler import (build_slp, compile_polynomial, extend_unique, lift_to_integers,
                            node_variable, satisfies)
from enlab.ensystem import EnSystem, Prod, Sum, Unit, all_equations, check
from enlab.polynomial import CapExceeded, Polynomial, PolynomialError, evaluate, parse_polynomial
from enlab.solver import SearchBox, solve_in_box

from conftest import box_points, naive_solutions, node_radii, random_polynomial


def test_build_slp_examples():
    assert build_slp(parse_polynomial("x1*x2 - 1")) == [
        ("one",), ("input", 1), ("input", 2), ("mul", 1, 2), ("subvia", 3, 0)]
    assert build_slp(parse_polynomial("x1")) == [("one",), ("input", 1)]
    assert build_slp(parse_polynomial("2")) == [("one",), ("add", 0, 0)]
    assert build_slp(Polynomial(1, {})) == [("one",), ("input", 1), ("subvia", 0, 0)]


def test_trivial_chain_member_points_q_at_input():
    c = compile_polynomial(parse_polynomial("x1"))
    assert c.q == 1
    assert c.system == EnSystem(2, (Unit(2), Sum(1, 1, 1)))


def test_compile_x1x2_minus_1():
    c = compile_polynomial(parse_polynomial("x1*x2 - 1"))
    assert c.system == EnSystem(5, (Unit(3), Prod(1, 2, 4), Sum(3, 5, 4), Sum(5, 5, 5)))
    assert c.q == 5
    assert naive_solutions(c.system, 4) == [(-1, -1, 1, 1, 0), (1, 1, 1, 1, 0)]
    body = c.to_json()
    assert body["slp"] == [["one"], ["input", 1], ["input", 2], ["mul", 1, 2], ["subvia", 3, 0]]
    assert body["q"] == 5


def test_compile_zero_polynomial_accepts_everything():
    c = compile_polynomial(Polynomial(1, {}))
    sols = naive_solutions(c.system, 5)
    assert [a[0] for a in sols] == list(range(-5, 6))


def test_compile_parabola_over_box():
    D = parse_polynomial("x1^2 - x2")
    c = compile_polynomial(D)
    radii = node_radii(c, 8)
    sols = solve_in_box(c.system, SearchBox(max(radii), tuple(radii))).solutions
    got = sorted(a[:2] for a in sols if max(map(abs, a[:2])) <= 8)
    assert got == sorted(b for b in box_points(2, 8) if evaluate(D, b) == 0)
    assert got == [(x, x * x) for x in (-2, -1, 0, 1, 2)]


def test_extend_unique_examples():
    c = compile_polynomial(parse_polynomial("x1*x2 - 1"))
    assert extend_unique(c, (1, 1)) == (1, 1, 1, 1, 0)
    assert extend_unique(c, (2, 3)) == (2, 3, 1, 6, 5)
    assert not satisfies(c, (2, 3))
    assert satisfies(compile_polynomial(parse_polynomial("x1^2 - x2")), (3, 9))
    with pytest.raises(PolynomialError):
        extend_unique(c, (1,))


def test_node_variable_mapping():
    assert [node_variable(i, 2) for i in range(5)] == [3, 1, 2, 4, 5]


def test_caps():
    with pytest.raises(CapExceeded):
        compile_polynomial(parse_polynomial("x1^5"), max_degree=4)
    with pytest.raises(CapExceeded):
        compile_polynomial(parse_polynomial("x1 + x2 + x3"), max_vars=2)


def _invariants(c):
    D = c.source
    assert c.system.n == len(c.slp) == len(c.node_terms)
    assert len(set(c.node_terms)) == len(c.node_terms)
    assert c.node_terms[c.q_node] == D
    assert sum(1 for eq in c.system if eq == Sum(c.q, c.q, c.q)) == 1
    allowed = set(all_equations(c.system.n))
    assert all(eq in allowed for eq in c.system)
    for idx, node in enumerate(c.slp):
        assert all(ref < idx for ref in node[1:] if node[0] != "input")


def test_structure_on_random_polynomials():
    rng = random.Random(17)
    for _ in range(100):
        D = random_polynomial(rng)
        c = compile_polynomial(D)
        _invariants(c)
        assert compile_polynomial(D) == c


def test_equivalence_at_every_box_point():
    rng = random.Random(23)
    for _ in range(30):
        D = random_polynomial(rng)
        c = compile_polynomial(D)
        for base in box_points(c.p, 8):
            full = extend_unique(c, base)
            assert full[:c.p] == base
            assert check(c.system, full) == (evaluate(D, base) == 0)


def test_count_preservation_small_box():
    rng = random.Random(29)
    for _ in range(10):
        D = random_polynomial(rng, max_vars=2)
        c = compile_polynomial(D)
        radii = node_radii(c, 4)
        sols = solve_in_box(c.system, SearchBox(max(radii), tuple(radii))).solutions
        in_box = [a for a in sols if max(map(abs, a[:c.p])) <= 4]
        zeros = [b for b in box_points(c.p, 4) if evaluate(D, b) == 0]
        assert len(in_box) == len(zeros)
        assert sorted(a[:c.p] for a in in_box) == zeros


def test_lift_x1_minus_2_has_24_witnesses():
    lift = lift_to_integers(parse_polynomial("x1 - 2"), [1])
    assert lift.var_map == {1: (2, 3, 4, 5)}
    zeros = [pt for pt in product(range(-2, 3), repeat=5) if evaluate(lift.polynomial, pt) == 0]
    assert len(zeros) == 24
    assert all(pt[0] == 2 for pt in zeros)


def test_lift_negative_target_has_no_zeros():
    lift = lift_to_integers(parse_polynomial("x1 + 1"), [1])
    assert not any(evaluate(lift.polynomial, pt) == 0 for pt in product(range(-2, 3), repeat=5))


def test_lift_x1_minus_x2():
    lift = lift_to_integers(parse_polynomial("x1 - x2"), [1, 2])
    P = lift.polynomial
    assert P.num_vars == 10
    # s = 7 = 4 + 1 + 1 + 1
    assert evaluate(P, (7, 7, 2, 1, 1, 1, 1, 1, 1, 2)) == 0
    assert evaluate(P, (7, 6, 2, 1, 1, 1, 2, 1, 1, 0)) != 0


def test_lift_errors():
    with pytest.raises(PolynomialError):
        lift_to_integers(parse_polynomial("x1"), [])
    with pytest.raises(PolynomialError):
        lift_to_integers(parse_polynomial("x1"), [2])
    with pytest.raises(CapExceeded):
        lift_to_integers(parse_polynomial("x1 + x2 + x3 + x4 + x5"), [1, 2, 3])


def _four_square(s):
    for a in range(int(s ** 0.5) + 1):
        for b in range(a + 1):
            for c_ in range(b + 1):
                d2 = s - a * a - b * b - c_ * c_
                if d2 >= 0 and int(d2 ** 0.5) ** 2 == d2:
                    return (a, b, c_, int(d2 ** 0.5))
    return None


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=5, max_size=5), st.integers(0, 2 ** 30))
def test_lift_is_nonnegative_and_projects_onto_natural_zeros(point, seed):
    rng = random.Random(seed)
    W = random_polynomial(rng, max_vars=1, max_degree=2)
    lift = lift_to_integers(W, [1])
    assert evaluate(lift.polynomial, point) >= 0
    x = point[0]
    sq = _four_square(x) if x >= 0 else None
    if sq is not None:
        assert (evaluate(lift.polynomial, (x,) + sq) == 0) == (evaluate(W, (x,)) == 0)
    else:
        assert all(evaluate(lift.polynomial, (x,) + w) != 0 for w in product(range(-3, 4), repeat=4))
