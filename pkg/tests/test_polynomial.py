import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from enlab.polynomial import (CapExceeded, EvaluationOverflow, ParseError, Polynomial,
                              PolynomialError, QuadraticCoeffs, enumerate_quadratic_solutions,
                              evaluate, format_polynomial, norm, parse_polynomial,
                              permute_vars, quadratic_height_bound)


def test_parse_examples():
    assert parse_polynomial("x1^2 - x2") == Polynomial(2, {(2, 0): 1, (0, 1): -1})
    zero = parse_polynomial("0")
    assert zero.num_vars == 0 and zero.terms == {}
    assert parse_polynomial("0", num_vars=3) == Polynomial(3, {})
    assert parse_polynomial("(x1 + 1)*(x1 - 1)") == Polynomial(1, {(2,): 1, (0,): -1})


def test_parse_accepts_trailing_equals_zero_and_unary_minus():
    assert parse_polynomial("x1*x2 - 1 = 0") == parse_polynomial("x1*x2 - 1")
    assert parse_polynomial("-x1 + 2") == Polynomial(1, {(1,): -1, (0,): 2})


@pytest.mark.parametrize("text,pos", [("x1 + + x2", 5), ("x1 $ 2", 3), ("(x1", 3), ("x1^0", 3), ("x0", 0)])
def test_parse_errors_report_position(text, pos):
    with pytest.raises(ParseError) as err:
        parse_polynomial(text)
    assert err.value.position == pos


def test_parse_caps():
    with pytest.raises(CapExceeded):
        parse_polynomial("x1^17")
    with pytest.raises(CapExceeded):
        parse_polynomial("(x1*x2)^9")
    assert parse_polynomial("x1^17", max_degree=17).degree == 17
    with pytest.raises(CapExceeded):
        parse_polynomial("x17")
    with pytest.raises(CapExceeded):
        parse_polynomial("9223372036854775808*x1")
    assert parse_polynomial("9223372036854775807*x1").terms[(1,)] == 2**63 - 1
    with pytest.raises(CapExceeded):
        parse_polynomial("(4294967296*x1)^2")
    with pytest.raises(PolynomialError):
        parse_polynomial("x3", num_vars=2)


def test_format_canonical_order():
    assert format_polynomial(parse_polynomial("x1^2 - x2")) == "x1^2 - x2"
    assert format_polynomial(parse_polynomial("1 - x2 + 3*x1*x2 + x1^3")) == "x1^3 + 3*x1*x2 - x2 + 1"
    assert format_polynomial(Polynomial(2, {})) == "0"
    assert format_polynomial(parse_polynomial("-5")) == "-5"


def test_evaluate_examples():
    p = parse_polynomial("x1^2 - x2")
    assert evaluate(p, (2, 4)) == 0
    assert evaluate(p, (3, 4)) == 5
    assert evaluate(parse_polynomial("x1*x2 - 1"), (-1, -1)) == 0
    with pytest.raises(PolynomialError):
        evaluate(p, (1, 2, 3))


def test_evaluate_is_exact_and_reports_width_overflow():
    p = parse_polynomial("x1^16")
    assert evaluate(p, (2**8,)) == 2**128
    with pytest.raises(EvaluationOverflow):
        evaluate(p, (2**8,), bit_limit=63)


def test_norm_examples():
    assert norm(parse_polynomial("x1^2 - x2")) == 2
    assert norm(parse_polynomial("7")) == 7
    assert norm(parse_polynomial("x1*x2*x3")) == 3


def test_quadratic_height_bound_examples():
    assert quadratic_height_bound(QuadraticCoeffs(1, 0, 1, 0, 0, -2)) == 320
    assert quadratic_height_bound(QuadraticCoeffs(1, 1, 1, 1, 1, 1)) == 20
    assert quadratic_height_bound(QuadraticCoeffs(0, 0, 0, 0, 1, -5)) == 12500
    with pytest.raises(PolynomialError):
        quadratic_height_bound(QuadraticCoeffs(0, 0, 0, 0, 0, 0))


def _brute_quadratic(q, radius):
    r = np.arange(-radius, radius + 1, dtype=np.int64)
    x, y = np.meshgrid(r, r, indexing="ij")
    v = q.a * x * x + q.b * x * y + q.c * y * y + q.d * x + q.e * y + q.f
    xs, ys = np.nonzero(v == 0)
    return sorted((int(r[i]), int(r[j])) for i, j in zip(xs, ys))


def test_circle_of_two_matches_brute_force():
    q = QuadraticCoeffs(1, 0, 1, 0, 0, -2)
    res = enumerate_quadratic_solutions(q)
    assert list(res.solutions) == _brute_quadratic(q, 320)
    assert list(res.solutions) == [(-1, -1), (-1, 1), (1, -1), (1, 1)]
    assert res.finite


def test_parabola_flagged_infinite():
    res = enumerate_quadratic_solutions(QuadraticCoeffs(1, 0, 0, 0, -1, 0))
    assert not res.finite
    x, y = res.escape_witness
    assert y == x * x and max(abs(x), abs(y)) > res.bound


def test_sum_of_squares_plus_one_has_no_solutions():
    res = enumerate_quadratic_solutions(QuadraticCoeffs(1, 0, 1, 0, 0, 1))
    assert res.solutions == () and res.finite


def test_quadratic_all_zero_rejected():
    with pytest.raises(PolynomialError):
        enumerate_quadratic_solutions(QuadraticCoeffs(0, 0, 0, 0, 0, 0))


@settings(max_examples=40, deadline=None)
@given(st.tuples(*[st.integers(-2, 2)] * 6).filter(any))
def test_quadratic_enumeration_matches_grid_and_bound(coeffs):
    q = QuadraticCoeffs(*coeffs)
    res = enumerate_quadratic_solutions(q)
    assert list(res.solutions) == _brute_quadratic(q, res.bound)
    if res.finite:
        assert all(max(abs(x), abs(y)) <= 20 * max(map(abs, coeffs)) ** 4 for x, y in res.solutions)


# -- random expressions for round-trip and evaluation oracles ----------------------

def _random_expr(rng, nvars, depth=0):
    roll = rng.random()
    if depth > 2 or roll < 0.35:
        if rng.random() < 0.4:
            return str(rng.randint(0, 9))
        return f"x{rng.randint(1, nvars)}"
    if roll < 0.55:
        return f"({_random_expr(rng, nvars, depth + 1)})^{rng.randint(1, 3)}"
    op = rng.choice(["+", "-", "*"])
    return f"({_random_expr(rng, nvars, depth + 1)} {op} {_random_expr(rng, nvars, depth + 1)})"


def _python_value(text, point):
    env = {f"x{i + 1}": v for i, v in enumerate(point)}
    return eval(text.replace("^", "**"), {"__builtins__": {}}, env)


def test_evaluate_agrees_with_python_on_1000_random_pairs():
    rng = random.Random(7)
    for _ in range(1000):
        nvars = rng.randint(1, 4)
        text = _random_expr(rng, nvars)
        p = parse_polynomial(text, num_vars=nvars, max_degree=64)
        point = tuple(rng.randint(-6, 6) for _ in range(nvars))
        assert evaluate(p, point) == _python_value(text, point), text


def test_format_parse_round_trip_random():
    rng = random.Random(11)
    for _ in range(500):
        nvars = rng.randint(1, 4)
        p = parse_polynomial(_random_expr(rng, nvars), num_vars=nvars, max_degree=64)
        assert parse_polynomial(format_polynomial(p), num_vars=nvars, max_degree=64) == p


polys = st.integers(1, 4).flatmap(lambda k: st.builds(
    lambda terms: Polynomial(k, terms),
    st.dictionaries(st.tuples(*[st.integers(0, 3)] * k), st.integers(-50, 50), max_size=6)))


@given(polys)
def test_round_trip_property(p):
    assert parse_polynomial(format_polynomial(p), num_vars=p.num_vars) == p


@given(polys, st.randoms())
def test_norm_invariant_under_variable_permutation(p, rnd):
    perm = list(range(1, p.num_vars + 1))
    rnd.shuffle(perm)
    assert norm(permute_vars(p, perm)) == norm(p)
