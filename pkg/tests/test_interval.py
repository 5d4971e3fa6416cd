import random
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings, strategies as st

from torusindex.interval import (
    Binary, Box, Const, ExpressionError, Interval, MapExpr, ParseError, Piecewise, Power, Unary, Var,
    evaluate_interval, parse_expr, parse_map, to_rational,
)


def test_affine_examples():
    f = parse_map("(mul 2 (var 0))")
    assert evaluate_interval(f, [Interval(0, Q(1, 2))]) == Box([Interval(0, 1)])
    assert evaluate_interval(f, [Interval(-2, 2)]) == Box([Interval(-4, 4)])


def test_cubic_example():
    f = parse_map("(neg (pow (var 0) 3))")
    out = evaluate_interval(f, [Interval(1, Q(5, 4))])
    assert out[0].contains(Interval(Q(-125, 64), -1))


def test_even_power_straddling_zero():
    assert Interval(-2, 1) ** 2 == Interval(0, 4)
    assert Interval(-2, 1) ** 3 == Interval(-8, 1)
    assert Interval(-3, -1) ** 2 == Interval(1, 9)
    assert Interval(5, 7) ** 0 == Interval(1, 1)


def test_piecewise_hulls_when_condition_straddles():
    f = parse_expr("(pw (var 0) (neg (var 0)) (var 0))")    # |x|
    assert f.interval(Box([Interval(1, 2)])) == Interval(1, 2)
    assert f.interval(Box([Interval(-2, -1)])) == Interval(1, 2)
    assert f.interval(Box([Interval(-1, 2)])).contains(Interval(0, 2))


def test_parse_numbers_and_vec():
    f = parse_map("(vec (add (var 0) 1/2) (mul -0.25 (var 1)))")
    assert f.dim == 2
    assert f([Q(1), Q(4)]) == (Q(3, 2), Q(-1))


def test_parse_errors_report_position():
    with pytest.raises(ParseError) as exc:
        parse_map("(mul 2\n  (foo 0))")
    assert exc.value.line == 2
    with pytest.raises(ParseError):
        parse_map("(mul 2 (var 0)")
    with pytest.raises(ParseError):
        parse_map("(pow (var 0) -1)")


def test_arity_mismatch():
    f = parse_map("(vec (var 0) (var 1))")
    with pytest.raises(ExpressionError):
        evaluate_interval(f, [Interval(0, 1)])


def test_to_rational_rejects_floats():
    with pytest.raises(ExpressionError):
        to_rational(0.5)
    with pytest.raises(ExpressionError):
        to_rational(True)
    assert to_rational("3/4") == Q(3, 4)
    assert to_rational("-0.125") == Q(-1, 8)


# random expressions of depth <= 4 in two variables

def expressions(depth):
    leaf = st.one_of(
        st.builds(Var, st.integers(0, 1)),
        st.builds(lambda p, q: Const(Q(p, q)), st.integers(-5, 5), st.integers(1, 4)),
    )
    if depth == 0:
        return leaf
    sub = expressions(depth - 1)
    return st.one_of(
        leaf,
        st.builds(lambda a: Unary("neg", a), sub),
        st.builds(lambda op, a, b: Binary(op, a, b), st.sampled_from(["add", "sub", "mul"]), sub, sub),
        st.builds(lambda a, k: Power(a, k), sub, st.integers(0, 4)),
        st.builds(Piecewise, sub, sub, sub),
    )


boxes = st.tuples(
    st.tuples(st.integers(-8, 8), st.integers(0, 8)),
    st.tuples(st.integers(-8, 8), st.integers(0, 8)),
).map(lambda t: Box([Interval(Q(a, 4), Q(a + w, 4)) for a, w in t]))


@settings(max_examples=120, deadline=None)
@given(expressions(4), boxes, st.integers(0, 2**32 - 1))
def test_containment_on_random_points(expr, box, seed):
    rng = random.Random(seed)
    enclosure = expr.interval(box)
    for _ in range(100):
        x = [iv.lo + (iv.hi - iv.lo) * Q(rng.randint(0, 64), 64) for iv in box]
        assert expr(x) in enclosure


@settings(max_examples=60, deadline=None)
@given(expressions(3))
def test_printed_expression_round_trips(expr):
    again = parse_expr(str(expr))
    box = Box([Interval(Q(-1, 3), Q(1, 2)), Interval(Q(1, 5), 1)])
    assert again.interval(box) == expr.interval(box)


def test_map_expr_is_callable_on_boxes():
    f = MapExpr((parse_expr("(var 1)"), parse_expr("(var 0)")))
    assert evaluate_interval(f, [Interval(0, 1), Interval(2, 3)]) == Box([Interval(2, 3), Interval(0, 1)])
