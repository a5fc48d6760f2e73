import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfracsl.exprparse import (
    BinOp,
    Call,
    ExprEvalError,
    ExprSyntaxError,
    Neg,
    Num,
    Var,
    evaluate,
    evaluate_array,
    is_constant,
    parse,
    to_source,
)
from qfracsl.exprparse import eval as expr_eval
from qfracsl.qcore import qgamma
from qfracsl.qspecial import q_cos, q_sin

ENV = {"q": 0.5, "a": 1.0}


@pytest.mark.parametrize(
    "src,x,value",
    [
        ("x^2 + 1", 2.0, 5.0),
        ("2+3*x", 4.0, 14.0),
        ("q", 0.0, 0.5),
        ("pow(x,0.5)", 4.0, 2.0),
        ("-x^2", 3.0, -9.0),
        ("2^3^2", 0.0, 512.0),
        ("2^-1", 0.0, 0.5),
        ("8/2/2", 0.0, 2.0),
        ("1 - 2 - 3", 0.0, -4.0),
        ("x*(a - x)", 0.25, 0.1875),
        ("1.5e1 + .5", 0.0, 15.5),
    ],
)
def test_examples(src, x, value):
    assert evaluate(parse(src), x, ENV) == pytest.approx(value, rel=1e-15)
    assert expr_eval(parse(src), x, ENV) == pytest.approx(value, rel=1e-15)


def test_functions():
    assert evaluate(parse("qgamma(x)"), 3.0, ENV) == pytest.approx(qgamma(3.0, 0.5))
    assert evaluate(parse("qsin(x) + qcos(x)"), 1.2, ENV) == pytest.approx(q_sin(1.2, 0.5) + q_cos(1.2, 0.5))


@pytest.mark.parametrize(
    "src,offset",
    [("(x", 2), ("x +", 3), ("2 $ 3", 2), ("foo(x)", 0), ("x y", 2), ("pow(x)", 0), ("", 0), (")", 0)],
)
def test_syntax_errors(src, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse(src)
    assert info.value.offset == offset


@pytest.mark.parametrize("src,x", [("1/x", 0.0), ("pow(x, 0.5)", -1.0), ("x^-1", 0.0), ("qgamma(x)", 0.0)])
def test_evaluation_errors(src, x):
    with pytest.raises(ExprEvalError):
        evaluate(parse(src), x, ENV)


def test_missing_binding():
    with pytest.raises(ExprEvalError):
        evaluate(parse("a"), 0.0, {})


def test_negative_base_integer_power():
    assert evaluate(parse("x^3"), -2.0, ENV) == -8.0


def test_tree_shape_and_helpers():
    assert parse("-x^2") == Neg(BinOp("^", Var("x"), Num(2.0)))
    assert parse("pow(x, 2)") == Call("pow", (Var("x"), Num(2.0)))
    assert is_constant(parse("q * a + 2"))
    assert not is_constant(parse("qsin(x)"))
    xs = np.array([0.5, 1.0])
    assert np.allclose(evaluate_array(parse("x + 1"), xs, ENV), [1.5, 2.0])


# -- round trip --------------------------------------------------------------------

leaf = st.one_of(
    st.floats(-5, 5, allow_nan=False, allow_infinity=False).map(Num),
    st.sampled_from(["x", "q", "a"]).map(Var),
)


def _extend(children):
    return st.one_of(
        st.tuples(st.sampled_from("+-*/^"), children, children).map(lambda t: BinOp(*t)),
        children.map(Neg),
        st.tuples(children, children).map(lambda t: Call("pow", t)),
        children.map(lambda c: Call("qcos", (c,))),
    )


exprs = st.recursive(leaf, _extend, max_leaves=8)


def _safe(e, x):
    try:
        v = evaluate(e, x, ENV)
    except (ExprEvalError, OverflowError, ValueError):
        return "error"
    return "nan" if not math.isfinite(v) else v


@settings(max_examples=150, deadline=None)
@given(e=exprs)
def test_print_parse_round_trip(e):
    again = parse(to_source(e))
    rng = np.random.default_rng(0)
    for x in rng.uniform(-3, 3, 100):
        assert _safe(again, x) == _safe(e, x)
