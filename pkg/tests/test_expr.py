import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fractconv.expr import (
    BinOp,
    Call,
    Const,
    DomainError,
    ExprSyntaxError,
    Neg,
    Num,
    Var,
    evaluate,
    parse,
    sample,
    to_text,
)


def test_figure_expressions_parse():
    assert parse("sin(3*pi*x)") == Call("sin", BinOp("*", BinOp("*", Num(3.0), Const("pi")), Var()))
    assert parse("x/8") == BinOp("/", Var(), Num(8.0))


@pytest.mark.parametrize(
    "text,offset",
    [("2**x", 2), ("3x", 1), ("", 0), ("sin x", 4), ("(x", 2), ("x+", 2), ("foo(x)", 0), ("x $ 1", 2)],
)
def test_syntax_errors_report_offset(text, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse(text)
    assert info.value.offset == offset


def test_syntax_error_lists_expected_tokens():
    with pytest.raises(ExprSyntaxError) as info:
        parse("2**x")
    assert "number" in info.value.expected


@pytest.mark.parametrize(
    "text,x,value",
    [
        ("sin(3*pi*x)", 0.5, -1.0),
        ("x/8", 3, 0.375),
        ("exp(x)", 0, 1.0),
        ("2^3^2", 0, 512.0),
        ("-2^2", 0, -4.0),
        ("(-2)^2", 0, 4.0),
        ("1 - 2 - 3", 0, -4.0),
        ("8 / 4 / 2", 0, 1.0),
        ("abs(x) + sqrt(4) * e^0", -1.5, 3.5),
        ("x^-1", 4, 0.25),
        ("  x   *\t2 ", 1.25, 2.5),
    ],
)
def test_evaluate_examples(text, x, value):
    assert evaluate(parse(text), x) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize(
    "text,x", [("log(x)", 0.0), ("log(x)", -1.0), ("sqrt(x)", -1.0), ("1/x", 0.0), ("x^0.5", -2.0), ("exp(x)", 1e3)]
)
def test_domain_errors(text, x):
    with pytest.raises(DomainError) as info:
        evaluate(parse(text), x)
    assert info.value.x == x


def test_sample_examples():
    assert list(sample(parse("x"), [0, 1, 2])) == [0, 1, 2]
    assert list(sample(parse("1"), np.linspace(0, 1, 5))) == [1.0] * 5
    with pytest.raises(DomainError):
        sample(parse("sqrt(x)"), [0.0, -1.0, 2.0])


def test_sample_matches_evaluate_bitwise():
    e = parse("sin(3*pi*x) * exp(-x/2) + x^3 - log(x + 1) / (2 + cos(x))")
    xs = np.linspace(0, 3, 301)
    scalar = np.array([evaluate(e, x) for x in xs])
    assert np.array_equal(sample(e, xs), scalar)


# ---------------------------------------------------------- random trees

_FUNCS = ("sin", "cos", "tan", "exp", "log", "abs", "sqrt")


def _trees(depth):
    leaves = st.one_of(
        st.floats(0, 10, allow_nan=False).map(lambda v: Num(round(v, 3))),
        st.just(Var()),
        st.sampled_from([Const("pi"), Const("e")]),
    )
    if depth == 0:
        return leaves
    sub = _trees(depth - 1)
    return st.one_of(
        leaves,
        st.builds(Neg, sub),
        st.builds(BinOp, st.sampled_from("+-*/^"), sub, sub),
        st.builds(Call, st.sampled_from(_FUNCS), sub),
    )


@settings(max_examples=300, deadline=None)
@given(_trees(4))
def test_print_parse_round_trip(tree):
    text = to_text(tree)
    again = parse(text)
    assert to_text(again) == text
    assert parse(to_text(again)) == again


def _oracle(e, x):
    """Independent recursive evaluation with Python's math module."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return x
    if isinstance(e, Const):
        return {"pi": math.pi, "e": math.e}[e.name]
    if isinstance(e, Neg):
        return -_oracle(e.operand, x)
    if isinstance(e, Call):
        a = _oracle(e.arg, x)
        return abs(a) if e.name == "abs" else getattr(math, e.name)(a)
    a, b = _oracle(e.left, x), _oracle(e.right, x)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "/":
        return a / b
    if b == int(b) and abs(b) <= 64:
        # small integer powers are defined as repeated multiplication
        r = 1.0
        for _ in range(abs(int(b))):
            r *= a
        return 1.0 / r if b < 0 else r
    if a == 0.0 and b > 0:
        return 0.0
    return math.exp(b * math.log(a))


@settings(max_examples=1000, deadline=None)
@given(_trees(6), st.floats(-3, 3, allow_nan=False))
def test_evaluate_matches_oracle(tree, x):
    try:
        expected = _oracle(tree, x)
    except (ValueError, ZeroDivisionError, OverflowError):
        expected = None
    if expected is None or not math.isfinite(expected):
        with pytest.raises(DomainError):
            evaluate(tree, x)
        return
    try:
        got = evaluate(tree, x)
    except DomainError:
        # overflow in an intermediate that the oracle happened to survive
        return
    assert got == pytest.approx(expected, rel=1e-14, abs=1e-300)
