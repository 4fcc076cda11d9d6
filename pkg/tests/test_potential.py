import math

import numpy as np
import pytest

from scripts.potential import PotentialEvaluationError, PotentialSyntaxError, parse_potential
from scripts.schema import DecayClass, SmoothnessClass


def test_parse_and_evaluate():
    assert parse_potential("x^2").evaluate(2.0) == pytest.approx(4.0)
    assert parse_potential("-2*sech(x)^2").evaluate(0.0) == pytest.approx(-2.0)
    assert parse_potential("pi*cos(x)").evaluate(0.0) == pytest.approx(math.pi)


def test_evaluation_is_vectorized():
    expr = parse_potential("exp(-x^2) + 1/(1 + x^2)")
    xs = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(expr.evaluate(xs), np.exp(-xs**2) + 1 / (1 + xs**2))


@pytest.mark.parametrize(
    "text, x, expected",
    [
        ("2^3^2", 0.0, 512.0),
        ("-x^2", 3.0, -9.0),
        ("8/4/2", 0.0, 1.0),
        ("1 - 2 - 3", 0.0, -4.0),
        ("2*-x", 3.0, -6.0),
    ],
)
def test_precedence_and_associativity(text, x, expected):
    assert parse_potential(text).evaluate(x) == pytest.approx(expected)


@pytest.mark.parametrize("text", ["x^2", "-2*sech(x)^2", "(1 + x)^-3", "-(x - 1)*(x + 1)", "2^3^2", "(2^3)^2", "exp(-abs(x))"])
def test_print_parse_idempotent(text):
    once = parse_potential(text).to_text()
    assert parse_potential(once).to_text() == once
    xs = np.linspace(0.1, 2.0, 5)
    np.testing.assert_allclose(parse_potential(once).evaluate(xs), parse_potential(text).evaluate(xs))


def test_unbalanced_parenthesis_offset():
    with pytest.raises(PotentialSyntaxError) as info:
        parse_potential("2*(x")
    assert info.value.offset == 4
    assert info.value.kind == "unbalanced"


def test_unknown_identifier_span():
    with pytest.raises(PotentialSyntaxError) as info:
        parse_potential("x + y")
    assert info.value.kind == "unknown_identifier"
    assert info.value.span == (4, 5)


def test_unknown_function():
    with pytest.raises(PotentialSyntaxError) as info:
        parse_potential("erf(x)")
    assert info.value.kind == "unknown_identifier"


def test_arity():
    with pytest.raises(PotentialSyntaxError) as info:
        parse_potential("sin(x, 2)")
    assert info.value.kind == "arity"


@pytest.mark.parametrize("text", ["", "   ", "x x", "2**x", "*x"])
def test_syntax_errors(text):
    with pytest.raises(PotentialSyntaxError):
        parse_potential(text)


def test_domain_error_surfaces_at_evaluation():
    expr = parse_potential("log(x)")
    assert expr.evaluate(1.0) == pytest.approx(0.0)
    with pytest.raises(PotentialEvaluationError):
        expr.evaluate(-1.0)


def test_smoothness_and_names():
    assert parse_potential("abs(x)").smoothness == SmoothnessClass.C0
    assert parse_potential("x^2 + sin(x)").smoothness == SmoothnessClass.CINF
    assert parse_potential("3").is_constant
    assert parse_potential("pi").is_constant
    assert not parse_potential("x - x").is_constant


def test_decay_profile():
    assert parse_potential("-2*sech(x)^2").decay_profile().kind == DecayClass.EXPONENTIAL
    algebraic = parse_potential("1/(1 + x^2)^2").decay_profile()
    assert algebraic.kind == DecayClass.ALGEBRAIC
    assert algebraic.exponent == pytest.approx(4.0, abs=0.05)
    assert parse_potential("x^2").decay_profile().kind == DecayClass.NONE
