import math

import numpy as np
import pytest

from core.ambient import ManifoldShape
from core.curvelang import (
    BinOp,
    Const,
    CurveDef,
    CurveDomainError,
    CurveSyntaxError,
    DerivativeOrderError,
    Evaluator,
    Func,
    Integral,
    Neg,
    Pow,
    Var,
    differentiate,
    eval_jet,
    evaluate,
    free_vars,
    parse,
    parse_curve_text,
    parse_number,
    sample_jets,
    to_text,
)
from utils.file_utils import load_curve_file

# Smooth on [-1, 1]; cover every function, the quotient rule and integral nodes.
EXPRESSIONS = [
    "t^3 - 2*t + 1",
    "sin(t^2) * cos(t)",
    "ln(2 + sin(t))",
    "sqrt(1 + t^2)",
    "exp(-(t^2)) / (2 + t)",
    "tan(t / 3)",
    "1 / (1 + t^2)^2",
    "sin(exp(t)) - cos(t)^2",
    "t * integral(u, cos(u)^2)",
    "integral(u, exp(u) * integral(v, sin(v)))",
]
POINTS = [-0.9, -0.35, 0.1, 0.55, 0.95]


def test_unary_minus_is_part_of_the_base() -> None:
    assert parse("-t^2") == Pow(Neg(Var("t")), 2)
    assert evaluate(parse("-t^2"), 3.0) == 9.0
    assert evaluate(parse("-(t^2)"), 3.0) == -9.0
    assert to_text(Neg(Pow(Var("t"), 2))) == "-(t^2)"
    with pytest.raises(CurveSyntaxError, match="non-negative integer"):
        parse("2^-1")


def test_precedence_and_associativity() -> None:
    assert parse("1 - t - 2") == BinOp("-", BinOp("-", Const(1.0), Var("t")), Const(2.0))
    assert evaluate(parse("8 / 4 / 2"), 0.0) == 1.0
    assert evaluate(parse("2 + 3 * t"), 2.0) == 8.0


def test_named_constant_and_number_expressions() -> None:
    assert parse_number("2*pi") == pytest.approx(2 * math.pi)
    assert parse_number(" 0.5 ") == 0.5
    with pytest.raises(CurveSyntaxError):
        parse_number("t")


@pytest.mark.parametrize("text", EXPRESSIONS + ["-(t - 1)^2", "-2 * -t", "1 / (t * t)"])
def test_printed_text_reparses_to_same_tree(text: str) -> None:
    tree = parse(text)
    assert parse(to_text(tree)) == tree


@pytest.mark.parametrize("text, fragment", [
    ("sin t", "needs an argument"),
    ("t +", "Unexpected"),
    ("foo(t)", "Unknown function"),
    ("t^1.5", "integer"),
    ("x + 1", "Unresolved variable 'x'"),
    ("integral(u, t * u)", "outer variable 't'"),
    ("integral(sin, 1)", "bound variable"),
    ("(t + 1", "Expected ')'"),
    ("t $ 2", "Unexpected character"),
])
def test_syntax_errors(text: str, fragment: str) -> None:
    with pytest.raises(CurveSyntaxError) as info:
        parse(text)
    assert fragment in str(info.value)
    assert info.value.position is not None


def test_error_position_points_at_offender() -> None:
    with pytest.raises(CurveSyntaxError) as info:
        parse("1 + 2 * bogus")
    assert info.value.position == 8


def test_free_variables() -> None:
    assert free_vars(parse("t * integral(u, u^2)")) == frozenset({"t"})
    assert free_vars(parse("integral(u, integral(v, v))")) == frozenset()


def test_derivative_of_integral_is_integrand() -> None:
    assert differentiate(parse("integral(u, exp(u))")) == Func("exp", Var("t"))
    nested = differentiate(parse("integral(u, cos(u) * integral(v, sin(v)))"))
    assert nested == BinOp("*", Func("cos", Var("t")), Integral("v", Func("sin", Var("v"))))


def test_derivative_simplifies_constants() -> None:
    assert differentiate(parse("3*t + 7")) == Const(3.0)
    assert differentiate(parse("pi")) == Const(0.0)


@pytest.mark.parametrize("text", EXPRESSIONS)
@pytest.mark.parametrize("t", POINTS)
def test_symbolic_derivative_matches_central_difference(text: str, t: float) -> None:
    tree = parse(text)
    h = 1e-3
    f = [evaluate(tree, t + k * h) for k in (-2, -1, 1, 2)]
    estimate = (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * h)
    exact = evaluate(differentiate(tree), t)
    assert exact == pytest.approx(estimate, rel=1e-6, abs=1e-6)


def test_integrals() -> None:
    assert evaluate(parse("integral(u, 2*u)"), 3.0) == pytest.approx(9.0, abs=1e-10)
    assert evaluate(parse("integral(u, integral(v, 1))"), 2.0) == pytest.approx(2.0, abs=1e-10)
    assert evaluate(parse("integral(u, cos(u))"), -1.0) == pytest.approx(math.sin(-1.0), abs=1e-10)


@pytest.mark.parametrize("text, t", [("ln(t)", -1.0), ("1 / t", 0.0), ("sqrt(t)", -4.0), ("1 / t^2", 0.0)])
def test_domain_errors(text: str, t: float) -> None:
    with pytest.raises(CurveDomainError):
        evaluate(parse(text), t)


def test_domain_error_reports_column() -> None:
    with pytest.raises(CurveDomainError, match="column 5"):
        evaluate(parse("1 + ln(t)"), 0.0)


def _curve(text: str) -> CurveDef:
    return parse_curve_text(text, source="test.curve")


CIRCLE = """
m = 1
s = 1
label = circle  # comment
t = 0:2*pi
c1 = 2*cos(t/2)
c2 = 2*sin(t/2)
c3 = t
"""


def test_curve_file_parses() -> None:
    curve = _curve(CIRCLE)
    assert curve.shape == ManifoldShape(1, 1)
    assert curve.label == "circle"
    assert curve.t_range == pytest.approx((0.0, 2 * math.pi))
    assert curve.components[2] == Var("t")


@pytest.mark.parametrize("text, fragment", [
    ("m = 1\ns = 1\nc1 = t\nc2 = t", "missing component c3"),
    ("m = 1\ns = 1\nc1 = t\nc2 = t\nc3 = t\nc4 = t", "too many components"),
    ("m = 1\ns = 1\nm = 2", "duplicate key 'm'"),
    ("m = 1\ns = 1\ncolour = red", "unknown key"),
    ("m = one\ns = 1", "m must be an integer"),
    ("m = 0\ns = 1", "positive integer"),
    ("m = 1\ns = 1\nt = 1\nc1 = t\nc2 = t\nc3 = t", "a:b"),
    ("m = 1\ns = 1\njust text", "key = value"),
])
def test_curve_file_errors(text: str, fragment: str) -> None:
    with pytest.raises(CurveSyntaxError, match=fragment.replace("(", r"\(")):
        _curve(text)


def test_curve_file_component_error_carries_line() -> None:
    with pytest.raises(CurveSyntaxError) as info:
        _curve("m = 1\ns = 1\nc1 = t\nc2 = sin(\nc3 = t")
    assert info.value.line == 4


def test_curve_needs_matching_component_count() -> None:
    with pytest.raises(ValueError):
        CurveDef(ManifoldShape(1, 1), (Var("t"),))


def test_jet_of_circle() -> None:
    curve = _curve(CIRCLE)
    jet = eval_jet(curve, 1.0, 3)
    assert jet[0].values == pytest.approx((2 * math.cos(0.5), -math.sin(0.5), -0.5 * math.cos(0.5),
                                           0.25 * math.sin(0.5)))
    assert jet[2].values == pytest.approx((1.0, 1.0, 0.0, 0.0))


@pytest.mark.parametrize("order", [0, 7])
def test_jet_order_bounds(order: int) -> None:
    with pytest.raises(DerivativeOrderError):
        eval_jet(_curve(CIRCLE), 0.0, order)


def test_sampled_jets_agree_with_direct_evaluation() -> None:
    curve = _curve(
        "m = 1\ns = 1\n"
        "c1 = integral(u, cos(exp(2*u)))\n"
        "c2 = integral(u, sin(exp(2*u)))\n"
        "c3 = integral(u, cos(exp(2*u)) * integral(v, sin(exp(2*v))))\n")
    grid = np.linspace(0.0, 0.8, 9)
    table = sample_jets(curve, grid, 2)
    assert table.shape == (9, 3, 3)
    for j in (0, 4, 8):
        jet = eval_jet(curve, grid[j], 2)
        for i in range(3):
            assert table[j, :, i] == pytest.approx(jet[i].values, abs=1e-9)


@pytest.mark.parametrize("text, t", [("exp(t) * exp(t) * exp(t)", 300.0), ("t^200", 1e10), ("t * t", 1e200)])
def test_overflow_is_a_domain_error(text: str, t: float) -> None:
    with pytest.raises(CurveDomainError):
        evaluate(parse(text), t)


def test_out_of_range_literal_and_constant() -> None:
    with pytest.raises(CurveSyntaxError, match="out of range"):
        parse("1e400 * t")
    with pytest.raises(ValueError, match="non-finite"):
        to_text(Const(math.inf))


def test_jet_of_example2_at_origin() -> None:
    jets = eval_jet(load_curve_file("example2"), 0.0, 2)
    # c1 = 2 integral(u, cos(exp(2u)))
    assert jets[0].values == pytest.approx((0.0, 2.0 * math.cos(1.0), -4.0 * math.sin(1.0)), abs=1e-12)
    assert jets[1].values[1] == pytest.approx(-2.0 * math.sin(1.0), abs=1e-12)
    assert jets[2].values[:2] == pytest.approx((0.0, 0.0), abs=1e-12)


def test_cumulative_quadrature_matches_direct() -> None:
    gamma3 = load_curve_file("example2").components[2]
    cumulative = Evaluator(cumulative=True)
    grid = np.linspace(0.0, 1.0, 41)
    shared = [cumulative.evaluate(gamma3, t) for t in grid]
    direct = [evaluate(gamma3, t) for t in grid]
    assert np.allclose(shared, direct, atol=1e-8, rtol=0.0)
    # out-of-order requests reuse the same cache
    assert cumulative.evaluate(gamma3, 0.35) == pytest.approx(evaluate(gamma3, 0.35), abs=1e-8)
