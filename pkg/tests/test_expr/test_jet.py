"""Tests for Taylor jets and jet evaluation of expressions."""

from math import factorial

import numpy as np
import pytest

from periodscope.config import get_settings
from periodscope.services.expr import (
    Function,
    Jet,
    eval_jet,
    evaluate,
    extrapolated_difference,
    finite_difference,
    parse,
)
from periodscope.services.expr import jet as jets
from periodscope.services.expr.jet import FloatArray

RTOL = 1e-6
ATOL = 1e-8


def assert_matches_finite_differences(text: str, x: float) -> None:
    expr = parse(text)
    j = eval_jet(expr, x, 4)

    def fn(t: FloatArray) -> FloatArray:
        return evaluate(expr, t)

    for k in (1, 2, 3):
        exact = float(j.derivative(k))
        approx = float(extrapolated_difference(fn, x, k))
        assert abs(exact - approx) <= ATOL + RTOL * abs(exact), (text, x, k)


# =============================================================================
# Random expression generator
# =============================================================================
# Every wrapper keeps the nearest complex singularity at distance about one
# or more from [-0.5, 0.5], so high derivatives stay moderate.

_WRAPPERS = (
    "sin(0.5*({}))",
    "cos(0.5*({}))",
    "atan({})",
    "tanh(0.5*({}))",
    "exp(0.5*({}))",
    "sinh(0.5*({}))",
    "cosh(0.5*({}))",
    "ln(2+({})^2)",
    "sqrt(1+({})^2)",
    "tan(0.3*atan({}))",
    "({})/(4+(0.5*({}))^2)",
)


def _constant(rng: np.random.Generator) -> str:
    return repr(round(float(rng.uniform(0.5, 2.0)), 3))


def _slope(rng: np.random.Generator) -> str:
    return repr(round(float(rng.uniform(0.25, 1.0)), 3))


def _leaf(rng: np.random.Generator) -> str:
    choice = rng.integers(3)
    if choice == 0:
        return "x"
    if choice == 1:
        return _constant(rng)
    return f"{_slope(rng)}*x"


def random_expression(rng: np.random.Generator, depth: int = 3) -> str:
    if depth == 0:
        return _leaf(rng)
    choice = rng.integers(4)
    if choice == 0:
        wrapper = _WRAPPERS[rng.integers(len(_WRAPPERS))]
        inner = random_expression(rng, depth - 1)
        return wrapper.format(inner, inner)
    if choice == 1:
        op = "+" if rng.integers(2) else "-"
        return f"({random_expression(rng, depth - 1)}) {op} ({random_expression(rng, depth - 1)})"
    if choice == 2:
        return f"({_leaf(rng)}) * ({random_expression(rng, depth - 1)})"
    return _leaf(rng)


# =============================================================================
# Known jets
# =============================================================================


class TestKnownJets:
    """Tests against hand-computed Taylor coefficients."""

    def test_square_at_three(self) -> None:
        """Test x^2 at 3 has coefficients (9, 6, 1)."""
        j = eval_jet(parse("x^2"), 3.0, 2)

        np.testing.assert_allclose(j.coefficients, [9.0, 6.0, 1.0], rtol=0, atol=1e-15)

    def test_rational_mass_f_at_origin(self) -> None:
        """Test -3x/(1+x^2) at 0 has value 0 and slope -3."""
        j = eval_jet(parse("-3*x/(1+x^2)"), 0.0, 1)

        np.testing.assert_allclose(j.coefficients, [0.0, -3.0], atol=1e-15)

    def test_exp_at_origin(self) -> None:
        """Test exp(x) at 0 has coefficients 1/k!."""
        j = eval_jet(parse("exp(x)"), 0.0, 4)

        expected = [1.0 / factorial(k) for k in range(5)]
        np.testing.assert_allclose(j.coefficients, expected, rtol=1e-14)

    def test_polynomial_derivatives_are_exact(self) -> None:
        """Test x^3 - 2x at 1.5 gives exact derivatives including a zero fourth."""
        j = eval_jet(parse("x^3 - 2*x"), 1.5, 4)

        np.testing.assert_allclose(
            j.derivatives(), [0.375, 4.75, 9.0, 6.0, 0.0], rtol=1e-14, atol=1e-14
        )

    def test_integer_power_of_negative_base(self) -> None:
        """Test x^3 at -2 through repeated multiplication."""
        j = eval_jet(parse("x^3"), -2.0, 3)

        np.testing.assert_allclose(j.derivatives(), [-8.0, 12.0, -12.0, 6.0], rtol=1e-14)

    def test_fractional_power(self) -> None:
        """Test x^0.5 at 4 matches the derivatives of the square root."""
        j = eval_jet(parse("x^0.5"), 4.0, 2)

        np.testing.assert_allclose(j.derivatives(), [2.0, 0.25, -1.0 / 32.0], rtol=1e-14)

    def test_default_order_from_settings(self) -> None:
        """Test an omitted order carries jet_order derivatives."""
        j = eval_jet(parse("exp(x)"), 0.0)

        assert j.order == get_settings().jet_order == 4
        assert j.coefficients.shape[0] == 5

    def test_variable_exponent(self) -> None:
        """Test x^x at 1 via exp(x ln x): value 1, slope 1, curvature 2."""
        j = eval_jet(parse("x^x"), 1.0, 2)

        np.testing.assert_allclose(j.derivatives(), [1.0, 1.0, 2.0], rtol=1e-14)


# =============================================================================
# Jet arithmetic
# =============================================================================


class TestJetArithmetic:
    """Tests for operations on Jet objects."""

    def test_product_rule(self) -> None:
        """Test the product jet gives (ab)' = a'b + ab'."""
        x = 0.3
        a = jets.sin_cos(Jet.variable(x, 3))[0]
        b = jets.exp(Jet.variable(x, 3))

        product = a * b

        expected = np.cos(x) * np.exp(x) + np.sin(x) * np.exp(x)
        assert float(product.derivative(1)) == pytest.approx(expected, rel=1e-14)
        assert float(product.derivative(2)) == pytest.approx(2 * np.cos(x) * np.exp(x), rel=1e-13)

    def test_quotient_inverts_product(self) -> None:
        """Test (a*b)/b recovers a."""
        a = jets.tan(Jet.variable(0.4, 4))
        b = 2.0 + Jet.variable(0.4, 4) ** 2

        np.testing.assert_allclose(((a * b) / b).coefficients, a.coefficients, rtol=1e-13)

    def test_scalar_mixing(self) -> None:
        """Test floats and numpy scalars combine on either side."""
        u = Jet.variable(2.0, 2)

        assert np.allclose((1.0 - u).coefficients, [-1.0, -1.0, 0.0])
        assert np.allclose((np.float64(3.0) * u).coefficients, [6.0, 3.0, 0.0])
        assert np.allclose((1.0 / u).derivatives(), [0.5, -0.25, 0.25])

    def test_differentiate(self) -> None:
        """Test the derivative of a sine jet is the cosine jet one order lower."""
        s, c = jets.sin_cos(Jet.variable(0.7, 4))

        np.testing.assert_allclose(
            s.differentiate().coefficients, c.truncate(3).coefficients, rtol=1e-13
        )

    def test_integrate(self) -> None:
        """Test integrating the cosine jet with value sin(x0) gives the sine jet."""
        x = 0.7
        c = jets.sin_cos(Jet.variable(x, 4))[1]

        s = c.integrate(np.sin(x))

        np.testing.assert_allclose(
            s.coefficients, jets.sin_cos(Jet.variable(x, 5))[0].coefficients, rtol=1e-13
        )

    def test_evaluate_series(self) -> None:
        """Test summing the exp jet at 0.1 approximates exp(0.1)."""
        j = jets.exp(Jet.variable(0.0, 4))

        assert float(j.evaluate(0.1)) == pytest.approx(np.exp(0.1), abs=2e-7)

    def test_batch_shape(self) -> None:
        """Test a jet over an array of base points."""
        xs = np.linspace(-1.0, 1.0, 7)

        j = eval_jet(parse("atan(x)"), xs, 3)

        assert j.coefficients.shape == (4, 7)
        np.testing.assert_allclose(j.derivative(1), 1.0 / (1.0 + xs**2), rtol=1e-14)

    def test_derivative_beyond_order(self) -> None:
        """Test asking for a derivative above the order."""
        with pytest.raises(ValueError):
            Jet.variable(0.0, 2).derivative(3)

    def test_jet_is_immutable(self) -> None:
        """Test the coefficient array is read-only."""
        j = Jet.variable(0.0, 2)

        with pytest.raises(ValueError):
            j.coefficients[0] = 1.0


# =============================================================================
# Finite-difference agreement
# =============================================================================


class TestFiniteDifferenceAgreement:
    """Jet derivatives 1..3 against extrapolated central differences."""

    @pytest.mark.parametrize(
        ("func", "lo", "hi"),
        [
            (Function.SIN, -1.0, 1.0),
            (Function.COS, -1.0, 1.0),
            (Function.TAN, -0.5, 0.5),
            (Function.ATAN, -1.0, 1.0),
            (Function.EXP, -1.0, 1.0),
            (Function.LN, 1.0, 2.0),
            (Function.SQRT, 1.0, 2.0),
            (Function.SINH, -1.0, 1.0),
            (Function.COSH, -1.0, 1.0),
            (Function.TANH, -1.0, 1.0),
        ],
    )
    def test_unary_functions(self, func: Function, lo: float, hi: float) -> None:
        """Test every unary function at random points of a safe interval."""
        rng = np.random.default_rng(7)

        for x in rng.uniform(lo, hi, size=10):
            assert_matches_finite_differences(f"{func.value}(x)", float(x))

    def test_random_expressions(self) -> None:
        """Test 200 random compositions."""
        rng = np.random.default_rng(20240601)

        for _ in range(200):
            text = random_expression(rng)
            x = float(rng.uniform(-0.5, 0.5))
            assert_matches_finite_differences(text, x)

    def test_extrapolation_beats_single_stencil(self) -> None:
        """Test sin''' at 0.3 from steps 0.025 and 0.05 is far closer than one stencil."""
        x = 0.3
        exact = -np.cos(x)

        single = float(finite_difference(np.sin, x, 3, 0.025))
        extrapolated = float(extrapolated_difference(np.sin, x, 3, 0.025))

        assert abs(extrapolated - exact) <= 1e-9
        assert abs(single - exact) > 10 * abs(extrapolated - exact)
