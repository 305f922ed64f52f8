"""
Tests for the profile expression language and ProblemSpec.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.core.profiles import FUNCTIONS, BinOp, Call, Neg, Num, Pow, Var

_numbers = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
_leaves = st.one_of(st.just(Var()), _numbers.map(Num))


def _extend(children):
    return st.one_of(
        children.filter(lambda e: not isinstance(e, Num)).map(Neg),
        st.tuples(st.sampled_from("+-*/"), children, children).map(lambda x: BinOp(*x)),
        st.tuples(children, st.floats(min_value=-5, max_value=5, allow_nan=False)).map(lambda x: Pow(*x)),
        st.tuples(st.sampled_from(FUNCTIONS), children).map(lambda x: Call(*x)),
    )


expressions = st.recursive(_leaves, _extend, max_leaves=8)


class TestParse:
    """Test suite for the expression parser."""

    def test_parses_power(self):
        """Test 't^2' becomes a power node."""
        from src.core.profiles import parse

        assert parse("t^2") == Pow(Var(), 2.0)

    def test_parses_sum_of_literal_and_scaled_power(self):
        """Test '1 + 0.5*t^0.3' structure."""
        from src.core.profiles import parse

        expected = BinOp("+", Num(1.0), BinOp("*", Num(0.5), Pow(Var(), 0.3)))
        assert parse("1 + 0.5*t^0.3") == expected

    def test_left_associative(self):
        """Test subtraction and division associate to the left."""
        from src.core.profiles import parse

        assert parse("t - 1 - 2") == BinOp("-", BinOp("-", Var(), Num(1.0)), Num(2.0))
        assert parse("t / 2 / 4") == BinOp("/", BinOp("/", Var(), Num(2.0)), Num(4.0))

    def test_unicode_minus_accepted(self):
        """Test the typographic minus parses like '-'."""
        from src.core.profiles import parse

        assert parse("t^−1") == Pow(Var(), -1.0)

    def test_rejects_non_constant_exponent(self):
        """Test 't^t' is rejected."""
        from src.core.errors import ExpressionError
        from src.core.profiles import parse

        with pytest.raises(ExpressionError, match="non-constant exponent") as info:
            parse("t^t")
        assert info.value.offset == 2

    @pytest.mark.parametrize(
        "source,offset",
        [("2 + * t", 4), ("", 0), ("t +", 3), ("foo(t)", 0), ("(t", 2), ("t $ 1", 2)],
    )
    def test_syntax_errors_carry_offset(self, source, offset):
        """Test syntax errors report the byte offset of the offending token."""
        from src.core.errors import ExpressionError
        from src.core.profiles import parse

        with pytest.raises(ExpressionError) as info:
            parse(source)
        assert info.value.offset == offset

    @settings(max_examples=200, deadline=None)
    @given(expressions)
    def test_round_trip(self, expr):
        """Test parse(to_source(e)) reproduces e."""
        from src.core.profiles import parse, to_source

        assert parse(to_source(expr)) == expr


class TestDifferentiate:
    """Test suite for symbolic differentiation."""

    def test_power_rule(self):
        """Test d/dt t^3 = 3*t^2."""
        from src.core.profiles import differentiate, parse, to_source

        assert to_source(differentiate(parse("t^3"))) == "3 * t^2"

    def test_exp_is_its_own_derivative(self):
        """Test d/dt exp(t) = exp(t)."""
        from src.core.profiles import differentiate, parse, to_source

        assert to_source(differentiate(parse("exp(t)"))) == "exp(t)"

    def test_product_rule(self):
        """Test d/dt t*log(t) evaluates to log(t) + 1."""
        from src.core.profiles import differentiate, evaluate, parse

        ts = np.array([0.5, 1.0, 2.0, 7.0])
        np.testing.assert_allclose(evaluate(differentiate(parse("t*log(t)")), ts), np.log(ts) + 1.0, rtol=1e-14)

    def test_constants_fold_to_zero(self):
        """Test derivative of a literal is the literal zero."""
        from src.core.profiles import ZERO, differentiate, parse

        assert differentiate(parse("3 + exp(2)")) == ZERO

    @pytest.mark.parametrize(
        "source",
        ["t^3", "exp(t)", "t*log(t)", "sqrt(1 + t^2)", "1 / (1 + t)", "exp(-t) * t^2", "t^0.5 - 2*t", "log(1 + t^2)"],
    )
    def test_matches_central_differences(self, source):
        """Test symbolic derivatives against central differences on a log grid."""
        from src.core.profiles import Profile

        profile = Profile(source)
        ts = np.logspace(-1, 1, 20)
        h = 1e-5 * ts
        numeric = (profile.value(ts + h) - profile.value(ts - h)) / (2 * h)
        np.testing.assert_allclose(profile.derivative(ts), numeric, rtol=1e-5, atol=1e-8)


class TestAsymptoticPower:
    """Test suite for leading power-law extraction."""

    def test_leading_term_at_infinity(self):
        """Test '3*t^2 + t' at infinity is 3 t^2."""
        from src.core.profiles import End, asymptotic_power, parse

        law = asymptotic_power(parse("3*t^2 + t"), End.AT_INFINITY)
        assert (law.c, law.a) == (3.0, 2.0)

    def test_leading_term_at_zero(self):
        """Test '1 + 0.5*t^0.3' at zero is the constant 1."""
        from src.core.profiles import End, asymptotic_power, parse

        law = asymptotic_power(parse("1 + 0.5*t^0.3"), End.AT_ZERO)
        assert (law.c, law.a) == (1.0, 0.0)

    def test_exp_is_not_a_power_law(self):
        """Test exp(t) yields no asymptote."""
        from src.core.profiles import End, asymptotic_power, parse

        assert asymptotic_power(parse("exp(t)"), End.AT_INFINITY) is None

    def test_quotient_of_power_laws(self):
        """Test leading terms divide through a quotient."""
        from src.core.profiles import End, asymptotic_power, parse

        law = asymptotic_power(parse("t^3 / (1 + t)"), End.AT_INFINITY)
        assert law.c == pytest.approx(1.0)
        assert law.a == pytest.approx(2.0)

    @pytest.mark.parametrize("source", ["3*t^2 + t", "1 + 0.5*t^0.3", "t^3 / (1 + t)", "sqrt(4*t^2 + 1)", "(t + 1)^2"])
    def test_asymptote_is_sound(self, source):
        """Test eval(p, t) / (c t^a) approaches 1 along t = 10^k."""
        from src.core.profiles import Profile

        profile = Profile(source)
        law = profile.asymptote
        assert law is not None
        ratios = [profile.value(10.0**k) / law(10.0**k) for k in range(3, 8)]
        assert abs(ratios[-1] - 1.0) < 0.05
        assert abs(ratios[-1] - 1.0) <= abs(ratios[0] - 1.0) + 1e-12


class TestProfileEvaluation:
    """Test suite for guarded profile evaluation."""

    @pytest.mark.parametrize("source,t,expected", [("t^1", 2.0, 2.0), ("1 + 0.5*t^0.3", 0.0, 1.0), ("t^2", 3.0, 9.0)])
    def test_values(self, source, t, expected):
        """Test point evaluations."""
        from src.core.profiles import Profile

        assert Profile(source).value(t) == pytest.approx(expected)

    def test_vectorized_constant_broadcasts(self):
        """Test a constant profile returns an array shaped like its input."""
        from src.core.profiles import Profile

        out = Profile("3").value(np.array([1.0, 2.0, 3.0]))
        assert out.shape == (3,)
        assert np.all(out == 3.0)

    def test_log_of_zero_is_a_domain_error(self):
        """Test log(0) is reported rather than returning -inf."""
        from src.core.errors import ProfileDomainError
        from src.core.profiles import Profile

        with pytest.raises(ProfileDomainError):
            Profile("log(t)").value(0.0)

    def test_overflow_is_reported(self):
        """Test exp(1000) raises instead of saturating."""
        from src.core.errors import ProfileOverflowError
        from src.core.profiles import Profile

        with pytest.raises(ProfileOverflowError):
            Profile("exp(t)").value(1000.0)

    def test_monomial_detection(self):
        """Test monomial extraction and the derived exponent p."""
        from src.core.profiles import Profile, product_spec

        assert Profile("2*t^3").monomial.a == 3.0
        assert Profile("t + 1").monomial is None
        assert product_spec("t^2", "t^2").p == pytest.approx(3.0)
        assert product_spec("t + t^2", "t^2").p is None


class TestProblemSpec:
    """Test suite for ProblemSpec and structural constants."""

    def test_constants_out_of_range(self):
        """Test declared ranges are enforced."""
        from src.core.profiles import StructuralConstants

        with pytest.raises(ValueError):
            StructuralConstants(C=0.5)
        with pytest.raises(ValueError):
            StructuralConstants(mu=1.0)
        with pytest.raises(ValueError):
            StructuralConstants(theta=2.0)
        with pytest.raises(ValueError):
            StructuralConstants(D=math.inf)

    def test_require_reports_missing(self):
        """Test require names every absent constant."""
        from src.core.errors import MissingConstantError
        from src.core.profiles import StructuralConstants

        constants = StructuralConstants(tau=1.0)
        assert constants.require("tau") == (1.0,)
        with pytest.raises(MissingConstantError, match="D, Lambda"):
            constants.require("tau", "D", "Lambda")

    def test_difference_form_has_unit_gradient_factor(self):
        """Test the difference form exposes h, g and l = 1."""
        from src.core.profiles import difference_spec

        spec = difference_spec("t", "t^2", "exp(-t)", "t^2")
        assert spec.is_difference
        assert spec.l.value(5.0) == 1.0
        assert spec.h.source == "exp(-t)"

    def test_to_dict(self):
        """Test serialization keeps profile sources and declared constants only."""
        from src.core.profiles import product_spec

        data = product_spec("t", "t^2", "1", m=2, tau=0.0, D=1.0).to_dict()
        assert data == {
            "geometry": {"kind": "heisenberg", "m": 2},
            "phi": "t",
            "rhs": {"form": "product", "f": "t^2", "l": "1"},
            "constants": {"tau": 0.0, "D": 1.0},
        }
