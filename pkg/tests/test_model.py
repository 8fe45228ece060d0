from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grothpres import model, syntax
from grothpres.model import GroupElement, ModelSpec, from_int, one, unit_vector, zero


rationals = st.fractions(
    min_value=Fraction(-8), max_value=Fraction(8), max_denominator=4
)


def elements(k):
    return st.builds(
        GroupElement,
        st.tuples(*([rationals] * k)),
        st.integers(min_value=-50, max_value=50),
    )


any_element = st.integers(min_value=0, max_value=3).flatmap(elements)


def same_k_pairs(n):
    return st.integers(min_value=0, max_value=3).flatmap(
        lambda k: st.tuples(*([elements(k)] * n))
    )


class TestGroupElement:
    def test_basic_arithmetic(self):
        a = GroupElement((Fraction(1, 2), Fraction(-1)), 3)
        b = GroupElement((Fraction(1, 2), Fraction(2)), -1)
        assert a + b == GroupElement((Fraction(1), Fraction(1)), 2)
        assert a - b == GroupElement((Fraction(0), Fraction(-3)), 4)
        assert -a == GroupElement((Fraction(-1, 2), Fraction(1)), -3)
        assert a.scale(4) == GroupElement((Fraction(2), Fraction(-4)), 12)

    def test_lex_order_most_significant_first(self):
        small_rat = GroupElement((Fraction(0), Fraction(1, 1000)), -99)
        big_unit = GroupElement((Fraction(0), Fraction(0)), 99)
        assert big_unit < small_rat
        top = GroupElement((Fraction(1, 1000), Fraction(-50)), 0)
        assert small_rat < top

    def test_one_is_minimal_positive(self):
        # discreteness: nothing sits strictly between 0 and 1
        k = 2
        lo, hi = zero(k), one(k)
        for rats in [(0, 0), (0, 1), (1, 0), (0, Fraction(1, 2))]:
            for unit in range(-2, 3):
                e = GroupElement(tuple(Fraction(r) for r in rats), unit)
                assert not (lo < e < hi)

    @given(same_k_pairs(2))
    def test_order_total_antisymmetric(self, pair):
        a, b = pair
        assert (a < b) + (b < a) + (a == b) == 1
        assert (a <= b) == (a < b or a == b)
        assert (a > b) == (b < a)

    @given(same_k_pairs(3))
    def test_order_translation_invariant(self, triple):
        a, b, c = triple
        assert (a < b) == (a + c < b + c)

    def test_mixed_arity_rejected(self):
        with pytest.raises(ValueError):
            zero(1) + zero(2)
        with pytest.raises(ValueError):
            zero(0) < zero(1)

    def test_floor_div_euclidean_example(self):
        q, r = from_int(-7, 0).floor_div(3)
        assert (q, r) == (from_int(-3, 0), 2)

    @given(any_element, st.integers(min_value=1, max_value=12))
    def test_floor_div_reconstructs(self, a, m):
        q, r = a.floor_div(m)
        assert 0 <= r < m
        assert q.scale(m) + from_int(r, a.k) == a

    @given(any_element, st.integers(min_value=1, max_value=12))
    def test_residue_is_unit_residue(self, a, m):
        assert a.residue(m) == a.unit % m

    def test_sig(self):
        assert zero(2).sig() == -1
        assert one(2).sig() == 0
        assert unit_vector(1, 2).sig() == 1
        assert unit_vector(2, 2).sig() == 2
        assert GroupElement((Fraction(0), Fraction(3)), 7).sig() == 1

    def test_bad_modulus(self):
        with pytest.raises(ValueError):
            one(0).floor_div(0)
        with pytest.raises(ValueError):
            one(0).residue(-2)


class TestLiterals:
    def test_round_trip(self):
        for text, k in [("[1;0]", 1), ("[2,-1/3;5]", 2), ("[0,0;0]", 2)]:
            e = model.parse_element(text, k)
            assert model.parse_element(model.format_element(e), k) == e

    def test_k0_bare_integer(self):
        assert model.parse_element("-12", 0) == from_int(-12, 0)
        assert model.format_element(from_int(3, 0)) == "3"

    def test_arity_mismatch(self):
        with pytest.raises(ValueError):
            model.parse_element("[1;0]", 2)
        with pytest.raises(ValueError):
            model.parse_element("[1,2;0]", 1)
        with pytest.raises(ValueError):
            model.parse_element("1,2;0", 1)

    @given(elements(2))
    def test_format_parse_identity(self, e):
        assert model.parse_element(model.format_element(e), 2) == e


class TestModelSpec:
    def test_constant_coercion(self):
        spec = ModelSpec(1, {"a": "[1;0]", "n": 4})
        assert spec.constant("a") == unit_vector(1, 1)
        assert spec.constant("n") == from_int(4, 1)

    def test_unknown_constant(self):
        with pytest.raises(KeyError):
            ModelSpec(0).constant("a")

    def test_arity_checked(self):
        with pytest.raises(ValueError):
            ModelSpec(2, {"a": "[1;0]"})
        with pytest.raises(ValueError):
            ModelSpec(-1)


class TestEvaluation:
    def test_term_value_uses_constants(self):
        spec = ModelSpec(1, {"a": "[1;0]"})
        t = syntax.LinearTerm.var("x").scale(2) + syntax.LinearTerm.var("a").plus(3)
        got = model.term_value(t, {"x": from_int(5, 1)}, spec)
        assert got == unit_vector(1, 1) + from_int(13, 1)

    def test_term_value_coerces_ints(self):
        spec = ModelSpec(0)
        t = syntax.LinearTerm.var("x").scale(-3).plus(1)
        assert model.term_value(t, {"x": 4}, spec) == from_int(-11, 0)

    @given(
        st.integers(min_value=-20, max_value=20),
        st.integers(min_value=-20, max_value=20),
    )
    def test_term_value_linear(self, x, y):
        spec = ModelSpec(0)
        point = {"x": from_int(x, 0), "y": from_int(y, 0)}
        t1 = syntax.LinearTerm.var("x").scale(3).plus(-2)
        t2 = syntax.LinearTerm.var("y").scale(-1).plus(7)
        lhs = model.term_value(t1 + t2, point, spec)
        assert lhs == model.term_value(t1, point, spec) + model.term_value(
            t2, point, spec
        )

    def test_eval_qf_comparisons(self):
        spec = ModelSpec(0)
        f = syntax.parse("2*x + 1 <= y & x % 3 = 2 & x != y")
        assert model.eval_qf(f, {"x": 5, "y": 11}, spec)
        assert not model.eval_qf(f, {"x": 5, "y": 10}, spec)
        assert not model.eval_qf(f, {"x": 6, "y": 20}, spec)

    def test_eval_qf_congruence_on_elements(self):
        # congruence only sees the integer coordinate
        spec = ModelSpec(1)
        f = syntax.parse("x % 4 = 1")
        e = GroupElement((Fraction(7, 2),), 5)
        assert model.eval_qf(f, {"x": e}, spec)

    def test_eval_qf_rejects_quantifiers(self):
        spec = ModelSpec(0)
        with pytest.raises(ValueError):
            model.eval_qf(syntax.parse("E x. x = 0"), {}, spec)

    def test_eval_qf_connectives(self):
        spec = ModelSpec(0)
        f = syntax.parse("(x > 0 -> y > 0) & !(x = y) | false")
        assert model.eval_qf(f, {"x": -1, "y": -5}, spec)
        assert not model.eval_qf(f, {"x": 1, "y": -5}, spec)
