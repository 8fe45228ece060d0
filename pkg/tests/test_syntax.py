import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gen
from grothpres import model, oracle, syntax
from grothpres.syntax import (
    Atom,
    Cong,
    LinearTerm,
    ParseError,
    cong0,
    conj,
    disj,
    eq0,
    format_formula,
    le0,
    negate_qf,
    normalize,
    parse,
)


spec0 = model.ModelSpec(0)


class TestLinearTerm:
    def test_construction_and_access(self):
        t = LinearTerm.var("x").scale(3) + LinearTerm.var("y").scale(-1).plus(7)
        assert t.coeff("x") == 3
        assert t.coeff("y") == -1
        assert t.coeff("z") == 0
        assert t.literal == 7
        assert set(t.names()) == {"x", "y"}

    def test_zero_coefficients_dropped(self):
        t = LinearTerm.var("x") - LinearTerm.var("x")
        assert not t.names()
        assert t == LinearTerm.const(0)

    def test_drop_and_subs(self):
        t = LinearTerm.of({"x": 2, "y": 5}, 1)
        assert t.drop("y") == LinearTerm.of({"x": 2}, 1)
        s = t.subs("y", LinearTerm.var("x").plus(-1))
        assert s == LinearTerm.of({"x": 7}, -4)

    def test_rename_merges(self):
        t = LinearTerm.of({"x": 2, "y": 5}, 0)
        assert t.rename({"y": "x"}) == LinearTerm.of({"x": 7}, 0)

    @given(
        st.integers(-9, 9),
        st.integers(-9, 9),
        st.integers(-9, 9),
        st.integers(-9, 9),
    )
    def test_subs_matches_evaluation(self, a, b, x, y):
        t = LinearTerm.of({"x": a, "y": b}, 3)
        replacement = LinearTerm.var("y").scale(2).plus(-5)
        s = t.subs("x", replacement)
        env = {"x": 2 * y - 5, "y": y}
        direct = model.term_value(t, env, spec0)
        substituted = model.term_value(s, {"y": y}, spec0)
        assert direct == substituted


class TestParser:
    def test_precedence(self):
        f = parse("x = 1 | y = 2 & z = 3 -> w = 4")
        assert isinstance(f, syntax.Implies)
        assert isinstance(f.lhs, syntax.Or)

    def test_negation_binds_tight(self):
        f = parse("!x = 1 & y = 2")
        assert isinstance(f, syntax.And)
        assert isinstance(f.args[0], syntax.Not)

    def test_quantifiers(self):
        f = parse("E x. A y. x <= y")
        assert isinstance(f, syntax.Exists)
        assert isinstance(f.body, syntax.Forall)
        assert f.body.body == Atom("<=", LinearTerm.var("x"), LinearTerm.var("y"))

    def test_congruence(self):
        f = parse("2*x - 1 % 6 = 3")
        assert f == Cong(6, LinearTerm.of({"x": 2}, -1), 3)

    def test_arithmetic_sugar(self):
        assert parse("-x + 2*3 <= y") == Atom(
            "<=", LinearTerm.of({"x": -1}, 6), LinearTerm.var("y")
        )

    def test_keywords(self):
        assert parse("true") == syntax.TrueF()
        assert parse("false") == syntax.FalseF()

    @pytest.mark.parametrize(
        "bad",
        [
            "x <",
            "E E. E = 1",
            "x % 0 = 1",
            "x %% 2 = 0",
            "(x = 1",
            "x = 1 &",
            "E x x = 1",
            "",
        ],
    )
    def test_parse_errors(self, bad):
        with pytest.raises(ParseError):
            parse(bad)

    def test_round_trip_fixed(self):
        texts = [
            "x = 1 & y = 2 & z = 3",
            "(x <= 1 | y % 2 = 1) & !x = y -> (E w. w > x)",
            "A u. (u >= 0 -> (E v. u = 2*v | u = 2*v + 1))",
            "true | false",
        ]
        for s in texts:
            f = parse(s)
            assert parse(format_formula(f)) == f

    def test_round_trip_random(self):
        rng = random.Random(5)
        for _ in range(150):
            f0 = gen.rand_qf(rng, ["x", "y", "z"])
            f1 = parse(format_formula(f0))
            assert parse(format_formula(f1)) == f1
            for _ in range(10):
                pt = [rng.randint(-12, 12) for _ in range(3)]
                env = gen.int_env(["x", "y", "z"], pt)
                assert model.eval_qf(f0, env, spec0) == model.eval_qf(f1, env, spec0)


class TestFactories:
    def test_constant_folding(self):
        assert le0(LinearTerm.const(-3)) == syntax.TrueF()
        assert le0(LinearTerm.const(3)) == syntax.FalseF()
        assert eq0(LinearTerm.const(0)) == syntax.TrueF()

    def test_eq0_sign_normalized(self):
        t = LinearTerm.var("x").scale(-2).plus(4)
        assert eq0(t) == eq0(t.scale(-1))

    def test_cong0_reduction(self):
        x = LinearTerm.var("x")
        assert cong0(1, x) == syntax.TrueF()
        # unsolvable congruence folds to false
        assert cong0(4, x.scale(6).plus(9)) == syntax.FalseF()
        # common factor with the modulus divides through
        assert cong0(6, x.scale(2).plus(4)) == Cong(3, x.plus(2), 0)

    def test_conj_disj_folding(self):
        a = parse("x = 1")
        assert conj([a, syntax.TrueF()]) == a
        assert conj([a, syntax.FalseF()]) == syntax.FalseF()
        assert disj([a, syntax.TrueF()]) == syntax.TrueF()
        assert disj([syntax.FalseF(), syntax.FalseF()]) == syntax.FalseF()
        flat = conj([a, parse("y = 2 & z = 3")])
        assert isinstance(flat, syntax.And) and len(flat.args) == 3

    @given(st.integers(-30, 30), st.integers(1, 9), st.integers(-8, 8))
    def test_cong0_semantics_preserved(self, x, m, lit):
        t = LinearTerm.var("x").scale(2).plus(lit)
        f = cong0(m, t)
        env = {"x": x}
        want = (2 * x + lit) % m == 0
        assert model.eval_qf(f, env, spec0) == want


class TestNegateQF:
    def test_no_negations_left(self):
        rng = random.Random(9)

        def clean(f):
            if isinstance(f, (syntax.And, syntax.Or)):
                return all(clean(a) for a in f.args)
            return not isinstance(f, (syntax.Not, syntax.Implies))

        for _ in range(120):
            f = normalize(gen.rand_qf(rng, ["x", "y"]))
            if not syntax.is_qf(f):
                continue
            g = negate_qf(f)
            assert clean(g)
            for _ in range(8):
                pt = [rng.randint(-10, 10) for _ in range(2)]
                env = gen.int_env(["x", "y"], pt)
                assert model.eval_qf(g, env, spec0) != model.eval_qf(f, env, spec0)


class TestNormalize:
    @staticmethod
    def _shape_ok(f):
        if isinstance(f, (syntax.TrueF, syntax.FalseF, Atom, Cong)):
            return True
        if isinstance(f, (syntax.And, syntax.Or)):
            return all(TestNormalize._shape_ok(a) for a in f.args)
        if isinstance(f, syntax.Not):
            return isinstance(f.body, syntax.Exists) and TestNormalize._shape_ok(
                f.body
            )
        if isinstance(f, syntax.Exists):
            return TestNormalize._shape_ok(f.body)
        return False

    @staticmethod
    def _bound(f, acc):
        if isinstance(f, (syntax.Exists, syntax.Forall)):
            acc.append(f.var)
            TestNormalize._bound(f.body, acc)
        elif isinstance(f, (syntax.And, syntax.Or)):
            for a in f.args:
                TestNormalize._bound(a, acc)
        elif isinstance(f, (syntax.Not,)):
            TestNormalize._bound(f.body, acc)
        elif isinstance(f, syntax.Implies):
            TestNormalize._bound(f.lhs, acc)
            TestNormalize._bound(f.rhs, acc)
        return acc

    def test_shape_and_renaming(self):
        f = parse("A y. (x < y | (E z. (z = y & !(z % 3 = 1))))")
        n = normalize(f)
        assert self._shape_ok(n)
        bound = self._bound(n, [])
        assert len(bound) == len(set(bound))
        assert "x" in syntax.free_names(n)

    def test_semantics_preserved(self):
        rng = random.Random(23)
        cases = [
            "E w. (x = 2*w & w <= y)",
            "A w. (0 <= w & w <= 5 -> x + w != y)",
            "!(E w. (x = 3*w | w = y + 1 & w % 2 = 0))",
            "E w. (A v. (v >= w -> v >= x))",
        ]
        for text in cases:
            f = parse(text)
            n = normalize(f)
            assert self._shape_ok(n)
            of = oracle.Oracle(f, ("x", "y"), spec0)
            on = oracle.Oracle(n, ("x", "y"), spec0)
            for _ in range(40):
                pt = {"x": rng.randint(-12, 12), "y": rng.randint(-12, 12)}
                assert of.eval(pt) == on.eval(pt), (text, pt)

    def test_reserved_names_avoided(self):
        f = parse("E q1. q1 = x")
        n = normalize(f, reserved=("x",))
        bound = self._bound(n, [])
        assert "x" not in bound


class TestSubst:
    @given(st.integers(-15, 15), st.integers(-15, 15))
    def test_eval_commutes(self, x, y):
        f = parse("2*x + y <= 7 & x % 3 = 1")
        t = LinearTerm.var("y").scale(-2).plus(1)
        g = syntax.subst(f, "x", t)
        env = {"y": y}
        env_full = {"x": -2 * y + 1, "y": y}
        assert model.eval_qf(g, env, spec0) == model.eval_qf(f, env_full, spec0)

    def test_quantified_formulas_rejected(self):
        # substitution is a quantifier-free operation; binders must be
        # renamed apart (normalize) before it ever applies
        f = parse("E y. y = x")
        with pytest.raises(TypeError):
            syntax.subst(f, "x", LinearTerm.var("y").plus(1))


class TestNames:
    def test_free_and_all(self):
        f = parse("E w. (w = x & (A v. v >= y))")
        assert syntax.free_names(f) == frozenset({"x", "y"})
        assert syntax.all_names(f) == frozenset({"x", "y", "w", "v"})

    def test_is_qf(self):
        assert syntax.is_qf(parse("x = 1 & !(y < 2)"))
        assert not syntax.is_qf(parse("E x. x = 1"))
        assert not syntax.is_qf(parse("!(E x. x = 1)"))
