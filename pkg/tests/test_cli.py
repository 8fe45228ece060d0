"""End-to-end command-line behavior: verbs, exit codes, JSON schemas."""

import json

import pytest

from grothpres import model
from grothpres.cli import main
from grothpres.syntax import parse


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


class TestEquiv:
    def test_ray_and_shifted_ray(self, capsys):
        code, out, err = run(capsys, "equiv", "--model", "k=0", "x >= 0", "x >= 1")
        assert code == 0
        assert out.strip() == "Equivalent: inf = inf"

    def test_not_equivalent_exit_code(self, capsys):
        code, out, _ = run(capsys, "equiv", "0 <= x & x < 3", "0 <= x & x < 4")
        assert code == 1
        assert out.startswith("NotEquivalent: 3 != 4")

    def test_json_classes(self, capsys):
        code, out, _ = run(
            capsys,
            "equiv",
            "--json",
            "--model",
            "k=1",
            "--const",
            "a=[1;0]",
            "x1 >= 0 & 0 <= x2 & x2 < a",
            "x1 >= 0 & 0 <= x2 & x2 < 2*a",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["equivalent"] is True
        assert doc["left"] == {"k": 1, "mdim": [[2, 1]], "bounded": []}
        assert doc["left"] == doc["right"]


class TestCard:
    def test_symbolic_interval(self, capsys):
        code, out, _ = run(
            capsys, "card", "--model", "k=1", "--const", "a=[1;0]", "0<=x & x<a"
        )
        assert code == 0
        assert out.strip() == "b1"

    def test_unbounded_is_an_input_error(self, capsys):
        code, out, err = run(capsys, "card", "--model", "k=0", "x>=0")
        assert code == 3
        assert out == ""
        assert err.startswith("error:") and "unbounded" in err

    def test_json_polynomial(self, capsys):
        code, out, _ = run(
            capsys,
            "card",
            "--json",
            "--model",
            "k=1",
            "--const",
            "a=[1;0]",
            "0 <= x1 & x1 < x2 & x2 < a",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc == {
            "k": 1,
            "poly": [
                {"coeff": "1/2", "exps": [2]},
                {"coeff": "-1/2", "exps": [1]},
            ],
        }

    def test_integer_constants_may_be_bare(self, capsys):
        code, out, _ = run(capsys, "card", "--const", "c=7", "0 <= x & x < c")
        assert code == 0
        assert out.strip() == "7"


class TestClassAndDim:
    def test_finite_class(self, capsys):
        code, out, _ = run(capsys, "class", "x % 2 = 0 & 0 <= x & x < 10")
        assert code == 0
        assert out.strip() == "5"

    def test_ray_class_json(self, capsys):
        code, out, _ = run(capsys, "class", "--json", "x >= 0")
        assert code == 0
        assert json.loads(out) == {"k": 0, "mdim": [[1]], "bounded": []}

    def test_dim_profiles_plain(self, capsys):
        code, out, _ = run(
            capsys,
            "dim",
            "--model",
            "k=1",
            "--const",
            "a=[1;0]",
            "0 <= x & x < a & y >= 0",
        )
        assert code == 0
        assert out.strip() == "2,1"

    def test_dim_of_empty_set(self, capsys):
        code, out, _ = run(capsys, "dim", "x < x")
        assert code == 0
        assert out.strip() == "bounded"

    def test_dim_json(self, capsys):
        code, out, _ = run(capsys, "dim", "--json", "0 <= x & x < y")
        assert json.loads(out) == {"k": 0, "profiles": [[2]]}


class TestCount:
    def test_pieces_cover_the_parameter(self, capsys):
        code, out, _ = run(
            capsys, "count", "--params", "y", "0 <= x & x < 3*y & x % 3 = 1"
        )
        assert code == 0
        assert "when" in out

    def test_json_shape_and_values(self, capsys):
        code, out, _ = run(
            capsys, "count", "--json", "--params", "y", "0 <= x & x < y"
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["params"] == ["y"]
        assert {p["count"] for p in doc["pieces"]} == {"y", "0"}
        for p in doc["pieces"]:
            assert set(p) == {"guard", "count"}
            parse(p["guard"])

    def test_infinite_fibers_render_as_inf(self, capsys):
        code, out, _ = run(capsys, "count", "--json", "--params", "y", "x >= y")
        assert code == 0
        doc = json.loads(out)
        assert [p["count"] for p in doc["pieces"]] == ["inf"]

    def test_missing_params_is_a_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["count", "0 <= x & x < y"])
        assert exc.value.code == 2


class TestFamEquiv:
    def test_equivalent_family(self, capsys):
        code, out, _ = run(
            capsys,
            "famequiv",
            "--params",
            "y",
            "0 <= x & x < 2*y",
            "0 - y <= x & x < y",
        )
        assert code == 0
        assert out.strip() == "Equivalent"

    def test_not_equivalent_family(self, capsys):
        code, out, _ = run(
            capsys, "famequiv", "--params", "y", "0 <= x & x < y", "0 <= x & x < y + 1"
        )
        assert code == 1
        assert out.strip() == "NotEquivalent"

    def test_domain_restricts_both_sides(self, capsys):
        code, out, _ = run(
            capsys,
            "famequiv",
            "--params",
            "y",
            "--domain",
            "y = 3",
            "0 <= x & x < 2*y",
            "0 <= x & x < y + 3",
        )
        assert code == 0

    def test_unbounded_fiber_is_an_input_error(self, capsys):
        code, _, err = run(capsys, "famequiv", "--params", "y", "x >= 0", "x = y")
        assert code == 3
        assert "error:" in err


class TestCellsVerb:
    def test_plain_listing(self, capsys):
        code, out, _ = run(capsys, "cells", "0 <= x & x < 10 & x % 3 = 1")
        assert code == 0
        assert out.strip() == "0 <= x < 10, x % 3 = 1"

    def test_json_schema(self, capsys):
        code, out, _ = run(capsys, "cells", "--json", "0 <= x & x < 10 & x % 3 = 1")
        assert code == 0
        doc = json.loads(out)
        assert doc == [
            [
                {
                    "coord": 0,
                    "kind": "interval",
                    "lo": "0",
                    "hi": "10",
                    "div": 1,
                    "mod": 3,
                    "res": 1,
                }
            ]
        ]

    def test_empty_set(self, capsys):
        code, out, _ = run(capsys, "cells", "x < 0 & x > 0")
        assert code == 0
        assert out.strip() == "empty set"

    def test_point_cells(self, capsys):
        code, out, _ = run(capsys, "cells", "--json", "2*x = y & 0 <= y & y < 4")
        assert code == 0
        doc = json.loads(out)
        kinds = {comp["kind"] for row in doc for comp in row}
        assert kinds == {"interval", "point"}


class TestQEVerb:
    def test_eliminates_quantifiers(self, capsys):
        code, out, _ = run(capsys, "qe", "E y. (x = 2*y & y >= 0)")
        assert code == 0
        g = parse(out.strip())
        spec0 = model.ModelSpec(0)
        for x in range(-8, 9):
            want = x >= 0 and x % 2 == 0
            env = {"x": model.from_int(x, 0)}
            assert model.eval_qf(g, env, spec0) == want

    def test_parse_error_is_an_input_error(self, capsys):
        code, _, err = run(capsys, "qe", "x >=")
        assert code == 3
        assert err.startswith("error:")


class TestEatsVerb:
    def test_ray_eats_box(self, capsys):
        code, out, _ = run(
            capsys,
            "eats",
            "--model",
            "k=1",
            "--const",
            "a=[1;0]",
            "x >= 0",
            "0 <= x & x < a",
        )
        assert code == 0
        assert out.strip() == "Eats: yes"

    def test_box_does_not_eat_ray(self, capsys):
        code, out, _ = run(
            capsys,
            "eats",
            "--model",
            "k=1",
            "--const",
            "a=[1;0]",
            "0 <= x & x < a",
            "x >= 0",
        )
        assert code == 0
        assert out.strip() == "Eats: no"


class TestPlumbing:
    def test_bad_model_string(self, capsys):
        code, _, err = run(capsys, "class", "--model", "q=1", "x = 0")
        assert code == 3
        assert "error:" in err

    def test_bad_const_string(self, capsys):
        code, _, err = run(capsys, "class", "--const", "a", "x = 0")
        assert code == 3
        assert "error:" in err

    def test_unknown_verb_is_a_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate", "x = 0"])
        assert exc.value.code == 2

    def test_selftest_passes(self, capsys):
        code, out, _ = run(capsys, "selftest")
        assert code == 0
        lines = [l for l in out.splitlines() if l.strip()]
        assert len(lines) >= 5
        assert all(l.startswith("PASS") for l in lines)

    def test_selftest_json(self, capsys):
        code, out, _ = run(capsys, "selftest", "--json")
        assert code == 0
        rows = json.loads(out)
        assert all(row["pass"] is True for row in rows)

    def test_repeat_runs_are_deterministic(self, capsys):
        argv = ("count", "--json", "--params", "y", "0 <= x & x < y | x = 8")
        _, out1, _ = run(capsys, *argv)
        _, out2, _ = run(capsys, *argv)
        assert out1 == out2
