"""Command-line front-end.

Verbs: qe, cells, class, card, count, equiv, famequiv, dim, eats,
selftest.  Exit codes: 0 success (or Equivalent), 1 NotEquivalent,
2 usage error, 3 input error.  Set variables are ordered by sorted
name; named constants come from repeated --const flags.
"""

from __future__ import annotations

import argparse
import json
import re
import sys

from . import cells, classify, model, oracle, qe, semiring, syntax
from .cells import InfiniteSetError, NotAFunction
from .classify import INF, UnboundedFiberError, UnboundedSetError
from .syntax import ParseError, format_formula, parse


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", default="k=0", metavar="k=INT")
    common.add_argument(
        "--const",
        action="append",
        default=[],
        metavar="NAME=[q_k,...,q_1;z]",
        help="named constant; k=0 constants may be bare integers",
    )
    common.add_argument("--json", action="store_true")
    common.add_argument("--domain", metavar="FORMULA", help="conjoined restriction")

    fam = argparse.ArgumentParser(add_help=False)
    fam.add_argument("--params", required=True, metavar="y1,y2")

    p = argparse.ArgumentParser(prog="groth-pres", description=__doc__)
    sub = p.add_subparsers(dest="verb", required=True)
    for verb, nforms, parents, doc in [
        ("qe", 1, [common], "eliminate quantifiers"),
        ("cells", 1, [common], "triangular cell decomposition"),
        ("class", 1, [common], "canonical class"),
        ("card", 1, [common], "hyper-cardinality of a bounded set"),
        ("count", 1, [common, fam], "piecewise parametric count"),
        ("equiv", 2, [common], "decide definable bijection"),
        ("famequiv", 2, [common, fam], "decide uniform family bijection"),
        ("dim", 1, [common], "dimension profiles"),
        ("eats", 2, [common], "absorption between classes"),
        ("selftest", 0, [common], "run the built-in oracle suite"),
    ]:
        sp = sub.add_parser(verb, parents=parents, help=doc)
        if nforms:
            sp.add_argument("formulas", nargs=nforms, metavar="FORMULA")
    return p


def _parse_model(text: str) -> int:
    m = re.fullmatch(r"k=(\d+)", text.strip())
    if not m:
        raise ValueError(f"bad --model {text!r}, expected k=INT")
    return int(m.group(1))


def _parse_const(text: str, k: int):
    name, eq, val = text.partition("=")
    name = name.strip()
    if not eq or not name.isidentifier():
        raise ValueError(f"bad --const {text!r}")
    val = val.strip()
    if val.startswith("["):
        return name, model.parse_element(val, k)
    return name, model.from_int(int(val), k)


def _spec_of(args) -> model.ModelSpec:
    k = _parse_model(args.model)
    consts = dict(_parse_const(c, k) for c in args.const)
    return model.ModelSpec(k, consts)


def _formulas_of(args):
    out = [parse(t) for t in getattr(args, "formulas", [])]
    if args.domain:
        dom = parse(args.domain)
        out = [syntax.conj([f, dom]) for f in out]
    return out


def _set_vars(f, spec, exclude=()):
    names = set(syntax.free_names(f)) - set(spec.constants) - set(exclude)
    return tuple(sorted(names))


def _params_of(args):
    names = tuple(n.strip() for n in args.params.split(",") if n.strip())
    if not names:
        raise ValueError("empty --params")
    return names


def _poly_monomials(p: semiring.Poly, k: int):
    out = []
    ordered = sorted(p.terms, key=lambda t: (-sum(e for _, e in t[0]), t[0]))
    for mono, c in ordered:
        d = dict(mono)
        exps = [d.get(semiring.embed_symbol(j), 0) for j in range(1, k + 1)]
        out.append({"coeff": str(c), "exps": exps})
    return out


def _class_json(cls: semiring.ClassNF):
    return {
        "k": cls.k,
        "mdim": [list(prof) for prof in sorted(cls.mdim, reverse=True)],
        "bounded": _poly_monomials(cls.bounded, cls.k),
    }


def _class_plain(cls: semiring.ClassNF) -> str:
    return str(cls).replace("INF", "inf")


def _emit(args, obj_json, plain: str) -> None:
    if args.json:
        print(json.dumps(obj_json))
    else:
        print(plain)


def _comp_json(i: int, comp):
    if isinstance(comp, cells.Point):
        return {
            "coord": i,
            "kind": "point",
            "term": str(comp.term),
            "div": comp.div,
        }
    return {
        "coord": i,
        "kind": "interval",
        "lo": None if comp.lo is None else str(comp.lo),
        "hi": None if comp.hi is None else str(comp.hi),
        "div": comp.div,
        "mod": comp.mod,
        "res": comp.res,
    }


def _comp_plain(var: str, comp) -> str:
    if isinstance(comp, cells.Point):
        t = f"({comp.term})/{comp.div}" if comp.div > 1 else str(comp.term)
        return f"{var} = {t}"
    body = f"{comp.div}*{var}" if comp.div > 1 else var
    lo = "-inf" if comp.lo is None else str(comp.lo)
    hi = "inf" if comp.hi is None else str(comp.hi)
    s = f"{lo} <= {body} < {hi}"
    if comp.mod > 1:
        s += f", {var} % {comp.mod} = {comp.res}"
    return s


def _run_cells(args, spec):
    (f,) = _formulas_of(args)
    vars = _set_vars(f, spec)
    decomp = cells.decompose(f, vars, spec)
    if args.json:
        out = []
        for cell in decomp:
            row = []
            if not isinstance(cell.guard, syntax.TrueF):
                row.append({"kind": "guard", "formula": format_formula(cell.guard)})
            row += [_comp_json(i, c) for i, c in enumerate(cell.comps)]
            out.append(row)
        print(json.dumps(out))
        return 0
    if not decomp:
        print("empty set")
        return 0
    for cell in decomp:
        parts = [_comp_plain(v, c) for v, c in zip(cell.vars, cell.comps)]
        line = "; ".join(parts) if parts else "point (no coordinates)"
        if not isinstance(cell.guard, syntax.TrueF):
            line = f"when {format_formula(cell.guard)}: {line}"
        print(line)
    return 0


def _count_value_json(val):
    return "inf" if val is INF else str(val)


def _run_count(args, spec):
    params = _params_of(args)
    (f,) = _formulas_of(args)
    xvars = _set_vars(f, spec, exclude=params)
    pieces = classify.count_family(f, xvars, params, spec)
    if args.json:
        out = {
            "params": list(params),
            "pieces": [
                {"guard": format_formula(g), "count": _count_value_json(v)}
                for g, v in pieces
            ],
        }
        print(json.dumps(out))
        return 0
    for g, v in pieces:
        val = "inf" if v is INF else str(v)
        print(f"when {format_formula(g)}: {val}")
    return 0


def _run_equiv(args, spec):
    f1, f2 = _formulas_of(args)
    r = classify.decide_equiv(f1, _set_vars(f1, spec), f2, _set_vars(f2, spec), spec)
    if args.json:
        print(
            json.dumps(
                {
                    "equivalent": r.equivalent,
                    "left": _class_json(r.left),
                    "right": _class_json(r.right),
                }
            )
        )
    elif r.equivalent:
        print(f"Equivalent: {_class_plain(r.left)} = {_class_plain(r.right)}")
    else:
        print(f"NotEquivalent: {_class_plain(r.left)} != {_class_plain(r.right)}")
    return 0 if r.equivalent else 1


def _run_famequiv(args, spec):
    params = _params_of(args)
    f1, f2 = _formulas_of(args)
    names = set(syntax.free_names(f1)) | set(syntax.free_names(f2))
    xvars = tuple(sorted(names - set(params) - set(spec.constants)))
    same = classify.family_equiv(f1, f2, xvars, params, spec)
    _emit(args, {"equivalent": same}, "Equivalent" if same else "NotEquivalent")
    return 0 if same else 1


def _run_eats(args, spec):
    f1, f2 = _formulas_of(args)
    c1 = classify.grothendieck_class(f1, _set_vars(f1, spec), spec)
    c2 = classify.grothendieck_class(f2, _set_vars(f2, spec), spec)
    yes = semiring.eats_rel(c1, c2)
    _emit(args, {"eats": yes}, f"Eats: {'yes' if yes else 'no'}")
    return 0


_SELFTEST_QF = [
    "x % 3 = 1 & 0 <= x & x < 10",
    "x + y <= 4 & x >= -2 & y > x",
    "2*x = 3*y | x = -y",
]

_SELFTEST_QE = [
    "E w. (x = 3*w & w >= 0)",
    "A w. (w >= 0 -> x <= w + 3)",
    "E w. (x = 2*w | x = 3*w)",
]


def _selftest_rows():
    spec0 = model.ModelSpec(0)
    rows = []

    def membership():
        for text in _SELFTEST_QF:
            f = parse(text)
            vs = tuple(sorted(syntax.free_names(f)))
            got = oracle.enumerate_box(f, 8, spec0, vs)
            want = set()
            import itertools

            for pt in itertools.product(range(-8, 9), repeat=len(vs)):
                env = {v: model.from_int(n, 0) for v, n in zip(vs, pt)}
                if model.eval_qf(f, env, spec0):
                    want.add(pt)
            if got != want:
                return False
        return True

    def counts():
        return (
            oracle.brute_count(parse("0 <= x & x < 7"), 16, spec0) == 7
            and oracle.brute_count(parse("0 <= x & x < y & y < 5"), 16, spec0) == 10
            and oracle.brute_count(parse("x >= 0"), 16, spec0) is oracle.UNBOUNDED
        )

    def growth():
        if oracle.growth_exponent(parse("x >= 0"), spec0) != 1:
            return False
        if oracle.growth_exponent(parse("0 <= x & x < y"), spec0) != 2:
            return False
        return oracle.growth_exponent(parse("-3 <= x & x <= 5"), spec0) == 0

    def qe_pointwise():
        for text in _SELFTEST_QE:
            f = parse(text)
            g = qe.qe(f)
            if not syntax.is_qf(g):
                return False
            o = oracle.Oracle(f, ("x",), spec0)
            for x in range(-20, 21):
                env = {"x": model.from_int(x, 0)}
                if model.eval_qf(g, env, spec0) != o.eval({"x": x}):
                    return False
        return True

    def class_count():
        for text in ["0 <= x & x < 7", "x % 2 = 0 & -4 <= x & x <= 10", "0 <= x & x <= y & y < 5"]:
            f = parse(text)
            vs = tuple(sorted(syntax.free_names(f)))
            n = oracle.brute_count(f, 32, spec0, vs)
            cls = classify.grothendieck_class(f, vs, spec0)
            if cls != semiring.class_const(n, 0):
                return False
        return True

    rows.append(("membership matches direct evaluation", membership))
    rows.append(("box counts match listings", counts))
    rows.append(("growth exponents", growth))
    rows.append(("quantifier elimination pointwise", qe_pointwise))
    rows.append(("classes of bounded sets count points", class_count))
    return rows


def _run_selftest(args):
    results = []
    for name, fn in _selftest_rows():
        try:
            ok = fn()
        except Exception:
            ok = False
        results.append((name, ok))
    if args.json:
        print(json.dumps([{"check": n, "pass": ok} for n, ok in results]))
    else:
        for name, ok in results:
            print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return 0 if all(ok for _, ok in results) else 1


def _dispatch(args) -> int:
    if args.verb == "selftest":
        return _run_selftest(args)
    spec = _spec_of(args)
    if args.verb == "qe":
        (f,) = _formulas_of(args)
        g = qe.qe(f, reserved=tuple(spec.constants))
        _emit(args, {"formula": format_formula(g)}, format_formula(g))
        return 0
    if args.verb == "cells":
        return _run_cells(args, spec)
    if args.verb == "class":
        (f,) = _formulas_of(args)
        cls = classify.grothendieck_class(f, _set_vars(f, spec), spec)
        _emit(args, _class_json(cls), _class_plain(cls))
        return 0
    if args.verb == "card":
        (f,) = _formulas_of(args)
        p = classify.hyper_card(f, _set_vars(f, spec), spec)
        _emit(
            args,
            {"k": spec.k, "poly": _poly_monomials(p, spec.k)},
            str(p),
        )
        return 0
    if args.verb == "dim":
        (f,) = _formulas_of(args)
        cls = classify.grothendieck_class(f, _set_vars(f, spec), spec)
        profs = classify.dim_profiles(cls)
        _emit(
            args,
            {"k": spec.k, "profiles": [list(p) for p in profs]},
            "\n".join(",".join(str(i) for i in p) for p in profs) or "bounded",
        )
        return 0
    if args.verb == "count":
        return _run_count(args, spec)
    if args.verb == "equiv":
        return _run_equiv(args, spec)
    if args.verb == "famequiv":
        return _run_famequiv(args, spec)
    if args.verb == "eats":
        return _run_eats(args, spec)
    raise AssertionError(args.verb)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except (
        ParseError,
        oracle.OracleError,
        UnboundedSetError,
        UnboundedFiberError,
        InfiniteSetError,
        NotAFunction,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
