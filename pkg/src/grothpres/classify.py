"""Counting, canonical classes, and bijection decisions.

Everything here runs over the branch structure produced by
cells.split_var.  Counting sums a polynomial weight over one coordinate
at a time; class computation additionally carries a list of symbolic
box factors [0, A) so that unbounded directions can absorb whatever
keeps growing with them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, gcd

from . import cells, model, qe, semiring, syntax
from .cells import (
    Interval,
    Point,
    atoms_of,
    disjoint_dnf,
    first_num,
    rho_splits,
    split_var,
    up_orientations,
)
from .semiring import ClassNF, Poly, sum_range
from .syntax import (
    TRUE,
    And,
    Atom,
    Cong,
    FalseF,
    LinearTerm,
    Not,
    Or,
    TrueF,
    cong0,
    conj,
    eq0,
    le0,
    negate_qf,
)


class UnboundedSetError(ValueError):
    """Raised when a finite measure is requested for an unbounded set."""


class UnboundedFiberError(ValueError):
    """Raised when a family decision needs a fiber that is unbounded."""


class _Infinite:
    __slots__ = ()

    def __repr__(self):
        return "INF"


INF = _Infinite()


def term_poly(t: LinearTerm) -> Poly:
    p = Poly.const(t.literal)
    for name, c in t.coeffs:
        p = p + Poly.var(name).scale(c)
    return p


def _fresh_names(avoid, stem):
    i = 0
    while True:
        i += 1
        name = f"{stem}{i}"
        if name not in avoid:
            yield name


def _norm_ratio(num: LinearTerm, den: int):
    g = gcd(den, abs(num.literal), *(abs(c) for _, c in num.coeffs))
    if g > 1:
        num = LinearTerm(tuple((n, c // g) for n, c in num.coeffs), num.literal // g)
        den //= g
    return num, den


def _subs_ratio(ratio, var, value):
    """Substitute var := enum/eden into a num/den pair of a linear term."""
    num, den = ratio
    c = num.coeff(var)
    if c == 0:
        return ratio
    enum, eden = value
    return _norm_ratio(num.drop(var).scale(eden) + enum.scale(c), den * eden)


# ---------------------------------------------------------------------------
# piecewise polynomial counting


def _interval_cases(comp):
    """rho-splits of a two-sided interval.

    Yields (case_atoms, x0, Anum, period): the branch holds A >= 1
    points var = x0/div + mod*t for t in [0, A), A = Anum/period.
    """
    d, m, r = comp.div, comp.mod, comp.res
    period = d * m
    upper = comp.hi.plus(-1)
    for rho_l, atom_l in rho_splits(comp.lo, d, m, r):
        x0 = first_num(comp.lo, rho_l, period)
        for rho_u, atom_u in rho_splits(upper, d, m, r):
            anum = (upper.plus(-rho_u) - x0).plus(period)
            nonempty = le0(LinearTerm.const(period) - anum)
            yield [atom_l, atom_u, nonempty], x0, anum, period


def _pick_var(atoms, xvars):
    """Coordinate whose elimination branches least, scanned cheaply.

    Equalities pin a variable outright; otherwise the bound-ordering
    casework grows with the product of lower and upper bound counts and
    the congruence moduli touching the variable.
    """
    best, bestscore = xvars[-1], None
    for v in xvars:
        nl = nu = mods = 1
        pinned = False
        for a in atoms:
            if isinstance(a, Atom):
                c = (a.lhs - a.rhs).coeff(v)
                if c == 0:
                    continue
                if a.op == "=":
                    pinned = True
                    break
                if c > 0:
                    nu += 1
                else:
                    nl += 1
            elif isinstance(a, Cong) and a.term.coeff(v) % a.modulus:
                mods *= a.modulus
        score = 0 if pinned else nl * nu * mods
        if bestscore is None or score < bestscore:
            best, bestscore = v, score
    return best


def _count_pieces(atoms, xvars, weight, out, depth=0):
    if not xvars:
        out.append((conj(atoms), weight))
        return
    v = _pick_var(atoms, xvars)
    rest = tuple(x for x in xvars if x != v)
    tname = f"_s{depth}"
    for base, comp in split_var(atoms, v):
        s = qe.simplify(conj(base))
        if isinstance(s, FalseF):
            continue
        batoms = atoms_of(s)
        if isinstance(comp, Point):
            w2 = weight.subs(v, term_poly(comp.term).scale(Fraction(1, comp.div)))
            _count_pieces(batoms, rest, w2, out, depth + 1)
        elif comp.lo is not None and comp.hi is not None:
            for case, x0, anum, period in _interval_cases(comp):
                s2 = qe.simplify(conj(list(batoms) + case))
                if isinstance(s2, FalseF):
                    continue
                x0p = term_poly(x0).scale(Fraction(1, comp.div))
                wt = weight.subs(v, x0p + Poly.var(tname).scale(comp.mod))
                w2 = sum_range(wt, tname, term_poly(anum).scale(Fraction(1, period)))
                _count_pieces(atoms_of(s2), rest, w2, out, depth + 1)
        else:
            # infinitely many v over every point of the base
            guard = qe.eliminate(
                syntax.normalize(qe.exists_closure(conj(batoms), rest))
            )
            if not isinstance(guard, FalseF):
                out.append((guard, INF))


def _add_val(a, b):
    if a is INF or b is INF:
        return INF
    return a + b


def _sign_branches(guards, spec):
    """Satisfiable truth assignments to the atoms of some guards.

    Yields (assignment, atoms) pairs whose atom conjunctions partition
    the space; every guard is decided by each assignment.  Congruences
    are split by residue class so that branches stay plain conjunctions
    of atoms (negating a congruence would reintroduce disjunctions).
    """
    comps, congs, seen = [], {}, set()

    def walk(f):
        if isinstance(f, Cong):
            if f not in seen:
                seen.add(f)
                base = f.term.plus(-f.term.literal)
                key = (f.modulus, base)
                hit = (f.residue - f.term.literal) % f.modulus
                congs.setdefault(key, []).append((f, hit))
        elif isinstance(f, Atom):
            if f not in seen:
                seen.add(f)
                comps.append(f)
        elif isinstance(f, (And, Or)):
            for a in f.args:
                walk(a)
        elif isinstance(f, Not):
            walk(f.body)

    for g in guards:
        walk(g)

    branches = [({}, ())]
    for p in comps:
        np_ = negate_qf(p)
        new = []
        for env, had in branches:
            for tv, lit in ((True, p), (False, np_)):
                cj = had + (lit,)
                if qe.satisfiable(conj(list(cj)), spec):
                    e2 = dict(env)
                    e2[p] = tv
                    new.append((e2, cj))
        branches = new
    for (m, base), preds in congs.items():
        new = []
        for j in range(m):
            case = cong0(m, base.plus(-j))
            for env, had in branches:
                cj = had + (case,)
                if qe.satisfiable(conj(list(cj)), spec):
                    e2 = dict(env)
                    for p, hit in preds:
                        e2[p] = hit == j
                    new.append((e2, cj))
        branches = new
    return branches


def _holds(f, env):
    """Truth of a guard under a fixed assignment to its atoms."""
    if isinstance(f, (Atom, Cong)):
        return env[f]
    if isinstance(f, And):
        return all(_holds(a, env) for a in f.args)
    if isinstance(f, Or):
        return any(_holds(a, env) for a in f.args)
    if isinstance(f, Not):
        return not _holds(f.body, env)
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    raise AssertionError(f"unexpected guard node {f!r}")


def count_family(f, xvars, params, spec):
    """Piecewise-polynomial count of solutions in the x variables.

    Returns a list of (guard, value) pairs whose guards partition the
    parameter space; value is a Poly in the parameters, or INF where
    the fiber is infinite.
    """
    xvars = tuple(xvars)
    reserved = set(xvars) | set(params) | set(spec.constants)
    g = qe.eliminate(syntax.normalize(f, reserved=reserved))
    leaves = []
    for atoms in disjoint_dnf(g):
        _count_pieces(list(atoms), xvars, Poly.const(1), leaves)

    regions = []
    for env, atoms2 in _sign_branches([g for g, _ in leaves], spec):
        val = Poly()
        for guard, v in leaves:
            if _holds(guard, env):
                val = _add_val(val, v)
        regions.append((conj(list(atoms2)), val))

    merged = {}
    for h, q in regions:
        merged.setdefault(q, []).append(h)
    return [(qe.simplify(syntax.disj(hs)), q) for q, hs in merged.items()]


def count_at(pieces, point, spec):
    """Evaluate a piecewise count at concrete integer parameters."""
    env = {
        n: v if isinstance(v, model.GroupElement) else model.from_int(v, spec.k)
        for n, v in point.items()
    }
    for guard, val in pieces:
        if model.eval_qf(guard, env, spec):
            if val is INF:
                return INF
            r = val.eval({n: Fraction(env[n].unit) for n in val.variables()})
            if r.denominator != 1:
                raise AssertionError(f"non-integral count {r}")
            return int(r)
    raise AssertionError("piecewise count does not cover the point")


def hyper_card(f, xvars, spec) -> Poly:
    """Hyper-cardinality of a bounded definable set.

    The result is a polynomial in the generator symbols b1..bk; for
    k = 0 it is a constant.  Raises UnboundedSetError on sets that are
    unbounded at the model's constants.
    """
    cnames = sorted(syntax.free_names(f) & set(spec.constants))
    pspec = model.ModelSpec(spec.k)
    pieces = count_family(f, xvars, cnames, pspec)
    env = {c: spec.constant(c) for c in cnames}
    for guard, val in pieces:
        if model.eval_qf(guard, env, pspec):
            if val is INF:
                raise UnboundedSetError("set is unbounded")
            return val.subs_all({c: semiring.embed(v) for c, v in env.items()})
    raise AssertionError("piecewise count does not cover the constants")


# ---------------------------------------------------------------------------
# canonical classes


_ENUM_CAP = 20000


def _eval_atoms(atoms, env):
    for a in atoms:
        if isinstance(a, Atom):
            t = a.lhs - a.rhs
            val = t.literal + sum(c * env[n] for n, c in t.coeffs)
            ok = {
                "<=": val <= 0,
                "<": val < 0,
                "=": val == 0,
                "!=": val != 0,
                ">=": val >= 0,
                ">": val > 0,
            }[a.op]
            if not ok:
                return False
        else:
            val = a.term.literal + sum(c * env[n] for n, c in a.term.coeffs)
            if val % a.modulus != a.residue % a.modulus:
                return False
    return True


def _finite_count(atoms, xvars):
    """Point count of a small constant box, or None if not one.

    Mixed-modulus congruence casework can make the symbolic branch
    structure explode even when every coordinate is pinned inside a
    tiny range, so conjunctions whose single-variable atoms already
    confine all coordinates to at most _ENUM_CAP points are counted by
    direct evaluation.
    """
    ranges = {}
    for v in xvars:
        lo = hi = None
        for a in atoms:
            if not isinstance(a, Atom) or a.op not in ("<=", "<", "="):
                continue
            t = a.lhs - a.rhs
            if [n for n, _ in t.coeffs] != [v]:
                continue
            c = t.coeff(v)
            bound = Fraction(-t.literal - (a.op == "<"), c)
            if a.op == "=":
                lo = bound if lo is None else max(lo, bound)
                hi = bound if hi is None else min(hi, bound)
            elif c > 0:
                hi = bound if hi is None else min(hi, bound)
            else:
                lo = bound if lo is None else max(lo, bound)
        if lo is None or hi is None:
            return None
        ranges[v] = range(ceil(lo), floor(hi) + 1)
    volume = 1
    for r in ranges.values():
        volume *= len(r)
        if volume > _ENUM_CAP:
            return None
    count = 0
    order = list(ranges)
    for pt in itertools.product(*(ranges[v] for v in order)):
        count += _eval_atoms(atoms, dict(zip(order, pt)))
    return count


def _moving_factors(factors, u):
    names = {u}
    changed = True
    while changed:
        changed = False
        for tname, (num, _) in factors:
            if tname not in names and set(num.names()) & names:
                names.add(tname)
                changed = True
    return names - {u}


def _fiber_class(atoms, xvars, factors, spec, fresh) -> ClassNF:
    k = spec.k
    if k == 0 and not factors and xvars:
        n = _finite_count(atoms, xvars)
        if n is not None:
            return semiring.class_const(n, 0)
    if not xvars:
        obj = list(atoms)
        for tname, (num, den) in factors:
            t = LinearTerm.var(tname)
            obj.append(le0(t.scale(-1)))
            obj.append(le0((t.scale(den) - num).plus(1)))
        ff = conj(obj)
        tnames = [t for t, _ in factors][::-1]
        if not qe.satisfiable(ff, spec):
            return semiring.class_zero(k)
        return semiring.class_poly(hyper_card(ff, tnames, spec), k)

    v = _pick_var(atoms, xvars)
    rest = tuple(x for x in xvars if x != v)
    total = semiring.class_zero(k)
    for base, comp in split_var(atoms, v):
        s = qe.simplify(conj(base))
        if isinstance(s, FalseF):
            continue
        batoms = atoms_of(s)
        if isinstance(comp, Point):
            val = (comp.term, comp.div)
            fac2 = [(t, _subs_ratio(F, v, val)) for t, F in factors]
            total = semiring.class_add(
                total, _fiber_class(batoms, rest, fac2, spec, fresh)
            )
        elif comp.lo is not None and comp.hi is not None:
            for case, x0, anum, period in _interval_cases(comp):
                s2 = qe.simplify(conj(list(batoms) + case))
                if isinstance(s2, FalseF):
                    continue
                t = next(fresh)
                val = (x0 + LinearTerm.var(t).scale(period), comp.div)
                fac2 = [(tn, _subs_ratio(F, v, val)) for tn, F in factors]
                fac2.append((t, _norm_ratio(anum, period)))
                total = semiring.class_add(
                    total, _fiber_class(atoms_of(s2), rest, fac2, spec, fresh)
                )
        else:
            for lo_num, d, m, r, sign in up_orientations(comp):
                period = d * m
                for rho, atom_r in rho_splits(lo_num, d, m, r):
                    s2 = qe.simplify(conj(list(batoms) + [atom_r]))
                    if isinstance(s2, FalseF):
                        continue
                    u = next(fresh)
                    x0 = first_num(lo_num, rho, period)
                    val = ((x0 + LinearTerm.var(u).scale(period)).scale(sign), d)
                    fac2 = [(tn, _subs_ratio(F, v, val)) for tn, F in factors]
                    moving = _moving_factors(fac2, u)
                    static = [fc for fc in fac2 if fc[0] not in moving]
                    part = semiring.class_mul(
                        semiring.class_inf_power(len(moving) + 1, k),
                        _fiber_class(atoms_of(s2), rest, static, spec, fresh),
                    )
                    total = semiring.class_add(total, part)
    return total


def grothendieck_class(f, xvars, spec) -> ClassNF:
    """Canonical class of the solution set in the Grothendieck semiring."""
    xvars = tuple(xvars)
    reserved = set(xvars) | set(spec.constants)
    g = qe.eliminate(syntax.normalize(f, reserved=reserved))
    avoid = syntax.all_names(g) | reserved
    fresh = _fresh_names(avoid, "_t")
    total = semiring.class_zero(spec.k)
    for atoms in disjoint_dnf(g):
        total = semiring.class_add(
            total, _fiber_class(list(atoms), xvars, [], spec, fresh)
        )
    return total


def dim_profiles(cls: ClassNF):
    """Maximal growth profiles of a class, largest first."""
    return sorted(semiring.full_mdim(cls), reverse=True)


@dataclass(frozen=True, slots=True)
class EquivResult:
    equivalent: bool
    left: ClassNF
    right: ClassNF


def decide_equiv(f1, vars1, f2, vars2, spec) -> EquivResult:
    """Are two definable sets related by a definable bijection?"""
    c1 = grothendieck_class(f1, vars1, spec)
    c2 = grothendieck_class(f2, vars2, spec)
    return EquivResult(c1 == c2, c1, c2)


# ---------------------------------------------------------------------------
# families


def _coeffs_in(p: Poly, name):
    """Split a polynomial by the exponent of one variable."""
    buckets = {}
    for mono, c in p.terms:
        e = 0
        mono2 = []
        for n, ee in mono:
            if n == name:
                e = ee
            else:
                mono2.append((n, ee))
        buckets.setdefault(e, []).append((tuple(mono2), c))
    return {e: Poly(tuple(ts)) for e, ts in buckets.items()}


def _ground_zero(atoms, diff, spec):
    if not qe.satisfiable(conj(atoms), spec, over=()):
        return True
    val = diff.subs_all(
        {c: semiring.embed(spec.constant(c)) for c in diff.variables()}
    )
    return val.is_zero()


def _vanishes(atoms, pvars, diff: Poly, spec) -> bool:
    """Does diff vanish at every group point of the region?"""
    if diff.is_zero():
        return True
    if not pvars:
        return _ground_zero(atoms, diff, spec)
    v = pvars[-1]
    rest = pvars[:-1]
    tname = f"_v{len(pvars)}"
    for base, comp in split_var(atoms, v):
        s = qe.simplify(conj(base))
        if isinstance(s, FalseF):
            continue
        batoms = atoms_of(s)
        if isinstance(comp, Point):
            d2 = diff.subs(v, term_poly(comp.term).scale(Fraction(1, comp.div)))
            if not _vanishes(batoms, rest, d2, spec):
                return False
        elif comp.lo is not None and comp.hi is not None:
            for case, x0, anum, period in _interval_cases(comp):
                s2 = qe.simplify(conj(list(batoms) + case))
                if isinstance(s2, FalseF):
                    continue
                x0p = term_poly(x0).scale(Fraction(1, comp.div))
                dt = diff.subs(v, x0p + Poly.var(tname).scale(comp.mod))
                parts = _coeffs_in(dt, tname)
                deg = max(parts)
                # long fibers force every coefficient to vanish
                big = le0(LinearTerm.const(period * (deg + 1)) - anum)
                s3 = qe.simplify(conj(list(atoms_of(s2)) + [big]))
                if not isinstance(s3, FalseF):
                    a3 = atoms_of(s3)
                    if not all(_vanishes(a3, rest, c, spec) for c in parts.values()):
                        return False
                # short fibers are checked pointwise
                for j in range(1, deg + 1):
                    eq_j = eq0(anum.plus(-period * j))
                    s4 = qe.simplify(conj(list(atoms_of(s2)) + [eq_j]))
                    if isinstance(s4, FalseF):
                        continue
                    a4 = atoms_of(s4)
                    for jj in range(j):
                        if not _vanishes(a4, rest, dt.subs(tname, Poly.const(jj)), spec):
                            return False
        else:
            for lo_num, d, m, r, sign in up_orientations(comp):
                period = d * m
                for rho, atom_r in rho_splits(lo_num, d, m, r):
                    s2 = qe.simplify(conj(list(batoms) + [atom_r]))
                    if isinstance(s2, FalseF):
                        continue
                    x0p = term_poly(first_num(lo_num, rho, period))
                    du = diff.subs(
                        v,
                        (x0p + Poly.var(tname).scale(period)).scale(
                            Fraction(sign, d)
                        ),
                    )
                    a2 = atoms_of(s2)
                    for c in _coeffs_in(du, tname).values():
                        if not _vanishes(a2, rest, c, spec):
                            return False
    return True


def family_equiv(f1, f2, xvars, params, spec) -> bool:
    """Is there a single definable bijection between the two families?

    For families whose fibers are all bounded this holds exactly when
    the fiberwise counts agree at every parameter value.  Raises
    UnboundedFiberError if some fiber is unbounded.
    """
    params = tuple(params)
    p1 = count_family(f1, xvars, params, spec)
    p2 = count_family(f2, xvars, params, spec)
    for guard, val in p1 + p2:
        if val is INF and qe.satisfiable(guard, spec):
            raise UnboundedFiberError("family has an unbounded fiber")
    for g1, q1 in p1:
        for g2, q2 in p2:
            inter = qe.simplify(conj([g1, g2]))
            if isinstance(inter, FalseF) or not qe.satisfiable(inter, spec):
                continue
            diff = q1 - q2
            if diff.is_zero():
                continue
            for atoms in disjoint_dnf(inter):
                if not _vanishes(list(atoms), params, diff, spec):
                    return False
    return True
