"""Cell decomposition of definable sets.

A quantifier-free formula is first rewritten as a disjoint union of
conjunctions of atoms, then each conjunction is split one variable at a
time.  Splitting isolates the constraint on the chosen variable into a
single component, either

* a point: the variable equals term/div, or
* an interval: lo <= div*var < hi intersected with a residue class
  var = res (mod mod), where either bound may be absent,

at the cost of branching over residue patterns of the other names and
over which lower/upper bound wins.  Branches partition the ambient
space, with bound terms referring only to the remaining names.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, gcd, lcm

from . import model, qe, syntax
from .syntax import (
    TRUE,
    ZERO,
    And,
    Atom,
    Cong,
    FalseF,
    LinearTerm,
    Or,
    TrueF,
    cong0,
    conj,
    eq0,
    le0,
    negate_qf,
)


class InfiniteSetError(ValueError):
    """Raised when a finite enumeration meets an infinite set."""


class NotAFunction(ValueError):
    """Raised when a relation fails the single-value check."""


@dataclass(frozen=True, slots=True)
class Point:
    """Coordinate pinned to term/div."""

    term: LinearTerm
    div: int = 1


@dataclass(frozen=True, slots=True)
class Interval:
    """Coordinate ranging over lo <= div*x < hi with x = res (mod mod).

    A missing bound (None) extends the range to the corresponding
    infinity.  Bounds are linear terms over the remaining names.
    """

    lo: object
    hi: object
    div: int = 1
    mod: int = 1
    res: int = 0


def range_atoms(var, comp):
    """Atoms pinning ``var`` to the component's range."""
    x = LinearTerm.var(var)
    if isinstance(comp, Point):
        return [eq0(x.scale(comp.div) - comp.term)]
    parts = []
    if comp.lo is not None:
        parts.append(le0(comp.lo - x.scale(comp.div)))
    if comp.hi is not None:
        parts.append(le0((x.scale(comp.div) - comp.hi).plus(1)))
    if comp.mod > 1:
        parts.append(cong0(comp.mod, x.plus(-comp.res)))
    return parts


def split_var(atoms, var):
    """Split a conjunction of canonical atoms along one variable.

    Returns a list of (base, component) branches.  The bases are atom
    tuples over the other names; together with the component ranges the
    branches partition the solution set of the conjunction.
    """
    free, eqs, lowers, uppers, congs = [], [], [], [], []
    for a in atoms:
        if isinstance(a, Atom):
            t = a.lhs - a.rhs
            c = t.coeff(var)
            if c == 0:
                free.append(a)
            elif a.op == "=":
                eqs.append((c, t.drop(var)))
            elif c > 0:
                uppers.append((c, t.drop(var)))
            else:
                lowers.append((-c, t.drop(var)))
        elif isinstance(a, Cong):
            c = a.term.coeff(var) % a.modulus
            if c == 0:
                free.append(a)
            else:
                congs.append((a.modulus, c, a.term.drop(var).plus(-a.residue)))
        else:
            raise TypeError(f"unexpected literal {a!r}")

    if not eqs and not lowers and not uppers and not congs:
        return [(tuple(free), Interval(None, None, 1, 1, 0))]

    if eqs:
        # var is pinned; transport the other atoms through a*var = e
        c, s = min(eqs, key=lambda p: abs(p[0]))
        a_, e = (c, -s) if c > 0 else (-c, s)
        parts = [cong0(a_, e)]
        seen_chosen = False
        for c2, s2 in eqs:
            if not seen_chosen and (c2, s2) == (c, s):
                seen_chosen = True
                continue
            parts.append(eq0(s2.scale(a_) + e.scale(c2)))
        for c2, s2 in uppers:
            parts.append(le0(s2.scale(a_) + e.scale(c2)))
        for c2, s2 in lowers:
            parts.append(le0(s2.scale(a_) + e.scale(-c2)))
        for m, c2, w in congs:
            parts.append(cong0(m * a_, w.scale(a_) + e.scale(c2)))
        return [(tuple(parts + free), Point(e, a_))]

    lam = lcm(*(c for c, _ in lowers + uppers), *(c for _, c, _ in congs))
    ls = [s.scale(lam // c) for c, s in lowers]
    us = [(-s).scale(lam // c) for c, s in uppers]
    cs = [(m * (lam // c), w.scale(lam // c)) for m, c, w in congs]
    mu = lcm(*(m for m, _ in cs)) if cs else 1
    g = gcd(lam, mu)
    mx = mu // g

    branches = []
    for li in list(range(len(ls))) or [None]:
        lconds = []
        if li is not None:
            lconds = [le0((ls[i] - ls[li]).plus(1)) for i in range(li)]
            lconds += [le0(ls[i] - ls[li]) for i in range(li + 1, len(ls))]
        if any(isinstance(c, FalseF) for c in lconds):
            continue
        for uj in list(range(len(us))) or [None]:
            uconds = []
            if uj is not None:
                uconds = [le0((us[uj] - us[j]).plus(1)) for j in range(uj)]
                uconds += [le0(us[uj] - us[j]) for j in range(uj + 1, len(us))]
            if any(isinstance(c, FalseF) for c in uconds):
                continue
            conds = [
                c for c in lconds + uconds if not isinstance(c, TrueF)
            ]
            branches.append((li, uj, conds))

    out = []
    for v in _residues(cs, g, mu):
        # v is the combined residue of lam*var modulo mu
        r = (pow(lam // g, -1, mx) * (v // g)) % mx if mx > 1 else 0
        cbase = [cong0(m, w.plus(v)) for m, w in cs]
        if any(isinstance(x, FalseF) for x in cbase):
            continue
        cbase = [x for x in cbase if not isinstance(x, TrueF)]
        for li, uj, conds in branches:
            base = cbase + conds + free
            lo = None if li is None else ls[li]
            hi = None if uj is None else us[uj].plus(1)
            out.append((tuple(base), Interval(lo, hi, lam, mx, r)))
    return out


def _residues(cs, g, mu):
    """Feasible combined residues in [0, mu), stepping only where allowed.

    A residue v must be divisible by g, and each congruence (m, w) can
    only hold when gcd(m, coefficients of w) divides w's constant plus v.
    Merging those arithmetic progressions by CRT keeps the scan linear
    in the number of genuine cases even when mu is astronomical.
    """
    r, step = 0, g
    for m, w in cs:
        G = gcd(m, *(abs(c) for _, c in w.coeffs)) if w.coeffs else m
        want = (-w.literal) % G
        d = gcd(step, G)
        if (want - r) % d:
            return
        if G // d > 1:
            s = ((want - r) // d * pow(step // d, -1, G // d)) % (G // d)
        else:
            s = 0
        r = r + step * s
        step = step // d * G
        r %= step
    yield from range(r, mu, step)


def rho_splits(bound_num, div, mod, res):
    """Residue cases for where the lattice div*Z+div*res sits near a bound.

    Yields (rho, atom) with atom asserting bound_num - div*res = rho
    modulo div*mod; impossible residues are dropped.  Only residues the
    term can attain are scanned (those congruent to its literal modulo
    the gcd of the period and the coefficients), so constant bounds
    stay O(1) no matter how large the period has grown.
    """
    period = div * mod
    t = bound_num.plus(-div * res)
    step = gcd(period, *(abs(c) for _, c in t.coeffs)) if t.coeffs else period
    out = []
    for rho in range(t.literal % step, period, step):
        atom = cong0(period, t.plus(-rho))
        if not isinstance(atom, FalseF):
            out.append((rho, atom))
    return out


def first_num(bound_num, rho, period):
    """Scaled first lattice point at or above the bound, given its rho."""
    return bound_num.plus(-rho + (period if rho else 0))


def up_orientations(comp):
    """Rewrite an unbounded interval as one or two upward rays.

    Yields (lo_num, div, mod, res, sign): the coordinate equals
    sign * w where div*w >= lo_num and w = res (mod mod), w unbounded
    above.
    """
    d, m, r = comp.div, comp.mod, comp.res
    if comp.lo is not None and comp.hi is None:
        yield comp.lo, d, m, r, 1
    elif comp.hi is not None and comp.lo is None:
        yield (-comp.hi).plus(1), d, m, (-r) % m, -1
    elif comp.lo is None and comp.hi is None:
        yield ZERO, d, m, r, 1
        yield LinearTerm.const(d), d, m, (-r) % m, -1
    else:
        raise ValueError("interval is bounded")


# ---------------------------------------------------------------------------
# disjoint disjunctive normal form


def atoms_of(f):
    if isinstance(f, TrueF):
        return ()
    if isinstance(f, (Atom, Cong)):
        return (f,)
    if isinstance(f, And) and all(isinstance(a, (Atom, Cong)) for a in f.args):
        return f.args
    raise TypeError(f"not a conjunction of atoms: {f!r}")


def disjoint_dnf(f):
    """Pairwise-disjoint conjunctions of atoms covering a formula.

    Splits on one atom at a time; the negative side of an equality or
    congruence expands into its (mutually exclusive) one-sided or
    residue cases, so every leaf is a plain conjunction.
    """
    out = []

    def first_atom(g):
        if isinstance(g, (Atom, Cong)):
            return g
        if isinstance(g, (And, Or)):
            for a in g.args:
                r = first_atom(a)
                if r is not None:
                    return r
        return None

    def replace(g, a, val):
        if g == a:
            return val
        if isinstance(g, And):
            return conj([replace(x, a, val) for x in g.args])
        if isinstance(g, Or):
            return syntax.disj([replace(x, a, val) for x in g.args])
        return g

    def go(g, ctx):
        if isinstance(g, FalseF):
            return
        if isinstance(g, TrueF):
            out.append(atoms_of(ctx))
            return
        a = first_atom(g)
        pos = qe.simplify(conj([ctx, a]))
        if not isinstance(pos, FalseF):
            go(replace(g, a, TRUE), pos)
        na = negate_qf(a)
        for piece in na.args if isinstance(na, Or) else (na,):
            neg = qe.simplify(conj([ctx, piece]))
            if not isinstance(neg, FalseF):
                go(replace(g, a, FalseF()), neg)

    go(qe.simplify(f), TRUE)
    return out


# ---------------------------------------------------------------------------
# cells


@dataclass(frozen=True, slots=True)
class Cell:
    """A product-like piece: one component per variable, in order.

    Component bounds refer only to earlier variables, parameters, and
    constants; the guard collects leftover atoms over parameters and
    constants.
    """

    vars: tuple
    comps: tuple
    guard: object = TRUE


def cell_formula(cell):
    parts = [cell.guard]
    for v, comp in zip(cell.vars, cell.comps):
        parts += range_atoms(v, comp)
    return conj(parts)


def _split_all(atoms, vars):
    if not vars:
        return [(atoms, {})]
    v = vars[-1]
    out = []
    for base, comp in split_var(atoms, v):
        s = qe.simplify(conj(base))
        if isinstance(s, FalseF):
            continue
        for leftover, comps in _split_all(atoms_of(s), vars[:-1]):
            out.append((leftover, {v: comp, **comps}))
    return out


def decompose(f, vars, spec, params=()):
    """Partition the solution set of f into cells.

    Any satisfiable formula is accepted; quantifiers are eliminated
    first.  Cells with empty solution sets are dropped (decided by
    eliminating the existential closure of the cell formula).
    """
    vars = tuple(vars)
    reserved = set(vars) | set(params) | set(spec.constants)
    g = qe.eliminate(syntax.normalize(f, reserved=reserved))
    cells = []
    for atoms in disjoint_dnf(g):
        for guard_atoms, comps in _split_all(atoms, vars):
            cell = Cell(vars, tuple(comps[v] for v in vars), conj(guard_atoms))
            if qe.satisfiable(cell_formula(cell), spec):
                cells.append(cell)
    return cells


def is_bounded(f, vars, spec):
    """A witness a with the solution set inside [-a, a)^n, or None.

    Each coordinate is projected onto its own axis by eliminating the
    others, so bounds flowing through intermediate variables are picked
    up; the witness dominates every projected range (and is at least 1).
    """
    vars = tuple(vars)
    best = (Fraction(0),) * spec.k + (Fraction(1),)
    for v in vars:
        g = f
        for w in vars:
            if w != v:
                g = syntax.Exists(w, g)
        for cell in decompose(g, (v,), spec):
            comp = cell.comps[0]
            if isinstance(comp, Point):
                val = _as_vector(model.term_value(comp.term, {}, spec), comp.div)
                lo, hi = val, val[:-1] + (val[-1] + 1,)
            else:
                if comp.lo is None or comp.hi is None:
                    return None
                lo = _as_vector(model.term_value(comp.lo, {}, spec), comp.div)
                hi = _as_vector(model.term_value(comp.hi, {}, spec), comp.div)
            best = max(best, hi, tuple(-x for x in lo))
    return model.GroupElement(best[:-1], ceil(best[-1]))


def _as_vector(value: model.GroupElement, div: int = 1):
    return tuple(Fraction(q, div) for q in value.rats) + (Fraction(value.unit, div),)


def _enumerate_cell(cell, i, env, spec, out, limit):
    if i == len(cell.vars):
        out.append(tuple(env[v] for v in cell.vars))
        if limit is not None and len(out) > limit:
            raise InfiniteSetError(f"more than {limit} points")
        return
    v = cell.vars[i]
    comp = cell.comps[i]
    if isinstance(comp, Point):
        val = model.term_value(comp.term, env, spec)
        if val.unit % comp.div:
            raise ValueError("point component misses the group")
        pt = model.GroupElement(
            tuple(q / comp.div for q in val.rats), val.unit // comp.div
        )
        _enumerate_cell(cell, i + 1, {**env, v: pt}, spec, out, limit)
        return
    if comp.lo is None or comp.hi is None:
        raise InfiniteSetError("unbounded component")
    lo = _as_vector(model.term_value(comp.lo, env, spec), comp.div)
    hi = _as_vector(model.term_value(comp.hi, env, spec), comp.div)
    if lo >= hi:
        return
    if lo[:-1] != hi[:-1]:
        raise InfiniteSetError("interval with a dense direction")
    rats = lo[:-1]
    start = ceil(lo[-1])
    stop = ceil(hi[-1]) - 1  # exclusive rational bound, integral slot
    for u in range(start, stop + 1):
        if (u - comp.res) % comp.mod:
            continue
        pt = model.GroupElement(rats, u)
        _enumerate_cell(cell, i + 1, {**env, v: pt}, spec, out, limit)


def enumerate_finite(f, vars, spec, limit=None):
    """All points of a finite definable set, as tuples of group elements.

    Raises InfiniteSetError when some direction is infinite (including
    bounded intervals that contain a dense block of rationals).
    """
    out = []
    for cell in decompose(f, vars, spec):
        if not model.eval_qf(cell.guard, {}, spec):
            continue
        _enumerate_cell(cell, 0, {}, spec, out, limit)
    return out


def piecewise_linear(f, xvars, tvar, spec):
    """Present a functional relation t = F(x) as linear pieces.

    Returns a list of (cell, (num, den)) pairs: disjoint cells over
    xvars covering the set of x where some t satisfies f, with the
    unique t equal to num/den on each.  Raises NotAFunction when some x
    admits two t values, or an unbounded range of them.
    """
    xvars = tuple(xvars)
    reserved = set(xvars) | {tvar} | set(spec.constants)
    g = qe.eliminate(syntax.normalize(f, reserved=reserved))
    t2 = tvar + "_"
    while t2 in reserved:
        t2 += "_"
    doubled = conj(
        [
            g,
            syntax.subst(g, tvar, LinearTerm.var(t2)),
            le0((LinearTerm.var(tvar) - LinearTerm.var(t2)).plus(1)),
        ]
    )
    if qe.satisfiable(doubled, spec):
        raise NotAFunction(f"{tvar} is not determined by {xvars}")
    pieces = []
    for cell in decompose(g, xvars + (tvar,), spec):
        comp = cell.comps[-1]
        dom = Cell(xvars, cell.comps[:-1], cell.guard)
        if isinstance(comp, Point):
            pieces.append((dom, (comp.term, comp.div)))
            continue
        if comp.lo is None or comp.hi is None:
            raise NotAFunction("unbounded fiber")
        # a degenerate interval: pin the value to the first lattice point,
        # splitting the domain by where that point lands
        period = comp.div * comp.mod
        for rho, atom in rho_splits(comp.lo, comp.div, comp.mod, comp.res):
            x0 = first_num(comp.lo, rho, period)
            fence = le0((x0 - comp.hi).plus(1))
            refine = conj([cell_formula(dom), atom, fence])
            for sub in decompose(refine, xvars, spec):
                pieces.append((sub, (x0, comp.div)))
    return pieces
