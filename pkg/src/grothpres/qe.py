"""Quantifier elimination and formula simplification.

Elimination works in any discretely ordered abelian group with division
with remainder, so a quantifier-free equivalent produced here is valid
in Q^k x Z for every k, not just in Z itself.

The core step removes one existential from a conjunction of canonical
atoms.  If an equality mentions the variable it is solved directly;
otherwise the variable is rescaled to a common coefficient and the
classic test-point disjunction over lower bounds and residues is
emitted.  No greatest-lower-bound side conditions are needed: each
disjunct carries all lower-bound atoms, so only achievable test points
survive, and a solution at any point forces one of the test points to
work (residues are periodic and upper bounds are monotone).
"""

from __future__ import annotations

from math import gcd, lcm

from . import syntax
from .syntax import (
    FALSE,
    TRUE,
    ZERO,
    And,
    Atom,
    Cong,
    Exists,
    FalseF,
    LinearTerm,
    Not,
    Or,
    TrueF,
    atom0,
    cong0,
    conj,
    disj,
    eq0,
    le0,
    negate_qf,
    normalize,
)


def qe(f, reserved=()):
    """Normalize, eliminate all quantifiers, and simplify."""
    return simplify(eliminate(normalize(f, reserved)))


_elim_cache: dict = {}


def clear_caches():
    _elim_cache.clear()


def eliminate(f):
    """Quantifier-free equivalent of a normalized formula."""
    if isinstance(f, (TrueF, FalseF, Atom, Cong)):
        return f
    hit = _elim_cache.get(f)
    if hit is not None:
        return hit
    if isinstance(f, Not):
        out = simplify(negate_qf(eliminate(f.body)))
    elif isinstance(f, And):
        out = simplify(conj([eliminate(a) for a in f.args]))
    elif isinstance(f, Or):
        out = simplify(disj([eliminate(a) for a in f.args]))
    elif isinstance(f, Exists):
        body = eliminate(f.body)
        pieces = [_elim_conj(f.var, cj) for cj in dnf_conjuncts(body)]
        out = simplify(disj(pieces))
    else:
        raise TypeError(f"cannot eliminate from {f!r}; normalize first")
    _elim_cache[f] = out
    return out


def dnf_conjuncts(f):
    """Disjuncts of a plain disjunctive normal form, as atom tuples.

    Input must be quantifier-free in canonical atoms.  Disjuncts may
    overlap.
    """
    if isinstance(f, TrueF):
        return [()]
    if isinstance(f, FalseF):
        return []
    if isinstance(f, (Atom, Cong)):
        return [(f,)]
    if isinstance(f, Or):
        out = []
        for a in f.args:
            out.extend(dnf_conjuncts(a))
        return out
    if isinstance(f, And):
        acc = [()]
        for a in f.args:
            ds = dnf_conjuncts(a)
            acc = [c + d for c in acc for d in ds]
        return acc
    raise TypeError(f"not in canonical quantifier-free form: {f!r}")


def _elim_conj(var, atoms):
    """Eliminate ``E var`` from a conjunction of canonical atoms."""
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
        return conj(free)

    if eqs:
        # solve a*var = e and push the solution through the other atoms
        c, s = min(eqs, key=lambda p: abs(p[0]))
        a, e = (c, -s) if c > 0 else (-c, s)
        parts = [cong0(a, e)]
        for c2, s2 in eqs:
            if (c2, s2) != (c, s):
                parts.append(eq0(s2.scale(a) + e.scale(c2)))
        for c2, s2 in uppers:
            parts.append(le0(s2.scale(a) + e.scale(c2)))
        for c2, s2 in lowers:
            parts.append(le0(s2.scale(a) + e.scale(-c2)))
        for m, c2, w in congs:
            parts.append(cong0(m * a, w.scale(a) + e.scale(c2)))
        return conj(parts + free)

    lam = lcm(*(c for c, _ in lowers + uppers), *(c for _, c, _ in congs))
    ls = [s.scale(lam // c) for c, s in lowers]
    us = [(-s).scale(lam // c) for c, s in uppers]
    cs = [(m * (lam // c), w.scale(lam // c)) for m, c, w in congs]
    cs.append((lam, ZERO))
    delta = lcm(*(m for m, _ in cs))

    pieces = []
    if not lowers:
        # solutions extend arbitrarily far down, so only residues matter
        for r in range(delta):
            parts = [cong0(m, w.plus(r)) for m, w in cs]
            pieces.append(conj(parts + free))
    else:
        for li in ls:
            for j in range(delta):
                parts = [le0((l2 - li).plus(-j)) for l2 in ls]
                parts += [le0((li - u).plus(j)) for u in us]
                parts += [cong0(m, (li + w).plus(j)) for m, w in cs]
                pieces.append(conj(parts + free))
    return disj(pieces)


# ---------------------------------------------------------------------------
# simplification


def simplify(f):
    """Light size control: constant folding, subsumption, merging."""
    if isinstance(f, (TrueF, FalseF, Atom, Cong)):
        return f
    if isinstance(f, Not):
        body = simplify(f.body)
        if isinstance(body, TrueF):
            return FALSE
        if isinstance(body, FalseF):
            return TRUE
        if syntax.is_qf(body):
            return simplify(negate_qf(body))
        return Not(body)
    if isinstance(f, Exists):
        body = simplify(f.body)
        if f.var not in syntax.free_names(body):
            return body
        return Exists(f.var, body)
    if isinstance(f, Or):
        return disj([simplify(a) for a in f.args])
    if isinstance(f, And):
        return _simplify_and([simplify(a) for a in f.args])
    raise TypeError(f"cannot simplify {f!r}")


def _simplify_and(args):
    flat = []
    for a in args:
        if isinstance(a, FalseF):
            return FALSE
        if isinstance(a, TrueF):
            continue
        flat.extend(a.args if isinstance(a, And) else (a,))

    ineqs: dict = {}  # coeffs -> strongest (largest) literal
    eqs: dict = {}  # sign-normalized coeffs -> literal
    congs: dict = {}  # coeffs -> {modulus: literal}
    others = []

    def add_cong(key, m, l):
        slot = congs.setdefault(key, {})
        l %= m
        for m2 in list(slot):
            l2 = slot[m2]
            if m % m2 == 0:
                if (l - l2) % m2 != 0:
                    return False
                del slot[m2]
            elif m2 % m == 0:
                return True if (l2 - l) % m == 0 else False
        slot[m] = l
        return True

    for a in flat:
        if isinstance(a, Atom):
            h = atom0(a.op, a.lhs - a.rhs)
        elif isinstance(a, Cong):
            h = cong0(a.modulus, a.term.plus(-a.residue))
        else:
            others.append(a)
            continue
        if isinstance(h, TrueF):
            continue
        if isinstance(h, FalseF):
            return FALSE
        if isinstance(h, Atom) and h.op == "<=":
            key = h.lhs.coeffs
            if key not in ineqs or h.lhs.literal > ineqs[key]:
                ineqs[key] = h.lhs.literal
        elif isinstance(h, Atom):
            key = h.lhs.coeffs
            if key in eqs and eqs[key] != h.lhs.literal:
                return FALSE
            eqs[key] = h.lhs.literal
        elif isinstance(h, Cong):
            if not add_cong(h.term.coeffs, h.modulus, h.term.literal):
                return FALSE
        else:
            others.append(h)  # != expands to a disjunction

    changed = True
    while changed:
        changed = False
        # a matching pair t <= 0, -t <= 0 pins t exactly
        for key in list(ineqs):
            neg = tuple((n, -c) for n, c in key)
            if neg in ineqs and key < neg:
                l1, l2 = ineqs[key], ineqs[neg]
                if l1 + l2 > 0:
                    return FALSE
                if l1 + l2 == 0:
                    pinned = eq0(LinearTerm(key, l1))
                    if isinstance(pinned, FalseF):
                        return FALSE
                    if isinstance(pinned, Atom):
                        ekey = pinned.lhs.coeffs
                        if ekey in eqs and eqs[ekey] != pinned.lhs.literal:
                            return FALSE
                        eqs[ekey] = pinned.lhs.literal
                    del ineqs[key], ineqs[neg]
                    changed = True
        # equalities decide parallel inequalities and congruences
        for ckey, l0 in list(eqs.items()):
            for key, sign in ((ckey, 1), (tuple((n, -c) for n, c in ckey), -1)):
                if key in ineqs:
                    # sum(key.x) = sign * -l0, test sum + lit <= 0
                    if ineqs[key] - sign * l0 > 0:
                        return FALSE
                    del ineqs[key]
                    changed = True
                for gkey in list(congs):
                    for m in list(congs.get(gkey, ())):
                        if gkey == tuple((n, c % m) for n, c in key if c % m):
                            if (congs[gkey][m] - sign * l0) % m != 0:
                                return FALSE
                            del congs[gkey][m]
                            changed = True

    parts = [Atom("=", LinearTerm(k, l), ZERO) for k, l in sorted(eqs.items())]
    parts += [Atom("<=", LinearTerm(k, l), ZERO) for k, l in sorted(ineqs.items())]
    for key in sorted(congs):
        for m in sorted(congs[key]):
            parts.append(Cong(m, LinearTerm(key, congs[key][m] % m), 0))
    return conj(parts + others)


# ---------------------------------------------------------------------------
# decision helpers


def exists_closure(f, names):
    out = f
    for n in sorted(names, reverse=True):
        out = Exists(n, out)
    return out


def satisfiable(f, spec, over=None) -> bool:
    """Truth of the existential closure of f in the given model.

    Closes over the given names (default: all free names that are not
    declared constants of the model), eliminates, and evaluates what
    remains, which may still mention the model's constants.
    """
    from . import model

    if over is None:
        over = set(syntax.free_names(f)) - set(spec.constants)
    g = exists_closure(f, over)
    h = eliminate(normalize(g, reserved=spec.constants))
    return model.eval_qf(h, {}, spec)


def valid(f, spec, over=None) -> bool:
    if over is None:
        over = set(syntax.free_names(f)) - set(spec.constants)
    return not satisfiable(Not(f), spec, over)


def equivalent(f, g, spec) -> bool:
    """Do f and g agree for all values of their non-constant free names?"""
    xor = disj([And((f, Not(g))), And((Not(f), g))])
    over = (set(syntax.free_names(f)) | set(syntax.free_names(g))) - set(spec.constants)
    return not satisfiable(xor, spec, over)
