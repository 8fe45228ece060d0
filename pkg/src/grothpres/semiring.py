"""Classes of definable sets as a commutative semiring.

A class is represented by a canonical normal form with two layers:

* ``mdim`` - an antichain of profiles, one per unbounded generator term.
  A profile is a tuple (p_0, ..., p_k) where p_i counts the factors of
  the term whose length has significance greater than i (the infinite
  ray counts at every index, the generator of significance j counts at
  indices below j).  Profiles are weakly decreasing.

* ``bounded`` - a polynomial over the embedding symbols b1..bk with
  exact rational coefficients, recording the size of the bounded part,
  reduced by deleting every monomial whose profile is dominated by some
  profile in ``mdim`` (such a part is absorbed by the unbounded term
  that dominates it).

Addition and multiplication stay in normal form, and two classes are
equal exactly when their normal forms coincide.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

from .model import GroupElement

# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True, slots=True)
class Poly:
    """Multivariate polynomial with Fraction coefficients.

    ``terms`` maps each monomial, a sorted tuple of (name, exponent)
    pairs with positive exponents, to a nonzero coefficient.
    """

    terms: tuple = ()

    def __post_init__(self):
        acc = {}
        for mono, c in self.terms:
            mono = tuple(sorted((n, int(e)) for n, e in mono if int(e) != 0))
            c = acc.get(mono, Fraction(0)) + Fraction(c)
            if c == 0:
                acc.pop(mono, None)
            else:
                acc[mono] = c
        object.__setattr__(self, "terms", tuple(sorted(acc.items())))

    @staticmethod
    def const(c) -> "Poly":
        return Poly((((), Fraction(c)),))

    @staticmethod
    def var(name: str) -> "Poly":
        return Poly(((((name, 1),), Fraction(1)),))

    def is_zero(self) -> bool:
        return not self.terms

    def constant(self) -> Fraction:
        for mono, c in self.terms:
            if not mono:
                return c
        return Fraction(0)

    def variables(self) -> frozenset:
        out = set()
        for mono, _ in self.terms:
            out.update(n for n, _ in mono)
        return frozenset(out)

    def degree(self, name: str | None = None) -> int:
        best = 0
        for mono, _ in self.terms:
            if name is None:
                best = max(best, sum(e for _, e in mono))
            else:
                best = max(best, dict(mono).get(name, 0))
        return best

    def __add__(self, other: "Poly") -> "Poly":
        return Poly(self.terms + other.terms)

    def __neg__(self) -> "Poly":
        return Poly(tuple((m, -c) for m, c in self.terms))

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def scale(self, c) -> "Poly":
        c = Fraction(c)
        return Poly(tuple((m, c * c0) for m, c0 in self.terms))

    def __mul__(self, other: "Poly") -> "Poly":
        out = []
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                acc = dict(m1)
                for n, e in m2:
                    acc[n] = acc.get(n, 0) + e
                out.append((tuple(acc.items()), c1 * c2))
        return Poly(tuple(out))

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power")
        out = Poly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def subs(self, name: str, value: "Poly") -> "Poly":
        out = Poly()
        powers = {0: Poly.const(1)}

        def power(e):
            if e not in powers:
                powers[e] = power(e - 1) * value
            return powers[e]

        for mono, c in self.terms:
            rest = tuple((n, e) for n, e in mono if n != name)
            e = dict(mono).get(name, 0)
            out = out + Poly(((rest, c),)) * power(e)
        return out

    def subs_all(self, mapping: dict) -> "Poly":
        """Substitute several variables at once (simultaneously)."""
        values = {
            n: v if isinstance(v, Poly) else Poly.const(v) for n, v in mapping.items()
        }
        out = Poly()
        for mono, c in self.terms:
            term = Poly.const(c)
            for n, e in mono:
                term = term * values.get(n, Poly.var(n)) ** e
            out = out + term
        return out

    def eval(self, point: dict) -> Fraction:
        total = Fraction(0)
        for mono, c in self.terms:
            v = c
            for n, e in mono:
                v *= Fraction(point[n]) ** e
            total += v
        return total

    def __str__(self):
        if not self.terms:
            return "0"
        ordered = sorted(self.terms, key=lambda t: (-sum(e for _, e in t[0]), t[0]))
        parts = []
        for mono, c in ordered:
            body = "*".join(n if e == 1 else f"{n}^{e}" for n, e in mono)
            mag = abs(c)
            if not body:
                piece = str(mag)
            elif mag == 1:
                piece = body
            else:
                piece = f"{mag}*{body}"
            if not parts:
                parts.append(piece if c > 0 else f"-{piece}")
            else:
                parts.append(f"{'+' if c > 0 else '-'} {piece}")
        return " ".join(parts)

    def __repr__(self):
        return f"Poly<{self}>"


@lru_cache(maxsize=None)
def faulhaber(p: int) -> tuple:
    """Coefficients of S_p(n) = sum_{s=0}^{n} s^p, index = power of n.

    Derived from telescoping (s+1)^{p+1} - s^{p+1}, which gives
    sum_j C(p+1, j) S_j(n) = (n+1)^{p+1}.
    """
    if p == 0:
        return (Fraction(1), Fraction(1))
    target = [Fraction(comb(p + 1, i)) for i in range(p + 2)]
    for j in range(p):
        cj = comb(p + 1, j)
        for i, c in enumerate(faulhaber(j)):
            target[i] -= cj * c
    return tuple(c / (p + 1) for c in target)


def sum_range(w: Poly, var: str, count: Poly) -> Poly:
    """Sum w over var = 0, 1, ..., count - 1, as a polynomial in count.

    Exact for every integer value of count >= 0 (an empty range sums
    to zero because each S_p vanishes at -1).
    """
    n = count - Poly.const(1)
    powers = {0: Poly.const(1)}

    def power(e):
        if e not in powers:
            powers[e] = power(e - 1) * n
        return powers[e]

    out = Poly()
    for mono, c in w.terms:
        e = dict(mono).get(var, 0)
        rest = tuple((nm, ex) for nm, ex in mono if nm != var)
        s = Poly()
        for i, fc in enumerate(faulhaber(e)):
            if fc:
                s = s + power(i).scale(fc)
        out = out + Poly(((rest, c),)) * s
    return out


# ---------------------------------------------------------------------------
# profiles and dimension antichains


def embed_symbol(j: int) -> str:
    return f"b{j}"


def embed(a: GroupElement) -> Poly:
    """The size polynomial of the interval [0, a): unit + sum q_j * b_j."""
    out = Poly.const(a.unit)
    k = a.k
    for i, q in enumerate(a.rats):
        if q:
            out = out + Poly.var(embed_symbol(k - i)).scale(q)
    return out


def mono_profile(mono, k: int) -> tuple:
    """Profile of a bounded monomial over b1..bk."""
    p = [0] * (k + 1)
    for name, e in mono:
        j = int(name[1:])
        for i in range(j):
            p[i] += e
    return tuple(p)


def term_profile(inf: int, exps, k: int) -> tuple:
    """Profile of the generator term INF^inf * prod_j u_j^exps[j-1]."""
    p = [inf] * (k + 1)
    for j, e in enumerate(exps, start=1):
        for i in range(j):
            p[i] += e
    return tuple(p)


def dominated(p, q) -> bool:
    return all(a <= b for a, b in zip(p, q))


def maximal(profiles) -> frozenset:
    out = []
    for p in set(profiles):
        if not any(q != p and dominated(p, q) for q in profiles):
            out.append(p)
    return frozenset(out)


def mdim_leq(m1, m2) -> bool:
    """Every profile of m1 is dominated by some profile of m2."""
    return all(any(dominated(p, q) for q in m2) for p in m1)


def add_profiles(p, q) -> tuple:
    return tuple(a + b for a, b in zip(p, q))


def representative(profile) -> tuple:
    """A generator term (inf, exps) realizing the profile."""
    k = len(profile) - 1
    inf = profile[k]
    exps = tuple(profile[j - 1] - profile[j] for j in range(1, k + 1))
    if inf < 0 or any(e < 0 for e in exps):
        raise ValueError(f"not a weakly decreasing profile: {profile}")
    return inf, exps


# ---------------------------------------------------------------------------
# canonical class forms


@dataclass(frozen=True, slots=True)
class ClassNF:
    """Canonical form of a class: dimension antichain plus reduced polynomial."""

    k: int
    mdim: frozenset
    bounded: Poly

    def is_zero(self) -> bool:
        return not self.mdim and self.bounded.is_zero()

    def is_bounded(self) -> bool:
        return not self.mdim

    def __str__(self):
        parts = []
        for p in sorted(self.mdim, reverse=True):
            inf, exps = representative(p)
            bits = [f"INF^{inf}" if inf > 1 else "INF"]
            bits += [
                f"u{j}^{e}" if e > 1 else f"u{j}"
                for j, e in enumerate(exps, start=1)
                if e
            ]
            parts.append("*".join(bits))
        if not self.bounded.is_zero():
            parts.append(str(self.bounded))
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"ClassNF<{self}>"


def reduce_poly(p: Poly, mdim, k: int) -> Poly:
    """Delete monomials whose profile is dominated by the antichain."""
    keep = []
    for mono, c in p.terms:
        if not any(dominated(mono_profile(mono, k), q) for q in mdim):
            keep.append((mono, c))
    out = Poly(tuple(keep))
    c0 = out.constant()
    if c0.denominator != 1:
        raise ValueError(f"fractional constant {c0} in a class polynomial")
    return out


def class_zero(k: int) -> ClassNF:
    return ClassNF(k, frozenset(), Poly())


def class_const(n: int, k: int) -> ClassNF:
    if n < 0:
        raise ValueError("class sizes are nonnegative")
    return ClassNF(k, frozenset(), Poly.const(n))


def class_poly(p: Poly, k: int) -> ClassNF:
    return ClassNF(k, frozenset(), reduce_poly(p, frozenset(), k))


def class_inf_power(r: int, k: int) -> ClassNF:
    """The class INF^r (the full positive ray to the r-th power)."""
    if r == 0:
        return class_const(1, k)
    return ClassNF(k, frozenset({(r,) * (k + 1)}), Poly())


def canonicalize(terms, k: int) -> ClassNF:
    """Normal form of a formal sum of generator terms.

    Each term is (inf, exps, coeff): the product of inf copies of the
    infinite ray and exps[j-1] copies of the basic interval of
    significance j, taken coeff times.  Coefficients are nonnegative;
    multiplicity is absorbed on unbounded terms.
    """
    inf_profiles = []
    bparts = []
    for inf, exps, coeff in terms:
        coeff = Fraction(coeff)
        if coeff < 0:
            raise ValueError("generator multiplicities are nonnegative")
        if coeff == 0:
            continue
        if len(exps) != k:
            raise ValueError(f"expected {k} exponents")
        if inf > 0:
            inf_profiles.append(term_profile(inf, exps, k))
        else:
            mono = tuple((embed_symbol(j), e) for j, e in enumerate(exps, start=1) if e)
            bparts.append((mono, coeff))
    mdim = maximal(inf_profiles)
    return ClassNF(k, mdim, reduce_poly(Poly(tuple(bparts)), mdim, k))


def class_add(x: ClassNF, y: ClassNF) -> ClassNF:
    if x.k != y.k:
        raise ValueError("mixed group arities")
    mdim = maximal(x.mdim | y.mdim)
    return ClassNF(x.k, mdim, reduce_poly(x.bounded + y.bounded, mdim, x.k))


def class_sum(classes, k: int) -> ClassNF:
    out = class_zero(k)
    for c in classes:
        out = class_add(out, c)
    return out


def class_mul(x: ClassNF, y: ClassNF) -> ClassNF:
    """Product of classes.

    Unbounded-by-unbounded terms add their profiles.  A product of an
    unbounded term with a bounded part contributes one unbounded profile
    per monomial: the maximal monomials of a bounded class polynomial
    have positive coefficients and realize the profiles of an interval
    decomposition, so after the antichain filter this is exact.
    """
    if x.k != y.k:
        raise ValueError("mixed group arities")
    k = x.k
    cands = [add_profiles(p, q) for p in x.mdim for q in y.mdim]
    cands += [
        add_profiles(p, mono_profile(m, k))
        for p in x.mdim
        for m, _ in y.bounded.terms
    ]
    cands += [
        add_profiles(mono_profile(m, k), q)
        for m, _ in x.bounded.terms
        for q in y.mdim
    ]
    mdim = maximal(cands)
    return ClassNF(k, mdim, reduce_poly(x.bounded * y.bounded, mdim, k))


def full_mdim(x: ClassNF) -> frozenset:
    """Profiles of all directions of the class, bounded monomials included."""
    return maximal(
        list(x.mdim) + [mono_profile(m, x.k) for m, _ in x.bounded.terms]
    )


def eats_rel(x: ClassNF, y: ClassNF) -> bool:
    """Does x absorb y, i.e. x + y = x?

    Holds exactly when every direction of y is dominated by an unbounded
    profile of x.
    """
    if x.k != y.k:
        raise ValueError("mixed group arities")
    return mdim_leq(full_mdim(y), x.mdim)


def eq_unreduced(terms1, terms2, k: int) -> bool:
    """Equality decision straight from two formal generator sums.

    The antichains of unbounded profiles must agree, and every monomial
    of the difference of bounded parts must be dominated by them.
    """

    def split(terms):
        infs, bs = [], []
        for inf, exps, coeff in terms:
            if Fraction(coeff) == 0:
                continue
            if inf > 0:
                infs.append(term_profile(inf, exps, k))
            else:
                mono = tuple((embed_symbol(j), e) for j, e in enumerate(exps, start=1) if e)
                bs.append((mono, Fraction(coeff)))
        return maximal(infs), Poly(tuple(bs))

    m1, p1 = split(terms1)
    m2, p2 = split(terms2)
    if m1 != m2:
        return False
    diff = p1 - p2
    return all(
        any(dominated(mono_profile(m, k), q) for q in m1) for m, _ in diff.terms
    )
