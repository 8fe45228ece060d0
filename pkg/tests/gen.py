"""Shared random generators for the test suite.

Everything takes an explicit random.Random so test runs are
reproducible; seeds live in the tests themselves.
"""

from fractions import Fraction

from grothpres import model, semiring, syntax
from grothpres.syntax import Atom, Cong, LinearTerm


def rand_term(rng, vs, cmax=3, lit=8, keep=0.8):
    t = LinearTerm.const(rng.randint(-lit, lit))
    for v in vs:
        if rng.random() < keep:
            c = rng.choice([i for i in range(-cmax, cmax + 1) if i])
            t = t + LinearTerm.var(v).scale(c)
    return t


def rand_atom(rng, vs, cmax=3, lit=8):
    if rng.random() < 0.72:
        op = rng.choice(["<=", "<", ">=", ">", "=", "!="])
        return Atom(op, rand_term(rng, vs, cmax, lit), rand_term(rng, vs, cmax, lit))
    m = rng.choice([2, 3, 4, 5, 6])
    return Cong(m, rand_term(rng, vs, cmax, lit), rng.randrange(m))


def rand_qf(rng, vs, depth=2, cmax=3, lit=8):
    if depth == 0 or rng.random() < 0.4:
        return rand_atom(rng, vs, cmax, lit)
    kids = [rand_qf(rng, vs, depth - 1, cmax, lit) for _ in range(rng.randint(2, 3))]
    r = rng.random()
    if r < 0.38:
        return syntax.And(tuple(kids))
    if r < 0.76:
        return syntax.Or(tuple(kids))
    if r < 0.88:
        return syntax.Not(kids[0])
    return syntax.Implies(kids[0], kids[1])


def window_atoms(vs, w):
    out = []
    for v in vs:
        x = LinearTerm.var(v)
        out.append(Atom("<=", LinearTerm.const(-w), x))
        out.append(Atom("<=", x, LinearTerm.const(w)))
    return out


def windowed(f, vs, w):
    return syntax.And(tuple([f] + window_atoms(vs, w)))


def int_env(vs, pt, k=0):
    return {v: model.from_int(n, k) for v, n in zip(vs, pt)}


def rand_element(rng, k, sig=None, top=6):
    """A positive group element of the given significance (finite only)."""
    if k == 0:
        return model.from_int(rng.randint(1, top), 0)
    if sig is None:
        sig = rng.randint(1, k)
    if not 1 <= sig <= k:
        raise ValueError("finite elements have significance 1..k")
    rats = [Fraction(0)] * k
    lead = k - sig
    rats[lead] = Fraction(rng.randint(1, top), rng.choice([1, 1, 2, 3]))
    for i in range(lead + 1, k):
        rats[i] = Fraction(rng.randint(-top, top), rng.choice([1, 2, 3]))
    return model.GroupElement(tuple(rats), rng.randint(-top, top))


def rand_monomial(rng, k, max_inf=3, max_exp=3):
    inf = rng.randint(0, max_inf)
    exps = tuple(rng.randint(0, max_exp) for _ in range(k))
    if inf == 0 and not any(exps):
        # a bare constant: only whole multiples of the one-point class exist
        coeff = Fraction(rng.randint(1, 4))
    else:
        coeff = Fraction(rng.randint(1, 4), rng.choice([1, 1, 2, 3]))
    return (inf, exps, coeff)


def rand_monomials(rng, k, n=None):
    n = rng.randint(1, 5) if n is None else n
    return [rand_monomial(rng, k) for _ in range(n)]


def rand_class(rng, k):
    return semiring.canonicalize(rand_monomials(rng, k), k)


def scramble_monomials(rng, terms, k):
    """A different generator list with the same canonical class."""
    out = list(terms)
    rng.shuffle(out)
    if out and rng.random() < 0.7:
        inf, exps, coeff = out.pop(rng.randrange(len(out)))
        if inf == 0 and coeff != 1:
            cut = Fraction(coeff, 2)
            out += [(inf, exps, cut), (inf, exps, coeff - cut)]
        else:
            out += [(inf, exps, coeff)]
    infs = [t for t in out if t[0] > 0]
    if infs and rng.random() < 0.7:
        inf, exps, _ = rng.choice(infs)
        if inf > 1 or any(exps):
            drop = rng.randrange(k + 1) if k else 0
            if drop == 0 and inf > 1:
                out.append((rng.randint(1, inf - 1), exps, Fraction(1)))
            elif drop and exps[drop - 1]:
                low = tuple(
                    e - (1 if j == drop - 1 else 0) for j, e in enumerate(exps, 1)
                )
                out.append((inf, low, Fraction(2)))
    return out
