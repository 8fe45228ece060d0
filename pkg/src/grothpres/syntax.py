"""Terms, formulas, parsing, printing, and normalization.

The formula language is first-order linear arithmetic with ordering and
congruence atoms:

    formula := quant | impl
    quant   := ("E" | "A") ident "." formula
    impl    := disj ["->" impl]
    disj    := conj {"|" conj}
    conj    := neg {"&" neg}
    neg     := "!" neg | "(" formula ")" | atom
    atom    := term cmp term | term "%" nat "=" nat | "true" | "false"
    cmp     := "<" | "<=" | "=" | "!=" | ">=" | ">"
    term    := ["-"] prod {("+" | "-") prod}
    prod    := [int "*"] (ident | int | "(" term ")")

``E``, ``A``, ``true``, ``false`` are reserved words.  Multiplication is
only by integer literals, so every term is an integer-linear combination
of names plus an integer constant.
"""

from __future__ import annotations

from dataclasses import dataclass

RESERVED = {"E", "A", "true", "false"}


# ---------------------------------------------------------------------------
# linear terms


@dataclass(frozen=True, slots=True)
class LinearTerm:
    """An integer-linear combination of names plus an integer literal.

    ``coeffs`` is a name-sorted tuple of (name, nonzero int) pairs; names
    may denote variables or declared constants, the distinction is made
    by whoever evaluates the term.
    """

    coeffs: tuple = ()
    literal: int = 0

    def __post_init__(self):
        items = tuple(sorted((n, int(c)) for n, c in self.coeffs if int(c) != 0))
        object.__setattr__(self, "coeffs", items)
        object.__setattr__(self, "literal", int(self.literal))

    @staticmethod
    def of(coeffs=None, literal=0) -> "LinearTerm":
        return LinearTerm(tuple((coeffs or {}).items()), literal)

    @staticmethod
    def var(name: str) -> "LinearTerm":
        return LinearTerm(((name, 1),), 0)

    @staticmethod
    def const(n: int) -> "LinearTerm":
        return LinearTerm((), n)

    def coeff(self, name: str) -> int:
        for n, c in self.coeffs:
            if n == name:
                return c
        return 0

    def names(self):
        return frozenset(n for n, _ in self.coeffs)

    def is_constant(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "LinearTerm") -> "LinearTerm":
        acc = dict(self.coeffs)
        for n, c in other.coeffs:
            acc[n] = acc.get(n, 0) + c
        return LinearTerm(tuple(acc.items()), self.literal + other.literal)

    def __sub__(self, other: "LinearTerm") -> "LinearTerm":
        return self + other.scale(-1)

    def __neg__(self) -> "LinearTerm":
        return self.scale(-1)

    def scale(self, n: int) -> "LinearTerm":
        if n == 0:
            return ZERO
        return LinearTerm(tuple((v, c * n) for v, c in self.coeffs), self.literal * n)

    def plus(self, n: int) -> "LinearTerm":
        return LinearTerm(self.coeffs, self.literal + n)

    def drop(self, name: str) -> "LinearTerm":
        return LinearTerm(tuple(p for p in self.coeffs if p[0] != name), self.literal)

    def subs(self, name: str, replacement: "LinearTerm") -> "LinearTerm":
        c = self.coeff(name)
        if c == 0:
            return self
        return self.drop(name) + replacement.scale(c)

    def rename(self, mapping: dict) -> "LinearTerm":
        if not any(n in mapping for n, _ in self.coeffs):
            return self
        acc = {}
        for n, c in self.coeffs:
            m = mapping.get(n, n)
            acc[m] = acc.get(m, 0) + c
        return LinearTerm(tuple(acc.items()), self.literal)

    def __str__(self):
        if not self.coeffs:
            return str(self.literal)
        parts = []
        for name, c in self.coeffs:
            piece = name if abs(c) == 1 else f"{abs(c)}*{name}"
            if not parts:
                parts.append(piece if c > 0 else f"-{piece}")
            else:
                parts.append(f"{'+' if c > 0 else '-'} {piece}")
        if self.literal != 0:
            parts.append(f"{'+' if self.literal > 0 else '-'} {abs(self.literal)}")
        return " ".join(parts)

    def __repr__(self):
        return f"LinearTerm<{self}>"


ZERO = LinearTerm((), 0)
ONE = LinearTerm((), 1)


# ---------------------------------------------------------------------------
# formulas


@dataclass(frozen=True, slots=True)
class TrueF:
    def __repr__(self):
        return "true"


@dataclass(frozen=True, slots=True)
class FalseF:
    def __repr__(self):
        return "false"


@dataclass(frozen=True, slots=True)
class Atom:
    """Comparison ``lhs op rhs`` with op one of < <= = != >= >."""

    op: str
    lhs: LinearTerm
    rhs: LinearTerm

    def __repr__(self):
        return f"({self.lhs} {self.op} {self.rhs})"


@dataclass(frozen=True, slots=True)
class Cong:
    """Congruence ``term % modulus = residue``."""

    modulus: int
    term: LinearTerm
    residue: int

    def __repr__(self):
        return f"({self.term} % {self.modulus} = {self.residue})"


@dataclass(frozen=True, slots=True)
class Not:
    body: object

    def __repr__(self):
        return f"!({self.body!r})"


@dataclass(frozen=True, slots=True)
class And:
    args: tuple

    def __repr__(self):
        return "(" + " & ".join(map(repr, self.args)) + ")"


@dataclass(frozen=True, slots=True)
class Or:
    args: tuple

    def __repr__(self):
        return "(" + " | ".join(map(repr, self.args)) + ")"


@dataclass(frozen=True, slots=True)
class Implies:
    lhs: object
    rhs: object

    def __repr__(self):
        return f"({self.lhs!r} -> {self.rhs!r})"


@dataclass(frozen=True, slots=True)
class Exists:
    var: str
    body: object

    def __repr__(self):
        return f"(E {self.var}. {self.body!r})"


@dataclass(frozen=True, slots=True)
class Forall:
    var: str
    body: object

    def __repr__(self):
        return f"(A {self.var}. {self.body!r})"


Formula = (TrueF, FalseF, Atom, Cong, Not, And, Or, Implies, Exists, Forall)

TRUE = TrueF()
FALSE = FalseF()


def conj(args) -> object:
    """And with flattening, constant absorption, and deduplication."""
    out, seen = [], set()
    for a in args:
        if isinstance(a, FalseF):
            return FALSE
        if isinstance(a, TrueF):
            continue
        parts = a.args if isinstance(a, And) else (a,)
        for p in parts:
            if p not in seen:
                seen.add(p)
                out.append(p)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(args) -> object:
    """Or with flattening, constant absorption, and deduplication."""
    out, seen = [], set()
    for a in args:
        if isinstance(a, TrueF):
            return TRUE
        if isinstance(a, FalseF):
            continue
        parts = a.args if isinstance(a, Or) else (a,)
        for p in parts:
            if p not in seen:
                seen.add(p)
                out.append(p)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def le0(t: LinearTerm) -> object:
    """Canonical inequality atom ``t <= 0``."""
    if t.is_constant():
        return TRUE if t.literal <= 0 else FALSE
    return Atom("<=", t, ZERO)


def eq0(t: LinearTerm) -> object:
    """Canonical equality atom ``t = 0``, sign-normalized."""
    if t.is_constant():
        return TRUE if t.literal == 0 else FALSE
    if t.coeffs[0][1] < 0:
        t = -t
    return Atom("=", t, ZERO)


def cong0(m: int, t: LinearTerm) -> object:
    """Canonical congruence ``m divides t``.

    Only the least significant coordinate of a value contributes to its
    residue, so reducing coefficients modulo m is sound here even though
    it changes the term's value.  A common factor of m and all
    coefficients either refutes the atom or divides out of it.
    """
    from math import gcd

    if m <= 0:
        raise ValueError("modulus must be positive")
    while True:
        if m == 1:
            return TRUE
        coeffs = {n: c % m for n, c in t.coeffs if c % m != 0}
        lit = t.literal % m
        if not coeffs:
            return TRUE if lit == 0 else FALSE
        g = gcd(m, *coeffs.values())
        if g == 1:
            return Cong(m, LinearTerm.of(coeffs, lit), 0)
        if lit % g != 0:
            return FALSE
        m //= g
        t = LinearTerm.of({n: c // g for n, c in coeffs.items()}, lit // g)


_FLIP = {"<": ">=", "<=": ">", "=": "!=", "!=": "=", ">": "<=", ">=": "<"}


def atom0(op: str, d: LinearTerm):
    """Canonical form of ``d op 0``: an inequality, equality, or disjunction."""
    if op == "<=":
        return le0(d)
    if op == "<":
        return le0(d.plus(1))
    if op == ">=":
        return le0(-d)
    if op == ">":
        return le0((-d).plus(1))
    if op == "=":
        return eq0(d)
    if op == "!=":
        return disj([le0(d.plus(1)), le0((-d).plus(1))])
    raise ValueError(f"unknown comparison {op!r}")


def free_names(f) -> frozenset:
    if isinstance(f, (TrueF, FalseF)):
        return frozenset()
    if isinstance(f, Atom):
        return f.lhs.names() | f.rhs.names()
    if isinstance(f, Cong):
        return f.term.names()
    if isinstance(f, Not):
        return free_names(f.body)
    if isinstance(f, (And, Or)):
        out = frozenset()
        for a in f.args:
            out |= free_names(a)
        return out
    if isinstance(f, Implies):
        return free_names(f.lhs) | free_names(f.rhs)
    if isinstance(f, (Exists, Forall)):
        return free_names(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def all_names(f) -> frozenset:
    if isinstance(f, (Exists, Forall)):
        return all_names(f.body) | {f.var}
    if isinstance(f, Not):
        return all_names(f.body)
    if isinstance(f, (And, Or)):
        out = frozenset()
        for a in f.args:
            out |= all_names(a)
        return out
    if isinstance(f, Implies):
        return all_names(f.lhs) | all_names(f.rhs)
    return free_names(f)


def is_qf(f) -> bool:
    if isinstance(f, (TrueF, FalseF, Atom, Cong)):
        return True
    if isinstance(f, Not):
        return is_qf(f.body)
    if isinstance(f, (And, Or)):
        return all(is_qf(a) for a in f.args)
    if isinstance(f, Implies):
        return is_qf(f.lhs) and is_qf(f.rhs)
    return False


def subst(f, name: str, t: LinearTerm):
    """Substitute a term for a name in a quantifier-free formula."""
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Atom):
        return atom0(f.op, (f.lhs - f.rhs).subs(name, t))
    if isinstance(f, Cong):
        return cong0(f.modulus, f.term.subs(name, t).plus(-f.residue))
    if isinstance(f, Not):
        return negate_qf(subst(f.body, name, t))
    if isinstance(f, And):
        return conj([subst(a, name, t) for a in f.args])
    if isinstance(f, Or):
        return disj([subst(a, name, t) for a in f.args])
    raise TypeError(f"cannot substitute into {f!r}")


def negate_qf(f):
    """Negation of a quantifier-free formula, kept in canonical atoms."""
    if isinstance(f, TrueF):
        return FALSE
    if isinstance(f, FalseF):
        return TRUE
    if isinstance(f, Atom):
        return atom0(_FLIP[f.op], f.lhs - f.rhs)
    if isinstance(f, Cong):
        t = f.term.plus(-f.residue)
        return disj([cong0(f.modulus, t.plus(-r)) for r in range(1, f.modulus)])
    if isinstance(f, Not):
        return f.body
    if isinstance(f, And):
        return disj([negate_qf(a) for a in f.args])
    if isinstance(f, Or):
        return conj([negate_qf(a) for a in f.args])
    if isinstance(f, Implies):
        return conj([f.lhs, negate_qf(f.rhs)])
    raise TypeError(f"cannot negate {f!r}")


# ---------------------------------------------------------------------------
# normalization


def normalize(f, reserved=()):
    """Rewrite a formula into the canonical prenex-free normal form.

    The result contains no Forall, no Implies, and negation only directly
    over an existential quantifier.  Every atom is one of ``t <= 0``,
    ``t = 0``, or ``t % m = 0``.  Bound variables are renamed apart (to
    q1, q2, ...) from each other and from all free or reserved names.
    """
    used = set(all_names(f)) | set(reserved) | RESERVED
    counter = [0]

    def fresh():
        while True:
            counter[0] += 1
            name = f"q{counter[0]}"
            if name not in used:
                used.add(name)
                return name

    def walk(f, env, pos):
        if isinstance(f, TrueF):
            return TRUE if pos else FALSE
        if isinstance(f, FalseF):
            return FALSE if pos else TRUE
        if isinstance(f, Atom):
            op = f.op if pos else _FLIP[f.op]
            return atom0(op, (f.lhs - f.rhs).rename(env))
        if isinstance(f, Cong):
            t = f.term.rename(env).plus(-f.residue)
            if pos:
                return cong0(f.modulus, t)
            if f.modulus == 1:
                return FALSE
            return disj([cong0(f.modulus, t.plus(-r)) for r in range(1, f.modulus)])
        if isinstance(f, Not):
            return walk(f.body, env, not pos)
        if isinstance(f, And):
            parts = [walk(a, env, pos) for a in f.args]
            return conj(parts) if pos else disj(parts)
        if isinstance(f, Or):
            parts = [walk(a, env, pos) for a in f.args]
            return disj(parts) if pos else conj(parts)
        if isinstance(f, Implies):
            if pos:
                return disj([walk(f.lhs, env, False), walk(f.rhs, env, True)])
            return conj([walk(f.lhs, env, True), walk(f.rhs, env, False)])
        if isinstance(f, Exists):
            v = fresh()
            body = walk(f.body, {**env, f.var: v}, True)
            inner = quantify(v, body)
            return inner if pos else neg_quant(inner)
        if isinstance(f, Forall):
            v = fresh()
            body = walk(f.body, {**env, f.var: v}, False)
            inner = quantify(v, body)
            return neg_quant(inner) if pos else inner
        raise TypeError(f"not a formula: {f!r}")

    def quantify(v, body):
        if isinstance(body, (TrueF, FalseF)):
            return body
        if v not in free_names(body):
            return body
        return Exists(v, body)

    def neg_quant(f):
        if isinstance(f, TrueF):
            return FALSE
        if isinstance(f, FalseF):
            return TRUE
        if is_qf(f):
            return negate_qf(f)
        return Not(f)

    return walk(f, {}, True)


# ---------------------------------------------------------------------------
# parsing


class ParseError(ValueError):
    def __init__(self, message, pos):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


_SYMBOLS = ("->", "<=", ">=", "!=", "<", ">", "=", "!", "&", "|", "+", "-", "*", "%", "(", ")", ".")


def _tokenize(text: str):
    toks = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("int", text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("ident", text[i:j], i))
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                toks.append(("sym", sym, i))
                i += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", i)
    toks.append(("eof", "", n))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def accept(self, value):
        kind, val, _ = self.peek()
        if kind in ("sym", "ident") and val == value:
            self.i += 1
            return True
        return False

    def expect(self, value):
        kind, val, pos = self.next()
        if val != value:
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def formula(self):
        kind, val, _ = self.peek()
        if kind == "ident" and val in ("E", "A"):
            self.next()
            nkind, name, npos = self.next()
            if nkind != "ident" or name in RESERVED:
                raise ParseError("expected a variable name after quantifier", npos)
            self.expect(".")
            body = self.formula()
            return Exists(name, body) if val == "E" else Forall(name, body)
        return self.impl()

    def impl(self):
        lhs = self.disj()
        if self.accept("->"):
            return Implies(lhs, self.impl())
        return lhs

    def disj(self):
        parts = [self.conj()]
        while self.accept("|"):
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self):
        parts = [self.neg()]
        while self.accept("&"):
            parts.append(self.neg())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def neg(self):
        if self.accept("!"):
            return Not(self.neg())
        kind, val, _ = self.peek()
        if kind == "sym" and val == "(":
            # "(" may open a subformula or a parenthesized term; try the
            # atom reading first and fall back on failure.
            mark = self.i
            try:
                return self.atom()
            except ParseError:
                self.i = mark
            self.expect("(")
            f = self.formula()
            self.expect(")")
            return f
        return self.atom()

    def atom(self):
        kind, val, pos = self.peek()
        if kind == "ident" and val == "true":
            self.next()
            return TRUE
        if kind == "ident" and val == "false":
            self.next()
            return FALSE
        lhs = self.term()
        kind, val, pos = self.next()
        if val == "%":
            mkind, mval, mpos = self.next()
            if mkind != "int":
                raise ParseError("expected a modulus", mpos)
            m = int(mval)
            if m == 0:
                raise ParseError("modulus must be positive", mpos)
            self.expect("=")
            rkind, rval, rpos = self.next()
            if rkind != "int":
                raise ParseError("expected a residue", rpos)
            if m == 1:
                return TRUE
            return Cong(m, lhs, int(rval) % m)
        if val in ("<", "<=", "=", "!=", ">=", ">"):
            return Atom(val, lhs, self.term())
        raise ParseError(f"expected a comparison, found {val or 'end of input'!r}", pos)

    def term(self):
        negate = self.accept("-")
        t = self.prod()
        if negate:
            t = -t
        while True:
            if self.accept("+"):
                t = t + self.prod()
            elif self.accept("-"):
                t = t - self.prod()
            else:
                return t

    def prod(self):
        kind, val, _ = self.peek()
        if kind == "int":
            self.next()
            n = int(val)
            if self.accept("*"):
                return self.unit().scale(n)
            return LinearTerm.const(n)
        return self.unit()

    def unit(self):
        kind, val, pos = self.next()
        if kind == "ident":
            if val in RESERVED:
                raise ParseError(f"{val!r} is a reserved word", pos)
            return LinearTerm.var(val)
        if kind == "int":
            return LinearTerm.const(int(val))
        if val == "(":
            t = self.term()
            self.expect(")")
            return t
        raise ParseError(f"expected a term, found {val or 'end of input'!r}", pos)


def parse(text: str):
    """Parse a formula from text."""
    p = _Parser(text)
    f = p.formula()
    kind, val, pos = p.peek()
    if kind != "eof":
        raise ParseError(f"unexpected trailing input {val!r}", pos)
    return f


# ---------------------------------------------------------------------------
# printing

_LEVEL = {TrueF: 5, FalseF: 5, Atom: 5, Cong: 5, Not: 4, And: 3, Or: 2, Implies: 1, Exists: 0, Forall: 0}


def format_formula(f) -> str:
    """Render a formula as parseable text; parse(format_formula(f)) == f."""
    return _fmt(f, 0)


def _fmt(f, minlevel):
    s = _raw(f)
    if _LEVEL[type(f)] < minlevel:
        return f"({s})"
    return s


def _raw(f):
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Atom):
        return f"{f.lhs} {f.op} {f.rhs}"
    if isinstance(f, Cong):
        return f"{f.term} % {f.modulus} = {f.residue}"
    if isinstance(f, Not):
        return "!" + _fmt(f.body, 4)
    if isinstance(f, And):
        return " & ".join(_fmt(a, 4) for a in f.args)
    if isinstance(f, Or):
        return " | ".join(_fmt(a, 3) for a in f.args)
    if isinstance(f, Implies):
        return f"{_fmt(f.lhs, 2)} -> {_fmt(f.rhs, 1)}"
    if isinstance(f, Exists):
        return f"E {f.var}. {_fmt(f.body, 0)}"
    if isinstance(f, Forall):
        return f"A {f.var}. {_fmt(f.body, 0)}"
    raise TypeError(f"not a formula: {f!r}")
