"""Ordered groups Q^k x Z and evaluation of quantifier-free formulas.

An element carries k exact rational coordinates plus one integer
coordinate.  Coordinates are ordered by significance: the rational
coordinate at index k is the most significant, the integer coordinate
(significance 0) is the least.  Comparison is lexicographic, so the
constant 1 = (0, ..., 0; 1) is the minimal positive element and the
group is discretely ordered.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import syntax


@dataclass(frozen=True, slots=True)
class GroupElement:
    """One element of Q^k x Z.

    ``rats`` lists the rational coordinates from significance k down to
    significance 1; ``unit`` is the integer coordinate at significance 0.
    """

    rats: tuple
    unit: int

    def __post_init__(self):
        object.__setattr__(self, "rats", tuple(Fraction(q) for q in self.rats))
        if not isinstance(self.unit, int):
            raise TypeError("integer coordinate must be an int")

    @property
    def k(self):
        return len(self.rats)

    def __add__(self, other):
        self._check(other)
        return GroupElement(
            tuple(a + b for a, b in zip(self.rats, other.rats)),
            self.unit + other.unit,
        )

    def __sub__(self, other):
        self._check(other)
        return GroupElement(
            tuple(a - b for a, b in zip(self.rats, other.rats)),
            self.unit - other.unit,
        )

    def __neg__(self):
        return GroupElement(tuple(-a for a in self.rats), -self.unit)

    def scale(self, n: int):
        """Multiply by an integer scalar."""
        return GroupElement(tuple(a * n for a in self.rats), self.unit * n)

    def _check(self, other):
        if not isinstance(other, GroupElement) or other.k != self.k:
            raise ValueError("mixed group arities")

    def _key(self):
        return self.rats + (Fraction(self.unit),)

    def __lt__(self, other):
        self._check(other)
        return self._key() < other._key()

    def __le__(self, other):
        self._check(other)
        return self._key() <= other._key()

    def __gt__(self, other):
        return not self.__le__(other)

    def __ge__(self, other):
        return not self.__lt__(other)

    def is_zero(self):
        return self.unit == 0 and all(q == 0 for q in self.rats)

    def sig(self):
        """Significance: -1 for 0, else the index of the leading coordinate.

        The integer coordinate has significance 0; the rational coordinate
        stored first has significance k.
        """
        k = self.k
        for i, q in enumerate(self.rats):
            if q != 0:
                return k - i
        return 0 if self.unit != 0 else -1

    def floor_div(self, m: int):
        """Divide with remainder: self = q.scale(m) + r * 1 with r in [0, m).

        Rational coordinates divide exactly; the remainder is the integer
        coordinate reduced modulo m.
        """
        if m <= 0:
            raise ValueError("modulus must be positive")
        r = self.unit % m
        q = GroupElement(tuple(a / m for a in self.rats), (self.unit - r) // m)
        return q, r

    def residue(self, m: int):
        """Residue of this element modulo m, an integer in [0, m)."""
        if m <= 0:
            raise ValueError("modulus must be positive")
        return self.unit % m

    def __repr__(self):
        return f"GroupElement({format_element(self)!r})"


def zero(k: int) -> GroupElement:
    return GroupElement((Fraction(0),) * k, 0)


def one(k: int) -> GroupElement:
    return GroupElement((Fraction(0),) * k, 1)


def from_int(n: int, k: int) -> GroupElement:
    return GroupElement((Fraction(0),) * k, n)


def unit_vector(i: int, k: int) -> GroupElement:
    """The element with a single 1 at significance i (1 <= i <= k)."""
    if not 1 <= i <= k:
        raise ValueError("significance out of range")
    rats = [Fraction(0)] * k
    rats[k - i] = Fraction(1)
    return GroupElement(tuple(rats), 0)


def parse_element(text: str, k: int) -> GroupElement:
    """Parse ``[q_k,...,q_1;z]`` (or a bare integer when k = 0)."""
    s = text.strip()
    if k == 0:
        if s.startswith("[") and s.endswith("]"):
            s = s[1:-1]
            if ";" in s:
                head, _, tail = s.partition(";")
                if head.strip():
                    raise ValueError(f"expected no rational coordinates: {text!r}")
                s = tail
        return GroupElement((), int(s))
    if not (s.startswith("[") and s.endswith("]")):
        raise ValueError(f"expected bracketed element literal: {text!r}")
    body = s[1:-1]
    head, sep, tail = body.rpartition(";")
    if not sep:
        raise ValueError(f"missing ';' in element literal: {text!r}")
    parts = [p.strip() for p in head.split(",")] if head.strip() else []
    if len(parts) != k:
        raise ValueError(f"expected {k} rational coordinates: {text!r}")
    return GroupElement(tuple(Fraction(p) for p in parts), int(tail))


def format_element(a: GroupElement) -> str:
    if a.k == 0:
        return str(a.unit)
    rats = ",".join(str(q) for q in a.rats)
    return f"[{rats};{a.unit}]"


class ModelSpec:
    """A concrete group Q^k x Z together with named constant elements."""

    def __init__(self, k: int = 0, constants: dict | None = None):
        if k < 0:
            raise ValueError("k must be nonnegative")
        self.k = k
        self.constants = {}
        for name, value in (constants or {}).items():
            if isinstance(value, str):
                value = parse_element(value, k)
            elif isinstance(value, int):
                value = from_int(value, k)
            if value.k != k:
                raise ValueError(f"constant {name} has arity {value.k}, expected {k}")
            self.constants[name] = value

    def constant(self, name: str) -> GroupElement:
        try:
            return self.constants[name]
        except KeyError:
            raise KeyError(f"unknown constant {name!r}") from None

    def __repr__(self):
        consts = {n: format_element(v) for n, v in self.constants.items()}
        return f"ModelSpec(k={self.k}, constants={consts})"


def term_value(t: syntax.LinearTerm, point: dict, spec: ModelSpec) -> GroupElement:
    """Evaluate a linear term at a point (variable name -> GroupElement).

    Names missing from the point fall back to the spec's constants.
    """
    acc = from_int(t.literal, spec.k)
    for name, c in t.coeffs:
        v = point.get(name)
        if v is None:
            v = spec.constant(name)
        elif isinstance(v, int):
            v = from_int(v, spec.k)
        if v.k != spec.k:
            raise ValueError(f"value for {name} has wrong arity")
        acc = acc + v.scale(c)
    return acc


def eval_qf(f: syntax.Formula, point: dict, spec: ModelSpec) -> bool:
    """Evaluate a quantifier-free formula at a point."""
    if isinstance(f, syntax.TrueF):
        return True
    if isinstance(f, syntax.FalseF):
        return False
    if isinstance(f, syntax.Atom):
        lhs = term_value(f.lhs, point, spec)
        rhs = term_value(f.rhs, point, spec)
        if f.op == "<":
            return lhs < rhs
        if f.op == "<=":
            return lhs <= rhs
        if f.op == "=":
            return lhs == rhs
        if f.op == "!=":
            return lhs != rhs
        if f.op == ">=":
            return lhs >= rhs
        if f.op == ">":
            return lhs > rhs
        raise ValueError(f"unknown comparison {f.op!r}")
    if isinstance(f, syntax.Cong):
        val = term_value(f.term, point, spec)
        return val.residue(f.modulus) == f.residue % f.modulus
    if isinstance(f, syntax.Not):
        return not eval_qf(f.body, point, spec)
    if isinstance(f, syntax.And):
        return all(eval_qf(g, point, spec) for g in f.args)
    if isinstance(f, syntax.Or):
        return any(eval_qf(g, point, spec) for g in f.args)
    if isinstance(f, syntax.Implies):
        return (not eval_qf(f.lhs, point, spec)) or eval_qf(f.rhs, point, spec)
    raise ValueError("formula is not quantifier free")
