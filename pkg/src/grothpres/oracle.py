"""Independent integer-model oracle.

Formulas over Z are compiled to finite automata that read binary
encodings least-significant-bit first, one track per variable.  Boolean
connectives become automaton products and complements, quantifiers
become projections (with a sign split so each track carries a natural
number).  None of the quantifier-elimination pipeline is involved, so
results from the two sides are independent checks on each other.

Only the k = 0 model is supported; named constants must have integer
values.
"""

from __future__ import annotations

import itertools
from math import log2

from . import model, syntax
from .syntax import (
    And,
    Atom,
    Cong,
    Exists,
    FalseF,
    Forall,
    Implies,
    LinearTerm,
    Not,
    Or,
    TrueF,
)


class OracleError(ValueError):
    pass


class Unstable(OracleError):
    """Growth estimation did not stabilize over the given boxes."""


class _Unbounded:
    __slots__ = ()

    def __repr__(self):
        return "Unbounded"


UNBOUNDED = _Unbounded()


_MAX_STATES = 200_000
_EVAL_SHIFT = 1 << 22


class NFA:
    """Automaton over letters 0 .. 2**tracks - 1 (bit i = track i)."""

    __slots__ = ("delta", "init", "finals", "nletters")

    def __init__(self, delta, init, finals, nletters):
        self.delta = delta
        self.init = frozenset(init)
        self.finals = frozenset(finals)
        self.nletters = nletters

    def run(self, word) -> bool:
        cur = self.init
        for letter in word:
            if not cur:
                return False
            cur = frozenset().union(*(self.delta[q][letter] for q in cur))
        return bool(cur & self.finals)


def _guard(n):
    if n > _MAX_STATES:
        raise OracleError("automaton too large")


def _dots(coeffs, nt):
    return [
        sum(coeffs[i] for i in range(nt) if letter >> i & 1)
        for letter in range(1 << nt)
    ]


def _atom_nfa(kind, coeffs, rhs, nt, m=0):
    """DFA for sum(c*x) <= rhs, = rhs, or = rhs (mod m), x natural."""
    dots = _dots(coeffs, nt)
    nl = 1 << nt
    start = (rhs % m, 1 % m) if kind == "cong" else rhs
    ids = {start: 0}
    order = [start]
    delta = []
    i = 0
    while i < len(order):
        s = order[i]
        i += 1
        row = []
        for letter in range(nl):
            if kind == "le":
                succ = (s - dots[letter]) >> 1
            elif kind == "eq":
                d = s - dots[letter]
                succ = d >> 1 if d % 2 == 0 else None
            else:
                r, w = s
                succ = ((r - dots[letter] * w) % m, 2 * w % m)
            if succ is None:
                row.append(frozenset())
                continue
            if succ not in ids:
                ids[succ] = len(order)
                order.append(succ)
                _guard(len(order))
            row.append(frozenset((ids[succ],)))
        delta.append(row)
    if kind == "le":
        finals = [ids[s] for s in order if s >= 0]
    elif kind == "eq":
        finals = [ids[0]] if 0 in ids else []
    else:
        finals = [ids[s] for s in order if s[0] == 0]
    return NFA(delta, (0,), finals, nl)


def _const_nfa(accept, nl):
    return NFA([[frozenset((0,))] * nl], (0,), (0,) if accept else (), nl)


def _union(a, b):
    off = len(a.delta)
    delta = [list(row) for row in a.delta]
    for row in b.delta:
        delta.append([frozenset(q + off for q in s) for s in row])
    init = set(a.init) | {q + off for q in b.init}
    finals = set(a.finals) | {q + off for q in b.finals}
    return _min_dfa(NFA(delta, init, finals, a.nletters))


def _intersect(a, b):
    nl = a.nletters
    ids = {}
    order = []
    for pair in ((x, y) for x in sorted(a.init) for y in sorted(b.init)):
        ids[pair] = len(order)
        order.append(pair)
    ninit = len(order)
    delta = []
    i = 0
    while i < len(order):
        qa, qb = order[i]
        i += 1
        row = []
        for letter in range(nl):
            succ = set()
            for x in a.delta[qa][letter]:
                for y in b.delta[qb][letter]:
                    if (x, y) not in ids:
                        ids[(x, y)] = len(order)
                        order.append((x, y))
                        _guard(len(order))
                    succ.add(ids[(x, y)])
            row.append(frozenset(succ))
        delta.append(row)
    finals = [
        i for i, (qa, qb) in enumerate(order) if qa in a.finals and qb in b.finals
    ]
    return NFA(delta, range(ninit), finals, nl)


def _determinize(a):
    nl = a.nletters
    start = a.init
    ids = {start: 0}
    order = [start]
    delta = []
    i = 0
    while i < len(order):
        s = order[i]
        i += 1
        row = []
        for letter in range(nl):
            succ = frozenset().union(*(a.delta[q][letter] for q in s)) if s else frozenset()
            if succ not in ids:
                ids[succ] = len(order)
                order.append(succ)
                _guard(len(order))
            row.append(frozenset((ids[succ],)))
        delta.append(row)
    finals = [i for i, s in enumerate(order) if s & a.finals]
    return NFA(delta, (0,), finals, nl)


def _min_dfa(a):
    """Equivalent minimal DFA (Moore partition refinement)."""
    d = _determinize(a)
    nl = d.nletters
    trans = [[next(iter(row[letter])) for letter in range(nl)] for row in d.delta]
    finals = set(d.finals)
    cls = [1 if q in finals else 0 for q in range(len(trans))]
    while True:
        sig = {}
        new = []
        for q in range(len(trans)):
            key = (cls[q], tuple(cls[t] for t in trans[q]))
            if key not in sig:
                sig[key] = len(sig)
            new.append(sig[key])
        if new == cls:
            break
        cls = new
    reps = {}
    for q in range(len(trans)):
        reps.setdefault(cls[q], q)
    delta = [
        [frozenset((cls[trans[reps[c]][letter]],)) for letter in range(nl)]
        for c in range(len(reps))
    ]
    return NFA(delta, (cls[0],), {cls[q] for q in finals}, nl)


def _complement(a):
    d = _min_dfa(a)
    finals = set(range(len(d.delta))) - set(d.finals)
    return NFA(d.delta, d.init, finals, d.nletters)


def _project(a, track):
    bit = 1 << track
    delta = [
        [row[letter & ~bit] | row[letter | bit] for letter in range(a.nletters)]
        for row in a.delta
    ]
    b = NFA(delta, a.init, a.finals, a.nletters)
    return _min_dfa(_pad_close(b))


def _pad_close(a):
    """Make final every state that reaches a final on zero letters."""
    rev = [[] for _ in a.delta]
    for q, row in enumerate(a.delta):
        for q2 in row[0]:
            rev[q2].append(q)
    finals = set(a.finals)
    todo = list(finals)
    while todo:
        q = todo.pop()
        for p in rev[q]:
            if p not in finals:
                finals.add(p)
                todo.append(p)
    return NFA(a.delta, a.init, finals, a.nletters)


# ---------------------------------------------------------------------------
# formula preparation


def _map_terms(f, fn):
    if isinstance(f, Atom):
        return Atom(f.op, fn(f.lhs), fn(f.rhs))
    if isinstance(f, Cong):
        return Cong(f.modulus, fn(f.term), f.residue)
    if isinstance(f, Not):
        return Not(_map_terms(f.body, fn))
    if isinstance(f, And):
        return And(tuple(_map_terms(a, fn) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(_map_terms(a, fn) for a in f.args))
    if isinstance(f, Implies):
        return Implies(_map_terms(f.lhs, fn), _map_terms(f.rhs, fn))
    if isinstance(f, Exists):
        return Exists(f.var, _map_terms(f.body, fn))
    if isinstance(f, Forall):
        return Forall(f.var, _map_terms(f.body, fn))
    return f


def _rename_bound(f, env, used, counter):
    if isinstance(f, (Exists, Forall)):
        counter[0] += 1
        fresh = f"_q{counter[0]}"
        while fresh in used:
            counter[0] += 1
            fresh = f"_q{counter[0]}"
        used.add(fresh)
        body = _rename_bound(f.body, {**env, f.var: fresh}, used, counter)
        return type(f)(fresh, body)
    if isinstance(f, (Atom, Cong)):
        return _map_terms(f, lambda t: t.rename(env)) if env else f
    if isinstance(f, Not):
        return Not(_rename_bound(f.body, env, used, counter))
    if isinstance(f, And):
        return And(tuple(_rename_bound(a, env, used, counter) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(_rename_bound(a, env, used, counter) for a in f.args))
    if isinstance(f, Implies):
        return Implies(
            _rename_bound(f.lhs, env, used, counter),
            _rename_bound(f.rhs, env, used, counter),
        )
    return f


def _flip(f, name):
    minus = LinearTerm.var(name).scale(-1)
    return _map_terms(f, lambda t: t.subs(name, minus))


def _bound_vars(f, acc):
    if isinstance(f, (Exists, Forall)):
        acc.append(f.var)
        _bound_vars(f.body, acc)
    elif isinstance(f, Not):
        _bound_vars(f.body, acc)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            _bound_vars(a, acc)
    elif isinstance(f, Implies):
        _bound_vars(f.lhs, acc)
        _bound_vars(f.rhs, acc)
    return acc


def _build(f, index):
    nl = 1 << len(index)
    if isinstance(f, TrueF):
        return _const_nfa(True, nl)
    if isinstance(f, FalseF):
        return _const_nfa(False, nl)
    if isinstance(f, (Atom, Cong)):
        if isinstance(f, Cong):
            t = f.term
            rhs, kind, m = f.residue - t.literal, "cong", f.modulus
            coeffs = [t.coeff(name) for name in index]
        else:
            t = f.lhs - f.rhs
            coeffs = [t.coeff(name) for name in index]
            m = 0
            if f.op in ("<=", "<"):
                kind, rhs = "le", -t.literal - (f.op == "<")
            elif f.op in (">=", ">"):
                kind, rhs = "le", t.literal - (f.op == ">")
                coeffs = [-c for c in coeffs]
            elif f.op == "=":
                kind, rhs = "eq", -t.literal
            else:
                return _complement(
                    _build(Atom("=", f.lhs, f.rhs), index)
                )
        stray = set(t.names()) - set(index)
        if stray:
            raise OracleError(f"unknown names {sorted(stray)}")
        return _atom_nfa(kind, coeffs, rhs, len(index), m)
    if isinstance(f, Not):
        return _complement(_build(f.body, index))
    if isinstance(f, And):
        autos = [_build(a, index) for a in f.args] or [_const_nfa(True, nl)]
        autos.sort(key=lambda a: len(a.delta))
        cur = autos[0]
        for b in autos[1:]:
            cur = _min_dfa(_intersect(cur, b))
        return cur
    if isinstance(f, Or):
        autos = [_build(a, index) for a in f.args] or [_const_nfa(False, nl)]
        autos.sort(key=lambda a: len(a.delta))
        cur = autos[0]
        for b in autos[1:]:
            cur = _union(cur, b)
        return cur
    if isinstance(f, Implies):
        return _union(_complement(_build(f.lhs, index)), _build(f.rhs, index))
    if isinstance(f, Exists):
        both = Or((f.body, _flip(f.body, f.var)))
        return _project(_build(both, index), index.index(f.var))
    if isinstance(f, Forall):
        return _build(Not(Exists(f.var, Not(f.body))), index)
    raise TypeError(f"unexpected node {f!r}")


class Oracle:
    """Compiled decision procedure for one formula over Z."""

    def __init__(self, f, free_vars, spec=None):
        self.free = tuple(free_vars)
        if spec is not None:
            if spec.k != 0:
                raise OracleError("integer model only")
            for name, val in spec.constants.items():
                c = LinearTerm.const(val.unit)
                f = _map_terms(f, lambda t, n=name, c=c: t.subs(n, c))
        used = set(self.free) | syntax.all_names(f)
        f = _rename_bound(f, {}, used, [0])
        self.formula = f
        self.bound = _bound_vars(f, [])
        stray = syntax.free_names(f) - set(self.free)
        if stray:
            raise OracleError(f"unexpected free names {sorted(stray)}")
        self.tracks = list(self.free) + self.bound
        self._eval_nfa = None

    def _shifted(self, shifts):
        f = self.formula
        for name, s in shifts.items():
            if s:
                t = LinearTerm.var(name).plus(s)
                f = _map_terms(f, lambda u, n=name, t=t: u.subs(n, t))
        return f

    def eval(self, point) -> bool:
        """Truth at one integer point (|values| below 2**22)."""
        if self._eval_nfa is None:
            shifted = self._shifted({v: -_EVAL_SHIFT for v in self.free})
            self._eval_nfa = _build(shifted, self.tracks)
        length = _EVAL_SHIFT.bit_length() + 2
        vals = []
        for v in self.free:
            x = point[v] + _EVAL_SHIFT
            if not 0 <= x < 1 << (length - 1):
                raise OracleError("point out of range")
            vals.append(x)
        word = [
            sum((x >> t & 1) << i for i, x in enumerate(vals))
            for t in range(length)
        ]
        return self._eval_nfa.run(word)

    def _window_build(self, window):
        parts = [self.formula]
        shifts = {}
        span = 0
        for v in self.free:
            lo, hi = window[v]
            if hi < lo:
                return None
            x = LinearTerm.var(v)
            parts.append(Atom("<=", LinearTerm.const(lo), x))
            parts.append(Atom("<=", x, LinearTerm.const(hi)))
            shifts[v] = lo
            span = max(span, hi - lo)
        f = And(tuple(parts))
        for name, s in shifts.items():
            if s:
                t = LinearTerm.var(name).plus(s)
                f = _map_terms(f, lambda u, n=name, t=t: u.subs(n, t))
        return _build(f, self.tracks), span.bit_length() + 1, shifts

    def count_window(self, window) -> int:
        """Number of solutions with each free var in its [lo, hi] window."""
        built = self._window_build(window)
        if built is None:
            return 0
        nfa, length, _ = built
        letters = range(1 << len(self.free))
        cur = {nfa.init: 1}
        for _ in range(length):
            nxt = {}
            for s, c in cur.items():
                for letter in letters:
                    succ = (
                        frozenset().union(*(nfa.delta[q][letter] for q in s))
                        if s
                        else frozenset()
                    )
                    nxt[succ] = nxt.get(succ, 0) + c
            cur = nxt
        return sum(c for s, c in cur.items() if s & nfa.finals)

    def counts_by(self, window, section_vars) -> dict:
        """Solution counts grouped by the values of some coordinates.

        One automaton pass over the whole window; returns a dict from
        section-value tuples to the count over the remaining
        coordinates.  Tuples with count zero may be absent.
        """
        built = self._window_build(window)
        if built is None:
            return {}
        nfa, length, shifts = built
        sidx = [self.free.index(v) for v in section_vars]
        letters = range(1 << len(self.free))
        cur = {(tuple(0 for _ in sidx), nfa.init): 1}
        for t in range(length):
            nxt = {}
            for (vals, s), c in cur.items():
                for letter in letters:
                    succ = frozenset().union(*(nfa.delta[q][letter] for q in s))
                    if not succ:
                        continue
                    nv = tuple(
                        v | ((letter >> i & 1) << t) for v, i in zip(vals, sidx)
                    )
                    key = (nv, succ)
                    nxt[key] = nxt.get(key, 0) + c
            cur = nxt
        out = {}
        for (vals, s), c in cur.items():
            if s & nfa.finals:
                key = tuple(v + shifts[sv] for v, sv in zip(vals, section_vars))
                out[key] = out.get(key, 0) + c
        return out


def _pick_vars(f, vars, spec):
    if vars is not None:
        return tuple(vars)
    names = set(syntax.free_names(f))
    if spec is not None:
        names -= set(spec.constants)
    return tuple(sorted(names))


def enumerate_box(f, bound, spec=None, vars=None) -> set:
    """All solutions with every coordinate in [-bound, bound].

    Tuples follow `vars` (default: sorted free names).  Exhaustive
    point-by-point evaluation, so keep the box small.
    """
    vs = _pick_vars(f, vars, spec)
    o = Oracle(f, vs, spec)
    out = set()
    for pt in itertools.product(range(-bound, bound + 1), repeat=len(vs)):
        if o.eval(dict(zip(vs, pt))):
            out.add(pt)
    return out


def brute_count(f, bound, spec=None, vars=None):
    """Solution count in the box, or UNBOUNDED if it grows to box 2*bound."""
    vs = _pick_vars(f, vars, spec)
    o = Oracle(f, vs, spec)
    if not vs:
        return 1 if o.eval({}) else 0
    c1 = o.count_window({v: (-bound, bound) for v in vs})
    c2 = o.count_window({v: (-2 * bound, 2 * bound) for v in vs})
    return c1 if c1 == c2 else UNBOUNDED


def growth_exponent(f, spec=None, vars=None, boxes=(16, 32, 64, 128), tol=0.15):
    """Box-counting growth exponent.

    Returns round(log2 ratio) once stable across three consecutive
    doublings within `tol`; raises Unstable otherwise (including any
    zero count, where ratios are undefined).
    """
    vs = _pick_vars(f, vars, spec)
    o = Oracle(f, vs, spec)
    counts = [o.count_window({v: (-b, b) for v in vs}) for b in boxes]
    if 0 in counts:
        raise Unstable(f"zero count in boxes {boxes}")
    ratios = [log2(b / a) for a, b in zip(counts, counts[1:])]
    for i in range(len(ratios) - 2):
        window = ratios[i : i + 3]
        d = round(window[-1])
        if all(abs(r - d) <= tol for r in window):
            return d
    raise Unstable(f"ratios {[round(r, 3) for r in ratios]} did not settle")
