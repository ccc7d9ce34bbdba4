"""Terms over a signature, substitution and first-order matching.

Terms are hash-consed: structurally equal terms (indices compared modulo
their polynomial normal form) are the same Python object, so equality and
hashing are identity based and evaluation can memoize on shared subterms.
"""
from __future__ import annotations

import weakref
from functools import lru_cache
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping

from . import alphaexpr as ax
from .alphaexpr import AlphaExpr, Param, PolyNF


@dataclass(frozen=True)
class OpDecl:
    name: str
    arity: int
    nindex: int = 0


class SignatureError(ValueError):
    pass


@dataclass
class Signature:
    ops: dict = field(default_factory=dict)

    def declare(self, name: str, arity: int, nindex: int = 0) -> OpDecl:
        if name in self.ops:
            raise SignatureError(f"operator {name} declared twice")
        if arity < 0 or nindex < 0:
            raise SignatureError(f"operator {name}: negative arity or index count")
        decl = OpDecl(name, arity, nindex)
        self.ops[name] = decl
        return decl

    def __contains__(self, name) -> bool:
        return name in self.ops

    def __getitem__(self, name) -> OpDecl:
        return self.ops[name]

    def copy(self) -> "Signature":
        return Signature(dict(self.ops))

    def check(self, t: "Term") -> None:
        """Raise SignatureError unless every operator node of ``t`` fits its declaration."""
        for _, s in t.subterms():
            if isinstance(s, Op):
                d = self.ops.get(s.name)
                if d is None:
                    raise SignatureError(f"unknown operator {s.name}")
                if d.arity != len(s.args) or d.nindex != len(s.indices):
                    raise SignatureError(
                        f"{s.name} expects {d.nindex} indices and {d.arity} arguments, "
                        f"got {len(s.indices)} and {len(s.args)}"
                    )


# --------------------------------------------------------------------------
# terms


class Term:
    __slots__ = ()

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __str__(self):
        return format_term(self)

    def __repr__(self):
        return f"<{format_term(self)}>"

    def subterms(self, pos: tuple = ()) -> Iterator[tuple]:
        """Yield ``(position, subterm)`` in pre-order."""
        yield pos, self
        if isinstance(self, Op):
            for i, a in enumerate(self.args):
                yield from a.subterms(pos + (i,))


class Var(Term):
    __slots__ = ("name", "__weakref__")
    _table: "weakref.WeakValueDictionary[str, Var]" = weakref.WeakValueDictionary()

    def __new__(cls, name: str):
        t = cls._table.get(name)
        if t is None:
            t = object.__new__(cls)
            object.__setattr__(t, "name", name)
            cls._table[name] = t
        return t

    def __reduce__(self):
        return (Var, (self.name,))

    @property
    def free_vars(self) -> frozenset:
        return frozenset((self.name,))

    @property
    def size(self) -> int:
        return 1


_EMPTY: frozenset = frozenset()


_ATOMIC = (ax.Lit, ax.InputAtom, Param)


def _index(e) -> AlphaExpr:
    if type(e) in _ATOMIC:
        return e
    e = ax.as_expr(e)
    if type(e) in _ATOMIC or (type(e) is ax.UFun and not e.args):
        return e
    return ax.canonical(e)


def _index_key(e):
    # Fraction hashing is slow; literals are keyed by their integer pair
    if type(e) is ax.Lit:
        v = e.value
        return (v.numerator, v.denominator)
    return e


class Op(Term):
    """Operator node ``name[indices](args)``; indices are kept in canonical form."""

    __slots__ = ("name", "indices", "args", "_fv", "_size", "__weakref__")
    _table: "weakref.WeakValueDictionary[tuple, Op]" = weakref.WeakValueDictionary()

    def __new__(cls, name: str, indices=(), args=()):
        indices = tuple(_index(e) for e in indices)
        args = tuple(args)
        key = (name, tuple(_index_key(e) for e in indices), args)
        t = cls._table.get(key)
        if t is None:
            t = object.__new__(cls)
            object.__setattr__(t, "name", name)
            object.__setattr__(t, "indices", indices)
            object.__setattr__(t, "args", args)
            fv = _EMPTY
            for a in args:
                if a.free_vars:
                    fv = fv | a.free_vars
            object.__setattr__(t, "_fv", fv)
            object.__setattr__(t, "_size", 1 + sum(a.size for a in args))
            cls._table[key] = t
        return t

    def __reduce__(self):
        return (Op, (self.name, self.indices, self.args))

    @property
    def free_vars(self) -> frozenset:
        return self._fv

    @property
    def size(self) -> int:
        """Tree size (shared subterms counted once per occurrence)."""
        return self._size


def op(name: str, *args, idx=()) -> Op:
    """Shorthand: ``op("plus", X, Y)``, ``op("lit", idx=[3])``."""
    return Op(name, idx, args)


def free_vars(t: Term) -> frozenset:
    return t.free_vars


def is_closed(t: Term) -> bool:
    return not t.free_vars


def term_params(t: Term) -> set:
    """Names of alphabet parameters occurring in the indices of ``t``."""
    out: set = set()
    for _, s in t.subterms():
        if isinstance(s, Op):
            for e in s.indices:
                out |= {p.name for p in ax.leaves(e, Param)}
    return out


def term_atoms(t: Term) -> list:
    """Input atoms occurring in indices, in order of first occurrence."""
    seen: dict = {}
    for _, s in t.subterms():
        if isinstance(s, Op):
            for e in s.indices:
                for a in _ordered_leaves(e, ax.InputAtom):
                    seen.setdefault(a, None)
    return list(seen)


def _ordered_leaves(e, kind):
    if isinstance(e, kind):
        yield e
    for c in ax.children(e):
        yield from _ordered_leaves(c, kind)


def subterm_at(t: Term, pos: tuple) -> Term:
    for i in pos:
        t = t.args[i]
    return t


def replace_at(t: Term, pos: tuple, new: Term) -> Term:
    if not pos:
        return new
    i = pos[0]
    args = list(t.args)
    args[i] = replace_at(args[i], pos[1:], new)
    return Op(t.name, t.indices, args)


# --------------------------------------------------------------------------
# substitution


def substitute(t: Term, theta: Mapping[str, Term], params: Mapping[str, AlphaExpr] = None) -> Term:
    """Simultaneous substitution of term variables (and optionally alphabet parameters).

    Unmapped variables stay as they are.
    """
    if not theta and not params:
        return t
    memo: dict = {}

    def go(s: Term) -> Term:
        r = memo.get(s)
        if r is not None:
            return r
        if isinstance(s, Var):
            r = theta.get(s.name, s)
        elif not params and not (s.free_vars & theta.keys()):
            r = s
        else:
            idx = s.indices
            if params:
                idx = tuple(ax.substitute_params(e, params) for e in idx)
            r = Op(s.name, idx, [go(a) for a in s.args])
        memo[s] = r
        return r

    return go(t)


def map_indices(t: Term, fn) -> Term:
    """Apply ``fn`` to every index expression of ``t``."""
    memo: dict = {}

    def go(s):
        r = memo.get(s)
        if r is None:
            if isinstance(s, Var):
                r = s
            else:
                r = Op(s.name, [fn(e) for e in s.indices], [go(a) for a in s.args])
            memo[s] = r
        return r

    return go(t)


# --------------------------------------------------------------------------
# matching


@dataclass(frozen=True)
class Match:
    """Result of a successful match: a term substitution and a parameter assignment."""

    subst: dict
    params: dict

    def apply(self, t: Term) -> Term:
        return substitute(t, self.subst, self.params)


def match_term(pattern: Term, subject: Term):
    """Most general ``Match`` with ``apply(pattern) == subject``, or None."""
    return match_pair((pattern,), (subject,))


def match_pair(patterns: tuple, subjects: tuple):
    """One ``Match`` that closes every component simultaneously, or None.

    Parameters of the patterns are renamed apart first, so a subject may
    mention parameters with the same names without being confused with them.
    """
    theta: dict = {}
    constraints: list = []
    for p, s in zip(patterns, subjects):
        if not _match(_fresh(p), s, theta, constraints):
            return None
    params = _solve(constraints)
    if params is None:
        return None
    return Match(theta, {k[len(_FRESH):]: v for k, v in params.items()})


_FRESH = "?"


@lru_cache(maxsize=4096)
def _fresh(t: Term) -> Term:
    names = term_params(t)
    if not names:
        return t
    ren = {n: Param(_FRESH + n) for n in names}
    return map_indices(t, lambda e: ax.canonical(ax.substitute_params(e, ren)))


def _match(p: Term, s: Term, theta: dict, constraints: list) -> bool:
    if isinstance(p, Var):
        bound = theta.get(p.name)
        if bound is None:
            theta[p.name] = s
            return True
        return bound is s
    if not isinstance(s, Op) or s.name != p.name or len(s.args) != len(p.args):
        return False
    if len(s.indices) != len(p.indices):
        return False
    for pe, se in zip(p.indices, s.indices):
        if pe is se or pe == se:
            continue
        constraints.append((pe, se))
    return all(_match(pa, sa, theta, constraints) for pa, sa in zip(p.args, s.args))


def _solve(constraints: list):
    """Assign pattern parameters so that each ``pattern_index == subject_index`` holds.

    Parameters are fixed from constraints where they occur alone or linearly
    (with every other parameter already known); remaining constraints are
    then checked.  Returns None if unsatisfiable or underdetermined.
    """
    params: dict = {}
    pending = list(constraints)
    progress = True
    while pending and progress:
        progress = False
        rest = []
        for pe, se in pending:
            pe_now = ax.substitute_params(pe, params)
            free = {q.name for q in ax.leaves(pe_now, Param) if q.name.startswith(_FRESH)}
            if not free:
                if ax.normalize(pe_now) != ax.normalize(se):
                    return None
                progress = True
                continue
            if len(free) == 1:
                (name,) = free
                sol = _solve_linear(pe_now, name, se)
                if sol is not None:
                    params[name] = sol
                    progress = True
                    continue
            rest.append((pe, se))
        pending = rest
    if pending:
        return None
    return params


def _solve_linear(pe: AlphaExpr, name: str, se: AlphaExpr):
    """Solve ``pe == se`` for parameter ``name`` if ``pe`` is linear in it."""
    p = Param(name)
    nf = ax.normalize(pe)
    coef = Fraction(0)
    rest: dict = {}
    for mono, c in nf.terms:
        powers = dict(mono)
        e = powers.get(p, 0)
        if e == 0:
            rest[mono] = c
        elif e == 1 and len(mono) == 1:
            coef += c
        else:
            return None
    if coef == 0:
        return None
    sol = (ax.normalize(se) - PolyNF(rest)) * PolyNF.const(1 / coef)
    return ax.reify(sol)


# --------------------------------------------------------------------------
# lemmas


@dataclass(frozen=True)
class Lemma:
    """A proven or user-asserted equivalence ``left ~ right``.

    Term variables range over streams and ``params`` over alphabet values.
    """

    name: str
    params: tuple
    left: Term
    right: Term
    provenance: str = "user"

    def sides(self, direction: str) -> tuple:
        return (self.left, self.right) if direction == "lr" else (self.right, self.left)


# --------------------------------------------------------------------------
# printing


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    idx = ""
    if t.indices:
        idx = "[" + ", ".join(ax.format_expr(e) for e in t.indices) + "]"
    return f"{t.name}{idx}(" + ", ".join(format_term(a) for a in t.args) + ")"
