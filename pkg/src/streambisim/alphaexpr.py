"""Symbolic output-alphabet expressions and their polynomial normal form.

Alphabet values live in the rationals.  Expressions combine literals, rule
variables (inside rule schemas only), input atoms ``$k:X`` (the value the
k-th symbolic input assigns to term variable ``X``), universally quantified
parameters, the ring operations and uninterpreted functions.  Equality of
outputs is decided on :class:`PolyNF`, a canonical multivariate polynomial
with exact rational coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping


class AlphaError(Exception):
    """Base class for errors raised by the alphabet algebra."""


class InternalError(AlphaError):
    """A rule variable survived into an expression that must be ground in rule terms."""


class EvaluationError(AlphaError):
    pass


class SpecificationError(AlphaError):
    pass


class AlphaExpr:
    """Base class; supports ``+``, ``-``, ``*`` for building expressions."""

    __slots__ = ()

    def __add__(self, other):
        return Add(self, as_expr(other))

    def __radd__(self, other):
        return Add(as_expr(other), self)

    def __sub__(self, other):
        return Add(self, Neg(as_expr(other)))

    def __rsub__(self, other):
        return Add(as_expr(other), Neg(self))

    def __mul__(self, other):
        return Mul(self, as_expr(other))

    def __rmul__(self, other):
        return Mul(as_expr(other), self)

    def __neg__(self):
        return Neg(self)

    def __str__(self):
        return format_expr(self)


@dataclass(frozen=True, repr=False)
class Lit(AlphaExpr):
    value: Fraction

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))

    def __repr__(self):
        return f"Lit({self.value})"


@dataclass(frozen=True, repr=False)
class RuleVar(AlphaExpr):
    name: str

    def __repr__(self):
        return f"RuleVar({self.name})"


@dataclass(frozen=True, repr=False)
class InputAtom(AlphaExpr):
    step: int
    var: str

    def __repr__(self):
        return f"InputAtom({self.step}, {self.var})"


@dataclass(frozen=True, repr=False)
class Param(AlphaExpr):
    name: str

    def __repr__(self):
        return f"Param({self.name})"


@dataclass(frozen=True, repr=False)
class Add(AlphaExpr):
    left: AlphaExpr
    right: AlphaExpr

    def __repr__(self):
        return f"Add({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Mul(AlphaExpr):
    left: AlphaExpr
    right: AlphaExpr

    def __repr__(self):
        return f"Mul({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Neg(AlphaExpr):
    arg: AlphaExpr

    def __repr__(self):
        return f"Neg({self.arg!r})"


@dataclass(frozen=True, repr=False)
class UFun(AlphaExpr):
    """Uninterpreted function application; 0-ary ones encode opaque symbols."""

    name: str
    args: tuple = ()

    def __repr__(self):
        return f"UFun({self.name}, {self.args!r})"


ATOM_TYPES = (InputAtom, Param, UFun)


def as_expr(x) -> AlphaExpr:
    if isinstance(x, AlphaExpr):
        return x
    if isinstance(x, (int, Fraction)):
        return Lit(Fraction(x))
    if isinstance(x, str):
        return UFun(x, ())
    raise TypeError(f"cannot convert {x!r} to an alphabet expression")


def symbol(name: str) -> UFun:
    return UFun(name, ())


# --------------------------------------------------------------------------
# polynomial normal form


def _atom_key(atom):
    if isinstance(atom, InputAtom):
        return (0, atom.step, atom.var)
    if isinstance(atom, Param):
        return (1, atom.name)
    return (2, atom.name, tuple(normalize(a).key for a in atom.args))


def _mono_key(mono):
    return tuple((_atom_key(a), e) for a, e in mono)


class PolyNF:
    """Canonical polynomial: sorted ``(monomial, coefficient)`` pairs.

    A monomial is a tuple of ``(atom, exponent)`` pairs sorted by atom.
    Zero coefficients are never stored; the zero polynomial has no terms.
    """

    __slots__ = ("terms", "key", "_hash")

    def __init__(self, coeffs: Mapping[tuple, Fraction] = ()):
        items = [(m, Fraction(c)) for m, c in dict(coeffs).items() if c != 0]
        keyed = sorted(((_mono_key(m), m, c) for m, c in items), key=lambda t: t[0])
        self.terms = tuple((m, c) for _, m, c in keyed)
        self.key = tuple((k, c) for k, _, c in keyed)
        self._hash = hash(self.key)

    @classmethod
    def const(cls, value) -> "PolyNF":
        return cls({(): Fraction(value)})

    @classmethod
    def atom(cls, atom) -> "PolyNF":
        return cls({((atom, 1),): Fraction(1)})

    def __eq__(self, other):
        return isinstance(other, PolyNF) and self.key == other.key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"PolyNF({format_expr(reify(self))})"

    def __add__(self, other: "PolyNF") -> "PolyNF":
        out = dict(self.terms)
        for m, c in other.terms:
            out[m] = out.get(m, 0) + c
        return PolyNF(out)

    def __neg__(self) -> "PolyNF":
        return PolyNF({m: -c for m, c in self.terms})

    def __sub__(self, other: "PolyNF") -> "PolyNF":
        return self + (-other)

    def __mul__(self, other: "PolyNF") -> "PolyNF":
        out: dict = {}
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return PolyNF(out)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0] == ())

    def constant(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        if self.is_constant():
            return self.terms[0][1]
        raise ValueError(f"{self!r} is not constant")

    def as_symbol(self):
        """The opaque symbol name if this is exactly one 0-ary UFun atom, else None."""
        if len(self.terms) == 1:
            mono, c = self.terms[0]
            if c == 1 and len(mono) == 1 and mono[0][1] == 1:
                a = mono[0][0]
                if isinstance(a, UFun) and not a.args:
                    return a.name
        return None

    def atoms(self) -> set:
        return {a for m, _ in self.terms for a, _ in m}

    def to_json(self) -> list:
        return [[[[format_expr(a), e] for a, e in m], str(c)] for m, c in self.terms]


def _mono_mul(m1, m2):
    if not m1:
        return m2
    if not m2:
        return m1
    powers: dict = {}
    for a, e in m1 + m2:
        powers[a] = powers.get(a, 0) + e
    return tuple(sorted(powers.items(), key=lambda t: _atom_key(t[0])))


@lru_cache(maxsize=200_000)
def normalize(e: AlphaExpr) -> PolyNF:
    """Expand ``e`` into its polynomial normal form over the ring of rationals."""
    if isinstance(e, Lit):
        return PolyNF.const(e.value)
    if isinstance(e, (InputAtom, Param)):
        return PolyNF.atom(e)
    if isinstance(e, UFun):
        return PolyNF.atom(UFun(e.name, tuple(canonical(a) for a in e.args)))
    if isinstance(e, Add):
        return normalize(e.left) + normalize(e.right)
    if isinstance(e, Mul):
        return normalize(e.left) * normalize(e.right)
    if isinstance(e, Neg):
        return -normalize(e.arg)
    if isinstance(e, RuleVar):
        raise InternalError(f"rule variable {e.name} left uninstantiated")
    raise TypeError(f"not an alphabet expression: {e!r}")


def _reify_mono(mono, coef: Fraction) -> AlphaExpr:
    factors = [a for a, e in mono for _ in range(e)]
    body = None
    for f in factors:
        body = f if body is None else Mul(body, f)
    if body is None:
        return Lit(coef)
    if coef != 1:
        body = Mul(Lit(coef), body)
    return body


def reify(p: PolyNF) -> AlphaExpr:
    """Turn a normal form back into an expression (a sum of monomials)."""
    if not p.terms:
        return Lit(Fraction(0))
    out = None
    for mono, coef in p.terms:
        if out is None:
            out = _reify_mono(mono, coef)
        elif coef < 0:
            out = Add(out, Neg(_reify_mono(mono, -coef)))
        else:
            out = Add(out, _reify_mono(mono, coef))
    return out


@lru_cache(maxsize=200_000)
def canonical(e: AlphaExpr) -> AlphaExpr:
    """``reify(normalize(e))``; leaves expressions with rule variables untouched."""
    if isinstance(e, Lit):
        return e
    if has_rulevars(e):
        return e
    return reify(normalize(e))


# --------------------------------------------------------------------------
# traversal helpers


def children(e: AlphaExpr) -> tuple:
    if isinstance(e, (Add, Mul)):
        return (e.left, e.right)
    if isinstance(e, Neg):
        return (e.arg,)
    if isinstance(e, UFun):
        return e.args
    return ()


@lru_cache(maxsize=100_000)
def has_rulevars(e: AlphaExpr) -> bool:
    if isinstance(e, RuleVar):
        return True
    return any(has_rulevars(c) for c in children(e))


def leaves(e: AlphaExpr, kind) -> set:
    """All sub-expressions of type ``kind`` (e.g. ``Param``)."""
    out = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, kind):
            out.add(x)
        stack.extend(children(x))
    return out


def replace(e: AlphaExpr, mapping: Mapping[AlphaExpr, AlphaExpr]) -> AlphaExpr:
    """Simultaneously replace leaf atoms (RuleVar, Param, InputAtom) by expressions."""
    if not mapping:
        return e
    if isinstance(e, (RuleVar, Param, InputAtom)):
        return mapping.get(e, e)
    if isinstance(e, Add):
        return Add(replace(e.left, mapping), replace(e.right, mapping))
    if isinstance(e, Mul):
        return Mul(replace(e.left, mapping), replace(e.right, mapping))
    if isinstance(e, Neg):
        return Neg(replace(e.arg, mapping))
    if isinstance(e, UFun) and e.args:
        return UFun(e.name, tuple(replace(a, mapping) for a in e.args))
    return e


def instantiate(e: AlphaExpr, rulebind: Mapping[str, AlphaExpr]) -> AlphaExpr:
    """Substitute rule variables by expressions; no normalization is done."""
    missing = {v.name for v in leaves(e, RuleVar)} - set(rulebind)
    if missing:
        raise SpecificationError(f"unbound rule variable(s): {', '.join(sorted(missing))}")
    return replace(e, {RuleVar(k): as_expr(v) for k, v in rulebind.items()})


def substitute_params(e: AlphaExpr, params: Mapping[str, AlphaExpr]) -> AlphaExpr:
    if not params:
        return e
    return replace(e, {Param(k): v for k, v in params.items()})


def evaluate(
    e: AlphaExpr,
    env: Mapping = None,
    ufuns: Mapping[str, Callable] = None,
):
    """Evaluate ``e`` exactly.

    ``env`` maps atoms (``InputAtom``/``Param`` objects, or parameter names)
    to values.  0-ary functions with no interpretation evaluate to their own
    name, which is how opaque alphabet symbols are represented.
    """
    env = env or {}
    ufuns = ufuns or {}
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, (InputAtom, Param)):
        if e in env:
            return _value(env[e])
        if isinstance(e, Param) and e.name in env:
            return _value(env[e.name])
        raise EvaluationError(f"unbound atom {format_expr(e)}")
    if isinstance(e, RuleVar):
        raise EvaluationError(f"unbound atom {e.name} (rule variable)")
    if isinstance(e, Add):
        return evaluate(e.left, env, ufuns) + evaluate(e.right, env, ufuns)
    if isinstance(e, Mul):
        return evaluate(e.left, env, ufuns) * evaluate(e.right, env, ufuns)
    if isinstance(e, Neg):
        return -evaluate(e.arg, env, ufuns)
    if isinstance(e, UFun):
        if e.name in ufuns:
            return ufuns[e.name](*(evaluate(a, env, ufuns) for a in e.args))
        if not e.args:
            return e.name
        raise EvaluationError(f"no interpretation for function {e.name}")
    raise TypeError(f"not an alphabet expression: {e!r}")


# the conventional short name
eval = evaluate  # noqa: A001


def _value(v):
    if isinstance(v, AlphaExpr):
        return evaluate(v)
    if isinstance(v, int):
        return Fraction(v)
    return v


def value_expr(v) -> AlphaExpr:
    """Literal expression for a ground alphabet value (rational or symbol name)."""
    return as_expr(v)


def _int_or_frac(v: Fraction):
    return v.numerator if v.denominator == 1 else v


def eval_nf(p: PolyNF, env: Mapping):
    """Value of a normal form under ``env`` (atom -> rational or symbol name).

    A lone atom evaluates to its binding, so opaque symbols pass through;
    0-ary functions without a binding denote themselves.
    """
    if len(p.terms) == 1:
        mono, c = p.terms[0]
        if c == 1 and len(mono) == 1 and mono[0][1] == 1:
            a = mono[0][0]
            if a in env:
                return env[a]
            if isinstance(a, UFun) and not a.args:
                return a.name
            raise EvaluationError(f"unbound atom {format_expr(a)}")
    total = 0
    for mono, c in p.terms:
        v = _int_or_frac(c)
        for a, e in mono:
            try:
                x = env[a]
            except KeyError:
                raise EvaluationError(f"unbound atom {format_expr(a)}") from None
            if isinstance(x, str):
                raise EvaluationError(f"symbol {x} used in arithmetic")
            v = v * (x ** e if e != 1 else x)
        total = total + v
    return Fraction(total)


def nf_value(p: PolyNF):
    """The ground value denoted by a normal form, or raise if it is symbolic."""
    if p.is_constant():
        return p.constant()
    name = p.as_symbol()
    if name is not None:
        return name
    raise EvaluationError(f"expression {format_expr(reify(p))} is not ground")


# --------------------------------------------------------------------------
# printing


def format_value(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    return str(v)


def _fmt_lit(v: Fraction) -> str:
    return str(v)


def format_expr(e: AlphaExpr, prec: int = 0) -> str:
    """Concrete syntax; ``prec`` is the binding strength of the context."""
    if isinstance(e, Lit):
        s = _fmt_lit(e.value)
        return f"({s})" if e.value < 0 and prec > 0 else s
    if isinstance(e, (RuleVar, Param)):
        return e.name
    if isinstance(e, InputAtom):
        return f"${e.step}:{e.var}"
    if isinstance(e, UFun):
        if not e.args:
            return e.name
        return f"{e.name}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, Add):
        if isinstance(e.right, Neg):
            s = f"{format_expr(e.left, 1)} - {format_expr(e.right.arg, 2)}"
        else:
            s = f"{format_expr(e.left, 1)} + {format_expr(e.right, 2)}"
        return f"({s})" if prec > 1 else s
    if isinstance(e, Mul):
        s = f"{format_expr(e.left, 2)} * {format_expr(e.right, 3)}"
        return f"({s})" if prec > 2 else s
    if isinstance(e, Neg):
        s = f"-{format_expr(e.arg, 3)}"
        return f"({s})" if prec > 0 else s
    raise TypeError(f"not an alphabet expression: {e!r}")
