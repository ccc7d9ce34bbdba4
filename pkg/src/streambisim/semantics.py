"""Operational semantics: the closed stream evaluator and the open-term Mealy stepper.

A closed term steps by structural recursion through the rule schemas.  An
open term steps the same way, except that a variable ``X`` reads the current
input value for ``X`` and stays ``X``; every premise of a rule reads the same
input.  In symbolic mode the input for ``X`` at step ``k`` is the atom
``$k:X``, so one symbolic step covers every concrete input at once.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

from . import alphaexpr as ax
from .alphaexpr import AlphaExpr, InputAtom, Lit, UFun
from .core import Op, Term, Var
from .specfmt import Alphabet, Diagnostic, RuleSchema, Spec, SpecError


class SemanticsError(SpecError):
    pass


def _fail(code: str, msg: str):
    raise SemanticsError(Diagnostic(code, msg))


@dataclass(frozen=True)
class Valuation:
    """Input for one open step: symbolic atoms ``$k:X`` or a ground map ``X -> value``."""

    k: int = 0
    ground: Mapping = None

    @property
    def symbolic(self) -> bool:
        return self.ground is None

    def read(self, name: str) -> AlphaExpr:
        if self.ground is None:
            return InputAtom(self.k, name)
        if name not in self.ground:
            _fail("UNBOUND_VARIABLE", f"no input for variable {name}")
        return ax.value_expr(self.ground[name])


@dataclass(frozen=True)
class MealyStep:
    output: AlphaExpr
    derivative: Term

    @property
    def value(self):
        """Ground output value (rational or symbol name); raises if symbolic."""
        return ax.nf_value(ax.normalize(self.output))


# --------------------------------------------------------------------------
# the stepper


def _definite(nf) -> bool:
    return nf.is_constant() or nf.as_symbol() is not None


def _bindings(s: RuleSchema, indices: tuple, outs: list) -> dict:
    bind = dict(zip(s.binders, indices))
    for p, o in zip(s.premises, outs):
        bind[p.out] = o
    return bind


def select_schema(spec: Spec, name: str, indices: tuple, outs: list) -> RuleSchema:
    """The unique schema whose guard holds for the trigger; the default schema otherwise."""
    default = None
    for s in spec.schemas(name):
        if not s.guard:
            default = s
            continue
        bind = _bindings(s, indices, outs)
        ok = True
        for var, lit in s.guard:
            v = ax.normalize(bind[var])
            if v == ax.normalize(lit):
                continue
            if _definite(v):
                ok = False
                break
            _fail(
                "SYMBOLIC_GUARD_STUCK",
                f"rule for {name} guards {var} = {ax.format_expr(lit)} but {var} is {ax.format_expr(ax.reify(v))}",
            )
        if ok:
            return s
    if default is None:
        _fail("UNCOVERED_TRIGGER", f"no rule of {name} applies")
    return default


_SIMPLE = (Lit, InputAtom, ax.Param)


def _compile_expr(e: AlphaExpr):
    """Closure evaluating ``e`` under a rule-variable binding; folds rational literals."""
    if isinstance(e, ax.RuleVar):
        name = e.name
        return lambda b: b[name]
    if isinstance(e, (ax.Add, ax.Mul)):
        f, g = _compile_expr(e.left), _compile_expr(e.right)
        if isinstance(e, ax.Add):
            def add(b):
                x, y = f(b), g(b)
                if type(x) is Lit and type(y) is Lit:
                    return Lit(x.value + y.value)
                return ax.Add(x, y)
            return add

        def mul(b):
            x, y = f(b), g(b)
            if type(x) is Lit and type(y) is Lit:
                return Lit(x.value * y.value)
            return ax.Mul(x, y)
        return mul
    if isinstance(e, ax.Neg):
        f = _compile_expr(e.arg)

        def neg(b):
            x = f(b)
            return Lit(-x.value) if type(x) is Lit else ax.Neg(x)
        return neg
    if isinstance(e, UFun) and e.args:
        fs = [_compile_expr(a) for a in e.args]
        return lambda b: UFun(e.name, tuple(f(b) for f in fs))
    return lambda b: e


def _compile_target(t: Term):
    if isinstance(t, Var):
        name = t.name
        return lambda theta, b: theta[name]
    idx = [_compile_expr(e) for e in t.indices]
    args = [_compile_target(a) for a in t.args]
    name = t.name
    return lambda theta, b: Op(name, [f(b) for f in idx], [g(theta, b) for g in args])


class _Compiled:
    __slots__ = ("output", "direct", "target")

    def __init__(self, s: RuleSchema):
        self.output = _compile_expr(s.output)
        # a bare rule variable yields an already canonical value
        self.direct = isinstance(s.output, ax.RuleVar)
        self.target = _compile_target(s.target)


def _compiled(spec: Spec) -> dict:
    table = spec.__dict__.get("_compiled")
    if table is None:
        table = {}
        for name, schemas in spec.rules.items():
            table[name] = [(s, _Compiled(s)) for s in schemas]
        spec.__dict__["_compiled"] = table
    return table


def _step(spec: Spec, t: Term, read: Callable, memo: dict) -> tuple:
    r = memo.get(t)
    if r is not None:
        return r
    if type(t) is Var:
        r = (read(t.name), t)
    else:
        outs = [_step(spec, a, read, memo) for a in t.args]
        entries = _compiled(spec).get(t.name)
        if not entries:
            _fail("UNCOVERED_TRIGGER", f"operator {t.name} has no rule")
        if len(entries) == 1 and not entries[0][0].guard:
            s, c = entries[0]
        else:
            s = select_schema(spec, t.name, t.indices, [o for o, _ in outs])
            c = next(c for s2, c in entries if s2 is s)
        bind = _bindings(s, t.indices, [o for o, _ in outs])
        theta = {}
        for p, a, (_, d) in zip(s.premises, t.args, outs):
            theta[p.var] = a
            theta[p.deriv] = d
        out = c.output(bind)
        if not c.direct and type(out) not in _SIMPLE:
            out = ax.canonical(out)
        r = (out, c.target(theta, bind))
    memo[t] = r
    return r


def _closed_cache(spec: Spec) -> dict:
    cache = spec.__dict__.get("_closed_cache")
    if cache is None:
        cache = {}
        spec.__dict__["_closed_cache"] = cache
    return cache


def _no_vars(name):
    _fail("UNBOUND_VARIABLE", f"term is not closed: variable {name}")


def step_closed(spec: Spec, t: Term) -> tuple:
    """One transition of a closed term: ``(output value, derivative)``."""
    out, d = _step(spec, t, _no_vars, _closed_cache(spec))
    return ax.nf_value(ax.normalize(out)), d


def take(spec: Spec, t: Term, n: int) -> list:
    """First ``n`` outputs of the stream denoted by closed term ``t``."""
    memo = _closed_cache(spec)
    values = []
    for _ in range(n):
        out, t = _step(spec, t, _no_vars, memo)
        values.append(ax.nf_value(ax.normalize(out)))
    return values


def require_monadic(spec: Spec) -> None:
    flag = spec.__dict__.get("_monadic")
    if flag is None:
        flag = spec.monadic
        spec.__dict__["_monadic"] = flag
    if not flag:
        _fail(
            "NON_MONADIC_SPEC",
            "open terms need a monadic specification (non-monadic: "
            + ", ".join(spec.non_monadic_ops()) + ")",
        )


def step_open(spec: Spec, t: Term, valuation: Valuation = None) -> MealyStep:
    """One Mealy transition of an open term under ``valuation``."""
    require_monadic(spec)
    valuation = valuation or Valuation()
    if not t.free_vars:
        out, d = _step(spec, t, _no_vars, _closed_cache(spec))
    else:
        out, d = _step(spec, t, valuation.read, {})
    return MealyStep(out, d)


def step_symbolic(spec: Spec, t: Term, k: int = 0) -> MealyStep:
    return step_open(spec, t, Valuation(k))


# --------------------------------------------------------------------------
# stream sources


@dataclass(frozen=True)
class StreamSource:
    """Eventually constant stream: ``prefix`` followed by ``tail`` forever."""

    prefix: tuple = ()
    tail: object = Fraction(0)

    def __getitem__(self, k: int):
        return self.prefix[k] if k < len(self.prefix) else self.tail

    def head(self, n: int) -> list:
        return [self[k] for k in range(n)]

    def __str__(self):
        pre = ",".join(ax.format_value(v) for v in self.prefix)
        return f"{pre};({ax.format_value(self.tail)})"


_STREAM = re.compile(r"^\s*([^;()]*?)\s*;\s*\(\s*([^()]+?)\s*\)\s*$")


def parse_stream(text: str, alphabet: Alphabet = None) -> StreamSource:
    """Parse ``v0,v1,...,vk;(vrep)``; the prefix may be empty (``;(0)``)."""
    from .specfmt import parse_value

    m = _STREAM.match(text)
    if m is None:
        raise ValueError(f"bad stream literal {text!r}; expected v0,v1,...;(vrep)")
    pre, rep = m.groups()
    prefix = tuple(parse_value(v, alphabet) for v in pre.split(",") if v.strip()) if pre else ()
    return StreamSource(prefix, parse_value(rep, alphabet))


def _as_source(s) -> StreamSource:
    if isinstance(s, StreamSource):
        return s
    if isinstance(s, str):
        return parse_stream(s)
    if isinstance(s, (list, tuple)):
        return StreamSource(tuple(s[:-1]), s[-1]) if s else StreamSource()
    if isinstance(s, (int, Fraction)):
        return StreamSource((), Fraction(s))
    raise TypeError(f"not a stream source: {s!r}")


def open_eval(spec: Spec, t: Term, psi: Mapping, n: int) -> list:
    """First ``n`` outputs of open term ``t`` when each variable ``X`` reads stream ``psi[X]``."""
    require_monadic(spec)
    missing = t.free_vars - set(psi)
    if missing:
        _fail("UNBOUND_VARIABLE", "no stream bound for " + ", ".join(sorted(missing)))
    sources = {x: _as_source(s) for x, s in psi.items()}
    values = []
    for k in range(n):
        ground = {x: src[k] for x, src in sources.items()}
        step = step_open(spec, t, Valuation(k, ground))
        values.append(step.value)
        t = step.derivative
    return values


def symbolic_prefix(spec: Spec, t: Term, n: int) -> list:
    """Normal forms of the first ``n`` outputs of ``t`` as polynomials in the atoms ``$k:X``.

    Evaluating the k-th polynomial at concrete input values gives the k-th
    output of ``open_eval`` for any streams starting with those values.
    """
    require_monadic(spec)
    outs = []
    for k in range(n):
        step = step_open(spec, t, Valuation(k))
        outs.append(ax.normalize(step.output))
        t = step.derivative
    return outs


def prefix_encoding(source: StreamSource, n: int, tail: Term) -> Term:
    """Closed term emitting the first ``n`` values of ``source`` and then behaving as ``tail``."""
    t = tail
    for k in reversed(range(n)):
        t = Op("pre", [ax.value_expr(source[k])], [t])
    return t
