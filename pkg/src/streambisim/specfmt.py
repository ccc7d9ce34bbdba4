"""Parser, validator and printer for the stream GSOS specification language.

A specification file is line based; ``#`` starts a comment::

    alphabet rational
    op lit[1]/0
    op plus/2
    rule lit[n]: |- lit[n]() -[n]-> lit[0]()
    rule plus: x -[n]-> x', y -[m]-> y' |- plus(x, y) -[n + m]-> plus(x', y')
    lemma comm: plus(X, Y) ~ plus(Y, X)

Terms use ``name``, ``op(t1, ..., tk)`` and ``op[e1, ..., em](t1, ..., tk)``;
identifiers that are not declared operators are variables.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

from . import alphaexpr as ax
from .alphaexpr import AlphaExpr, Lit, Param, RuleVar, UFun
from .core import Lemma, Op, Signature, Term, Var, format_term


# --------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    line: int = 0
    col: int = 0

    def __str__(self):
        where = f"{self.line}:{self.col}: " if self.line else ""
        return f"{where}{self.code}: {self.message}"


class SpecError(Exception):
    """Carries one or more diagnostics."""

    def __init__(self, diagnostics):
        if isinstance(diagnostics, Diagnostic):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))

    @property
    def codes(self) -> list:
        return [d.code for d in self.diagnostics]


class ParseError(SpecError):
    pass


class ValidationError(SpecError):
    pass


# --------------------------------------------------------------------------
# data model


@dataclass(frozen=True)
class Alphabet:
    kind: str = "rational"  # or "opaque"
    symbols: tuple = ()

    @property
    def is_opaque(self) -> bool:
        return self.kind == "opaque"


@dataclass(frozen=True)
class Premise:
    var: str
    out: str
    deriv: str


@dataclass(frozen=True)
class RuleSchema:
    """``premises |- op[binders](args) -[output]-> target when guard``."""

    op: str
    binders: tuple
    args: tuple
    premises: tuple
    output: AlphaExpr
    target: Term
    guard: tuple = ()  # ((rule variable, literal expression), ...)
    line: int = field(default=0, compare=False)

    @property
    def derivs(self) -> tuple:
        return tuple(p.deriv for p in self.premises)

    @property
    def is_monadic(self) -> bool:
        return self.target.free_vars <= set(self.derivs)

    def premise_for(self, arg: str) -> Premise:
        for p in self.premises:
            if p.var == arg:
                return p
        raise KeyError(arg)


@dataclass
class Spec:
    alphabet: Alphabet
    signature: Signature
    rules: dict
    lemmas: tuple = ()
    generated: frozenset = field(default=frozenset(), compare=False)
    validated: bool = field(default=False, compare=False)

    @property
    def monadic(self) -> bool:
        return all(s.is_monadic for ss in self.rules.values() for s in ss)

    def non_monadic_ops(self) -> list:
        return [name for name, ss in self.rules.items() if not all(s.is_monadic for s in ss)]

    def schemas(self, name: str) -> tuple:
        return self.rules.get(name, ())


# --------------------------------------------------------------------------
# lexer

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<turnstile>\|-)
  | (?P<arrow_open>-\[)
  | (?P<arrow_close>\]->)
  | (?P<num>[0-9]+(?:/[0-9]+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*'*)
  | (?P<sym>[\[\](),:/+\-*=~.{}$])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize_line(text: str, line: int = 1) -> list:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(Diagnostic("PARSE_ERROR", f"unexpected character {text[pos]!r}", line, pos + 1))
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tk = m.group()
            out.append(Token(kind if kind != "sym" else tk, tk, line, pos + 1))
        pos = m.end()
    out.append(Token("eol", "", line, len(text) + 1))
    return out


class _Parser:
    def __init__(self, tokens: list):
        self.toks = tokens
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.toks[self.i]

    def at(self, kind: str, text: str = None) -> bool:
        t = self.cur
        return t.kind == kind and (text is None or t.text == text)

    def accept(self, kind: str, text: str = None):
        if self.at(kind, text):
            t = self.cur
            self.i += 1
            return t
        return None

    def expect(self, kind: str, text: str = None) -> Token:
        t = self.accept(kind, text)
        if t is None:
            want = text or kind
            got = self.cur.text or "end of line"
            self.error("PARSE_ERROR", f"expected {want}, found {got!r}")
        return t

    def error(self, code: str, msg: str, tok: Token = None):
        tok = tok or self.cur
        raise ParseError(Diagnostic(code, msg, tok.line, tok.col))

    def done(self):
        if not self.at("eol"):
            self.error("PARSE_ERROR", f"unexpected {self.cur.text!r}")

    # expressions ----------------------------------------------------------

    def expr(self, resolve: Callable) -> AlphaExpr:
        e = self._mul(resolve)
        while self.at("+") or self.at("-"):
            if self.accept("+"):
                e = ax.Add(e, self._mul(resolve))
            else:
                self.expect("-")
                e = ax.Add(e, ax.Neg(self._mul(resolve)))
        return e

    def _mul(self, resolve):
        e = self._unary(resolve)
        while self.accept("*"):
            e = ax.Mul(e, self._unary(resolve))
        return e

    def _unary(self, resolve):
        if self.accept("-"):
            inner = self._unary(resolve)
            if isinstance(inner, Lit):
                return Lit(-inner.value)
            return ax.Neg(inner)
        return self._atom(resolve)

    def _atom(self, resolve):
        t = self.cur
        if self.accept("num"):
            return Lit(Fraction(t.text))
        if self.accept("("):
            e = self.expr(resolve)
            self.expect(")")
            return e
        if self.accept("$"):
            step = self.expect("num")
            self.expect(":")
            var = self.expect("ident")
            return ax.InputAtom(int(step.text), var.text)
        if self.accept("ident"):
            if self.accept("("):
                args = []
                if not self.at(")"):
                    args.append(self.expr(resolve))
                    while self.accept(","):
                        args.append(self.expr(resolve))
                self.expect(")")
                return UFun(t.text, tuple(args))
            return resolve(t.text, t)
        self.error("PARSE_ERROR", f"expected an expression, found {t.text or 'end of line'!r}")

    # terms ----------------------------------------------------------------

    def term(self, sig: Signature, resolve: Callable) -> Term:
        t = self.expect("ident")
        name = t.text
        indices = None
        args = None
        if self.accept("["):
            indices = []
            if not self.at("]"):
                indices.append(self.expr(resolve))
                while self.accept(","):
                    indices.append(self.expr(resolve))
            self.expect("]")
        if self.accept("("):
            args = []
            if not self.at(")"):
                args.append(self.term(sig, resolve))
                while self.accept(","):
                    args.append(self.term(sig, resolve))
            self.expect(")")
        if name not in sig:
            if indices is not None or args is not None:
                self.error("UNKNOWN_OPERATOR", f"unknown operator {name}", t)
            return Var(name)
        d = sig[name]
        indices = indices or []
        args = args or []
        if len(indices) != d.nindex or len(args) != d.arity:
            self.error(
                "ARITY_MISMATCH",
                f"{name} takes {d.nindex} indices and {d.arity} arguments, "
                f"got {len(indices)} and {len(args)}",
                t,
            )
        return Op(name, indices, args)


# --------------------------------------------------------------------------
# resolvers


def query_resolver(alphabet: Alphabet, params: set = None) -> Callable:
    """Identifiers in query indices: opaque symbols, otherwise alphabet parameters."""

    def resolve(name, tok):
        if params is not None and name in params:
            return Param(name)
        if name in alphabet.symbols:
            return UFun(name, ())
        return Param(name)

    return resolve


def _rule_resolver(alphabet: Alphabet, bound: set) -> Callable:
    def resolve(name, tok):
        if name in bound:
            return RuleVar(name)
        if name in alphabet.symbols:
            return UFun(name, ())
        # left for the validator to report as unscoped
        return RuleVar(name)

    return resolve


# --------------------------------------------------------------------------
# parsing


def _lines(text: str):
    for n, raw in enumerate(text.splitlines(), start=1):
        toks = tokenize_line(raw, n)
        if toks[0].kind != "eol":
            yield n, toks


def parse_spec(text: str) -> Spec:
    """Parse specification text; raises ParseError with line/column diagnostics."""
    lines = list(_lines(text))
    alphabet = None
    sig = Signature()
    later = []
    for n, toks in lines:
        p = _Parser(toks)
        head = p.cur
        if p.accept("ident", "alphabet"):
            if alphabet is not None:
                p.error("PARSE_ERROR", "duplicate alphabet declaration", head)
            alphabet = _parse_alphabet(p)
        elif p.accept("ident", "op"):
            name = p.expect("ident")
            nindex = 0
            if p.accept("["):
                nindex = int(p.expect("num").text)
                p.expect("]")
            p.expect("/")
            arity = int(p.expect("num").text)
            p.done()
            if name.text in sig:
                p.error("DUPLICATE_OPERATOR", f"operator {name.text} declared twice", name)
            sig.declare(name.text, arity, nindex)
        elif p.at("ident", "rule") or p.at("ident", "lemma"):
            later.append((n, toks))
        else:
            p.error("PARSE_ERROR", f"unknown declaration {head.text!r}")
    if alphabet is None:
        raise ParseError(Diagnostic("NO_ALPHABET", "no alphabet declaration", 1, 1))

    rules: dict = {name: [] for name in sig.ops}
    lemmas = []
    for n, toks in later:
        p = _Parser(toks)
        if p.accept("ident", "rule"):
            schema = _parse_rule(p, sig, alphabet, n)
            rules[schema.op].append(schema)
        else:
            p.expect("ident", "lemma")
            lemmas.append(_parse_lemma(p, sig, alphabet))
    return Spec(alphabet, sig, {k: tuple(v) for k, v in rules.items()}, tuple(lemmas))


def _parse_alphabet(p: _Parser) -> Alphabet:
    kind = p.expect("ident")
    if kind.text == "rational":
        p.done()
        return Alphabet("rational")
    if kind.text == "opaque":
        p.expect("{")
        syms = [p.expect("ident").text]
        while p.accept(","):
            syms.append(p.expect("ident").text)
        p.expect("}")
        p.done()
        return Alphabet("opaque", tuple(syms))
    p.error("PARSE_ERROR", f"unknown alphabet kind {kind.text!r}", kind)


def _ident_list(p: _Parser, close: str) -> list:
    out = []
    if not p.at(close):
        out.append(p.expect("ident").text)
        while p.accept(","):
            out.append(p.expect("ident").text)
    p.expect(close)
    return out


def _parse_rule(p: _Parser, sig: Signature, alphabet: Alphabet, line: int) -> RuleSchema:
    name_tok = p.expect("ident")
    name = name_tok.text
    if name not in sig:
        p.error("UNKNOWN_OPERATOR", f"rule for undeclared operator {name}", name_tok)
    binders = _ident_list(p, "]") if p.accept("[") else []
    p.expect(":")
    premises = []
    if not p.at("turnstile"):
        premises.append(_parse_premise(p))
        while p.accept(","):
            premises.append(_parse_premise(p))
    p.expect("turnstile")
    concl = p.expect("ident")
    if concl.text != name:
        p.error("PARSE_ERROR", f"conclusion is for {concl.text}, rule header names {name}", concl)
    cbinders = _ident_list(p, "]") if p.accept("[") else []
    if cbinders != binders:
        p.error("PARSE_ERROR", "conclusion indices differ from the rule header", concl)
    p.expect("(")
    args = _ident_list(p, ")")
    d = sig[name]
    if len(args) != d.arity or len(binders) != d.nindex:
        p.error(
            "ARITY_MISMATCH",
            f"{name} takes {d.nindex} indices and {d.arity} arguments, "
            f"got {len(binders)} and {len(args)}",
            concl,
        )
    bound = set(binders) | {pr.out for pr in premises}
    resolve = _rule_resolver(alphabet, bound)
    p.expect("arrow_open")
    output = p.expr(resolve)
    p.expect("arrow_close")
    target = p.term(sig, resolve)
    guard = []
    if p.accept("ident", "when"):
        guard.append(_parse_guard(p, alphabet))
        while p.accept(","):
            guard.append(_parse_guard(p, alphabet))
    p.done()
    return RuleSchema(name, tuple(binders), tuple(args), tuple(premises), output, target, tuple(guard), line)


def _parse_premise(p: _Parser) -> Premise:
    var = p.expect("ident").text
    p.expect("arrow_open")
    out = p.expect("ident").text
    p.expect("arrow_close")
    deriv = p.expect("ident").text
    return Premise(var, out, deriv)


def _parse_guard(p: _Parser, alphabet: Alphabet):
    var = p.expect("ident").text
    p.expect("=")
    tok = p.cur
    if p.accept("ident"):
        if tok.text not in alphabet.symbols:
            p.error("PARSE_ERROR", f"guard literal {tok.text} is not an alphabet symbol", tok)
        return var, UFun(tok.text, ())
    neg = bool(p.accept("-"))
    num = p.expect("num")
    v = Fraction(num.text)
    return var, Lit(-v if neg else v)


def _parse_lemma(p: _Parser, sig: Signature, alphabet: Alphabet) -> Lemma:
    name = p.expect("ident").text
    p.expect(":")
    declared = None
    if p.accept("ident", "forall"):
        declared = _ident_list(p, ".")
    resolve = query_resolver(alphabet, set(declared or ()))
    left = p.term(sig, resolve)
    p.expect("~")
    right = p.term(sig, resolve)
    p.done()
    from .core import term_params

    used = term_params(left) | term_params(right)
    if declared is not None and not used <= set(declared):
        extra = ", ".join(sorted(used - set(declared)))
        p.error("UNSCOPED_VARIABLE", f"lemma {name}: parameter(s) {extra} not declared in forall")
    params = tuple(declared) if declared is not None else tuple(sorted(used))
    return Lemma(name, params, left, right)


def parse_lemmas(text: str, spec: Spec) -> list:
    """Parse a lemma database file (only ``lemma`` lines) against ``spec``'s signature."""
    out = []
    for _, toks in _lines(text):
        p = _Parser(toks)
        p.expect("ident", "lemma")
        out.append(_parse_lemma(p, spec.signature, spec.alphabet))
    return out


def parse_term(text: str, spec_or_sig, alphabet: Alphabet = None, params: set = None) -> Term:
    """Parse a query term.  Identifiers inside indices become parameters unless
    they are symbols of an opaque alphabet."""
    if isinstance(spec_or_sig, Spec):
        sig, alphabet = spec_or_sig.signature, spec_or_sig.alphabet
    else:
        sig = spec_or_sig
    alphabet = alphabet or Alphabet()
    p = _Parser(tokenize_line(text.strip()))
    t = p.term(sig, query_resolver(alphabet, params))
    p.done()
    return t


def parse_expr(text: str, alphabet: Alphabet = None, params: set = None) -> AlphaExpr:
    p = _Parser(tokenize_line(text.strip()))
    e = p.expr(query_resolver(alphabet or Alphabet(), params))
    p.done()
    return e


def parse_value(text: str, alphabet: Alphabet = None):
    """A ground alphabet value: rational literal or opaque symbol name."""
    text = text.strip()
    alphabet = alphabet or Alphabet()
    if alphabet.is_opaque:
        if text not in alphabet.symbols:
            raise ValueError(f"{text!r} is not a symbol of the alphabet")
        return text
    return Fraction(text)


# --------------------------------------------------------------------------
# validation


def validate(spec: Spec) -> Spec:
    """Check a parsed spec; returns a validated copy or raises ValidationError."""
    diags: list = []
    new_rules = {}
    for name, decl in spec.signature.ops.items():
        schemas = spec.rules.get(name, ())
        if not schemas:
            diags.append(Diagnostic("UNCOVERED_TRIGGER", f"operator {name} has no rule"))
            continue
        ordered = []
        for s in schemas:
            ds = _check_schema(spec, s)
            diags.extend(ds)
            if not ds:
                order = {v: i for i, v in enumerate(s.args)}
                prem = tuple(sorted(s.premises, key=lambda pr: order[pr.var]))
                ordered.append(replace(s, premises=prem))
        diags.extend(_check_guards(spec, name, schemas))
        new_rules[name] = tuple(ordered)
    for name in spec.rules:
        if name not in spec.signature:
            diags.append(Diagnostic("UNKNOWN_OPERATOR", f"rules for undeclared operator {name}"))
    for lem in spec.lemmas:
        for t in (lem.left, lem.right):
            try:
                spec.signature.check(t)
            except Exception as exc:  # SignatureError
                diags.append(Diagnostic("ARITY_MISMATCH", f"lemma {lem.name}: {exc}"))
    if diags:
        raise ValidationError(diags)
    return Spec(spec.alphabet, spec.signature, new_rules, spec.lemmas, spec.generated, True)


def _check_schema(spec: Spec, s: RuleSchema) -> list:
    out = []

    def err(code, msg):
        out.append(Diagnostic(code, f"rule {s.op}: {msg}", s.line, 1))

    names = list(s.binders) + list(s.args)
    for pr in s.premises:
        names += [pr.out, pr.deriv]
    seen = set()
    for n in names:
        if n in seen:
            err("DUPLICATE_BINDER", f"variable {n} bound more than once")
        seen.add(n)
    prem_vars = [pr.var for pr in s.premises]
    for v in s.args:
        if prem_vars.count(v) != 1:
            err("UNSCOPED_VARIABLE", f"argument {v} needs exactly one premise")
    for v in prem_vars:
        if v not in s.args:
            err("UNSCOPED_VARIABLE", f"premise for {v}, which is not an argument")
    term_scope = set(s.args) | {pr.deriv for pr in s.premises}
    for v in sorted(s.target.free_vars - term_scope):
        err("UNSCOPED_VARIABLE", f"target uses unbound variable {v}")
    alpha_scope = set(s.binders) | {pr.out for pr in s.premises}
    used = {r.name for r in ax.leaves(s.output, RuleVar)}
    for _, sub in s.target.subterms():
        if isinstance(sub, Op):
            for e in sub.indices:
                used |= {r.name for r in ax.leaves(e, RuleVar)}
    for v in sorted(used - alpha_scope):
        err("UNSCOPED_VARIABLE", f"alphabet variable {v} is not bound")
    for v, _ in s.guard:
        if v not in alpha_scope:
            err("UNSCOPED_VARIABLE", f"guard tests unbound variable {v}")
    try:
        spec.signature.check(s.target)
    except Exception as exc:
        err("ARITY_MISMATCH", str(exc))
    return out


def _guards_overlap(g1: tuple, g2: tuple) -> bool:
    d1, d2 = dict(g1), dict(g2)
    for v in d1.keys() & d2.keys():
        if ax.normalize(d1[v]) != ax.normalize(d2[v]):
            return False
    return True


def _check_guards(spec: Spec, name: str, schemas: tuple) -> list:
    out = []
    defaults = [s for s in schemas if not s.guard]
    guarded = [s for s in schemas if s.guard]
    if len(defaults) > 1:
        out.append(Diagnostic("OVERLAPPING_GUARDS", f"operator {name} has {len(defaults)} unguarded rules", defaults[1].line, 1))
    for s1, s2 in itertools.combinations(guarded, 2):
        # guards name the rule's own variables; compare them positionally
        if _guards_overlap(_positional(s1), _positional(s2)):
            out.append(Diagnostic("OVERLAPPING_GUARDS", f"operator {name}: two rules fire on the same trigger", s2.line, 1))
    if guarded and not defaults and not _guards_cover(spec, guarded):
        out.append(Diagnostic("UNCOVERED_TRIGGER", f"operator {name}: guarded rules leave triggers without a rule", guarded[0].line, 1))
    return out


def _positional(s: RuleSchema) -> tuple:
    """Guard keyed by position (``i<k>`` for index k, ``p<k>`` for premise k)."""
    pos = {b: f"i{k}" for k, b in enumerate(s.binders)}
    order = {v: k for k, v in enumerate(s.args)}
    for pr in s.premises:
        pos[pr.out] = f"p{order.get(pr.var, pr.var)}"
    return tuple((pos.get(v, v), lit) for v, lit in s.guard)


def _guards_cover(spec: Spec, guarded: list) -> bool:
    if not spec.alphabet.is_opaque:
        return False
    keys = sorted({k for s in guarded for k, _ in _positional(s)})
    syms = [UFun(x, ()) for x in spec.alphabet.symbols]
    for combo in itertools.product(syms, repeat=len(keys)):
        env = dict(zip(keys, combo))
        if not any(all(env[k] == lit for k, lit in _positional(s)) for s in guarded):
            return False
    return True


def load_spec(text: str) -> Spec:
    return validate(parse_spec(text))


# --------------------------------------------------------------------------
# printing


def format_rule(s: RuleSchema) -> str:
    idx = f"[{', '.join(s.binders)}]" if s.binders else ""
    prem = ", ".join(f"{p.var} -[{p.out}]-> {p.deriv}" for p in s.premises)
    head = f"rule {s.op}{idx}: " + (prem + " " if prem else "")
    line = f"{head}|- {s.op}{idx}({', '.join(s.args)}) -[{ax.format_expr(s.output)}]-> {format_term(s.target)}"
    if s.guard:
        line += " when " + ", ".join(f"{v} = {ax.format_expr(lit)}" for v, lit in s.guard)
    return line


def format_lemma(lem: Lemma) -> str:
    quant = f"forall {', '.join(lem.params)} . " if lem.params else ""
    return f"lemma {lem.name}: {quant}{format_term(lem.left)} ~ {format_term(lem.right)}"


def format_spec(spec: Spec) -> str:
    out = []
    if spec.alphabet.is_opaque:
        out.append(f"alphabet opaque {{{', '.join(spec.alphabet.symbols)}}}")
    else:
        out.append("alphabet rational")
    for d in spec.signature.ops.values():
        idx = f"[{d.nindex}]" if d.nindex else ""
        out.append(f"op {d.name}{idx}/{d.arity}")
    for name in spec.signature.ops:
        for s in spec.rules.get(name, ()):
            out.append(format_rule(s))
    for lem in spec.lemmas:
        out.append(format_lemma(lem))
    return "\n".join(out) + "\n"
