"""Turn an arbitrary stream GSOS specification into a monadic one.

Every occurrence of an unprimed argument variable ``x`` in a rule target is
replaced by ``pre[a](x')``, where ``a`` is the output the rule observed for
``x``; the prefix family ``pre[a]/1`` emits its index once and then behaves
like its argument.  Operator names are kept; the result is a separate Spec.
"""
from __future__ import annotations

from dataclasses import replace

from .alphaexpr import RuleVar
from .core import Op, Signature, Term, Var, substitute
from .specfmt import (
    Diagnostic,
    Premise,
    RuleSchema,
    Spec,
    ValidationError,
    validate,
)

PREFIX = "pre"


def prefix_schema() -> RuleSchema:
    """``x -[m]-> x' |- pre[a](x) -[a]-> pre[m](x')``"""
    return RuleSchema(
        op=PREFIX,
        binders=("a",),
        args=("x",),
        premises=(Premise("x", "m", "x'"),),
        output=RuleVar("a"),
        target=Op(PREFIX, [RuleVar("m")], [Var("x'")]),
    )


def _has_canonical_prefix(spec: Spec) -> bool:
    if PREFIX not in spec.signature:
        return False
    d = spec.signature[PREFIX]
    if (d.arity, d.nindex) != (1, 1):
        return False
    schemas = spec.rules.get(PREFIX, ())
    return len(schemas) == 1 and _same_schema(schemas[0], prefix_schema())


def _same_schema(s: RuleSchema, ref: RuleSchema) -> bool:
    """Equality up to renaming of the rule's bound names."""
    if s.guard or len(s.premises) != 1 or len(s.binders) != 1:
        return False
    (p,) = s.premises
    ren = {p.deriv: Var(ref.premises[0].deriv)}
    target = substitute(s.target, ren)
    # compare after renaming the alphabet variables too
    if not isinstance(target, Op) or target.name != PREFIX or target.args != (Var(ref.premises[0].deriv),):
        return False
    return (
        s.output == RuleVar(s.binders[0])
        and target.indices == (RuleVar(p.out),)
    )


def monadify_rule(schema: RuleSchema) -> RuleSchema:
    """Buffer every unprimed argument occurrence behind the prefix operator."""
    theta = {}
    for p in schema.premises:
        theta[p.var] = Op(PREFIX, [RuleVar(p.out)], [Var(p.deriv)])
    return replace(schema, target=substitute(schema.target, theta))


def monadify_spec(spec: Spec) -> Spec:
    """Monadic specification with the same closed-term semantics.

    Raises ValidationError(PREFIX_NAME_CLASH) if the input declares a ``pre``
    operator that is not the standard prefix family.
    """
    if not spec.validated:
        spec = validate(spec)
    has_prefix = _has_canonical_prefix(spec)
    if PREFIX in spec.signature and not has_prefix:
        raise ValidationError(
            Diagnostic("PREFIX_NAME_CLASH", f"operator name {PREFIX!r} is reserved for the prefix family")
        )
    sig = Signature(dict(spec.signature.ops))
    rules = {}
    for name, schemas in spec.rules.items():
        rules[name] = tuple(monadify_rule(s) for s in schemas)
    generated = set(spec.generated)
    if not has_prefix:
        sig.declare(PREFIX, 1, 1)
        rules[PREFIX] = (prefix_schema(),)
        generated.add(PREFIX)
    out = Spec(spec.alphabet, sig, rules, spec.lemmas, frozenset(generated))
    return validate(out)


def translate_term(t: Term) -> Term:
    """Map a term of the original signature into the monadified one.

    Operator names are preserved, so this is the identity on structure; it is
    kept as a named step for differential testing.  Open terms are allowed.
    """
    return t
