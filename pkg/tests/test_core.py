import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from streambisim import alphaexpr as ax
from streambisim.core import (
    Op,
    Signature,
    SignatureError,
    Var,
    format_term,
    free_vars,
    match_pair,
    match_term,
    substitute,
)
from streambisim.specfmt import parse_term


def T(text, spec):
    return parse_term(text, spec)


def test_free_vars_basic(mcalc):
    assert free_vars(T("plus(X, Y)", mcalc)) == {"X", "Y"}


def test_free_vars_closed(mcalc):
    assert free_vars(T("lit[3]()", mcalc)) == set()


def test_free_vars_duplicates_collapse(mcalc):
    assert free_vars(T("times(X, plus(Y, X))", mcalc)) == {"X", "Y"}


def test_free_vars_ignore_index_atoms(mcalc):
    assert free_vars(T("pre[$0:Q + a](X)", mcalc)) == {"X"}


def test_substitute_doubling(fg):
    t = substitute(T("f(X)", fg), {"X": T("plus(X, X)", fg)})
    assert t is T("f(plus(X, X))", fg)


def test_substitute_identity(mcalc):
    t = T("times(X, pre[2](Y))", mcalc)
    assert substitute(t, {}) is t
    assert substitute(t, {"X": Var("X"), "Y": Var("Y")}) is t


def test_substitute_closes_term(mcalc):
    t = substitute(T("plus(X, Y)", mcalc), {"X": T("lit[1]()", mcalc), "Y": T("lit[2]()", mcalc)})
    assert t is T("plus(lit[1](), lit[2]())", mcalc)


def test_terms_are_shared_modulo_index_normal_form(mcalc):
    assert T("pre[3 + 4](X)", mcalc) is T("pre[7](X)", mcalc)
    assert T("pre[a + b](X)", mcalc) is T("pre[b + a](X)", mcalc)


def test_match_binds_subterms(mcalc):
    m = match_term(T("plus(X, Y)", mcalc), T("plus(times(U, V), W)", mcalc))
    assert m.subst == {"X": T("times(U, V)", mcalc), "Y": Var("W")}


def test_match_doubling(fg):
    m = match_term(T("f(X)", fg), T("f(plus(X, X))", fg))
    assert m.subst == {"X": T("plus(X, X)", fg)}


def test_match_solves_index_parameter(mcalc):
    m = match_term(T("pre[a](X)", mcalc), T("pre[3 + 4](lit[0]())", mcalc))
    # oracle: 3 + 4 normalizes to the literal 7
    assert ax.normalize(ax.Lit(3) + 4) == ax.PolyNF.const(7)
    assert m.subst == {"X": T("lit[0]()", mcalc)}
    assert m.params == {"a": ax.Lit(7)}
    assert m.apply(T("pre[a](X)", mcalc)) is T("pre[7](lit[0]())", mcalc)


def test_match_pair_shared_substitution(fg):
    m = match_pair((T("f(X)", fg), T("g(X)", fg)), (T("f(plus(X, X))", fg), T("g(plus(X, X))", fg)))
    assert m.subst == {"X": T("plus(X, X)", fg)}


def test_match_pair_variables(mcalc):
    m = match_pair((Var("X"), Var("Y")), (T("lit[1]()", mcalc), T("lit[2]()", mcalc)))
    assert m.subst == {"X": T("lit[1]()", mcalc), "Y": T("lit[2]()", mcalc)}


def test_match_pair_conflict(fg):
    assert match_pair((T("f(X)", fg), T("g(X)", fg)), (T("f(lit[1]())", fg), T("g(lit[2]())", fg))) is None


def test_match_pair_linear_index_system(mcalc):
    pat = (T("pre[a + b](plus(X, Y))", mcalc), T("plus(pre[a](X), pre[b](Y))", mcalc))
    subj = (T("pre[$0:X + $0:Y](plus(X, Y))", mcalc), T("plus(pre[$0:X](X), pre[$0:Y](Y))", mcalc))
    m = match_pair(pat, subj)
    assert m.params == {"a": ax.InputAtom(0, "X"), "b": ax.InputAtom(0, "Y")}


def test_match_keeps_subject_parameters_apart(mcalc):
    # the subject uses a parameter called a as well; it must be treated as a constant
    m = match_pair(
        (T("pre[a](X)", mcalc), T("pre[a + 1](Y)", mcalc)),
        (T("pre[b](X)", mcalc), T("pre[b + 1](Y)", mcalc)),
    )
    assert m.params == {"a": ax.Param("b")}
    m = match_pair(
        (T("pre[a](X)", mcalc), T("pre[a + 1](Y)", mcalc)),
        (T("pre[a + 1](X)", mcalc), T("pre[a + 2](Y)", mcalc)),
    )
    assert ax.normalize(m.params["a"]) == ax.normalize(ax.Param("a") + 1)
    assert match_term(T("pre[a * a](X)", mcalc), T("pre[4](X)", mcalc)) is None


def test_match_index_mismatch(mcalc):
    assert match_term(T("lit[2]()", mcalc), T("lit[3]()", mcalc)) is None


def test_signature_check():
    sig = Signature()
    sig.declare("plus", 2)
    sig.check(Op("plus", [], [Var("X"), Var("Y")]))
    with pytest.raises(SignatureError):
        sig.check(Op("plus", [], [Var("X")]))
    with pytest.raises(SignatureError):
        sig.declare("plus", 2)


def test_format_term(mcalc):
    assert format_term(T("times(X,pre[1/2](lit[-3]))", mcalc)) == "times(X, pre[1/2](lit[-3]()))"


# -- properties ---------------------------------------------------------------

NAMES = ("X", "Y", "Z")


def _lit(v):
    return Op("lit", [Fraction(v)], [])


terms = st.recursive(
    st.one_of(st.sampled_from([Var(n) for n in NAMES]), st.integers(-3, 3).map(_lit)),
    lambda kids: st.one_of(
        st.builds(lambda a, b: Op("plus", [], [a, b]), kids, kids),
        st.builds(lambda a, b: Op("times", [], [a, b]), kids, kids),
        st.builds(lambda v, a: Op("pre", [Fraction(v)], [a]), st.integers(-3, 3), kids),
    ),
    max_leaves=10,
)
substs = st.fixed_dictionaries({n: terms for n in NAMES})


@settings(max_examples=150, deadline=None)
@given(terms, substs)
def test_match_roundtrip(p, theta):
    s = substitute(p, theta)
    m = match_term(p, s)
    assert m is not None
    assert m.apply(p) is s


@settings(max_examples=150, deadline=None)
@given(terms, substs, substs)
def test_substitution_composition(t, th1, th2):
    composed = {x: substitute(u, th2) for x, u in th1.items()}
    assert substitute(substitute(t, th1), th2) is substitute(t, composed)


@settings(max_examples=150, deadline=None)
@given(terms, substs)
def test_free_vars_of_substitution(t, theta):
    expected = set()
    for x in free_vars(t):
        expected |= free_vars(theta[x])
    assert free_vars(substitute(t, theta)) == expected


def test_match_roundtrip_with_index_parameters(mcalc):
    rng = random.Random(3)
    for _ in range(50):
        a, b = Fraction(rng.randint(-5, 5)), Fraction(rng.randint(-5, 5), rng.randint(1, 3))
        p = T("plus(pre[a](X), pre[a * 2 + b](Y))", mcalc)
        s = Op("plus", [], [Op("pre", [a], [Var("X")]), Op("pre", [2 * a + b], [Var("Y")])])
        m = match_term(p, s)
        assert m.params == {"a": ax.Lit(a), "b": ax.Lit(b)}
        assert m.apply(p) is s
