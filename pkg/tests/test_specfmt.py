import pytest

from streambisim import specs
from streambisim.alphaexpr import UFun
from streambisim.monadify import monadify_spec
from streambisim.specfmt import (
    ParseError,
    ValidationError,
    format_spec,
    load_spec,
    parse_lemmas,
    parse_spec,
    parse_term,
    validate,
)


def codes(text):
    with pytest.raises((ParseError, ValidationError)) as info:
        validate(parse_spec(text))
    return info.value.codes


def test_stream_calculus_has_three_families():
    spec = parse_spec(specs.read("streamcalc.spec"))
    assert sorted(spec.signature.ops) == ["lit", "plus", "times"]
    assert spec.signature["lit"].nindex == 1


def test_alt_has_two_families():
    spec = parse_spec(specs.read("alt.spec"))
    assert sorted(spec.signature.ops) == ["alt", "const"]
    assert spec.alphabet.symbols == ("a", "b", "c")


def test_empty_input():
    with pytest.raises(ParseError) as info:
        parse_spec("")
    assert info.value.codes == ["NO_ALPHABET"]
    assert "no alphabet declaration" in str(info.value)


def test_stream_calculus_is_not_monadic(calc):
    assert not calc.monadic
    assert calc.non_monadic_ops() == ["times"]


def test_monadic_stream_calculus(mcalc):
    assert mcalc.monadic


def test_two_defaults_overlap():
    text = "alphabet rational\nop k/0\nrule k: |- k() -[1]-> k()\nrule k: |- k() -[2]-> k()\n"
    assert codes(text) == ["OVERLAPPING_GUARDS"]


def test_equal_guards_overlap():
    text = (
        "alphabet rational\nop lit[1]/0\nop h/1\n"
        "rule lit[n]: |- lit[n]() -[n]-> lit[0]()\n"
        "rule h: x -[n]-> x' |- h(x) -[0]-> h(x') when n = 1\n"
        "rule h: x -[m]-> y |- h(x) -[1]-> h(y) when m = 1\n"
        "rule h: x -[n]-> x' |- h(x) -[n]-> h(x')\n"
    )
    assert codes(text) == ["OVERLAPPING_GUARDS"]


def test_disjoint_guards_with_default_are_valid():
    text = (
        "alphabet rational\nop lit[1]/0\nop h/1\n"
        "rule lit[n]: |- lit[n]() -[n]-> lit[0]()\n"
        "rule h: x -[n]-> x' |- h(x) -[0]-> h(x') when n = 1\n"
        "rule h: x -[n]-> x' |- h(x) -[1]-> h(x') when n = 2\n"
        "rule h: x -[n]-> x' |- h(x) -[n]-> h(x')\n"
    )
    spec = load_spec(text)
    assert len(spec.rules["h"]) == 3


def test_guards_without_default_over_rationals():
    text = (
        "alphabet rational\nop h/1\n"
        "rule h: x -[n]-> x' |- h(x) -[0]-> h(x') when n = 1\n"
    )
    assert codes(text) == ["UNCOVERED_TRIGGER"]


def test_guards_covering_an_opaque_alphabet():
    text = (
        "alphabet opaque {a, b}\nop swap/1\n"
        "rule swap: x -[n]-> x' |- swap(x) -[b]-> swap(x') when n = a\n"
        "rule swap: x -[n]-> x' |- swap(x) -[a]-> swap(x') when n = b\n"
    )
    spec = load_spec(text)
    assert spec.rules["swap"][0].output == UFun("b")
    partial = "\n".join(text.splitlines()[:-1]) + "\n"
    assert codes(partial) == ["UNCOVERED_TRIGGER"]


def test_operator_without_rules():
    assert codes("alphabet rational\nop k/0\n") == ["UNCOVERED_TRIGGER"]


def test_unscoped_target_variable():
    text = "alphabet rational\nop h/1\nrule h: x -[n]-> x' |- h(x) -[n]-> h(z)\n"
    assert codes(text) == ["UNSCOPED_VARIABLE"]


def test_unscoped_alphabet_variable():
    text = "alphabet rational\nop h/1\nrule h: x -[n]-> x' |- h(x) -[k]-> h(x')\n"
    assert codes(text) == ["UNSCOPED_VARIABLE"]


def test_duplicate_binder():
    text = "alphabet rational\nop p/2\nrule p: x -[n]-> x', y -[n]-> y' |- p(x, y) -[n]-> p(x', y')\n"
    assert "DUPLICATE_BINDER" in codes(text)


def test_unknown_operator_in_target():
    text = "alphabet rational\nop h/1\nrule h: x -[n]-> x' |- h(x) -[n]-> g(x')\n"
    assert codes(text) == ["UNKNOWN_OPERATOR"]


def test_arity_mismatch():
    text = "alphabet rational\nop h/1\nrule h: x -[n]-> x' |- h(x) -[n]-> h(x', x')\n"
    assert codes(text) == ["ARITY_MISMATCH"]


def test_parse_error_has_position():
    with pytest.raises(ParseError) as info:
        parse_spec("alphabet rational\nop h/1\nrule h: x -[n]-> x' |- h(x) -[n]->\n")
    d = info.value.diagnostics[0]
    assert d.code == "PARSE_ERROR"
    assert d.line == 3


def test_roundtrip_bundled_specs():
    for name in ("streamcalc", "streamcalc_monadic", "alt", "fg"):
        spec = load_spec(specs.read(name + ".spec"))
        for s in (spec, monadify_spec(spec)):
            text = format_spec(s)
            again = load_spec(text)
            assert again == s
            assert format_spec(again) == text


def test_roundtrip_with_guards_and_lemmas():
    text = (
        "alphabet rational\nop lit[1]/0\nop h/1\n"
        "rule lit[n]: |- lit[n]() -[n]-> lit[0]()\n"
        "rule h: x -[n]-> x' |- h(x) -[-1/2 * n]-> h(x') when n = -3\n"
        "rule h: x -[n]-> x' |- h(x) -[n - 1]-> h(x')\n"
        "lemma twice: forall a . h(lit[a]()) ~ h(lit[a * 1]())\n"
    )
    spec = load_spec(text)
    assert load_spec(format_spec(spec)) == spec


def test_lemma_file(mcalc):
    lems = parse_lemmas(specs.read("stream.lemmas"), mcalc)
    assert [lem.name for lem in lems] == ["assoc", "comm", "prefixsum"]
    assert lems[2].params == ("a", "b")


def test_lemma_forall_must_cover_parameters(mcalc):
    with pytest.raises(ParseError) as info:
        parse_lemmas("lemma bad: forall a . pre[a + b](X) ~ pre[b + a](X)\n", mcalc)
    assert info.value.codes == ["UNSCOPED_VARIABLE"]


def test_query_terms(mcalc, alt):
    t = parse_term("pre[a + 1](X)", mcalc)
    assert t.name == "pre"
    c = parse_term("const[b]()", alt)
    assert c.indices == (UFun("b"),)
    with pytest.raises(ParseError) as info:
        parse_term("minus(X, Y)", mcalc)
    assert info.value.codes == ["UNKNOWN_OPERATOR"]
    with pytest.raises(ParseError) as info:
        parse_term("plus(X)", mcalc)
    assert info.value.codes == ["ARITY_MISMATCH"]
