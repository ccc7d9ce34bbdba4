import random

import pytest

from reference import random_closed, ref_stream
from streambisim import specs
from streambisim.core import Op, Var, format_term
from streambisim.monadify import monadify_spec, translate_term
from streambisim.semantics import take
from streambisim.specfmt import ValidationError, format_spec, load_spec, parse_term


def test_times_target_is_buffered(calc):
    m = monadify_spec(calc)
    (times,) = m.rules["times"]
    assert format_term(times.target) == "plus(times(lit[n](), y'), times(x', pre[m](y')))"


def test_plus_target_unchanged(calc):
    m = monadify_spec(calc)
    assert m.rules["plus"] == calc.rules["plus"]


def test_matches_the_hand_written_monadic_spec(calc, mcalc):
    m = monadify_spec(calc)
    assert m == mcalc
    assert format_spec(m) == format_spec(mcalc)
    assert m.generated == frozenset({"pre"})


def test_monadic_input_only_gains_the_prefix_family(alt):
    m = monadify_spec(alt)
    assert set(m.signature.ops) == {"const", "alt", "pre"}
    assert m.rules["alt"] == alt.rules["alt"]
    assert m.rules["const"] == alt.rules["const"]


def test_idempotent(calc):
    once = monadify_spec(calc)
    assert monadify_spec(once) == once


def test_prefix_name_clash():
    text = "alphabet rational\nop pre/1\nrule pre: x -[n]-> x' |- pre(x) -[n]-> pre(x')\n"
    with pytest.raises(ValidationError) as info:
        monadify_spec(load_spec(text))
    assert info.value.codes == ["PREFIX_NAME_CLASH"]


def test_result_validates_as_monadic():
    for name in ("streamcalc", "alt", "fg"):
        m = monadify_spec(load_spec(specs.read(name + ".spec")))
        assert m.monadic
        assert load_spec(format_spec(m)).monadic


def test_translate_term_is_name_preserving(calc):
    t = parse_term("plus(lit[2](), lit[3]())", calc)
    assert translate_term(t) is t
    assert translate_term(Op("times", [], [Var("X"), Var("Y")])) is Op("times", [], [Var("X"), Var("Y")])


def test_times_under_monadified_spec(calc):
    m = monadify_spec(calc)
    t = parse_term("times(lit[2](), lit[3]())", calc)
    assert take(m, translate_term(t), 3) == [6, 0, 0]


def test_closed_semantics_preserved(calc):
    m = monadify_spec(calc)
    rng = random.Random(11)
    for _ in range(25):
        t = random_closed(rng, 4)
        expected = ref_stream(t, 12)
        assert take(calc, t, 12) == expected
        assert take(m, translate_term(t), 12) == expected
