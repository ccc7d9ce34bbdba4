"""Acceptance criteria 1 to 8; each test prints one [PASS]/[FAIL] line."""
import random
import time
from contextlib import contextmanager
from fractions import Fraction

import pytest

import conftest
from reference import random_closed, random_open, random_values, ref_stream
from streambisim import load_bundled, monadify_spec, parse_spec, validate
from streambisim.core import Op, substitute
from streambisim.prover import Context, InR, LemmaStep, ProofWitness, Refuted, check_witness, prove, refute, tree_nodes
from streambisim.semantics import StreamSource, open_eval, prefix_encoding, take
from streambisim.specfmt import ValidationError, parse_term


@contextmanager
def criterion(n, title):
    try:
        yield
    except BaseException as exc:
        line = f"[FAIL] criterion {n}: {title} ({type(exc).__name__}: {exc})"
        conftest.ACCEPTANCE_LINES.append(line)
        print(line)
        raise
    line = f"[PASS] criterion {n}: {title}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)


GOLDEN = [
    ("mcalc", "plus(X, Y)", "plus(Y, X)", False, 1),
    ("mcalc", "plus(plus(X, Y), Z)", "plus(X, plus(Y, Z))", False, 1),
    ("mcalc", "pre[a + b](plus(X, Y))", "plus(pre[a](X), pre[b](Y))", False, 1),
    ("mcalc", "times(X, plus(Y, Z))", "plus(times(X, Y), times(X, Z))", True, 1),
    ("alt", "alt(X, alt(Y, Z))", "alt(X, alt(W, Z))", False, 2),
    ("fg", "f(X)", "g(X)", False, 1),
]


@pytest.fixture(scope="module")
def spec_by_name(mcalc, alt, fg):
    return {"mcalc": mcalc, "alt": alt, "fg": fg}


@pytest.fixture(scope="module")
def golden_runs(spec_by_name, lemmas):
    runs = []
    for which, a, b, use_lemmas, size in GOLDEN:
        spec = spec_by_name[which]
        t1, t2 = parse_term(a, spec), parse_term(b, spec)
        start = time.perf_counter()
        res = prove(spec, t1, t2, lemmas if use_lemmas else [])
        runs.append((spec, t1, t2, res, time.perf_counter() - start, size))
    return runs


def test_criterion_1_golden_proofs(golden_runs, fg):
    with criterion(1, "golden proof suite (sizes 1, 1, 1, 1, 2, 1; each under 1 s)"):
        for spec, t1, t2, res, secs, size in golden_runs:
            assert isinstance(res, ProofWitness), f"{t1} ~ {t2}: {res}"
            assert len(res) == size, f"{t1} ~ {t2}: |R| = {len(res)}"
            assert secs < 1.0, f"{t1} ~ {t2} took {secs:.2f} s"
        nodes = list(tree_nodes(golden_runs[3][3].relation[0].tree))
        assert any(isinstance(n, Context) for n in nodes)
        assert any(isinstance(n, InR) and n.nontrivial for n in nodes)
        assert any(isinstance(n, LemmaStep) for n in nodes)
        fg_tree = golden_runs[5][3].relation[0].tree
        assert isinstance(fg_tree, InR) and fg_tree.subst == {"X": parse_term("plus(X, X)", fg)}


def test_criterion_2_witnesses_check_and_survive_sampling(golden_runs):
    with criterion(2, "golden witnesses accepted; no counterexample in 1000 samples x depth 20 x 5 seeds"):
        for spec, t1, t2, res, _, _ in golden_runs:
            assert check_witness(spec, res.dumps()).ok
            for seed in range(5):
                cex = refute(spec, t1, t2, depth=20, samples=1000, seed=seed)
                assert cex is None, cex and cex.describe()


def test_criterion_3_monadification_preserves_closed_semantics(calc):
    with criterion(3, "100 random closed terms: take 20 agrees before and after monadification"):
        mono = monadify_spec(calc)
        rng = random.Random(2024)
        for _ in range(100):
            t = random_closed(rng, 5)
            a, b = take(calc, t, 20), take(mono, t, 20)
            assert a == b, t
            assert a == ref_stream(t, 20)


def _agreeing_sources(rng, n, total=24):
    first = {x: random_values(rng, total) for x in "XYZ"}
    second = {x: v[:n] + [w + 1 for w in random_values(rng, total - n)] for x, v in first.items()}

    def src(env):
        return {x: StreamSource(tuple(v), Fraction(0)) for x, v in env.items()}

    return src(first), src(second)


def test_criterion_4_causality(mcalc):
    with criterion(4, "causality: inputs agreeing on n values give equal n-prefixes (n = 1, 5, 20)"):
        rng = random.Random(77)
        for n in (1, 5, 20):
            for _ in range(100):
                t = random_open(rng, 3)
                s1, s2 = _agreeing_sources(rng, n)
                assert open_eval(mcalc, t, s1, n) == open_eval(mcalc, t, s2, n), t


def test_criterion_5_prefix_encoding_coherence(mcalc):
    with criterion(5, "open_eval equals take of the prefix-encoded closed term (depth 20)"):
        rng = random.Random(55)
        tail = Op("lit", [Fraction(0)], [])
        for _ in range(100):
            t = random_open(rng, 3)
            srcs = {x: StreamSource(tuple(random_values(rng, 20)), Fraction(0)) for x in "XYZ"}
            closed = substitute(t, {x: prefix_encoding(s, 20, tail) for x, s in srcs.items()})
            assert not closed.free_vars
            assert open_eval(mcalc, t, srcs, 20) == take(mcalc, closed, 20), t


def test_criterion_6_refutation(mcalc):
    with criterion(6, "times(X, Y) vs plus(X, Y) refuted at step 0 (6 != 5) within 10 samples, any seed"):
        t1, t2 = parse_term("times(X, Y)", mcalc), parse_term("plus(X, Y)", mcalc)
        for seed in list(range(20)) + [2**32 + 1, 2**63 - 1]:
            cex = refute(mcalc, t1, t2, depth=1, samples=10, seed=seed)
            assert cex is not None, seed
            assert (cex.step, cex.left, cex.right) == (0, 6, 5)
            assert (cex.psi["X"][0], cex.psi["Y"][0]) == (2, 3)
        res = prove(mcalc, t1, t2)
        assert isinstance(res, Refuted) and res.counterexample.step == 0


def test_criterion_7_alternation_trace(alt):
    with criterion(7, "take(alt(a, alt(b, c)), 4) = [a, c, a, c]"):
        t = parse_term("alt(const[a](), alt(const[b](), const[c]()))", alt)
        assert take(alt, t, 4) == ["a", "c", "a", "c"]


def test_criterion_8_validator():
    with criterion(8, "validator: non-monadic (times), monadic, OVERLAPPING_GUARDS"):
        calc = load_bundled("streamcalc")
        assert not calc.monadic and calc.non_monadic_ops() == ["times"]
        assert load_bundled("streamcalc_monadic").monadic
        bad = (
            "alphabet rational\nop lit[1]/0\nop h/1\n"
            "rule lit[n]: |- lit[n]() -[n]-> lit[0]()\n"
            "rule h: x -[n]-> x' |- h(x) -[0]-> h(x') when n = 1\n"
            "rule h: x -[n]-> x' |- h(x) -[1]-> h(x') when n = 1\n"
            "rule h: x -[n]-> x' |- h(x) -[n]-> h(x')\n"
        )
        with pytest.raises(ValidationError) as info:
            validate(parse_spec(bad))
        assert "OVERLAPPING_GUARDS" in info.value.codes
