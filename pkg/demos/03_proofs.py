# Bisimulation up-to proofs with checkable witnesses.
from streambisim import bundled_lemmas, load_bundled, monadify_spec, parse_term
from streambisim.core import format_term
from streambisim.prover import check_witness, format_tree, prove

spec = load_bundled("streamcalc_monadic")
lemmas = bundled_lemmas(spec)


def show(spec, a, b, lems=()):
    res = prove(spec, parse_term(a, spec), parse_term(b, spec), list(lems))
    print(f"{a}  ~  {b}:  {res.status}", end="")
    if res.status != "proved":
        print()
        return res
    print(f", |R| = {len(res)}, checker: {check_witness(spec, res.dumps()).message}")
    for i, p in enumerate(res.relation):
        print(f"  #{i} {format_term(p.left)} ~ {format_term(p.right)}")
        print(format_tree(p.tree, 2))
    return res


show(spec, "plus(X, Y)", "plus(Y, X)")
show(spec, "pre[a + b](plus(X, Y))", "plus(pre[a](X), pre[b](Y))")

# distributivity needs associativity, commutativity and the prefix lemma
show(spec, "times(X, plus(Y, Z))", "plus(times(X, Y), times(X, Z))", lemmas)

# f and g double their argument; the derivative pair is a substitution instance
show(monadify_spec(load_bundled("fg")), "f(X)", "g(X)")

# the alternating operator needs a second pair in the relation
show(load_bundled("alt"), "alt(X, alt(Y, Z))", "alt(X, alt(W, Z))")

# the witness is plain JSON
w = prove(spec, parse_term("plus(X, Y)", spec), parse_term("plus(Y, X)", spec))
print(w.dumps()[:400])
