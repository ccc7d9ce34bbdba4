# Refuting false equations by sampling eventually-constant input streams.
from streambisim import load_bundled, parse_term
from streambisim.prover import prove, refute

spec = load_bundled("streamcalc_monadic")


def attempt(a, b, **kw):
    cex = refute(spec, parse_term(a, spec), parse_term(b, spec), **kw)
    print(f"{a} vs {b}:", cex.describe() if cex else "no counterexample found")


attempt("times(X, Y)", "plus(X, Y)", depth=1, samples=10)
attempt("pre[1](X)", "pre[1](Y)")
attempt("times(pre[1](X), Y)", "times(X, pre[1](Y))")
attempt("plus(X, Y)", "plus(Y, X)", samples=500)

# prove falls back to refutation when the symbolic outputs differ
res = prove(spec, parse_term("times(X, X)", spec), parse_term("X", spec))
print("prove:", res.status, "-", res.counterexample.describe())

alt = load_bundled("alt")
for b in ("alt(X, alt(W, Z))", "alt(X, alt(Y, W))"):
    cex = refute(alt, parse_term("alt(X, alt(Y, Z))", alt), parse_term(b, alt), depth=8)
    print("alt(X, alt(Y, Z)) vs", b + ":", cex.describe() if cex else "no counterexample found")
