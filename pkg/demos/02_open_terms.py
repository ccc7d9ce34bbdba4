# Open terms step symbolically: the input read at step k from X is the atom $k:X.
from fractions import Fraction

from streambisim import load_bundled, open_eval, parse_stream, parse_term, step_open
from streambisim.alphaexpr import format_expr
from streambisim.core import format_term, substitute
from streambisim.semantics import prefix_encoding

spec = load_bundled("streamcalc_monadic")

t = parse_term("times(X, plus(Y, Z))", spec)
st = step_open(spec, t)
print("output:    ", format_expr(st.output))
print("derivative:", format_term(st.derivative))

# concrete input streams are written prefix;(repeated value)
psi = {"X": parse_stream("1;(1)"), "Y": parse_stream("1,2,3;(0)"), "Z": parse_stream("0;(1)")}
print("first 6 outputs:", [str(v) for v in open_eval(spec, t, psi, 6)])

# an input can be baked into a closed term with a chain of prefixes
zero = parse_term("lit[0]()", spec)
closed = substitute(t, {x: prefix_encoding(s, 6, zero) for x, s in psi.items()})
print("closed version:", format_term(closed)[:80], "...")
print("agrees:", open_eval(spec, closed, {}, 6) == open_eval(spec, t, psi, 6))

# causality: the k-th output only depends on the first k+1 inputs
other = dict(psi, Y=parse_stream("1,2,3;(" + str(Fraction(-7, 2)) + ")"))
print("first 3 unchanged:", open_eval(spec, t, psi, 3) == open_eval(spec, t, other, 3))
