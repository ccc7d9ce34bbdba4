# Closed terms of the stream calculus: validate, run, monadify.
from streambisim import format_spec, load_bundled, monadify_spec, parse_term, take
from streambisim.alphaexpr import format_value

calc = load_bundled("streamcalc")
print("monadic?", calc.monadic, "offending operators:", calc.non_monadic_ops())

# lit[c]() is the stream c, 0, 0, ...; plus is pointwise
t = parse_term("plus(lit[1](), lit[2]())", calc)
print("plus(1, 2):", " ".join(format_value(v) for v in take(calc, t, 5)))

# times is the convolution product; on constants it just multiplies heads
sq = parse_term("times(plus(lit[1](), lit[1]()), lit[3]())", calc)
print("times:", " ".join(format_value(v) for v in take(calc, sq, 4)))

# monadification buffers each argument behind the prefix operator pre[a](x)
mono = monadify_spec(calc)
print(format_spec(mono))
print("same outputs after monadification:", take(calc, sq, 10) == take(mono, sq, 10))

# pre[a](x) also lets us write longer streams: (1, 2) * (3, 1) = (3, 7, 2)
conv = parse_term("times(pre[1](lit[2]()), pre[3](lit[1]()))", mono)
print("convolution:", " ".join(format_value(v) for v in take(mono, conv, 5)))

# an opaque alphabet: alt swaps its arguments after every step
alt = load_bundled("alt")
trace = take(alt, parse_term("alt(const[a](), alt(const[b](), const[c]()))", alt), 8)
print("alt trace:", " ".join(trace))
