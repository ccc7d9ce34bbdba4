"""Stream GSOS specifications with open-term semantics and bisimulation up-to proofs."""
from . import specs
from .alphaexpr import PolyNF, normalize
from .core import Lemma, Op, Signature, Var, format_term, match_pair, match_term, substitute
from .monadify import monadify_spec, translate_term
from .semantics import (
    MealyStep,
    StreamSource,
    Valuation,
    open_eval,
    parse_stream,
    step_closed,
    step_open,
    take,
)
from .specfmt import Spec, SpecError, format_spec, load_spec, parse_lemmas, parse_spec, parse_term, validate


def load_bundled(name: str) -> Spec:
    """Validated bundled spec: ``streamcalc``, ``streamcalc_monadic``, ``alt`` or ``fg``."""
    return load_spec(specs.read(name + ".spec"))


def bundled_lemmas(spec: Spec, name: str = "stream") -> list:
    return parse_lemmas(specs.read(name + ".lemmas"), spec)
