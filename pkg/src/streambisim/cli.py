"""Command line front end.

Exit codes: 0 success/proved, 1 refuted, 2 inconclusive, 3 parse error,
4 validation error, 5 evaluation error, 6 witness rejected.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import specs as bundled
from .alphaexpr import format_value
from .core import Lemma, format_term, term_params
from .monadify import monadify_spec
from .prover import ProofOptions, check_witness, format_tree, prove, refute
from .semantics import SemanticsError, open_eval, parse_stream, take
from .specfmt import (
    ParseError,
    SpecError,
    ValidationError,
    format_lemma,
    format_spec,
    parse_lemmas,
    parse_spec,
    parse_term,
    validate,
)

EXIT_OK, EXIT_REFUTED, EXIT_INCONCLUSIVE = 0, 1, 2
EXIT_PARSE, EXIT_VALIDATION, EXIT_EVAL, EXIT_REJECT = 3, 4, 5, 6

log = logging.getLogger("streambisim")


class _Exit(Exception):
    def __init__(self, code: int, message: str = ""):
        super().__init__(message)
        self.code = code
        self.message = message


def _read(path: str) -> str:
    if not os.path.exists(path):
        name = os.path.basename(path)
        for cand in (name, name + ".spec"):
            if bundled.path(cand).is_file():
                return bundled.read(cand)
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _Exit(EXIT_PARSE, f"cannot read {path}: {exc.strerror}")


def _load(path: str):
    try:
        spec = parse_spec(_read(path))
    except ParseError as exc:
        raise _Exit(EXIT_PARSE, str(exc))
    try:
        return validate(spec)
    except ValidationError as exc:
        raise _Exit(EXIT_VALIDATION, str(exc))


def _monadic(spec, purpose: str):
    if spec.monadic:
        return spec
    log.warning("specification is not monadic (%s); monadified before %s", ", ".join(spec.non_monadic_ops()), purpose)
    try:
        return monadify_spec(spec)
    except ValidationError as exc:
        raise _Exit(EXIT_VALIDATION, str(exc))


def _term(text: str, spec):
    try:
        return parse_term(text, spec)
    except ParseError as exc:
        raise _Exit(EXIT_PARSE, f"in term {text!r}: {exc}")


def _lemmas(path, spec) -> list:
    if not path or not os.path.exists(path):
        return []
    try:
        return parse_lemmas(_read(path), spec)
    except ParseError as exc:
        raise _Exit(EXIT_PARSE, f"{path}: {exc}")


def _options(args) -> ProofOptions:
    return ProofOptions(
        max_pairs=args.max_pairs,
        max_rewrite_depth=args.rewrite_depth,
        samples=args.samples,
        depth=args.depth,
        seed=args.seed,
    )


# --------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    spec = _load(args.spec)
    bad = spec.non_monadic_ops()
    print("valid, monadic" if not bad else f"valid, non-monadic ({', '.join(bad)})")
    for name, schemas in spec.rules.items():
        for s in schemas:
            guard = " when " + ", ".join(f"{v} = {e}" for v, e in s.guard) if s.guard else ""
            print(f"  {name}{guard}: {'monadic' if s.is_monadic else 'non-monadic'}")
    return EXIT_OK


def cmd_monadify(args) -> int:
    spec = _load(args.spec)
    try:
        out = monadify_spec(spec)
    except ValidationError as exc:
        raise _Exit(EXIT_VALIDATION, str(exc))
    text = format_spec(out)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_eval(args) -> int:
    spec = _load(args.spec)
    t = _term(args.term, spec)
    binds = {}
    for b in args.bind or []:
        name, _, stream = b.partition("=")
        try:
            binds[name.strip()] = parse_stream(stream, spec.alphabet)
        except ValueError as exc:
            raise _Exit(EXIT_PARSE, f"--bind {b}: {exc}")
    try:
        if t.free_vars:
            missing = sorted(t.free_vars - set(binds))
            if missing:
                raise _Exit(EXIT_EVAL, "unbound variable(s): " + ", ".join(missing) + " (use --bind X=v0,v1;(rep))")
            values = open_eval(_monadic(spec, "open evaluation"), t, binds, args.n)
        else:
            values = take(spec, t, args.n)
    except SemanticsError as exc:
        raise _Exit(EXIT_EVAL, str(exc))
    print(" ".join(format_value(v) for v in values))
    return EXIT_OK


def cmd_prove(args) -> int:
    spec = _monadic(_load(args.spec), "proving")
    t1, t2 = _term(args.left, spec), _term(args.right, spec)
    lemmas = _lemmas(args.lemmas, spec)
    try:
        res = prove(spec, t1, t2, lemmas, _options(args))
    except SemanticsError as exc:
        raise _Exit(EXIT_EVAL, str(exc))
    if res.status == "refuted":
        print("refuted: " + res.counterexample.describe())
        return EXIT_REFUTED
    if res.status == "inconclusive":
        print("inconclusive: " + res.reason)
        return EXIT_INCONCLUSIVE
    doc = res.to_json()
    verdict = check_witness(spec, json.dumps(doc))
    if not verdict:
        print("witness rejected by the checker: " + verdict.message)
        return EXIT_REJECT
    print(f"proved: |R| = {len(res)}")
    for i, p in enumerate(res.relation):
        print(f"  #{i}: {format_term(p.left)} ~ {format_term(p.right)}")
        if args.verbose:
            print(format_tree(p.tree, 3))
    if args.emit_witness:
        with open(args.emit_witness, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    if args.record_lemma:
        if not args.lemmas:
            raise _Exit(EXIT_PARSE, "--record-lemma needs --lemmas FILE")
        params = tuple(sorted(term_params(t1) | term_params(t2)))
        line = format_lemma(Lemma(args.record_lemma, params, t1, t2, "proved"))
        with open(args.lemmas, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
    return EXIT_OK


def cmd_check(args) -> int:
    spec = _monadic(_load(args.spec), "checking")
    try:
        with open(args.witness, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _Exit(EXIT_REJECT, f"cannot read {args.witness}: {exc.strerror}")
    verdict = check_witness(spec, text)
    print(("accepted: " if verdict else "rejected: ") + verdict.message)
    return EXIT_OK if verdict else EXIT_REJECT


def cmd_refute(args) -> int:
    spec = _monadic(_load(args.spec), "refuting")
    t1, t2 = _term(args.left, spec), _term(args.right, spec)
    try:
        cex = refute(spec, t1, t2, depth=args.depth, samples=args.samples, seed=args.seed)
    except SemanticsError as exc:
        raise _Exit(EXIT_EVAL, str(exc))
    if cex is None:
        print(f"no counterexample in {args.samples} samples up to depth {args.depth}")
        return EXIT_OK
    print("refuted: " + cex.describe())
    return EXIT_REFUTED


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="streambisim", description=__doc__.splitlines()[0])
    ap.add_argument("-q", "--quiet", action="store_true", help="suppress notes on stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a specification")
    p.add_argument("spec")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("monadify", help="print or write the monadified specification")
    p.add_argument("spec")
    p.add_argument("--out")
    p.set_defaults(func=cmd_monadify)

    p = sub.add_parser("eval", help="print the first N outputs of a term")
    p.add_argument("spec")
    p.add_argument("term")
    p.add_argument("n", type=int)
    p.add_argument("--bind", action="append", metavar="X=v0,v1;(rep)")
    p.set_defaults(func=cmd_eval)

    def search_flags(p, proving: bool):
        p.add_argument("spec")
        p.add_argument("left")
        p.add_argument("right")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=200)
        p.add_argument("--depth", type=int, default=20)
        if proving:
            p.add_argument("--max-pairs", type=int, default=256)
            p.add_argument("--rewrite-depth", type=int, default=4)
            p.add_argument("--lemmas")
            p.add_argument("--emit-witness")
            p.add_argument("--record-lemma", metavar="NAME")
            p.add_argument("-v", "--verbose", action="store_true", help="print discharge trees")

    p = sub.add_parser("prove", help="prove or refute an equivalence of open terms")
    search_flags(p, True)
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("refute", help="search for a separating input")
    search_flags(p, False)
    p.set_defaults(func=cmd_refute)

    p = sub.add_parser("check", help="re-verify a witness file")
    p.add_argument("spec")
    p.add_argument("witness")
    p.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(format="note: %(message)s", level=logging.ERROR if args.quiet else logging.INFO)
    try:
        return args.func(args)
    except _Exit as exc:
        if exc.message:
            print(exc.message, file=sys.stderr)
        return exc.code
    except SpecError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
