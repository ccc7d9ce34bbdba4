"""Equivalence of open terms by bisimulation up-to.

``prove`` grows a finite relation R, starting from the goal pair.  Each pair
takes one symbolic step on both sides; the outputs must have the same normal
form and the derivative pair must be *discharged*, i.e. shown to lie in an
enlargement of R built from

* reflexivity,
* substitution instances of pairs of R (``IN_R``),
* instances of known lemmas (``LEMMA``),
* closure under a common operator context (``CONTEXT``),
* rewriting either side with lemmas before retrying (``BISIM_STEP``).

Derivative pairs that cannot be discharged are generalized (input atoms
become fresh parameters) and added to R.  The result is a witness that
``check_witness`` re-verifies without any search.
"""
from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import alphaexpr as ax
from .alphaexpr import InputAtom, Param, PolyNF
from .core import (
    Lemma,
    Match,
    Op,
    Term,
    Var,
    format_term,
    map_indices,
    match_pair,
    match_term,
    replace_at,
    term_atoms,
    term_params,
)
from .semantics import (
    SemanticsError,
    StreamSource,
    Valuation,
    open_eval,
    require_monadic,
    step_open,
    symbolic_prefix,
)
from .specfmt import Spec, format_spec, parse_expr, parse_term

WITNESS_SCHEMA = "streambisim-witness"
WITNESS_VERSION = 1


@dataclass
class ProofOptions:
    max_pairs: int = 256
    max_rewrite_depth: int = 4
    samples: int = 200
    depth: int = 20
    seed: int = 0
    max_work: int = 200_000


# --------------------------------------------------------------------------
# discharge trees


@dataclass(frozen=True)
class Refl:
    kind = "REFL"


@dataclass(frozen=True)
class InR:
    """The pair is ``theta(R[pair])`` (or its mirror image when ``flipped``)."""

    pair: int
    subst: dict
    params: dict
    flipped: bool = False
    kind = "IN_R"

    @property
    def nontrivial(self) -> bool:
        return any(not (isinstance(v, Var) and v.name == k) for k, v in self.subst.items())


@dataclass(frozen=True)
class LemmaStep:
    name: str
    subst: dict
    params: dict
    direction: str = "lr"
    kind = "LEMMA"


@dataclass(frozen=True)
class Context:
    op: str
    children: tuple
    kind = "CONTEXT"


@dataclass(frozen=True)
class BisimStep:
    """Replace one side by an equivalent ``term`` (certified by ``via``), then continue with ``child``."""

    side: str
    term: Term
    via: object
    child: object
    kind = "BISIM_STEP"


def tree_nodes(node):
    """All nodes of a discharge tree, pre-order."""
    yield node
    if isinstance(node, Context):
        for c in node.children:
            yield from tree_nodes(c)
    elif isinstance(node, BisimStep):
        yield from tree_nodes(node.via)
        yield from tree_nodes(node.child)


def format_tree(node, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(node, Refl):
        return pad + "REFL"
    if isinstance(node, InR):
        flip = " flipped" if node.flipped else ""
        return pad + f"IN_R #{node.pair}{flip} {_fmt_subst(node.subst, node.params)}"
    if isinstance(node, LemmaStep):
        return pad + f"LEMMA {node.name} ({node.direction}) {_fmt_subst(node.subst, node.params)}"
    if isinstance(node, Context):
        return "\n".join([pad + f"CONTEXT {node.op}"] + [format_tree(c, indent + 1) for c in node.children])
    if isinstance(node, BisimStep):
        return "\n".join(
            [
                pad + f"BISIM_STEP {node.side} := {format_term(node.term)}",
                pad + "  via:",
                format_tree(node.via, indent + 2),
                format_tree(node.child, indent + 1),
            ]
        )
    raise TypeError(node)


def _fmt_subst(subst: dict, params: dict) -> str:
    items = [f"{k} -> {format_term(v)}" for k, v in sorted(subst.items())]
    items += [f"{k} -> {ax.format_expr(v)}" for k, v in sorted(params.items())]
    return "{" + ", ".join(items) + "}"


# --------------------------------------------------------------------------
# results


@dataclass
class RelPair:
    left: Term
    right: Term
    params: tuple
    out_left: PolyNF
    out_right: PolyNF
    tree: object
    origin: int = None
    generalized: dict = field(default_factory=dict)


@dataclass
class ProofWitness:
    spec_hash: str
    goal: tuple
    relation: list
    lemmas: list
    status = "proved"

    @property
    def pairs(self) -> list:
        return [(p.left, p.right) for p in self.relation]

    def __len__(self):
        return len(self.relation)

    def to_json(self) -> dict:
        return witness_to_json(self)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


@dataclass
class Counterexample:
    psi: dict
    params: dict
    step: int
    left: object
    right: object

    def describe(self) -> str:
        parts = [f"{x} = {src}" for x, src in sorted(self.psi.items())]
        parts += [f"{p} = {ax.format_value(v)}" for p, v in sorted(self.params.items())]
        return (
            f"outputs differ at step {self.step}: {ax.format_value(self.left)} != "
            f"{ax.format_value(self.right)} under " + ", ".join(parts)
        )


@dataclass
class Refuted:
    counterexample: Counterexample
    status = "refuted"


@dataclass
class Inconclusive:
    reason: str
    relation: list = field(default_factory=list)
    status = "inconclusive"


# --------------------------------------------------------------------------
# search


class _Budget(Exception):
    pass


class _Search:
    def __init__(self, spec: Spec, lemmas: list, opts: ProofOptions):
        self.spec = spec
        self.lemmas = list(lemmas)
        self.opts = opts
        self.R: list = []
        self.memo: dict = {}
        self.equiv_memo: dict = {}
        self.rw_memo: dict = {}
        self.active: set = set()
        self.work = 0

    def _tick(self):
        self.work += 1
        if self.work > self.opts.max_work:
            raise _Budget()

    # -- leaves ----------------------------------------------------------

    def in_r(self, l: Term, r: Term):
        for i, (pl, pr) in enumerate(self.R):
            m = match_pair((pl, pr), (l, r))
            if m is not None:
                return InR(i, m.subst, m.params)
            m = match_pair((pl, pr), (r, l))
            if m is not None:
                return InR(i, m.subst, m.params, True)
        return None

    def lemma(self, l: Term, r: Term):
        for lem in self.lemmas:
            for d in ("lr", "rl"):
                a, b = lem.sides(d)
                m = match_pair((a, b), (l, r))
                if m is not None:
                    return LemmaStep(lem.name, m.subst, m.params, d)
        return None

    # -- lemma-only equivalence --------------------------------------------

    def equiv(self, a: Term, b: Term):
        """REFL / LEMMA / CONTEXT tree for ``a ~ b`` (no use of R)."""
        key = (a, b)
        if key in self.equiv_memo:
            return self.equiv_memo[key]
        self._tick()
        self.equiv_memo[key] = None
        res = None
        if a is b:
            res = Refl()
        else:
            res = self.lemma(a, b)
            if res is None and _same_head(a, b):
                kids = []
                for x, y in zip(a.args, b.args):
                    k = self.equiv(x, y)
                    if k is None:
                        break
                    kids.append(k)
                else:
                    res = Context(a.name, tuple(kids))
        self.equiv_memo[key] = res
        return res

    def in_r_upto(self, l: Term, r: Term):
        """Match one side of an R pair, instantiate the other and relate it by lemmas."""
        for i, (pl, pr) in enumerate(self.R):
            for flipped, (ql, qr) in ((False, (pl, pr)), (True, (pr, pl))):
                m = match_term(qr, r)
                if m is not None and _closes(m, ql, qr):
                    inst = m.apply(ql)
                    via = self.equiv(l, inst)
                    if via is not None:
                        return BisimStep("left", inst, via, InR(i, m.subst, m.params, flipped))
                m = match_term(ql, l)
                if m is not None and _closes(m, qr, ql):
                    inst = m.apply(qr)
                    via = self.equiv(r, inst)
                    if via is not None:
                        return BisimStep("right", inst, via, InR(i, m.subst, m.params, flipped))
        return None

    # -- rewriting ---------------------------------------------------------

    def rewrites(self, t: Term) -> list:
        """One lemma rewrite anywhere in ``t``: ``[(new term, tree for t ~ new), ...]``."""
        out = self.rw_memo.get(t)
        if out is None:
            out = list(self._rewrites(t))
            self.rw_memo[t] = out
        return out

    def _rewrites(self, t: Term):
        for pos, s in t.subterms():
            if isinstance(s, Var):
                continue
            for lem in self.lemmas:
                for d in ("lr", "rl"):
                    a, b = lem.sides(d)
                    if not isinstance(a, Op) or a.name != s.name:
                        # a bare variable on the left would rewrite every subterm
                        continue
                    m = match_term(a, s)
                    if m is None or not _closes(m, b, a):
                        continue
                    new = m.apply(b)
                    if new is s:
                        continue
                    yield replace_at(t, pos, new), _wrap(t, pos, LemmaStep(lem.name, m.subst, m.params, d))

    # -- discharge ---------------------------------------------------------

    def discharge(self, l: Term, r: Term, budget: int):
        key = (l, r, budget)
        hit = self.memo.get(key)
        if hit is not None and (hit[0] is not None or hit[1] == len(self.R)):
            return hit[0]
        if key in self.active:
            return None
        self._tick()
        self.active.add(key)
        try:
            res = self._discharge(l, r, budget)
        finally:
            self.active.discard(key)
        self.memo[key] = (res, len(self.R))
        return res

    def _direct(self, l: Term, r: Term, budget: int):
        # CONTEXT children are strict subterms and keep the budget; inside the
        # rewrite search the caller passes what is left, so recursion terminates
        if l is r:
            return Refl()
        res = self.in_r(l, r) or self.lemma(l, r)
        if res is None and _same_head(l, r) and l.args:
            kids = []
            for x, y in zip(l.args, r.args):
                k = self.discharge(x, y, budget)
                if k is None:
                    break
                kids.append(k)
            else:
                res = Context(l.name, tuple(kids))
        return res or self.in_r_upto(l, r)

    def _discharge(self, l: Term, r: Term, budget: int):
        res = self._direct(l, r, budget)
        if res is not None or budget <= 0 or not self.lemmas:
            return res
        # breadth-first over lemma rewrites of either side
        seen = {(l, r)}
        frontier = [(l, r, ())]
        for level in range(budget):
            nxt = []
            for a, b, path in frontier:
                for side, t in (("left", a), ("right", b)):
                    for new, via in self.rewrites(t):
                        state = (new, b) if side == "left" else (a, new)
                        if state in seen:
                            continue
                        seen.add(state)
                        self._tick()
                        step = path + ((side, new, via),)
                        found = self._direct(state[0], state[1], budget - level - 1)
                        if found is not None:
                            for sd, term, v in reversed(step):
                                found = BisimStep(sd, term, v, found)
                            return found
                        nxt.append((state[0], state[1], step))
            frontier = nxt
        return None


def _same_head(a: Term, b: Term) -> bool:
    return (
        isinstance(a, Op)
        and isinstance(b, Op)
        and a.name == b.name
        and a.indices == b.indices
        and len(a.args) == len(b.args)
    )


def _closes(m: Match, target: Term, source: Term) -> bool:
    """Does ``m`` (obtained by matching ``source``) bind everything ``target`` needs?"""
    return target.free_vars <= source.free_vars and term_params(target) <= set(m.params)


def _wrap(t: Term, pos: tuple, leaf):
    """Context nodes around ``leaf`` down to ``pos`` inside ``t`` (other arguments REFL)."""
    if not pos:
        return leaf
    i = pos[0]
    kids = [Refl()] * len(t.args)
    kids[i] = _wrap(t.args[i], pos[1:], leaf)
    return Context(t.name, tuple(kids))


# --------------------------------------------------------------------------
# generalization


def _fresh_names(taken: set):
    k = 1
    while True:
        name = f"g{k}"
        if name not in taken:
            yield name
        k += 1


def generalize(l: Term, r: Term, names) -> tuple:
    """Replace every input atom in the indices of ``l``, ``r`` by a fresh parameter.

    Returns ``(l', r', {param: atom})``.
    """
    atoms = term_atoms(l)
    for a in term_atoms(r):
        if a not in atoms:
            atoms.append(a)
    if not atoms:
        return l, r, {}
    mapping = {a: Param(next(names)) for a in atoms}

    def fn(e):
        return ax.canonical(ax.replace(e, mapping))

    back = {p.name: a for a, p in mapping.items()}
    return map_indices(l, fn), map_indices(r, fn), back


def spec_hash(spec: Spec) -> str:
    bare = Spec(spec.alphabet, spec.signature, spec.rules)
    return hashlib.sha256(format_spec(bare).encode("utf-8")).hexdigest()


def prove(spec: Spec, t1: Term, t2: Term, lemmas=None, opts: ProofOptions = None):
    """Try to prove ``t1 ~ t2``; returns ProofWitness, Refuted or Inconclusive."""
    require_monadic(spec)
    opts = opts or ProofOptions()
    all_lemmas = list(spec.lemmas) + list(lemmas or [])
    search = _Search(spec, all_lemmas, opts)
    taken = term_params(t1) | term_params(t2) | set(spec.alphabet.symbols)
    for lem in all_lemmas:
        taken |= set(lem.params)
    names = _fresh_names(taken)
    search.R.append((t1, t2))
    relation: list = []
    origins = {0: (None, {})}
    i = 0
    while i < len(search.R):
        if i >= opts.max_pairs:
            return Inconclusive(f"relation exceeded {opts.max_pairs} pairs", list(search.R))
        l, r = search.R[i]
        sl = step_open(spec, l, Valuation(0))
        sr = step_open(spec, r, Valuation(0))
        nl, nr = ax.normalize(sl.output), ax.normalize(sr.output)
        if nl != nr:
            cex = refute(spec, t1, t2, depth=opts.depth, samples=opts.samples, seed=opts.seed)
            if cex is not None:
                return Refuted(cex)
            return Inconclusive(
                f"outputs of pair #{i} differ symbolically "
                f"({ax.format_expr(ax.reify(nl))} vs {ax.format_expr(ax.reify(nr))}) "
                "but no ground counterexample was found",
                list(search.R),
            )
        try:
            tree = search.discharge(sl.derivative, sr.derivative, opts.max_rewrite_depth)
        except _Budget:
            return Inconclusive(f"search exceeded {opts.max_work} work units at pair #{i}", list(search.R))
        if tree is None:
            gl, gr, back = generalize(sl.derivative, sr.derivative, names)
            search.R.append((gl, gr))
            j = len(search.R) - 1
            origins[j] = (i, back)
            subst = {x: Var(x) for x in sorted(gl.free_vars | gr.free_vars)}
            tree = InR(j, subst, dict(back))
        params = tuple(sorted(term_params(l) | term_params(r)))
        origin, back = origins[i]
        relation.append(RelPair(l, r, params, nl, nr, tree, origin, back))
        i += 1
    return ProofWitness(spec_hash(spec), (t1, t2), relation, all_lemmas)


# --------------------------------------------------------------------------
# witness serialization


def _subst_json(subst: dict, params: dict) -> dict:
    return {
        "subst": {k: format_term(v) for k, v in sorted(subst.items())},
        "params": {k: ax.format_expr(v) for k, v in sorted(params.items())},
    }


def tree_to_json(node) -> dict:
    if isinstance(node, Refl):
        return {"node": "REFL"}
    if isinstance(node, InR):
        return {"node": "IN_R", "pair": node.pair, "flipped": node.flipped, **_subst_json(node.subst, node.params)}
    if isinstance(node, LemmaStep):
        return {"node": "LEMMA", "name": node.name, "direction": node.direction, **_subst_json(node.subst, node.params)}
    if isinstance(node, Context):
        return {"node": "CONTEXT", "op": node.op, "children": [tree_to_json(c) for c in node.children]}
    if isinstance(node, BisimStep):
        return {
            "node": "BISIM_STEP",
            "side": node.side,
            "term": format_term(node.term),
            "via": tree_to_json(node.via),
            "child": tree_to_json(node.child),
        }
    raise TypeError(node)


def witness_to_json(w: ProofWitness) -> dict:
    return {
        "schema": WITNESS_SCHEMA,
        "version": WITNESS_VERSION,
        "spec_hash": w.spec_hash,
        "goal": {"left": format_term(w.goal[0]), "right": format_term(w.goal[1])},
        "relation": [
            {
                "left": format_term(p.left),
                "right": format_term(p.right),
                "params": list(p.params),
                "outputs": {"left": p.out_left.to_json(), "right": p.out_right.to_json()},
                "discharge": tree_to_json(p.tree),
                "origin": p.origin,
                "generalized": {k: ax.format_expr(v) for k, v in p.generalized.items()},
            }
            for p in w.relation
        ],
        "lemmas": [
            {
                "name": lem.name,
                "params": list(lem.params),
                "left": format_term(lem.left),
                "right": format_term(lem.right),
                "provenance": lem.provenance,
            }
            for lem in w.lemmas
        ],
    }


class WitnessFormatError(ValueError):
    pass


def _term(text: str, spec: Spec) -> Term:
    return parse_term(text, spec)


def _subst_from(data: dict, spec: Spec) -> tuple:
    subst = {k: _term(v, spec) for k, v in data.get("subst", {}).items()}
    params = {k: parse_expr(v, spec.alphabet) for k, v in data.get("params", {}).items()}
    return subst, params


def tree_from_json(data: dict, spec: Spec):
    kind = data.get("node")
    if kind == "REFL":
        return Refl()
    if kind == "IN_R":
        s, p = _subst_from(data, spec)
        return InR(int(data["pair"]), s, p, bool(data.get("flipped", False)))
    if kind == "LEMMA":
        s, p = _subst_from(data, spec)
        return LemmaStep(data["name"], s, p, data.get("direction", "lr"))
    if kind == "CONTEXT":
        return Context(data["op"], tuple(tree_from_json(c, spec) for c in data["children"]))
    if kind == "BISIM_STEP":
        return BisimStep(
            data["side"], _term(data["term"], spec), tree_from_json(data["via"], spec), tree_from_json(data["child"], spec)
        )
    raise WitnessFormatError(f"unknown discharge node {kind!r}")


def witness_from_json(data, spec: Spec) -> ProofWitness:
    if isinstance(data, str):
        data = json.loads(data)
    if data.get("schema") != WITNESS_SCHEMA or data.get("version") != WITNESS_VERSION:
        raise WitnessFormatError("not a witness document of a supported version")
    try:
        goal = (_term(data["goal"]["left"], spec), _term(data["goal"]["right"], spec))
        lemmas = [
            Lemma(
                d["name"],
                tuple(d.get("params", ())),
                _term(d["left"], spec),
                _term(d["right"], spec),
                d.get("provenance", "user"),
            )
            for d in data.get("lemmas", [])
        ]
        relation = []
        for d in data["relation"]:
            outs = d["outputs"]
            relation.append(
                RelPair(
                    _term(d["left"], spec),
                    _term(d["right"], spec),
                    tuple(d.get("params", ())),
                    _nf_from_json(outs["left"], spec),
                    _nf_from_json(outs["right"], spec),
                    tree_from_json(d["discharge"], spec),
                    d.get("origin"),
                )
            )
    except (KeyError, TypeError) as exc:
        raise WitnessFormatError(f"malformed witness: {exc}") from exc
    return ProofWitness(data.get("spec_hash", ""), goal, relation, lemmas)


def _nf_from_json(data: list, spec: Spec) -> PolyNF:
    total = PolyNF()
    for mono, coef in data:
        term = PolyNF.const(Fraction(coef))
        for atom, exp in mono:
            a = ax.normalize(parse_expr(atom, spec.alphabet))
            for _ in range(int(exp)):
                term = term * a
        total = total + term
    return total


# --------------------------------------------------------------------------
# checking


@dataclass
class CheckResult:
    ok: bool
    message: str = "accepted"
    pair: int = None

    def __bool__(self):
        return self.ok


class _Reject(Exception):
    pass


def check_witness(spec: Spec, witness) -> CheckResult:
    """Re-verify every output certificate and discharge tree of ``witness`` (no search)."""
    require_monadic(spec)
    if isinstance(witness, (str, dict)):
        try:
            witness = witness_from_json(witness, spec)
        except Exception as exc:
            return CheckResult(False, f"cannot read witness: {exc}")
    if witness.spec_hash and witness.spec_hash != spec_hash(spec):
        return CheckResult(False, "witness was produced for a different specification")
    if not witness.relation:
        return CheckResult(False, "empty relation")
    first = witness.relation[0]
    if (first.left, first.right) != tuple(witness.goal):
        return CheckResult(False, "first relation pair is not the goal", 0)
    pairs = witness.pairs
    lemmas = {lem.name: lem for lem in witness.lemmas}
    for i, p in enumerate(witness.relation):
        sl = step_open(spec, p.left, Valuation(0))
        sr = step_open(spec, p.right, Valuation(0))
        nl, nr = ax.normalize(sl.output), ax.normalize(sr.output)
        if nl != p.out_left or nr != p.out_right:
            return CheckResult(False, f"pair #{i}: recorded outputs do not match a fresh step", i)
        if nl != nr:
            return CheckResult(False, f"pair #{i}: outputs differ", i)
        try:
            _check_node(p.tree, sl.derivative, sr.derivative, pairs, lemmas, True)
        except _Reject as exc:
            return CheckResult(False, f"pair #{i}: {exc}", i)
    return CheckResult(True, f"relation of {len(pairs)} pair(s) verified")


def _check_node(node, l: Term, r: Term, pairs: list, lemmas: dict, allow_r: bool):
    def show():
        return f"({format_term(l)}, {format_term(r)})"

    if isinstance(node, Refl):
        if l is not r:
            raise _Reject(f"REFL on distinct terms {show()}")
    elif isinstance(node, InR):
        if not allow_r:
            raise _Reject("IN_R used inside a lemma-only equivalence")
        if not 0 <= node.pair < len(pairs):
            raise _Reject(f"IN_R refers to missing pair #{node.pair}")
        pl, pr = pairs[node.pair]
        m = Match(node.subst, node.params)
        a, b = m.apply(pl), m.apply(pr)
        if node.flipped:
            a, b = b, a
        if a is not l or b is not r:
            raise _Reject(f"IN_R #{node.pair} assignment does not reproduce {show()}")
    elif isinstance(node, LemmaStep):
        lem = lemmas.get(node.name)
        if lem is None:
            raise _Reject(f"unknown lemma {node.name}")
        a, b = lem.sides(node.direction)
        m = Match(node.subst, node.params)
        if m.apply(a) is not l or m.apply(b) is not r:
            raise _Reject(f"LEMMA {node.name} instance does not reproduce {show()}")
    elif isinstance(node, Context):
        if not (_same_head(l, r) and l.name == node.op and len(node.children) == len(l.args)):
            raise _Reject(f"CONTEXT {node.op} does not fit {show()}")
        for c, x, y in zip(node.children, l.args, r.args):
            _check_node(c, x, y, pairs, lemmas, allow_r)
    elif isinstance(node, BisimStep):
        if node.side == "left":
            _check_node(node.via, l, node.term, pairs, lemmas, False)
            _check_node(node.child, node.term, r, pairs, lemmas, allow_r)
        elif node.side == "right":
            _check_node(node.via, r, node.term, pairs, lemmas, False)
            _check_node(node.child, l, node.term, pairs, lemmas, allow_r)
        else:
            raise _Reject(f"BISIM_STEP with unknown side {node.side!r}")
    else:
        raise _Reject(f"unknown node {node!r}")


# --------------------------------------------------------------------------
# refutation

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def _random_value(rng: random.Random, spec: Spec):
    if spec.alphabet.is_opaque:
        return rng.choice(spec.alphabet.symbols)
    if rng.random() < 0.2:
        return Fraction(rng.randint(-9, 9), rng.randint(1, 4))
    return Fraction(rng.randint(-4, 6))


def _first_sample(spec: Spec, variables: list, params: list) -> tuple:
    if spec.alphabet.is_opaque:
        syms = spec.alphabet.symbols
        psi = {x: StreamSource((syms[i % len(syms)],), syms[(i + 1) % len(syms)]) for i, x in enumerate(variables)}
        vals = {p: syms[(len(variables) + i) % len(syms)] for i, p in enumerate(params)}
        return psi, vals
    primes = iter(_PRIMES * 4)
    psi = {x: StreamSource((Fraction(next(primes)),), Fraction(0)) for x in variables}
    vals = {p: Fraction(next(primes)) for p in params}
    return psi, vals


def _instantiate_params(t: Term, vals: dict) -> Term:
    if not vals:
        return t
    env = {k: ax.value_expr(v) for k, v in vals.items()}
    return map_indices(t, lambda e: ax.canonical(ax.substitute_params(e, env)))


def first_difference(spec: Spec, t1: Term, t2: Term, psi: dict, params: dict, depth: int):
    """``(step, left, right)`` at the first differing output within ``depth``, else None."""
    a = open_eval(spec, _instantiate_params(t1, params), psi, depth)
    b = open_eval(spec, _instantiate_params(t2, params), psi, depth)
    for k, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return k, x, y
    return None


def _ground_env(psi: dict, params: dict, depth: int) -> dict:
    env = {}
    for x, src in psi.items():
        for k in range(depth):
            v = src[k]
            env[InputAtom(k, x)] = ax._int_or_frac(v) if isinstance(v, Fraction) else v
    for p, v in params.items():
        env[Param(p)] = ax._int_or_frac(v) if isinstance(v, Fraction) else v
    return env


class _PrefixOracle:
    """Compares the two terms on a sample, symbolically precomputed when possible."""

    def __init__(self, spec: Spec, t1: Term, t2: Term, depth: int):
        self.spec, self.t1, self.t2, self.depth = spec, t1, t2, depth
        try:
            self.polys = (symbolic_prefix(spec, t1, depth), symbolic_prefix(spec, t2, depth))
        except SemanticsError:
            # a guard cannot be decided on symbolic inputs: evaluate each sample concretely
            self.polys = None

    def differs(self, psi: dict, params: dict) -> bool:
        if self.polys is None:
            return first_difference(self.spec, self.t1, self.t2, psi, params, self.depth) is not None
        env = _ground_env(psi, params, self.depth)
        for p, q in zip(*self.polys):
            if p != q and ax.eval_nf(p, env) != ax.eval_nf(q, env):
                return True
        return False


def refute(spec: Spec, t1: Term, t2: Term, depth: int = 20, samples: int = 200, seed: int = 0, candidates=()):
    """Search for input streams (and parameter values) separating ``t1`` and ``t2``.

    The first sample is fixed (heads 2, 3, 5, ... and zero tails); the rest are
    drawn from a ``random.Random(seed)``.  A hit is replayed with ``open_eval``
    and returned as a Counterexample; None if no sample separates the terms.
    """
    require_monadic(spec)
    variables = sorted(t1.free_vars | t2.free_vars)
    params = sorted(term_params(t1) | term_params(t2))
    rng = random.Random(seed)
    oracle = _PrefixOracle(spec, t1, t2, depth)

    def draws():
        yield from candidates
        if samples > 0:
            yield _first_sample(spec, variables, params)
        for _ in range(samples - 1):
            psi = {
                x: StreamSource(tuple(_random_value(rng, spec) for _ in range(depth)), _random_value(rng, spec))
                for x in variables
            }
            vals = {p: _random_value(rng, spec) for p in params}
            yield psi, vals

    for psi, vals in draws():
        if oracle.differs(psi, vals):
            diff = first_difference(spec, t1, t2, psi, vals, depth)
            if diff is not None:
                return Counterexample(psi, vals, *diff)
    return None
