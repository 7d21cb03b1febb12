"""Catalog of universal theories and a model checker with concrete witnesses.

Catalog ids (as accepted by :func:`theory_spec`):

``ord:N``  levelled orders ``L{n}_{l}`` for ``l <= n <= N``
``lev:N``  the sorted variant with unary ``P{i}`` and partial maps ``F{i}``
``dcf:n``  digraphs without loops or directed cycles of length ``<= n``
``ocf:n``  graphs without odd cycles of length ``<= n``
``cf:n``   graphs without cycles of length ``3..n``
``trf``    triangle-free graphs
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .core import (Structure, StructureError, Symbol, Vocabulary, VocabularyMismatch,
                   digraph_vocab, directed_cycle, graph_vocab, iter_embeddings,
                   make_structure, undirected_cycle)
from .logic import (And, Atom, Forall, Formula, Implies, Node, Not, evaluate,
                    parse_node, satisfying_assignments)
from .logic.ast import free_vars

CATALOG = ("ord", "lev", "dcf", "ocf", "cf", "trf")


class TheoryError(ValueError):
    pass


def lt(n: int, l: int) -> str:
    """Symbol name of the level relation ``<_{n,l}``."""
    return f"L{n}_{l}"


@dataclass(frozen=True)
class TheorySpec:
    name: str
    params: tuple[int, ...]
    vocab: Vocabulary
    axioms: tuple[Formula, ...] = ()
    labels: tuple[str, ...] = ()
    forbidden: tuple[Structure, ...] = ()
    forbidden_labels: tuple[str, ...] = ()
    rules: tuple = field(default=(), compare=False)

    def __post_init__(self):
        for ax in self.axioms:
            if ax.free_vars:
                raise TheoryError(f"axiom is not a sentence: {ax.text}")
        for p in self.forbidden:
            if p.vocab != self.vocab:
                raise TheoryError("forbidden pattern over a foreign vocabulary")
        if not self.labels:
            object.__setattr__(self, "labels",
                               tuple(f"axiom {i}" for i in range(len(self.axioms))))
        if not self.forbidden_labels:
            object.__setattr__(self, "forbidden_labels",
                               tuple(f"pattern {i}" for i in range(len(self.forbidden))))
        object.__setattr__(self, "rules", tuple(
            r for ax in self.axioms for r in horn_rules(ax)))

    @property
    def id(self) -> str:
        return ":".join([self.name, *map(str, self.params)])

    def __str__(self):
        return self.id


def parse_theory_id(text: str) -> tuple[str, tuple[int, ...]]:
    parts = text.strip().split(":")
    name = parts[0]
    try:
        params = tuple(int(p) for p in parts[1:])
    except ValueError:
        raise TheoryError(f"bad theory id {text!r}") from None
    return name, params


def theory_spec(name: str, *params: int) -> TheorySpec:
    """Look up a catalog theory, e.g. ``theory_spec("dcf", 4)`` or ``theory_spec("dcf:4")``."""
    if ":" in name or not params:
        base, parsed = parse_theory_id(name)
        name, params = base, parsed + tuple(params)
    if name not in CATALOG:
        raise TheoryError(f"unknown theory {name!r}; expected one of {CATALOG}")
    if name == "trf":
        if params:
            raise TheoryError("trf takes no parameter")
        return _graph_theory("trf", (), [3])
    if len(params) != 1:
        raise TheoryError(f"{name} takes exactly one integer parameter")
    (n,) = params
    if name == "ord":
        if n < 0:
            raise TheoryError("ord needs a parameter >= 0")
        return _ord_theory(n)
    if name == "lev":
        if n < 0:
            raise TheoryError("lev needs a parameter >= 0")
        return _lev_theory(n)
    if n < 3:
        raise TheoryError(f"{name} needs n >= 3")
    if name == "dcf":
        vocab = digraph_vocab()
        pats = [directed_cycle(k, vocab) for k in range(1, n + 1)]
        labels = ["loop"] + [f"directed {k}-cycle" for k in range(2, n + 1)]
        return TheorySpec("dcf", (n,), vocab, forbidden=tuple(pats),
                          forbidden_labels=tuple(labels))
    if name == "ocf":
        return _graph_theory("ocf", (n,), [k for k in range(3, n + 1, 2)])
    return _graph_theory("cf", (n,), list(range(3, n + 1)))


def _graph_theory(name, params, lengths) -> TheorySpec:
    vocab = graph_vocab()
    pats = tuple(undirected_cycle(k, vocab) for k in lengths)
    labels = tuple("triangle" if k == 3 else f"{k}-cycle" for k in lengths)
    return TheorySpec(name, tuple(params), vocab, forbidden=pats, forbidden_labels=labels)


def _level_axioms(n: int, guard: str | None = None):
    """Axioms (a)-(d) for one level ``n``; ``guard`` relativises (b) to a sort."""
    out = []
    for m in range(1, n + 1):
        out.append((f"(a) n={n} m={m}",
                    f"forall x . forall y . {lt(n, m - 1)}(x,y) -> {lt(n, m)}(x,y)"))
    if guard:
        out.append((f"(b) n={n}",
                    f"forall x . forall y . {guard}(x) & {guard}(y) -> {lt(n, n)}(x,y)"))
    else:
        out.append((f"(b) n={n}", f"forall x . forall y . {lt(n, n)}(x,y)"))
    if n >= 1:
        out.append((f"(c) n={n}", f"forall x . !{lt(n, n - 1)}(x,x)"))
    for m in range(1, n + 1):
        for l in range(m):
            k = m - 1 - l
            out.append((f"(d) n={n} l={l} k={k}",
                        f"forall x . forall y . forall z . {lt(n, l)}(x,y) & "
                        f"{lt(n, k)}(y,z) -> {lt(n, m)}(x,z)"))
    return out


def _ord_theory(top: int) -> TheorySpec:
    vocab = Vocabulary(tuple(Symbol(lt(n, l), 2) for n in range(top + 1)
                             for l in range(n + 1)))
    items = [ax for n in range(top + 1) for ax in _level_axioms(n)]
    return TheorySpec("ord", (top,), vocab,
                      axioms=tuple(Formula(parse_node(t, vocab)) for _, t in items),
                      labels=tuple(lbl for lbl, _ in items))


def _lev_theory(top: int) -> TheorySpec:
    syms = [Symbol(f"P{i}", 1) for i in range(top + 1)]
    syms += [Symbol(f"F{i}", 2, "functional") for i in range(top)]
    syms += [Symbol(lt(n, l), 2) for n in range(top + 1) for l in range(n + 1)]
    vocab = Vocabulary(tuple(syms))
    items = []
    for i in range(top + 1):
        for j in range(i + 1, top + 1):
            items.append((f"(a) P{i},P{j} disjoint", f"forall x . !(P{i}(x) & P{j}(x))"))
    for i in range(top):
        items.append((f"(b) F{i} domain",
                      f"forall x . forall y . F{i}(x,y) -> P{i + 1}(x) & P{i}(y)"))
    for n in range(top + 1):
        for l in range(n + 1):
            items.append((f"(c) {lt(n, l)} sort",
                          f"forall x . forall y . {lt(n, l)}(x,y) -> P{n}(x) & P{n}(y)"))
        items.extend(_level_axioms(n, guard=f"P{n}"))
    for n in range(top):
        for l in range(n + 1):
            items.append((f"(d) F{n} monotone l={l}",
                          f"forall x . forall y . forall u . forall v . "
                          f"{lt(n + 1, l)}(x,y) & F{n}(x,u) & F{n}(y,v) -> {lt(n, l)}(u,v)"))
    return TheorySpec("lev", (top,), vocab,
                      axioms=tuple(Formula(parse_node(t, vocab)) for _, t in items),
                      labels=tuple(lbl for lbl, _ in items))


# ---------------------------------------------------------------------------
# Horn rules

@dataclass(frozen=True)
class HornRule:
    variables: tuple[str, ...]
    body: tuple[Atom, ...]
    head: Atom


def _universal_block(node: Node):
    vars_ = []
    while isinstance(node, Forall):
        vars_.append(node.var)
        node = node.body
    return tuple(vars_), node


def horn_rules(axiom: Formula) -> list[HornRule]:
    """Definite Horn rules of a universal sentence (empty when not Horn)."""
    vars_, body = _universal_block(axiom.body)
    if isinstance(body, Implies):
        prem, concl = body.left, body.right
        prem_parts = prem.parts if isinstance(prem, And) else (prem,)
    else:
        prem_parts, concl = (), body
    heads = concl.parts if isinstance(concl, And) else (concl,)
    if not all(isinstance(p, Atom) for p in prem_parts):
        return []
    if not all(isinstance(h, Atom) for h in heads):
        return []
    return [HornRule(vars_, tuple(prem_parts), h) for h in heads]


def horn_closure(s: Structure, rules, protect=None, max_rounds: int = 1000) -> Structure:
    """Least superset of ``s`` closed under ``rules``.

    ``protect`` is an optional predicate on ``(symbol, tuple)``; facts it
    rejects are still added, callers inspect the result.
    """
    facts = {name: set(t) for name, t in s.tables.items()}
    for _ in range(max_rounds):
        current = Structure(s.vocab, s.size, {k: frozenset(v) for k, v in facts.items()})
        added = False
        for rule in rules:
            fixed_vars = rule.variables
            node = And(rule.body) if len(rule.body) > 1 else (
                rule.body[0] if rule.body else None)
            if node is None:
                assignments = itertools.product(range(s.size), repeat=len(fixed_vars))
            else:
                assignments = satisfying_assignments(current, node, fixed_vars)
            for values in assignments:
                env = dict(zip(fixed_vars, values))
                tup = tuple(env[a] for a in rule.head.args)
                if tup not in facts[rule.head.rel]:
                    facts[rule.head.rel].add(tup)
                    added = True
        if not added:
            return make_structure(s.vocab, s.size,
                                  [(k, t) for k, ts in facts.items() for t in ts])
    raise RuntimeError("horn closure did not converge")


# ---------------------------------------------------------------------------
# Model checking

@dataclass(frozen=True)
class Violation:
    """A falsified axiom instance or an embedding of a forbidden pattern."""

    kind: str
    label: str
    axiom: Formula | None = None
    assignment: tuple[tuple[str, int], ...] = ()
    pattern: Structure | None = None
    embedding: tuple[int, ...] | None = None

    def describe(self) -> str:
        if self.kind == "axiom":
            env = ", ".join(f"{v}={e}" for v, e in self.assignment)
            return f"axiom {self.label} fails at {env}: {self.axiom.text}"
        return f"{self.label} embeds at {' '.join(map(str, self.embedding))}"

    @property
    def elements(self) -> tuple[int, ...]:
        if self.kind == "axiom":
            return tuple(e for _, e in self.assignment)
        return self.embedding


def _axiom_counterexample(s: Structure, axiom: Formula, focus=None):
    vars_, body = _universal_block(axiom.body)
    if isinstance(body, Implies):
        prem = body.left
        parts = list(prem.parts if isinstance(prem, And) else (prem,)) + [Not(body.right)]
    else:
        parts = [Not(body)]
    node = And(tuple(parts)) if len(parts) > 1 else parts[0]
    if not vars_:
        return None if evaluate(s, axiom) else ()
    if focus is None:
        if evaluate(s, axiom):
            return None
        return next(satisfying_assignments(s, node, vars_), None)
    best = None
    for i, v in enumerate(vars_):
        others = vars_[:i] + vars_[i + 1:]
        for p in focus:
            for rest in satisfying_assignments(s, node, others, fixed={v: p}):
                cand = rest[:i] + (p,) + rest[i:]
                if best is None or cand < best:
                    best = cand
                break
    return best


def check_model(s: Structure, t: TheorySpec, focus=None) -> Violation | None:
    """Return ``None`` when ``s`` is a model of ``t``, else the first violation.

    Axioms are checked in catalog order, then forbidden patterns; within each,
    the lexicographically least witness is reported.  With ``focus`` only
    instances touching one of the given elements are considered.
    """
    if s.vocab != t.vocab:
        raise VocabularyMismatch(f"structure vocabulary does not match {t.id}")
    focus = None if focus is None else sorted(set(focus))
    for label, axiom in zip(t.labels, t.axioms):
        vals = _axiom_counterexample(s, axiom, focus)
        if vals is not None:
            vars_, _ = _universal_block(axiom.body)
            return Violation("axiom", label, axiom, tuple(zip(vars_, vals)))
    for label, pat in zip(t.forbidden_labels, t.forbidden):
        emb = _first_embedding(pat, s, focus)
        if emb is not None:
            return Violation("pattern", label, pattern=pat, embedding=emb)
    return None


def _first_embedding(pattern: Structure, host: Structure, focus):
    if focus is None:
        return next(iter_embeddings(pattern, host, "weak"), None)
    best = None
    for i in range(pattern.size):
        for p in focus:
            m = next(iter_embeddings(pattern, host, "weak", fixed={i: p}), None)
            if m is not None and (best is None or m < best):
                best = m
    return best


def is_model(s: Structure, t: TheorySpec) -> bool:
    return check_model(s, t) is None


# ---------------------------------------------------------------------------
# Standard models

def linear_order_model(t: TheorySpec, size: int) -> Structure:
    """``L{n}_{l} = {(i, j): i < j}`` for ``l < n`` and all pairs at ``l = n``."""
    if t.name != "ord":
        raise TheoryError("linear_order_model needs an ord theory")
    (top,) = t.params
    facts = []
    for n in range(top + 1):
        for l in range(n + 1):
            for i in range(size):
                for j in range(size):
                    if l == n or i < j:
                        facts.append((lt(n, l), (i, j)))
    return make_structure(t.vocab, size, facts)


def iter_structures(vocab: Vocabulary, size: int, symbols=None):
    """Every structure over ``vocab`` of the given size (exponential)."""
    symbols = list(symbols or vocab.names)
    slots = []
    for name in symbols:
        sym = vocab[name]
        tuples = list(itertools.product(range(size), repeat=sym.arity))
        if sym.kind == "symmetric":
            tuples = [t for t in tuples if t[0] < t[1]]
        slots.extend((name, t) for t in tuples)
    for bits in itertools.product((False, True), repeat=len(slots)):
        facts = [slot for slot, on in zip(slots, bits) if on]
        try:
            yield make_structure(vocab, size, facts)
        except StructureError:
            continue


def theory_from_axioms(name: str, vocab: Vocabulary, axioms, forbidden=()) -> TheorySpec:
    """Ad-hoc theory from axiom texts (universal sentences) and patterns."""
    fs = tuple(a if isinstance(a, Formula) else Formula(parse_node(a, vocab)) for a in axioms)
    return TheorySpec(name, (), vocab, axioms=fs, forbidden=tuple(forbidden))


def sentence_vars(f: Formula) -> frozenset[str]:
    return free_vars(f.body)
