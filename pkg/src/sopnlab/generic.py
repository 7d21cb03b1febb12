"""Approximations to existentially closed models by one-point extensions.

An extension problem over a site ``(s_0, .., s_{k-1})`` of a model ``M`` is a
structure on ``k + 1`` points whose first ``k`` points copy the site and
whose last point is new.  ``M`` realizes it when some element outside the
site plays the new point.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .core import Structure, StructureError, induced_substructure, iter_embeddings, make_structure
from .theories import TheorySpec, check_model


class GenericError(ValueError):
    pass


MAX_SLOTS = 16


@dataclass(frozen=True)
class ExtensionProblem:
    base: Structure
    site: tuple[int, ...]
    extension: Structure

    def __post_init__(self):
        k = len(self.site)
        if self.extension.size != k + 1:
            raise GenericError("extension must have exactly one new point")
        if _restrict(self.base, self.site) != _restrict(self.extension, tuple(range(k))):
            raise GenericError("extension does not agree with the site")

    @property
    def new_facts(self) -> frozenset:
        return _facts_with(self.extension, len(self.site))


def _restrict(s: Structure, elems) -> Structure:
    """Substructure on ``elems`` in the given order (not sorted)."""
    index = {e: i for i, e in enumerate(elems)}
    facts = [(n, tuple(index[e] for e in t)) for n, t in s.tuples()
             if all(e in index for e in t)]
    return make_structure(s.vocab, len(elems), facts)


def _facts_with(s: Structure, point: int) -> frozenset:
    return frozenset((n, t) for n, t in s.tuples() if point in t)


def _slots(vocab, k: int):
    """Positional facts over ``k + 1`` points that mention the new point ``k``."""
    out = []
    for sym in vocab:
        for t in itertools.product(range(k + 1), repeat=sym.arity):
            if k not in t:
                continue
            if sym.kind == "symmetric" and (t[0] == t[1] or t[0] > t[1]):
                continue
            out.append((sym.name, t))
    return out


def sites(size: int, site_size: int):
    for k in range(site_size + 1):
        yield from itertools.combinations(range(size), k)


def _type_key(s: Structure, site, e) -> frozenset:
    """Facts linking ``e`` to ``site``, in positional form with ``e`` last."""
    elems = tuple(site) + (e,)
    k = len(site)
    key = []
    for name, t in _slots(s.vocab, k):
        if s.holds(name, tuple(elems[i] for i in t)):
            key.append((name, t))
            sym = s.vocab[name]
            if sym.kind == "symmetric":
                key.append((name, t[::-1]))
    return frozenset(key)


def _adjoin(base: Structure, site, key) -> Structure:
    """``base`` plus one new point carrying the positional facts ``key``."""
    elems = tuple(site) + (base.size,)
    facts = list(base.tuples())
    facts += [(n, tuple(elems[i] for i in t)) for n, t in key]
    return make_structure(base.vocab, base.size + 1, facts)


def _candidate_keys(vocab, k: int):
    slots = _slots(vocab, k)
    if len(slots) > MAX_SLOTS:
        raise GenericError(f"{len(slots)} extension slots per site exceed the limit {MAX_SLOTS}")
    for bits in itertools.product((False, True), repeat=len(slots)):
        yield [slot for slot, on in zip(slots, bits) if on]


def _consistent(base: Structure, site, facts, t: TheorySpec):
    try:
        grown = _adjoin(base, site, facts)
    except StructureError:
        return None
    if check_model(grown, t, focus=[base.size]) is not None:
        return None
    return grown


def enumerate_extensions(base: Structure, t: TheorySpec, site_size: int) -> list[ExtensionProblem]:
    """All one-point extension types over sites of size ``<= site_size`` that
    keep ``t`` when freely adjoined to ``base``."""
    if check_model(base, t) is not None:
        raise GenericError("base is not a model of the theory")
    out = []
    for site in sites(base.size, site_size):
        k = len(site)
        for facts in _candidate_keys(base.vocab, k):
            grown = _consistent(base, site, facts, t)
            if grown is None:
                continue
            ext = _restrict(grown, tuple(site) + (base.size,))
            out.append(ExtensionProblem(base, tuple(site), ext))
    return out


def is_realized(m: Structure, problem: ExtensionProblem) -> int | None:
    """An element of ``m`` realizing ``problem`` (least one), via induced embedding search."""
    k = len(problem.site)
    fixed = {i: problem.site[i] for i in range(k)}
    emb = next(iter_embeddings(problem.extension, m, "induced", fixed=fixed), None)
    return None if emb is None else emb[k]


def outstanding_problems(m: Structure, t: TheorySpec, site_size: int) -> list[ExtensionProblem]:
    """Consistent extension problems over ``m`` that ``m`` itself does not realize."""
    return [p for p in enumerate_extensions(m, t, site_size) if is_realized(m, p) is None]


def _outstanding_keys(m: Structure, t: TheorySpec, site_size: int, limit=None):
    """Fast variant used during construction: ``[(site, key)]``."""
    out = []
    for site in sites(m.size, site_size):
        inside = set(site)
        realized = {_type_key(m, site, e) for e in range(m.size) if e not in inside}
        for facts in _candidate_keys(m.vocab, len(site)):
            key = _closed_key(m.vocab, facts)
            if key in realized:
                continue
            if _consistent(m, site, facts, t) is not None:
                out.append((site, facts))
                if limit is not None and len(out) >= limit:
                    return out
    return out


def _closed_key(vocab, facts) -> frozenset:
    key = set(facts)
    for n, t in facts:
        if vocab[n].kind == "symmetric":
            key.add((n, t[::-1]))
    return frozenset(key)


@dataclass
class GenericResult:
    structure: Structure
    complete: bool
    outstanding: int
    site_size: int
    growth_steps: int
    repair_steps: int
    notes: list[str] = field(default_factory=list)

    @property
    def status(self) -> str:
        if self.complete:
            return f"{self.site_size}-extension-complete"
        return f"incomplete ({self.outstanding} outstanding problems)"


def ec_extend(start: Structure, t: TheorySpec, site_size: int, target_size: int,
              seed: int = 0, repair_budget: int = 4000, link_prob: float = 0.5,
              uphill: float = 0.1) -> GenericResult:
    """Grow ``start`` towards an extension-complete model of ``t``.

    Growth: each new point realizes an outstanding problem chosen round-robin
    over sites (ties broken by the seeded generator) and receives random
    further links that keep ``t``.  Repair: after reaching ``target_size``,
    points outside ``start`` are rewired towards outstanding problems, keeping
    a rewiring when it does not increase the number of such problems and
    otherwise with probability ``uphill ** increase``; the best structure
    seen is returned.
    """
    if check_model(start, t) is not None:
        raise GenericError("start is not a model of the theory")
    if target_size < start.size:
        raise GenericError("target size is below the start size")
    rng = random.Random(seed)
    m = start
    growth = 0
    while m.size < target_size:
        pending = _outstanding_keys(m, t, site_size)
        if pending:
            site, facts = _pick_round_robin(pending, growth, rng)
        else:
            site, facts = (), []
        m = _grow(m, site, facts, t, rng, link_prob)
        growth += 1
    fixed = set(range(start.size))
    pending = _outstanding_keys(m, t, site_size)
    best = (m, pending)
    repairs = 0
    free = [v for v in range(m.size) if v not in fixed]
    while pending and repairs < repair_budget and free:
        repairs += 1
        site, facts = rng.choice(pending)
        choices = [v for v in free if v not in site]
        if not choices:
            break
        v = rng.choice(choices)
        cand = _rewire(m, v, site, facts, t, rng)
        if cand is None:
            continue
        cand_pending = _outstanding_keys(cand, t, site_size, limit=len(pending) + 3)
        worse = len(cand_pending) - len(pending)
        if worse <= 0 or rng.random() < uphill ** worse:
            m, pending = cand, _outstanding_keys(cand, t, site_size)
            if len(pending) < len(best[1]):
                best = (m, pending)
    m, pending = best
    notes = []
    if pending:
        notes.append("repair budget exhausted before every problem was realized")
    if not free and pending:
        notes.append("no points outside the start structure to rewire")
    return GenericResult(m, not pending, len(pending), site_size, growth, repairs, notes)


def _pick_round_robin(pending, step, rng):
    by_site: dict = {}
    for site, facts in pending:
        by_site.setdefault(site, []).append(facts)
    keys = sorted(by_site, key=lambda s: (len(s), s))
    site = keys[step % len(keys)]
    return site, rng.choice(by_site[site])


def _grow(m: Structure, site, facts, t: TheorySpec, rng, link_prob) -> Structure:
    grown = _adjoin(m, site, facts)
    v = m.size
    others = [w for w in range(m.size) if w not in set(site)]
    rng.shuffle(others)
    for w in others:
        for extra in _pair_facts(m.vocab, v, w):
            if rng.random() >= link_prob:
                continue
            trial = _add(grown, [extra])
            if trial is not None and check_model(trial, t, focus=[v]) is None:
                grown = trial
    return grown


def _pair_facts(vocab, v, w):
    out = []
    for sym in vocab:
        if sym.arity != 2:
            continue
        out.append((sym.name, (v, w)))
        if sym.kind != "symmetric":
            out.append((sym.name, (w, v)))
    return out


def _add(s: Structure, facts):
    try:
        return make_structure(s.vocab, s.size, list(s.tuples()) + list(facts))
    except StructureError:
        return None


def _rewire(m: Structure, v: int, site, facts, t: TheorySpec, rng):
    """Make ``v`` realize ``facts`` over ``site``; drop other links of ``v``
    until the theory holds again."""
    elems = tuple(site) + (v,)
    inside = set(elems)
    keep = [(n, tup) for n, tup in m.tuples()
            if v not in tup or not set(tup) <= inside]
    want = [(n, tuple(elems[i] for i in tup)) for n, tup in facts]
    cand = _add(make_structure(m.vocab, m.size, keep), want)
    if cand is None:
        return None
    required = set(make_structure(m.vocab, m.size, want).tuples())
    for _ in range(m.size * 4):
        viol = check_model(cand, t, focus=[v])
        if viol is None:
            return cand
        droppable = [(n, tup) for n, tup in cand.tuples()
                     if v in tup and (n, tup) not in required
                     and set(tup) <= set(viol.elements)]
        if not droppable:
            return None
        n, tup = rng.choice(droppable)
        sym = m.vocab[n]
        rest = [f for f in cand.tuples() if f != (n, tup)
                and not (sym.kind == "symmetric" and f == (n, tup[::-1]))]
        cand = make_structure(m.vocab, m.size, rest)
    return None
