"""Formula transformers: distance formulas, cycle sentences, the SOP reducer,
conjunction chains and bounded transitive closure."""

from __future__ import annotations

from ..core import Vocabulary
from .ast import (And, Atom, Eq, Formula, FormulaError, Not, Or, all_vars, conj, disj,
                  exists, rename)


def _binary_symbol(vocab: Vocabulary | None, relation: str | None) -> str:
    if vocab is None:
        return relation or "R"
    if relation is not None:
        if relation not in vocab or vocab[relation].arity != 2:
            raise FormulaError(f"vocabulary has no binary symbol {relation!r}")
        return relation
    binary = vocab.binary()
    if not binary:
        raise FormulaError("vocabulary has no binary symbol")
    return binary[0].name


def _fresh_names(prefix: str, count: int, taken) -> list[str]:
    names, i = [], 0
    taken = set(taken)
    while len(names) < count:
        name = f"{prefix}{i}"
        if name not in taken:
            names.append(name)
            taken.add(name)
        i += 1
    return names


def build_distance_formula(m: int, directed: bool = True, vocab: Vocabulary | None = None,
                           relation: str | None = None) -> Formula:
    """``exists x_0..x_m [x = x_0 & y = x_m & x_0 R x_1 & ... ]``.

    Walk semantics: intermediate vertices may repeat.  With
    ``directed=False`` each step may use either orientation of the relation.
    """
    if m < 1:
        raise FormulaError("distance bound must be >= 1")
    rel = _binary_symbol(vocab, relation)
    zs = [f"x_{i}" for i in range(m + 1)]
    steps = []
    for a, b in zip(zs, zs[1:]):
        step = Atom(rel, (a, b))
        if not directed:
            step = Or((step, Atom(rel, (b, a))))
        steps.append(step)
    body = exists(zs, And((Eq("x", zs[0]), Eq("y", zs[-1]), *steps)))
    return Formula(body, (("x",), ("y",)))


def _tuple_vars(prefix: str, count: int, r: int, taken) -> list[tuple[str, ...]]:
    flat = _fresh_names(prefix, count * r, taken)
    return [tuple(flat[i * r:(i + 1) * r]) for i in range(count)]


def _cycle_conjuncts(phi: Formula, blocks) -> list:
    n = len(blocks)
    return [phi.instantiate(blocks[l], blocks[(l + 1) % n]) for l in range(n)]


def build_cycle_sentence(phi: Formula, n: int) -> Formula:
    """``exists x_0 .. x_{n-1} AND{ phi(x_l, x_k) : k = l+1 mod n }``."""
    phi.require_split()
    if n < 1:
        raise FormulaError("cycle length must be >= 1")
    blocks = _tuple_vars("c", n, phi.arity, all_vars(phi.body))
    body = exists([v for b in blocks for v in b], conj(_cycle_conjuncts(phi, blocks)))
    return Formula(body)


def reduce_sop(phi: Formula, n: int) -> Formula:
    """Strengthen ``phi(x, y)`` by forbidding an ``n``-cycle through the edge
    ``x -> y``::

        phi(x,y) & !exists x_0..x_{n-1} [x_0 = x & x_1 = y &
                                         AND{ phi(x_l, x_k) : k = l+1 mod n }]
    """
    xs, ys = phi.require_split()
    if n < 2:
        raise FormulaError("reduce_sop needs n >= 2")
    r = len(xs)
    blocks = _tuple_vars("c", n, r, all_vars(phi.body) | set(xs) | set(ys))
    eqs = [Eq(b, x) for b, x in zip(blocks[0], xs)]
    eqs += [Eq(b, y) for b, y in zip(blocks[1], ys)]
    cycle = exists([v for b in blocks for v in b],
                   And(tuple(eqs) + tuple(_cycle_conjuncts(phi, blocks))))
    return Formula(And((phi.body, Not(cycle))), phi.split)


def conj_chain(phis) -> Formula:
    """Conjunction of formulas sharing a split arity; splits are unified to
    the first formula's variables."""
    phis = list(phis)
    if not phis:
        raise FormulaError("conj_chain needs at least one formula")
    xs, ys = phis[0].require_split()
    if len(phis) == 1:
        return phis[0]
    parts = []
    for f in phis:
        fx, fy = f.require_split()
        if len(fx) != len(xs):
            raise FormulaError("incompatible free-variable splits")
        parts.append(f.instantiate(xs, ys))
    return Formula(And(tuple(parts)), (xs, ys))


def bounded_tc_formula(phi: Formula, m: int) -> Formula:
    """Reachability from ``x`` to ``y`` in 1..m ``phi``-steps, as the finite
    disjunction of the ``m`` existential path formulas."""
    xs, ys = phi.require_split()
    if m < 1:
        raise FormulaError("bounded_tc_formula needs m >= 1")
    if m == 1:
        return phi
    r = len(xs)
    taken = all_vars(phi.body) | set(xs) | set(ys)
    disjuncts = []
    for steps in range(1, m + 1):
        blocks = _tuple_vars("z", steps + 1, r, taken)
        eqs = [Eq(x, b) for x, b in zip(xs, blocks[0])]
        eqs += [Eq(y, b) for y, b in zip(ys, blocks[-1])]
        links = [phi.instantiate(blocks[l], blocks[l + 1]) for l in range(steps)]
        disjuncts.append(exists([v for b in blocks for v in b],
                                And(tuple(eqs) + tuple(links))))
    return Formula(disj(disjuncts), (xs, ys))


def converse(phi: Formula) -> Formula:
    """``phi^-(x, y) = phi(y, x)`` with the same split variables."""
    xs, ys = phi.require_split()
    return Formula(phi.instantiate(ys, xs), (xs, ys))


def relabel_split(phi: Formula, xs, ys) -> Formula:
    sx, sy = phi.require_split()
    return Formula(rename(phi.body, dict(zip(sx + sy, tuple(xs) + tuple(ys)))),
                   (tuple(xs), tuple(ys)))
