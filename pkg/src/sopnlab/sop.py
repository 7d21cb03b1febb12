"""Witness chains for the n-strong order property and their checkers."""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field

from .core import Structure, make_structure, parse_structure, format_structure
from .logic import (And, Atom, Formula, FormulaError, Not, evaluate, is_quantifier_free,
                    parse_formula, satisfying_assignments)
from .logic.ast import conj, relations
from .theories import (TheoryError, TheorySpec, check_model, iter_structures,
                       linear_order_model, lt, theory_spec)


class ChainError(ValueError):
    pass


@dataclass(frozen=True)
class WitnessChain:
    model: Structure
    phi: Formula
    tuples: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        r = self.phi.arity
        tups = tuple(tuple(int(e) for e in t) for t in self.tuples)
        object.__setattr__(self, "tuples", tups)
        for i, t in enumerate(tups):
            if len(t) != r:
                raise ChainError(f"tuple {i} has length {len(t)}, formula arity is {r}")
            for e in t:
                if not 0 <= e < self.model.size:
                    raise ChainError(f"tuple {i} mentions {e}, outside the universe")

    def __len__(self):
        return len(self.tuples)

    def holds(self, k: int, m: int) -> bool:
        return phi_holds(self.model, self.phi, self.tuples[k], self.tuples[m])

    def to_json(self, theory: TheorySpec | None = None) -> str:
        doc = {
            "theory": theory.id if theory else None,
            "model": format_structure(self.model),
            "phi": self.phi.text,
            "split": self.phi.split_text(),
            "tuples": [list(t) for t in self.tuples],
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    @staticmethod
    def from_json(text: str) -> tuple["WitnessChain", TheorySpec | None]:
        doc = json.loads(text)
        model = parse_structure(doc["model"])
        phi = parse_formula(doc["phi"], model.vocab, doc["split"])
        t = theory_spec(doc["theory"]) if doc.get("theory") else None
        return WitnessChain(model, phi, tuple(map(tuple, doc["tuples"]))), t


def phi_holds(s: Structure, phi: Formula, a, b) -> bool:
    xs, ys = phi.require_split()
    if len(a) != len(xs) or len(b) != len(ys):
        raise FormulaError("tuple length differs from the formula split")
    return evaluate(s, phi, dict(zip(xs + ys, tuple(a) + tuple(b))))


# ---------------------------------------------------------------------------
# Witness builders

def dcf_formula(n: int, vocab, relation: str = "R") -> Formula:
    """``AND_{l<n-1} R(x_l, y_{l+1}) & R(x_{n-1}, y_0)``."""
    xs = tuple(f"x{l}" for l in range(n))
    ys = tuple(f"y{l}" for l in range(n))
    parts = [Atom(relation, (xs[l], ys[l + 1])) for l in range(n - 1)]
    parts.append(Atom(relation, (xs[n - 1], ys[0])))
    return Formula(conj(parts), (xs, ys))


def ord_formula(n: int) -> Formula:
    """``phi_n(x, y) = AND_{l <= n} x <_{l,0} y``."""
    return Formula(conj([Atom(lt(l, 0), ("x", "y")) for l in range(n + 1)]),
                   (("x",), ("y",)))


def lev_formula(n: int) -> Formula:
    """``AND_{k <= n} x_k <_{k,0} y_k`` over the sorted tuples of the levelled theory."""
    xs = tuple(f"x{k}" for k in range(n + 1))
    ys = tuple(f"y{k}" for k in range(n + 1))
    return Formula(conj([Atom(lt(k, 0), (xs[k], ys[k])) for k in range(n + 1)]), (xs, ys))


def build_witness(t: TheorySpec, n: int | None = None, N: int = 6) -> WitnessChain:
    """Standard chain exemplifying the order property of the catalog theory.

    * ``dcf(n)``/``ocf(n)``: points ``a^l_i`` at index ``i*n + l`` with
      edges ``a^l_i -> a^{l+1}_j`` and ``a^{n-1}_i -> a^0_j`` for ``i < j``.
    * ``ord(n*)``: the linear-order model with ``phi_n``.
    * ``lev(n*)``: sorted copies of a linear order linked by the ``F`` maps.
    """
    if N < 2:
        raise ChainError("a witness chain needs N >= 2")
    if t.name in ("dcf", "ocf"):
        (param,) = t.params
        n = param if n is None else n
        if n != param:
            raise TheoryError(f"{t.id} is witnessed at n = {param}, not {n}")
        if t.name == "ocf" and n % 2 == 0:
            raise TheoryError("ocf witnesses need odd n")
        facts = []
        for i in range(N):
            for j in range(i + 1, N):
                for l in range(n):
                    facts.append(("R", (i * n + l, j * n + (l + 1) % n)))
        model = make_structure(t.vocab, N * n, facts)
        tuples = tuple(tuple(i * n + l for l in range(n)) for i in range(N))
        return WitnessChain(model, dcf_formula(n, t.vocab), tuples)
    if t.name == "ord":
        (top,) = t.params
        n = top if n is None else n
        if not 1 <= n <= top:
            raise TheoryError(f"ord witness level must lie in 1..{top}")
        return WitnessChain(linear_order_model(t, N), ord_formula(n),
                            tuple((i,) for i in range(N)))
    if t.name == "lev":
        (top,) = t.params
        n = top if n is None else n
        if not 0 <= n <= top:
            raise TheoryError(f"lev witness level must lie in 0..{top}")
        model = levelled_model(t, N)
        return WitnessChain(model, lev_formula(n),
                            tuple(tuple(k * N + i for k in range(n + 1)) for i in range(N)))
    raise TheoryError(f"no witness builder for {t.id}")


def levelled_model(t: TheorySpec, N: int) -> Structure:
    """Sort ``P_k`` holds ``p^k_i = k*N + i``; ``F_k(p^{k+1}_i) = p^k_i``."""
    (top,) = t.params
    facts = []
    for k in range(top + 1):
        for i in range(N):
            facts.append((f"P{k}", (k * N + i,)))
            if k < top:
                facts.append((f"F{k}", ((k + 1) * N + i, k * N + i)))
            for j in range(N):
                for l in range(k + 1):
                    if l == k or i < j:
                        facts.append((lt(k, l), (k * N + i, k * N + j)))
    return make_structure(t.vocab, (top + 1) * N, facts)


def sequence_witness(t: TheorySpec, N: int):
    """Formulas ``phi_0..phi_{n*}`` and a coherent decreasing witness array."""
    (top,) = t.params
    if t.name == "ord":
        s = linear_order_model(t, N)
        phis = [ord_formula(n) for n in range(top + 1)]
        array = [[(N - 1 - a,) for a in range(N)] for _ in range(top + 1)]
    elif t.name == "lev":
        s = levelled_model(t, N)
        phis = [lev_formula(n) for n in range(top + 1)]
        array = [[tuple(k * N + N - 1 - a for k in range(n + 1)) for a in range(N)]
                 for n in range(top + 1)]
    else:
        raise TheoryError(f"no sequence witness for {t.id}")
    return phis, array, s


# ---------------------------------------------------------------------------
# Checkers

@dataclass(frozen=True)
class ChainResult:
    ok: bool
    failure: tuple[int, int] | None = None

    def __bool__(self):
        return self.ok


def check_chain(w: WitnessChain) -> ChainResult:
    """``phi[a_k, a_m]`` for all ``k < m``; reports the first failing pair."""
    for k in range(len(w)):
        for m in range(k + 1, len(w)):
            if not w.holds(k, m):
                return ChainResult(False, (k, m))
    return ChainResult(True)


def phi_digraph(s: Structure, phi: Formula, restrict=None):
    """Candidate tuples and, for each, the indices of its ``phi``-successors."""
    xs, ys = phi.require_split()
    r = len(xs)
    if restrict is None:
        nodes = list(itertools.product(range(s.size), repeat=r))
        index = {t: i for i, t in enumerate(nodes)}
        succ = []
        for a in nodes:
            env = dict(zip(xs, a))
            succ.append(sorted(index[b] for b in
                               satisfying_assignments(s, phi.body, ys, fixed=env)))
        return nodes, succ
    nodes = []
    for t in restrict:
        t = tuple(t)
        if len(t) != r:
            raise FormulaError("restricted tuple length differs from the formula split")
        if t not in nodes:
            nodes.append(t)
    nodes.sort()
    succ = [[j for j, b in enumerate(nodes) if phi_holds(s, phi, a, b)] for a in nodes]
    return nodes, succ


def search_phi_cycle(s: Structure, phi: Formula, n: int, restrict=None):
    """Lexicographically first ``(t_0, .., t_{n-1})`` with ``phi(t_l, t_{l+1 mod n})``.

    Tuples may repeat.  ``restrict`` limits the candidates to the given tuples.
    Returns ``None`` when no cycle exists.
    """
    if n < 1:
        raise ValueError("cycle length must be >= 1")
    nodes, succ = phi_digraph(s, phi, restrict)
    return _first_cycle(nodes, succ, n)


def _first_cycle(nodes, succ, n):
    pred = [[] for _ in nodes]
    for a, outs in enumerate(succ):
        for b in outs:
            pred[b].append(a)
    for start in range(len(nodes)):
        # dist[v]: fewest steps from v back to start
        dist = {start: 0}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for u in pred[v]:
                if u not in dist:
                    dist[u] = dist[v] + 1
                    queue.append(u)
        path = [start]

        def walk(v, left):
            if left == 0:
                return v == start
            for u in succ[v]:
                d = dist.get(u)
                if d is None or d > left - 1:
                    continue
                path.append(u)
                if walk(u, left - 1):
                    return True
                path.pop()
            return False

        if walk(start, n):
            return tuple(nodes[i] for i in path[:n])
    return None


@dataclass(frozen=True)
class OrderReport:
    irreflexive: bool
    antisymmetric: bool
    transitive: bool
    longest_chain: int | None
    counterexample: tuple | None = None

    @property
    def strict_partial_order(self) -> bool:
        return self.irreflexive and self.antisymmetric and self.transitive


def check_strict_order(s: Structure, phi: Formula, restrict=None) -> OrderReport:
    """Partial-order axioms for ``phi`` over all ``r``-tuples (or ``restrict``)."""
    nodes, succ = phi_digraph(s, phi, restrict)
    sets = [set(x) for x in succ]
    irr = anti = trans = True
    cex = None
    for a in range(len(nodes)):
        if a in sets[a]:
            irr = False
            cex = cex or ("reflexive", nodes[a])
    for a in range(len(nodes)):
        for b in sets[a]:
            if b != a and a in sets[b]:
                anti = False
                cex = cex or ("symmetric pair", nodes[a], nodes[b])
    for a in range(len(nodes)):
        for b in sets[a]:
            for c in sets[b]:
                if c not in sets[a]:
                    trans = False
                    cex = cex or ("intransitive", nodes[a], nodes[b], nodes[c])
                    break
            if not trans:
                break
        if not trans:
            break
    longest = None
    if irr and trans:
        longest = _longest_path(succ)
    return OrderReport(irr, anti, trans, longest, cex)


def _longest_path(succ) -> int:
    """Vertex count of the longest path in an acyclic successor graph."""
    memo = {}
    order = []
    seen = set()
    for root in range(len(succ)):
        if root in seen:
            continue
        stack = [(root, iter(succ[root]))]
        seen.add(root)
        while stack:
            v, it = stack[-1]
            for u in it:
                if u not in seen:
                    seen.add(u)
                    stack.append((u, iter(succ[u])))
                    break
            else:
                stack.pop()
                order.append(v)
    for v in order:
        memo[v] = 1 + max((memo[u] for u in succ[v]), default=0)
    return max(memo.values(), default=0)


# ---------------------------------------------------------------------------
# Sequences of formulas

@dataclass(frozen=True)
class ClauseResult:
    ok: bool
    detail: str
    witness: object = None


@dataclass(frozen=True)
class SequenceReport:
    a: ClauseResult
    b: ClauseResult
    c: ClauseResult
    d: ClauseResult

    @property
    def ok(self) -> bool:
        return all(x.ok for x in (self.a, self.b, self.c, self.d))

    def clauses(self):
        return (("a", self.a), ("b", self.b), ("c", self.c), ("d", self.d))


def _clause_shapes(phis) -> ClauseResult:
    for i, f in enumerate(phis):
        if f.split is None:
            return ClauseResult(False, f"formula {i} has no split", i)
    for i in range(len(phis) - 1):
        (x0, y0), (x1, y1) = phis[i].split, phis[i + 1].split
        if x1[:len(x0)] != x0 or y1[:len(y0)] != y0:
            return ClauseResult(False, f"split of formula {i} is not an initial segment "
                                       f"of formula {i + 1}", i)
    return ClauseResult(True, "variable tuples form initial segments")


def _entailment(phis, size_bound, theory, max_slots) -> ClauseResult:
    checked = size_bound if len(phis) > 1 else 0
    unextended = None
    for i in range(len(phis) - 1):
        strong, weak = phis[i + 1], phis[i]
        body = And((strong.body, Not(weak.body)))
        fv = sorted(strong.free_vars | weak.free_vars)
        syms = sorted(relations(strong.body) | relations(weak.body))
        bound = size_bound
        if is_quantifier_free(strong.body) and is_quantifier_free(weak.body):
            bound = min(size_bound, len(fv))
        vocab = (theory.vocab if theory else None)
        if vocab is None:
            raise FormulaError("bounded entailment needs a theory for its vocabulary")
        axioms = [a for a in theory.axioms if relations(a.body) <= set(syms)]
        for size in range(1, bound + 1):
            slots = sum(size ** vocab[s].arity for s in syms)
            if slots > max_slots:
                return ClauseResult(True, f"entailment checked up to size {size - 1} "
                                          f"(size {size} exceeds the search budget)")
            for st in iter_structures(vocab, size, syms):
                if any(not evaluate(st, a) for a in axioms):
                    continue
                for hit in satisfying_assignments(st, body, fv):
                    full = _complete(st, theory)
                    env = dict(zip(fv, hit))
                    if full is not None and evaluate(full, body, env):
                        return ClauseResult(False, f"formula {i + 1} does not entail "
                                                   f"formula {i}", (full, env))
                    unextended = unextended or (st, env)
        checked = min(checked, bound)
    if unextended is not None:
        return ClauseResult(False, "counterexample on the symbols of the formulas only; "
                                   "no completion to a full model was found", unextended)
    return ClauseResult(True, f"entailment holds on all models up to size {checked}")


def _complete(st: Structure, theory: TheorySpec):
    """Horn closure of a reduct counterexample, if that is a model."""
    from .theories import horn_closure
    full = horn_closure(st, theory.rules)
    return full if check_model(full, theory) is None else None


def check_sop_sequence(phis, witness, s: Structure, size_bound: int = 4,
                       theory: TheorySpec | None = None, max_slots: int = 16) -> SequenceReport:
    """Check the four clauses of the strong order property at desk scale.

    (a) split shapes are initial segments; (b) each formula entails its
    predecessor on all theory models up to ``size_bound`` (quantifier-free
    formulas need only as many points as free variables); (c) ``phi_n`` has
    no ``m``-cycle in ``s`` for ``1 <= m <= n``; (d) the witness array is
    coherent under restriction and ``phi_n[a^n_beta, a^n_alpha]`` holds for
    ``alpha < beta``.
    """
    phis = list(phis)
    a = _clause_shapes(phis)
    if not a.ok:
        skip = ClauseResult(False, "skipped: shapes are malformed")
        return SequenceReport(a, skip, skip, skip)
    b = _entailment(phis, size_bound, theory, max_slots)
    c = ClauseResult(True, f"no phi_n cycles of length <= n for n <= {len(phis) - 1}")
    for n, f in enumerate(phis):
        for m in range(1, n + 1):
            cyc = search_phi_cycle(s, f, m)
            if cyc is not None:
                c = ClauseResult(False, f"phi_{n} has a cycle of length {m}", (n, m, cyc))
                break
        if not c.ok:
            break
    d = ClauseResult(True, "witness array is coherent and ordered")
    if len(witness) != len(phis):
        d = ClauseResult(False, "witness array and formula list differ in length")
    else:
        for n in range(len(phis)):
            r = phis[n].arity
            for al, tup in enumerate(witness[n]):
                if len(tup) != r:
                    d = ClauseResult(False, f"a^{n}_{al} has the wrong length", (n, al))
                    break
                if n + 1 < len(phis) and (al >= len(witness[n + 1])
                                          or tuple(witness[n + 1][al][:r]) != tuple(tup)):
                    d = ClauseResult(False, f"a^{n}_{al} is not a restriction of "
                                            f"a^{n + 1}_{al}", (n, al))
                    break
            if not d.ok:
                break
            bad = next(((al, be) for al in range(len(witness[n]))
                        for be in range(al + 1, len(witness[n]))
                        if not phi_holds(s, phis[n], witness[n][be], witness[n][al])), None)
            if bad is not None:
                d = ClauseResult(False, f"phi_{n}[a_{bad[1]}, a_{bad[0]}] fails", (n,) + bad)
                break
    return SequenceReport(a, b, c, d)


# ---------------------------------------------------------------------------
# Independence-style instance checker

@dataclass(frozen=True)
class Instance220Report:
    contradictory: bool
    contradiction_witness: tuple | None
    hypotheses: bool
    hypothesis_failure: tuple | None
    conclusion: bool
    conclusion_witness: tuple | None

    @property
    def counterexample(self) -> bool:
        """Hypotheses hold but the conclusion fails."""
        return self.contradictory and self.hypotheses and not self.conclusion


def check_2_20_instance(s: Structure, as_, bs, phi: Formula, psi: Formula, u, v
                        ) -> Instance220Report:
    """Check the hypotheses and conclusion of the independence property.

    Hypotheses: ``phi`` and ``psi`` never hold together against a single
    ``a_i``; ``phi[b_j, a_i]`` for ``i <= j`` and ``psi[b_j, a_i]`` for
    ``i > j``.  Conclusion: some ``x`` has ``phi(x, a_i)`` for ``i`` in ``u``
    and ``psi(x, a_j)`` for ``j`` in ``v``.
    """
    u, v = sorted(set(u)), sorted(set(v))
    if set(u) & set(v):
        raise ValueError("u and v must be disjoint")
    for i in u + v:
        if not 0 <= i < len(as_):
            raise ValueError(f"index {i} outside the a-sequence")
    xs, ys = phi.require_split()
    pxs, pys = psi.require_split()
    if len(pxs) != len(xs):
        raise FormulaError("phi and psi have different arities")
    r = len(xs)
    for t in list(as_) + list(bs):
        if len(t) != r:
            raise FormulaError("tuple length differs from the formula arity")
    avars = [tuple(f"_a{i}_{q}" for q in range(r)) for i in range(len(as_))]
    env = {var: e for i, t in enumerate(as_) for var, e in zip(avars[i], t)}
    xv = tuple(f"_x{q}" for q in range(r))

    contra = None
    for i in range(len(as_)):
        node = And((phi.instantiate(xv, avars[i]), psi.instantiate(xv, avars[i])))
        hit = next(satisfying_assignments(s, node, xv, fixed=env), None)
        if hit is not None:
            contra = (hit, i)
            break
    hyp_fail = None
    for j, b in enumerate(bs):
        for i, a in enumerate(as_):
            f = phi if i <= j else psi
            if not phi_holds(s, f, b, a):
                hyp_fail = ("phi" if i <= j else "psi", i, j)
                break
        if hyp_fail:
            break
    parts = [phi.instantiate(xv, avars[i]) for i in u]
    parts += [psi.instantiate(xv, avars[j]) for j in v]
    if parts:
        concl = next(satisfying_assignments(s, And(tuple(parts)), xv, fixed=env), None)
    else:
        concl = (0,) * r if s.size else None
    return Instance220Report(contra is None, contra, hyp_fail is None, hyp_fail,
                             concl is not None, concl)


# ---------------------------------------------------------------------------
# Certificates

WITNESSED = "SOP_{n}-witnessed-at-desk-scale"
REFUTED = "SOP_{n}-refuted-at-bound"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class SopCertificate:
    theory: TheorySpec
    phi: Formula
    n: int
    chain: WitnessChain
    cycle_report: dict = field(default_factory=dict)
    verdict: str = INCONCLUSIVE

    def __post_init__(self):
        if self.verdict not in (WITNESSED.format(n=self.n), REFUTED.format(n=self.n),
                                INCONCLUSIVE):
            raise ValueError(f"unknown verdict {self.verdict!r}")


def certify(chain: WitnessChain, n: int, t: TheorySpec, extra_models=()) -> SopCertificate:
    """Desk-scale judgement of whether ``chain.phi`` exemplifies SOP_n in ``t``.

    Evidence gathered, in order: the model satisfies ``t``; the chain
    condition holds; no ``phi``-cycle of length ``n`` among chain tuples; the
    cyclic gluing of ``n`` chain pieces (when the chain is long enough) is
    obstructed; none of ``extra_models`` has a ``phi``-cycle of length ``n``.
    A model of ``t`` carrying an ``n``-cycle refutes clause (b) at the bound.
    """
    from .amalgam import AmalgamError, Obstruction, cyclic_amalgam, cyclic_blocks
    extra_models = list(extra_models)
    rep: dict = {"n": n}
    v = check_model(chain.model, t)
    rep["model"] = "ok" if v is None else v.describe()
    ch = check_chain(chain)
    rep["chain"] = "ok" if ch else f"fails at {ch.failure}"
    if v is not None or not ch:
        return SopCertificate(t, chain.phi, n, chain, rep, INCONCLUSIVE)
    cyc = search_phi_cycle(chain.model, chain.phi, n, restrict=chain.tuples)
    rep["chain_cycle"] = "none" if cyc is None else cyc
    if cyc is not None:
        return SopCertificate(t, chain.phi, n, chain, rep, REFUTED.format(n=n))
    if n >= 3 and len(chain) >= n + 2:
        try:
            glued = cyclic_amalgam(chain, n, t)
        except AmalgamError as exc:
            rep["gluing"] = f"not applicable ({exc})"
        else:
            if isinstance(glued, Obstruction):
                rep["gluing"] = f"obstructed: {glued.describe()}"
            else:
                blocks = cyclic_blocks(n, chain.phi.arity)
                if all(phi_holds(glued, chain.phi, blocks[k], blocks[(k + 1) % n])
                       for k in range(n)):
                    rep["gluing"] = "model with phi-cycle"
                    rep["gluing_model"] = glued
                    rep["gluing_cycle"] = tuple(blocks)
                    return SopCertificate(t, chain.phi, n, chain, rep, REFUTED.format(n=n))
                rep["gluing"] = "model without phi-cycle through the blocks"
    else:
        rep["gluing"] = "not applicable (chain too short or n < 3)"
    for idx, m in enumerate(extra_models):
        if check_model(m, t) is not None:
            continue
        cyc = search_phi_cycle(m, chain.phi, n)
        if cyc is not None:
            rep["extra_cycle"] = (idx, cyc)
            return SopCertificate(t, chain.phi, n, chain, rep, REFUTED.format(n=n))
    rep["extra_models"] = len(extra_models)
    return SopCertificate(t, chain.phi, n, chain, rep, WITNESSED.format(n=n))
