"""Amalgamation constructions: the ordered amalgam for ``ord``, closure
amalgams for the graph and levelled theories, and cyclic gluing of a witness
chain around an ``m``-cycle.

Pushout labelling: elements of ``m1`` keep their indices; elements of
``m2`` outside the image of ``m0`` follow in increasing order.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (Embedding, Structure, StructureError, is_embedding, make_embedding,
                   make_structure)
from .theories import TheorySpec, Violation, check_model, horn_closure, lt


class AmalgamError(ValueError):
    pass


@dataclass(frozen=True)
class AmalgamProblem:
    m0: Structure
    m1: Structure
    m2: Structure
    e1: Embedding
    e2: Embedding

    def __post_init__(self):
        for e, tgt, name in ((self.e1, self.m1, "e1"), (self.e2, self.m2, "e2")):
            if e.source != self.m0 or e.target != tgt:
                raise AmalgamError(f"{name} has the wrong source or target")
            if not is_embedding(e.map, self.m0, tgt, "induced"):
                raise AmalgamError(f"{name} is not an induced embedding")

    @classmethod
    def build(cls, m0, m1, m2, map1, map2) -> "AmalgamProblem":
        try:
            return cls(m0, m1, m2, make_embedding(map1, m0, m1), make_embedding(map2, m0, m2))
        except StructureError as exc:
            raise AmalgamError(str(exc)) from None

    @classmethod
    def over_prefix(cls, m0, m1, m2) -> "AmalgamProblem":
        """Problem where ``m0`` sits on the first ``|m0|`` indices of both sides."""
        ident = tuple(range(m0.size))
        return cls.build(m0, m1, m2, ident, ident)

    def pushout_maps(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Maps of ``m1`` and ``m2`` into the pushout universe."""
        f1 = tuple(range(self.m1.size))
        inv2 = self.e2.inverse_map()
        f2, nxt = [], self.m1.size
        for b in range(self.m2.size):
            if b in inv2:
                f2.append(self.e1.map[inv2[b]])
            else:
                f2.append(nxt)
                nxt += 1
        return f1, tuple(f2)

    @property
    def pushout_size(self) -> int:
        return self.m1.size + self.m2.size - self.m0.size

    def free_union(self) -> Structure:
        f1, f2 = self.pushout_maps()
        facts = [(n, tuple(f1[e] for e in t)) for n, t in self.m1.tuples()]
        facts += [(n, tuple(f2[e] for e in t)) for n, t in self.m2.tuples()]
        return make_structure(self.m1.vocab, self.pushout_size, facts)


@dataclass(frozen=True)
class Obstruction:
    """Why an amalgam could not be formed, with the offending structure."""

    reason: str
    structure: Structure | None = None
    violation: Violation | None = None

    def describe(self) -> str:
        out = self.reason
        if self.violation is not None:
            out += ": " + self.violation.describe()
        return out


def _check_sides(p: AmalgamProblem, t: TheorySpec):
    for name, s in (("m1", p.m1), ("m2", p.m2)):
        v = check_model(s, t)
        if v is not None:
            raise AmalgamError(f"{name} is not a model of {t.id}: {v.describe()}")


def _check_embeds(p: AmalgamProblem, result: Structure) -> str | None:
    f1, f2 = p.pushout_maps()
    if not is_embedding(f1, p.m1, result, "induced"):
        return "m1 does not embed into the amalgam"
    if not is_embedding(f2, p.m2, result, "induced"):
        return "m2 does not embed into the amalgam"
    return None


# ---------------------------------------------------------------------------
# Ordered amalgam

def ordered_amalgam(p: AmalgamProblem, t: TheorySpec, check_inputs: bool = True) -> Structure:
    """Amalgam of two ``ord`` models composing ranks through the shared part.

    For new ``a`` on one side and new ``b`` on the other, and ``m < n``:
    ``a <_{n,m} b`` iff some ``c`` in the base has ``a <_{n,l} c`` on the
    first side and ``c <_{n,k} b`` on the second with ``l + k + 1 = m``.
    The top level ``<_{n,n}`` holds everywhere.
    """
    if t.name != "ord":
        raise AmalgamError("ordered_amalgam needs an ord theory")
    if p.m1.vocab != t.vocab:
        raise AmalgamError("problem vocabulary differs from the theory")
    if check_inputs:
        _check_sides(p, t)
    (top,) = t.params
    f1, f2 = p.pushout_maps()
    base = [p.e1.map[i] for i in range(p.m0.size)]          # indices in m1
    base2 = [p.e2.map[i] for i in range(p.m0.size)]         # same points in m2
    new1 = [a for a in range(p.m1.size) if a not in set(base)]
    new2 = [b for b in range(p.m2.size) if b not in set(base2)]
    facts = [(n, tuple(f1[e] for e in tup)) for n, tup in p.m1.tuples()]
    facts += [(n, tuple(f2[e] for e in tup)) for n, tup in p.m2.tuples()]

    def through(src, dst, first, second, firstbase, secondbase, fa, fb):
        for n in range(top + 1):
            for m in range(n):
                for x in src:
                    for y in dst:
                        for c1, c2 in zip(firstbase, secondbase):
                            if any(first.holds(lt(n, l), (x, c1))
                                   and second.holds(lt(n, m - 1 - l), (c2, y))
                                   for l in range(m)):
                                facts.append((lt(n, m), (fa[x], fb[y])))
                                break
            for x in src:
                for y in dst:
                    facts.append((lt(n, n), (fa[x], fb[y])))

    through(new1, new2, p.m1, p.m2, base, base2, f1, f2)
    through(new2, new1, p.m2, p.m1, base2, base, f2, f1)
    return make_structure(t.vocab, p.pushout_size, facts)


# ---------------------------------------------------------------------------
# Closure amalgam

def closure_amalgam(p: AmalgamProblem, t: TheorySpec,
                    check_inputs: bool = True) -> Structure | Obstruction:
    """Union of both sides closed under the theory's Horn rules, then checked."""
    if check_inputs:
        _check_sides(p, t)
    try:
        union = p.free_union()
        closed = horn_closure(union, t.rules) if t.rules else union
    except StructureError as exc:
        return Obstruction(f"closure is inconsistent ({exc})")
    v = check_model(closed, t)
    if v is not None:
        return Obstruction("the closed union is not a model", closed, v)
    bad = _check_embeds(p, closed)
    if bad is not None:
        return Obstruction(bad, closed)
    return closed


# ---------------------------------------------------------------------------
# Cyclic amalgam

def _pair_map(chain, i: int, j: int) -> tuple[int, ...]:
    return tuple(chain.tuples[i]) + tuple(chain.tuples[j])


def chain_piece(chain, i: int = 0):
    """Induced substructure on ``a_i`` and ``a_{i+1}`` with its position map."""
    elems = _pair_map(chain, i, i + 1)
    if len(set(elems)) != len(elems):
        raise AmalgamError(f"tuples {i} and {i + 1} overlap or repeat elements")
    facts = []
    index = {e: k for k, e in enumerate(elems)}
    for name, tup in chain.model.tuples():
        if all(e in index for e in tup):
            facts.append((name, tuple(index[e] for e in tup)))
    return make_structure(chain.model.vocab, len(elems), facts)


def check_chain_uniform(chain, count: int) -> int | None:
    """First ``i < count - 1`` whose consecutive pair differs from pair 0."""
    piece = chain_piece(chain, 0)
    for i in range(1, count - 1):
        if chain_piece(chain, i) != piece:
            return i
    return None


def cyclic_amalgam(chain, m: int, t: TheorySpec) -> Structure | Obstruction:
    """Glue ``m`` copies of the consecutive-pair piece around a cycle.

    Copy ``k`` of the tuple block is identified with the second block of
    piece ``k - 1`` and the first block of piece ``k`` (indices mod ``m``);
    no relations are added between non-adjacent pieces.
    """
    if m < 3:
        raise AmalgamError("cyclic amalgam needs m >= 3")
    if len(chain.tuples) < m + 2:
        raise AmalgamError(
            f"chain too short: {len(chain.tuples)} tuples, need at least {m + 2}")
    bad = check_chain_uniform(chain, m + 2)
    if bad is not None:
        raise AmalgamError(f"chain is not uniform: pair ({bad}, {bad + 1}) differs")
    piece = chain_piece(chain, 0)
    r = len(chain.tuples[0])
    facts = []
    for k in range(m):
        nxt = (k + 1) % m
        place = [k * r + q for q in range(r)] + [nxt * r + q for q in range(r)]
        for name, tup in piece.tuples():
            facts.append((name, tuple(place[e] for e in tup)))
    try:
        glued = make_structure(t.vocab, m * r, facts)
    except StructureError as exc:
        return Obstruction(f"gluing is inconsistent ({exc})")
    v = check_model(glued, t)
    if v is not None:
        return Obstruction(f"gluing {m} pieces around a cycle breaks {t.id}", glued, v)
    return glued


def cyclic_blocks(m: int, r: int) -> list[tuple[int, ...]]:
    """Element tuples of the ``m`` blocks in a cyclic amalgam."""
    return [tuple(k * r + q for q in range(r)) for k in range(m)]


# ---------------------------------------------------------------------------
# Rank matrices for ord models
#
# At level n a model is encoded by D[x, y] = least l with x <_{n,l} y.
# Level-n models are exactly the matrices with D[x, x] = n and
# D[x, z] <= D[x, y] + D[y, z] + 1 whenever the right side is at most n.

def rank_matrix(s: Structure, n: int) -> np.ndarray:
    d = np.full((s.size, s.size), n + 1, dtype=np.int8)
    for l in range(n, -1, -1):
        for x, y in s.tables[lt(n, l)]:
            d[x, y] = l
    return d


def rank_matrix_is_model(d: np.ndarray, n: int) -> bool:
    """Vectorised level-``n`` axiom check; ``d`` may carry leading batch axes."""
    return bool(np.all(_rank_ok(d[None] if d.ndim == 2 else d, n)))


def _rank_ok(d: np.ndarray, n: int) -> np.ndarray:
    """Per-batch verdict for arrays of shape ``(B, k, k)``."""
    k = d.shape[-1]
    ok = np.all(d <= n, axis=(1, 2))
    if k:
        ok &= np.all(np.diagonal(d, axis1=1, axis2=2) == n, axis=1)
    for y in range(k):
        rhs = d[:, :, y, None].astype(np.int16) + d[:, None, y, :] + 1
        viol = (rhs <= n) & (d > rhs)
        ok &= ~np.any(viol, axis=(1, 2))
    return ok


def structure_from_ranks(t: TheorySpec, ranks: dict[int, np.ndarray]) -> Structure:
    """Inverse of :func:`rank_matrix` across all levels of ``ord``."""
    (top,) = t.params
    size = next(iter(ranks.values())).shape[0] if ranks else 0
    facts = []
    for n in range(top + 1):
        d = ranks.get(n)
        for x in range(size):
            for y in range(size):
                r = n if d is None else int(d[x, y])
                for l in range(r, n + 1):
                    facts.append((lt(n, l), (x, y)))
    return make_structure(t.vocab, size, facts)


def level_models(k: int, n: int) -> np.ndarray:
    """All level-``n`` rank matrices on ``k`` points, shape ``(M, k, k)``."""
    offs = [(i, j) for i in range(k) for j in range(k) if i != j]
    if not offs:
        return np.full((1, k, k), n, dtype=np.int8)
    vals = np.array(list(itertools.product(range(n + 1), repeat=len(offs))), dtype=np.int8)
    d = np.full((len(vals), k, k), n, dtype=np.int8)
    for col, (i, j) in enumerate(offs):
        d[:, i, j] = vals[:, col]
    return d[_rank_ok(d, n)]


def amalgam_ranks(d1: np.ndarray, d2: np.ndarray, s: int, n: int) -> np.ndarray:
    """Batched ordered amalgam on rank matrices.

    ``d1`` has shape ``(B, s+p, s+p)`` and ``d2`` shape ``(B, s+q, s+q)``; the
    first ``s`` indices of each are the shared base.  The result has shape
    ``(B, s+p+q, s+p+q)`` in pushout labelling.
    """
    b, k1, _ = d1.shape
    k2 = d2.shape[1]
    p, q = k1 - s, k2 - s
    out = np.full((b, k1 + q, k1 + q), n, dtype=np.int8)
    out[:, :k1, :k1] = d1
    idx2 = np.array(list(range(s)) + list(range(k1, k1 + q)), dtype=np.intp)
    out[:, idx2[:, None], idx2[None, :]] = d2
    if s and p and q:
        a_to_c = d1[:, s:, :s].astype(np.int16)           # (B, p, s)
        c_to_b = d2[:, :s, s:].astype(np.int16)           # (B, s, q)
        ab = np.min(a_to_c[:, :, :, None] + c_to_b[:, None, :, :], axis=2) + 1
        b_to_c = d2[:, s:, :s].astype(np.int16)
        c_to_a = d1[:, :s, s:].astype(np.int16)
        ba = np.min(b_to_c[:, :, :, None] + c_to_a[:, None, :, :], axis=2) + 1
        out[:, s:k1, k1:] = np.minimum(ab, n)
        out[:, k1:, s:k1] = np.minimum(ba, n)
    return out


@dataclass
class SuiteResult:
    level: int
    base_size: int
    new_left: int
    new_right: int
    problems: int
    failures: int
    embedding_failures: int

    @property
    def ok(self) -> bool:
        return self.failures == 0 and self.embedding_failures == 0


def level_suite(n: int, s: int, p: int, q: int, chunk: int = 200_000) -> SuiteResult:
    """Check the ordered amalgam on every labelled level-``n`` problem with a
    base of ``s`` points and ``p``/``q`` new points on the two sides."""
    left = level_models(s + p, n)
    right = left if q == p else level_models(s + q, n)
    key_l = _group_by_base(left, s)
    key_r = _group_by_base(right, s)
    problems = failures = emb_fail = 0
    for key, li in key_l.items():
        ri = key_r.get(key)
        if ri is None:
            continue
        pairs = np.array(list(itertools.product(li, ri)), dtype=np.int64)
        for start in range(0, len(pairs), chunk):
            part = pairs[start:start + chunk]
            d1, d2 = left[part[:, 0]], right[part[:, 1]]
            out = amalgam_ranks(d1, d2, s, n)
            problems += len(part)
            failures += int(np.sum(~_rank_ok(out, n)))
            idx2 = list(range(s)) + list(range(s + p, s + p + q))
            emb1 = np.all(out[:, :s + p, :s + p] == d1, axis=(1, 2))
            emb2 = np.all(out[:, idx2][:, :, idx2] == d2, axis=(1, 2))
            emb_fail += int(np.sum(~(emb1 & emb2)))
    return SuiteResult(n, s, p, q, problems, failures, emb_fail)


def _group_by_base(models: np.ndarray, s: int) -> dict[bytes, list[int]]:
    groups: dict[bytes, list[int]] = {}
    for i, d in enumerate(models):
        groups.setdefault(d[:s, :s].tobytes(), []).append(i)
    return groups


def local_shapes(max_base: int, max_side: int) -> list[tuple[int, int, int]]:
    """``(s, p, q)`` with ``p, q >= 1`` and ``p + q <= 3`` inside the size bounds.

    Every axiom of ``ord`` has at most three variables, a failing instance of
    an amalgam must use new points from both sides, and the amalgam relation
    between two new points depends only on those points and the base.  So an
    amalgam of bounded problems is a model iff all of these local problems are.
    """
    shapes = []
    for s in range(max_base + 1):
        for p in range(1, max_side - s + 1):
            for q in range(1, max_side - s + 1):
                if p + q <= 3:
                    shapes.append((s, p, q))
    return shapes


def ord_suite(top: int = 2, max_base: int = 2, max_side: int = 4,
              workers: int | None = None) -> list[SuiteResult]:
    """Exhaustive ordered-amalgam verification for ``ord(top)`` via level
    factorisation and the three-point locality bound.

    ``workers`` defaults to ``SOPNLAB_THREADS`` (1 when unset); results are
    returned in a fixed order whatever the worker count.
    """
    jobs = [(n, s, p, q) for n in range(1, top + 1)
            for s, p, q in local_shapes(max_base, max_side)]
    workers = workers or int(os.environ.get("SOPNLAB_THREADS", "1"))
    if workers <= 1:
        return [level_suite(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_suite_job, jobs))


def _suite_job(job):
    return level_suite(*job)


def random_ord_model(t: TheorySpec, size: int, rng: np.random.Generator,
                     base: Structure | None = None) -> Structure:
    """Seeded random ``ord`` model, optionally extending ``base`` on a prefix."""
    (top,) = t.params
    ranks = {}
    for n in range(1, top + 1):
        pref = None if base is None else rank_matrix(base, n)
        ranks[n] = _random_level(size, n, rng, pref)
    return structure_from_ranks(t, ranks)


def _random_level(k: int, n: int, rng, prefix=None) -> np.ndarray:
    s = 0 if prefix is None else prefix.shape[0]
    if k == 0:
        return np.zeros((0, 0), dtype=np.int8)
    while True:
        d = rng.integers(0, n + 1, size=(k, k)).astype(np.int8)
        # bias towards high ranks so that random draws satisfy the axioms
        d = np.maximum(d, rng.integers(0, n + 1, size=(k, k)).astype(np.int8))
        np.fill_diagonal(d, n)
        if s:
            d[:s, :s] = prefix
        d = _close_ranks(d, n)
        if d is not None and (not s or np.array_equal(d[:s, :s], prefix)):
            return d


def _close_ranks(d: np.ndarray, n: int):
    """Lower entries until the composition bound holds; ``None`` if the
    diagonal would drop below ``n``."""
    d = d.astype(np.int16)
    while True:
        comp = np.min(d[:, :, None] + d[None, :, :], axis=1) + 1
        new = np.minimum(d, np.where(comp <= n, comp, n))
        if np.any(np.diagonal(new) < n):
            return None
        if np.array_equal(new, d):
            return d.astype(np.int8)
        d = new
