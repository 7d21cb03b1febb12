"""Cut-based invariants of linear orders and of models with an order-like formula.

A cut is a finite increasing set ``C`` of points below ``delta``.  Points
flagged as accumulation points are skipped; the remaining ones (``nacc``)
are the candidate values ``alpha``.  For each ``alpha`` let ``d1`` be the
largest point of ``C`` below ``alpha`` (``0`` if there is none).
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass

from .core import Structure, relabel
from .logic import Formula
from .sop import phi_digraph


class CutError(ValueError):
    pass


@dataclass(frozen=True)
class Cut:
    delta: int
    points: tuple[int, ...]
    acc: tuple[int, ...] = ()

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "acc", tuple(sorted(set(self.acc))))
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise CutError("cut points must be strictly increasing")
        if pts and (pts[0] < 0 or pts[-1] >= self.delta):
            raise CutError("cut points must lie in [0, delta)")
        if not set(self.acc) <= set(pts):
            raise CutError("accumulation points must be cut points")

    @property
    def nacc(self) -> tuple[int, ...]:
        acc = set(self.acc)
        return tuple(p for p in self.points if p not in acc)

    def below(self, alpha: int) -> int:
        """Largest cut point below ``alpha``, or 0."""
        return max((p for p in self.points if p < alpha), default=0)

    def boundaries(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.points) | {self.delta}))

    def text(self) -> str:
        line = f"cut {self.delta}: " + " ".join(map(str, self.points))
        if self.acc:
            line += " [acc: " + " ".join(map(str, self.acc)) + "]"
        return line


_CUT_LINE = re.compile(r"^cut\s+(\d+)\s*:\s*([\d\s]*?)\s*(?:\[acc:\s*([\d\s]*)\])?\s*$")


def parse_cuts(text: str) -> list[Cut]:
    cuts = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _CUT_LINE.match(line)
        if not m:
            raise CutError(f"line {lineno}: expected 'cut DELTA: c1 c2 ... [acc: a1 ...]'")
        try:
            cuts.append(Cut(int(m.group(1)), tuple(map(int, m.group(2).split())),
                            tuple(map(int, (m.group(3) or "").split()))))
        except CutError as exc:
            raise CutError(f"line {lineno}: {exc}") from None
    return cuts


def format_cuts(cuts) -> str:
    return "".join(c.text() + "\n" for c in cuts)


@dataclass(frozen=True)
class InvariantReport:
    per_element: tuple[tuple[int, frozenset], ...]
    aggregate: frozenset

    @staticmethod
    def build(values: dict) -> "InvariantReport":
        per = tuple(sorted((x, frozenset(v)) for x, v in values.items()))
        return InvariantReport(per, frozenset(v for _, v in per))

    def of(self, x: int) -> frozenset:
        return dict(self.per_element)[x]


# ---------------------------------------------------------------------------
# Linear orders

def order_matrix(order: Structure, relation: str | None = None) -> list[list[bool]]:
    """Relation matrix of a strict linear order; raises if it is not one."""
    name = relation or order.vocab.binary()[0].name
    n = order.size
    lt = [[order.holds(name, (a, b)) for b in range(n)] for a in range(n)]
    for a in range(n):
        if lt[a][a]:
            raise CutError(f"not a linear order: {a} < {a}")
        for b in range(a + 1, n):
            if lt[a][b] == lt[b][a]:
                raise CutError(f"not a linear order: {a} and {b} are "
                               f"{'both' if lt[a][b] else 'not'} comparable both ways")
    for a in range(n):
        for b in range(n):
            if lt[a][b]:
                for c in range(n):
                    if lt[b][c] and not lt[a][c]:
                        raise CutError(f"not a linear order: {a} < {b} < {c} but not {a} < {c}")
    return lt


def order_invariant(order: Structure, cut: Cut, x: int, _lt=None) -> frozenset:
    """``alpha`` in nacc such that some ``y, z < alpha`` have ``y < x < z`` in
    the order and every ``s < d1`` lies outside ``[y, z]``."""
    lt = _lt or order_matrix(order)
    out = set()
    for alpha in cut.nacc:
        d1 = cut.below(alpha)
        below = [y for y in range(min(alpha, order.size)) if lt[y][x]]
        above = [z for z in range(min(alpha, order.size)) if lt[x][z]]
        if any(all(lt[s][y] or lt[z][s] for s in range(d1))
               for y in below for z in above):
            out.add(alpha)
    return frozenset(out)


def order_invariants(order: Structure, cut: Cut, elements=None) -> InvariantReport:
    lt = order_matrix(order)
    xs = range(order.size) if elements is None else elements
    return InvariantReport.build({x: order_invariant(order, cut, x, lt) for x in xs})


# ---------------------------------------------------------------------------
# Models

def _phi_matrix(m: Structure, phi: Formula) -> list[list[bool]]:
    if phi.arity != 1:
        raise CutError("model invariants need a binary formula phi(x; y)")
    nodes, succ = phi_digraph(m, phi)
    mat = [[False] * m.size for _ in range(m.size)]
    for i, outs in enumerate(succ):
        for j in outs:
            mat[nodes[i][0]][nodes[j][0]] = True
    return mat


def _case_one(rel, x: int, d1: int, d2: int) -> bool:
    """Some ``b < d2`` with ``rel(b, x)`` and, for every ``c < d1`` with
    ``rel(c, x)``, some ``y < d1`` with ``rel(c, y)`` and ``rel(y, b)``."""
    cs = [c for c in range(d1) if rel(c, x)]
    for b in range(d2):
        if not rel(b, x):
            continue
        if all(any(rel(c, y) and rel(y, b) for y in range(d1)) for c in cs):
            return True
    return False


def model_invariant(m: Structure, phi: Formula, cut: Cut, x: int, _mat=None) -> frozenset:
    """``alpha`` in nacc where the case-one conditions hold for ``phi`` or its converse."""
    mat = _mat or _phi_matrix(m, phi)
    plus = lambda a, b: mat[a][b]        # noqa: E731
    minus = lambda a, b: mat[b][a]       # noqa: E731
    out = set()
    for alpha in cut.nacc:
        d1, d2 = cut.below(alpha), min(alpha, m.size)
        if _case_one(plus, x, d1, d2) or _case_one(minus, x, d1, d2):
            out.add(alpha)
    return frozenset(out)


def model_invariants(m: Structure, phi: Formula, cut: Cut, elements=None) -> InvariantReport:
    mat = _phi_matrix(m, phi)
    xs = range(m.size) if elements is None else elements
    return InvariantReport.build({x: model_invariant(m, phi, cut, x, mat) for x in xs})


# ---------------------------------------------------------------------------
# Helpers for experiments

def block_permutation(cut: Cut, size: int, rng: random.Random) -> list[int]:
    """Random permutation of ``range(size)`` fixing every initial segment
    ``[0, p)`` for ``p`` a cut point or ``delta``."""
    bounds = sorted({0, size} | {p for p in cut.boundaries() if p <= size})
    perm = list(range(size))
    for lo, hi in zip(bounds, bounds[1:]):
        block = perm[lo:hi]
        rng.shuffle(block)
        perm[lo:hi] = block
    return perm


def permute(s: Structure, perm) -> Structure:
    return relabel(s, perm)


def contains(small: InvariantReport, big: InvariantReport) -> bool:
    return small.aggregate <= big.aggregate
