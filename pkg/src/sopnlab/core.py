"""Finite relational structures, embeddings and isomorphism search.

The universe of a structure is always ``range(size)``.  Relations are stored
as frozensets of integer tuples; symmetric binary relations keep both
orientations so every consumer can test membership directly.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

KINDS = ("directed", "symmetric", "functional")

_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class StructureError(ValueError):
    """Raised for malformed vocabularies, structures or structure files."""


class VocabularyMismatch(StructureError):
    pass


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int
    kind: str = "directed"

    def __post_init__(self):
        if not _NAME.match(self.name):
            raise StructureError(f"bad symbol name {self.name!r}")
        if self.arity < 1:
            raise StructureError(f"symbol {self.name}: arity must be >= 1")
        if self.kind not in KINDS:
            raise StructureError(f"symbol {self.name}: unknown kind {self.kind!r}")
        if self.kind != "directed" and self.arity != 2:
            raise StructureError(f"symbol {self.name}: {self.kind} requires arity 2")


@dataclass(frozen=True)
class Vocabulary:
    symbols: tuple[Symbol, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        names = [s.name for s in self.symbols]
        if len(set(names)) != len(names):
            raise StructureError(f"duplicate symbol names in {names}")

    @classmethod
    def of(cls, *specs) -> "Vocabulary":
        """Build from ``(name, arity[, kind])`` triples or ``Symbol`` objects."""
        return cls(tuple(s if isinstance(s, Symbol) else Symbol(*s) for s in specs))

    def __getitem__(self, name: str) -> Symbol:
        for s in self.symbols:
            if s.name == name:
                return s
        raise KeyError(name)

    def __contains__(self, name) -> bool:
        return any(s.name == name for s in self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self):
        return len(self.symbols)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.symbols)

    def binary(self) -> list[Symbol]:
        return [s for s in self.symbols if s.arity == 2]


class Structure:
    """An immutable finite relational structure.

    Build instances with :func:`make_structure`; the constructor assumes the
    tables are already canonical.
    """

    __slots__ = ("vocab", "size", "tables", "__dict__")

    def __init__(self, vocab: Vocabulary, size: int, tables: Mapping[str, frozenset]):
        self.vocab = vocab
        self.size = size
        self.tables = {s.name: frozenset(tables.get(s.name, ())) for s in vocab}

    def __eq__(self, other):
        if not isinstance(other, Structure):
            return NotImplemented
        return (self.vocab == other.vocab and self.size == other.size
                and self.tables == other.tables)

    def __hash__(self):
        return hash((self.vocab, self.size,
                     tuple(self.tables[n] for n in self.vocab.names)))

    def __repr__(self):
        counts = ", ".join(f"{n}:{len(self.tables[n])}" for n in self.vocab.names)
        return f"Structure(size={self.size}, {counts})"

    def holds(self, name: str, tup: Sequence[int]) -> bool:
        return tuple(tup) in self.tables[name]

    @property
    def universe(self) -> range:
        return range(self.size)

    @cached_property
    def succ(self) -> dict[str, list[frozenset]]:
        """Out-neighbourhoods per binary symbol."""
        out = {}
        for s in self.vocab.binary():
            nb = [set() for _ in range(self.size)]
            for a, b in self.tables[s.name]:
                nb[a].add(b)
            out[s.name] = [frozenset(x) for x in nb]
        return out

    @cached_property
    def pred(self) -> dict[str, list[frozenset]]:
        out = {}
        for s in self.vocab.binary():
            nb = [set() for _ in range(self.size)]
            for a, b in self.tables[s.name]:
                nb[b].add(a)
            out[s.name] = [frozenset(x) for x in nb]
        return out

    def tuples(self) -> Iterator[tuple[str, tuple[int, ...]]]:
        """All ``(symbol, tuple)`` facts in canonical order."""
        for name in self.vocab.names:
            for t in sorted(self.tables[name]):
                yield name, t


def make_structure(vocab: Vocabulary, size: int,
                   tuples: Iterable[tuple[str, Sequence[int]]] = ()) -> Structure:
    """Validate facts and return the canonical structure.

    Symmetric symbols receive their reverse orientation; loops on symmetric
    symbols and two images for one argument of a functional symbol are
    rejected.
    """
    if size < 0:
        raise StructureError("size must be non-negative")
    tables: dict[str, set] = {s.name: set() for s in vocab}
    for name, tup in tuples:
        if name not in tables:
            raise StructureError(f"unknown symbol {name!r}")
        sym = vocab[name]
        tup = tuple(int(e) for e in tup)
        if len(tup) != sym.arity:
            raise StructureError(
                f"arity mismatch: {name} has arity {sym.arity}, got {tup}")
        for e in tup:
            if not 0 <= e < size:
                raise StructureError(f"element {e} out of range for size {size}")
        if sym.kind == "symmetric":
            if tup[0] == tup[1]:
                raise StructureError(f"loop {name}{tup} on symmetric symbol")
            tables[name].add(tup[::-1])
        tables[name].add(tup)
    for sym in vocab:
        if sym.kind == "functional":
            seen = {}
            for a, b in tables[sym.name]:
                if a in seen and seen[a] != b:
                    raise StructureError(
                        f"functionality violation: {sym.name}({a}) is both "
                        f"{seen[a]} and {b}")
                seen[a] = b
    return Structure(vocab, size, {k: frozenset(v) for k, v in tables.items()})


def empty_structure(vocab: Vocabulary, size: int = 0) -> Structure:
    return make_structure(vocab, size)


def induced_substructure(s: Structure, subset: Iterable[int]) -> Structure:
    """Restrict ``s`` to ``subset``, relabelled order-preservingly to 0..k-1."""
    elems = sorted(set(subset))
    for e in elems:
        if not 0 <= e < s.size:
            raise StructureError(f"element {e} out of range for size {s.size}")
    index = {e: i for i, e in enumerate(elems)}
    tables = {}
    for name, table in s.tables.items():
        tables[name] = frozenset(tuple(index[e] for e in t) for t in table
                                 if all(e in index for e in t))
    return Structure(s.vocab, len(elems), tables)


def relabel(s: Structure, perm: Sequence[int]) -> Structure:
    """Image of ``s`` under the bijection ``i -> perm[i]``."""
    if sorted(perm) != list(range(s.size)):
        raise StructureError("relabel requires a permutation of the universe")
    tables = {name: frozenset(tuple(perm[e] for e in t) for t in table)
              for name, table in s.tables.items()}
    return Structure(s.vocab, s.size, tables)


def disjoint_union(*parts: Structure) -> Structure:
    vocab = parts[0].vocab
    facts, offset = [], 0
    for p in parts:
        if p.vocab != vocab:
            raise VocabularyMismatch("disjoint_union needs a common vocabulary")
        facts.extend((n, tuple(e + offset for e in t)) for n, t in p.tuples())
        offset += p.size
    return make_structure(vocab, offset, facts)


# ---------------------------------------------------------------------------
# Embeddings

@dataclass(frozen=True)
class Embedding:
    """A total injective map ``source -> target`` given as a tuple of images."""

    map: tuple[int, ...]
    source: Structure
    target: Structure

    def __call__(self, i: int) -> int:
        return self.map[i]

    def __iter__(self):
        return iter(self.map)

    def image(self) -> tuple[int, ...]:
        return self.map

    def then(self, other: "Embedding") -> "Embedding":
        """Composition: first ``self``, then ``other``."""
        if self.target != other.source:
            raise StructureError("embeddings do not compose")
        return Embedding(tuple(other.map[i] for i in self.map), self.source, other.target)

    def inverse_map(self) -> dict[int, int]:
        return {b: a for a, b in enumerate(self.map)}


def is_embedding(mapping: Sequence[int], source: Structure, target: Structure,
                 mode: str = "induced") -> bool:
    """Check that ``mapping`` is an injective homomorphism (``weak``) or an
    embedding of induced substructures (``induced``)."""
    mapping = tuple(mapping)
    if len(mapping) != source.size or len(set(mapping)) != len(mapping):
        return False
    if any(not 0 <= b < target.size for b in mapping):
        return False
    if source.vocab != target.vocab:
        return False
    for name, table in source.tables.items():
        ttable = target.tables[name]
        for t in table:
            if tuple(mapping[e] for e in t) not in ttable:
                return False
        if mode == "induced":
            inv = {b: a for a, b in enumerate(mapping)}
            for t in ttable:
                if all(e in inv for e in t) and tuple(inv[e] for e in t) not in table:
                    return False
    return True


def make_embedding(mapping: Sequence[int], source: Structure, target: Structure,
                   mode: str = "induced") -> Embedding:
    if not is_embedding(mapping, source, target, mode):
        raise StructureError(f"{tuple(mapping)} is not a {mode} embedding")
    return Embedding(tuple(mapping), source, target)


class _Plan:
    """Per-pattern precomputation for the backtracking search."""

    def __init__(self, pattern: Structure, host: Structure, mode: str):
        k = pattern.size
        # positive[i]: facts whose largest element is i
        self.positive = [[] for _ in range(k)]
        for name, table in pattern.tables.items():
            for t in table:
                self.positive[max(t)].append((name, t))
        self.negative = [[] for _ in range(k)]
        if mode == "induced":
            for sym in pattern.vocab:
                table = pattern.tables[sym.name]
                for i in range(k):
                    for t in itertools.product(range(i + 1), repeat=sym.arity):
                        if i in t and t not in table:
                            self.negative[i].append((sym.name, t))
        # binary anchors: (symbol, earlier vertex, direction)
        self.anchors = [[] for _ in range(k)]
        for sym in pattern.vocab.binary():
            for a, b in pattern.tables[sym.name]:
                if a < b:
                    self.anchors[b].append((sym.name, a, "out"))
                elif b < a:
                    self.anchors[a].append((sym.name, b, "in"))
        # degree lower bounds for candidate filtering
        self.degree = []
        for i in range(k):
            need = []
            for sym in pattern.vocab.binary():
                od = len(pattern.succ[sym.name][i])
                idg = len(pattern.pred[sym.name][i])
                if od or idg:
                    need.append((sym.name, od, idg))
            self.degree.append(need)


def iter_embeddings(pattern: Structure, host: Structure, mode: str = "weak",
                    fixed: Mapping[int, int] | None = None) -> Iterator[tuple[int, ...]]:
    """Yield injective relation-preserving maps in lexicographic order.

    ``mode="induced"`` additionally requires non-facts to map to non-facts.
    ``fixed`` pins some pattern vertices to given host elements.
    """
    if mode not in ("weak", "induced"):
        raise ValueError(f"unknown mode {mode!r}")
    if pattern.vocab != host.vocab:
        raise VocabularyMismatch("pattern and host use different vocabularies")
    k = pattern.size
    if k > host.size:
        return
    fixed = dict(fixed or {})
    plan = _Plan(pattern, host, mode)
    htables = host.tables
    hsucc, hpred = host.succ, host.pred
    img = [0] * k
    used = set()

    def candidates(i):
        if i in fixed:
            return [fixed[i]]
        best = None
        for name, j, direction in plan.anchors[i]:
            nb = hsucc[name][img[j]] if direction == "out" else hpred[name][img[j]]
            if best is None or len(nb) < len(best):
                best = nb
        pool = sorted(best) if best is not None else range(host.size)
        need = plan.degree[i]
        if not need:
            return pool
        return [c for c in pool
                if all(len(hsucc[n][c]) >= od and len(hpred[n][c]) >= idg
                       for n, od, idg in need)]

    def extend(i):
        if i == k:
            yield tuple(img)
            return
        for c in candidates(i):
            if c in used:
                continue
            img[i] = c
            ok = True
            for name, t in plan.positive[i]:
                if tuple(img[e] for e in t) not in htables[name]:
                    ok = False
                    break
            if ok:
                for name, t in plan.negative[i]:
                    if tuple(img[e] for e in t) in htables[name]:
                        ok = False
                        break
            if ok:
                used.add(c)
                yield from extend(i + 1)
                used.discard(c)

    yield from extend(0)


def find_embeddings(pattern: Structure, host: Structure,
                    mode: str = "weak") -> list[Embedding]:
    """All embeddings of ``pattern`` into ``host``, lexicographically ordered."""
    return [Embedding(m, pattern, host) for m in iter_embeddings(pattern, host, mode)]


def are_isomorphic(s1: Structure, s2: Structure) -> Embedding | None:
    """Return an isomorphism ``s1 -> s2`` or ``None``."""
    if s1.vocab != s2.vocab:
        raise VocabularyMismatch("structures use different vocabularies")
    if s1.size != s2.size:
        return None
    for name in s1.vocab.names:
        if len(s1.tables[name]) != len(s2.tables[name]):
            return None
    m = next(iter_embeddings(s1, s2, "induced"), None)
    return None if m is None else Embedding(m, s1, s2)


# ---------------------------------------------------------------------------
# Text format

def format_structure(s: Structure) -> str:
    lines = [f"vocab {sym.name}/{sym.arity} {sym.kind}" for sym in s.vocab]
    lines.append(f"universe {s.size}")
    for sym in s.vocab:
        for t in sorted(s.tables[sym.name]):
            if sym.kind == "symmetric" and t[0] > t[1]:
                continue
            lines.append("rel " + " ".join([sym.name, *map(str, t)]))
    return "\n".join(lines) + "\n"


def parse_structure(text: str) -> Structure:
    symbols, facts, size = [], [], None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "vocab":
                name, arity = parts[1].split("/")
                kind = parts[2] if len(parts) > 2 else "directed"
                if len(parts) > 3:
                    raise StructureError("trailing tokens")
                symbols.append(Symbol(name, int(arity), kind))
            elif parts[0] == "universe":
                if size is not None or len(parts) != 2:
                    raise StructureError("universe given twice or malformed")
                size = int(parts[1])
            elif parts[0] == "rel":
                facts.append((lineno, parts[1], tuple(int(e) for e in parts[2:])))
            else:
                raise StructureError(f"unknown directive {parts[0]!r}")
        except (IndexError, ValueError) as exc:
            raise StructureError(f"line {lineno}: {exc}") from None
    if size is None:
        raise StructureError("missing 'universe' line")
    vocab = Vocabulary(tuple(symbols))
    try:
        return make_structure(vocab, size, [(n, t) for _, n, t in facts])
    except StructureError as exc:
        raise StructureError(f"{exc}") from None


def read_structure(path) -> Structure:
    with open(path) as fh:
        return parse_structure(fh.read())


def write_structure(s: Structure, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_structure(s))


# ---------------------------------------------------------------------------
# Small constructors used throughout

def digraph_vocab(name: str = "R") -> Vocabulary:
    return Vocabulary.of((name, 2, "directed"))


def graph_vocab(name: str = "R") -> Vocabulary:
    return Vocabulary.of((name, 2, "symmetric"))


def directed_path(n: int, vocab: Vocabulary | None = None) -> Structure:
    vocab = vocab or digraph_vocab()
    name = vocab.binary()[0].name
    return make_structure(vocab, n, [(name, (i, i + 1)) for i in range(n - 1)])


def directed_cycle(n: int, vocab: Vocabulary | None = None) -> Structure:
    vocab = vocab or digraph_vocab()
    name = vocab.binary()[0].name
    if n == 1:
        return make_structure(vocab, 1, [(name, (0, 0))])
    return make_structure(vocab, n, [(name, (i, (i + 1) % n)) for i in range(n)])


def undirected_cycle(n: int, vocab: Vocabulary | None = None) -> Structure:
    if n < 3:
        raise StructureError("undirected cycles need at least 3 vertices")
    vocab = vocab or graph_vocab()
    name = vocab.binary()[0].name
    return make_structure(vocab, n, [(name, (i, (i + 1) % n)) for i in range(n)])


def transitive_tournament(n: int, vocab: Vocabulary | None = None) -> Structure:
    vocab = vocab or digraph_vocab()
    name = vocab.binary()[0].name
    return make_structure(vocab, n, [(name, (i, j)) for i in range(n)
                                     for j in range(i + 1, n)])
