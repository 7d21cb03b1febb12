"""First-order formula syntax trees, printing and capture-avoiding renaming."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Union


@dataclass(frozen=True)
class Atom:
    rel: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class Not:
    body: "Node"


@dataclass(frozen=True)
class And:
    parts: tuple["Node", ...]


@dataclass(frozen=True)
class Or:
    parts: tuple["Node", ...]


@dataclass(frozen=True)
class Implies:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Node"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Node"


Node = Union[Atom, Eq, Not, And, Or, Implies, Exists, Forall]
Split = tuple[tuple[str, ...], tuple[str, ...]]


class FormulaError(ValueError):
    pass


def conj(parts) -> Node:
    parts = tuple(parts)
    if not parts:
        raise FormulaError("empty conjunction")
    return parts[0] if len(parts) == 1 else And(parts)


def disj(parts) -> Node:
    parts = tuple(parts)
    if not parts:
        raise FormulaError("empty disjunction")
    return parts[0] if len(parts) == 1 else Or(parts)


def exists(vars_, body: Node) -> Node:
    for v in reversed(tuple(vars_)):
        body = Exists(v, body)
    return body


def forall(vars_, body: Node) -> Node:
    for v in reversed(tuple(vars_)):
        body = Forall(v, body)
    return body


def free_vars(node: Node) -> frozenset[str]:
    if isinstance(node, Atom):
        return frozenset(node.args)
    if isinstance(node, Eq):
        return frozenset((node.left, node.right))
    if isinstance(node, Not):
        return free_vars(node.body)
    if isinstance(node, (And, Or)):
        return frozenset().union(*(free_vars(p) for p in node.parts))
    if isinstance(node, Implies):
        return free_vars(node.left) | free_vars(node.right)
    if isinstance(node, (Exists, Forall)):
        return free_vars(node.body) - {node.var}
    raise TypeError(f"not a formula node: {node!r}")


def all_vars(node: Node) -> frozenset[str]:
    if isinstance(node, (Exists, Forall)):
        return all_vars(node.body) | {node.var}
    if isinstance(node, Not):
        return all_vars(node.body)
    if isinstance(node, (And, Or)):
        return frozenset().union(*(all_vars(p) for p in node.parts))
    if isinstance(node, Implies):
        return all_vars(node.left) | all_vars(node.right)
    return free_vars(node)


def relations(node: Node) -> frozenset[str]:
    if isinstance(node, Atom):
        return frozenset((node.rel,))
    if isinstance(node, Eq):
        return frozenset()
    if isinstance(node, (Not, Exists, Forall)):
        return relations(node.body)
    if isinstance(node, (And, Or)):
        return frozenset().union(*(relations(p) for p in node.parts))
    return relations(node.left) | relations(node.right)


def depth(node: Node) -> int:
    if isinstance(node, (Atom, Eq)):
        return 0
    if isinstance(node, (Not, Exists, Forall)):
        return 1 + depth(node.body)
    if isinstance(node, (And, Or)):
        return 1 + max(depth(p) for p in node.parts)
    return 1 + max(depth(node.left), depth(node.right))


def is_quantifier_free(node: Node) -> bool:
    if isinstance(node, (Exists, Forall)):
        return False
    if isinstance(node, (Atom, Eq)):
        return True
    if isinstance(node, Not):
        return is_quantifier_free(node.body)
    if isinstance(node, (And, Or)):
        return all(is_quantifier_free(p) for p in node.parts)
    return is_quantifier_free(node.left) and is_quantifier_free(node.right)


def fresh(base: str, taken) -> str:
    if base not in taken:
        return base
    for i in itertools.count():
        name = f"{base}_{i}"
        if name not in taken:
            return name


def rename(node: Node, mapping: Mapping[str, str]) -> Node:
    """Substitute variables for free variables, renaming binders on capture."""
    mapping = {k: v for k, v in mapping.items() if k != v}
    if not mapping:
        return node
    if isinstance(node, Atom):
        return Atom(node.rel, tuple(mapping.get(a, a) for a in node.args))
    if isinstance(node, Eq):
        return Eq(mapping.get(node.left, node.left), mapping.get(node.right, node.right))
    if isinstance(node, Not):
        return Not(rename(node.body, mapping))
    if isinstance(node, (And, Or)):
        return type(node)(tuple(rename(p, mapping) for p in node.parts))
    if isinstance(node, Implies):
        return Implies(rename(node.left, mapping), rename(node.right, mapping))
    # quantifier
    inner = {k: v for k, v in mapping.items() if k != node.var}
    fv = free_vars(node.body)
    inner = {k: v for k, v in inner.items() if k in fv}
    var, body = node.var, node.body
    if var in inner.values():
        new = fresh(var, all_vars(body) | set(inner.values()) | set(inner))
        body = rename(body, {var: new})
        var = new
    return type(node)(var, rename(body, inner))


# ---------------------------------------------------------------------------
# Printing.  Precedence: ! > & > | > ->, quantifier bodies extend right.

_PREC = {Implies: 1, Or: 2, And: 3}


def to_text(node: Node) -> str:
    if isinstance(node, Atom):
        return f"{node.rel}({','.join(node.args)})"
    if isinstance(node, Eq):
        return f"{node.left} = {node.right}"
    if isinstance(node, (Exists, Forall)):
        word = "exists" if isinstance(node, Exists) else "forall"
        return f"{word} {node.var} . {to_text(node.body)}"
    if isinstance(node, Not):
        return "!" + _operand(node.body, 5)
    if isinstance(node, (And, Or)):
        sep = " & " if isinstance(node, And) else " | "
        return sep.join(_operand(p, _PREC[type(node)] + 1) for p in node.parts)
    if isinstance(node, Implies):
        return f"{_operand(node.left, 2)} -> {_operand(node.right, 1)}"
    raise TypeError(f"not a formula node: {node!r}")


def _operand(node: Node, min_prec: int) -> str:
    if isinstance(node, (Exists, Forall)):
        return f"({to_text(node)})"
    if isinstance(node, Eq) and min_prec >= 5:
        return f"({to_text(node)})"
    prec = _PREC.get(type(node), 5)
    text = to_text(node)
    return f"({text})" if prec < min_prec else text


@dataclass(frozen=True)
class Formula:
    """A syntax tree plus an optional split of its free variables ``(x; y)``."""

    body: Node
    split: Split | None = None

    def __post_init__(self):
        if self.split is not None:
            xs, ys = (tuple(self.split[0]), tuple(self.split[1]))
            object.__setattr__(self, "split", (xs, ys))
            if len(xs) != len(ys):
                raise FormulaError(f"split halves differ in length: {xs} ; {ys}")
            if len(set(xs + ys)) != len(xs + ys):
                raise FormulaError("split variables must be distinct")
            if set(xs + ys) != set(self.free_vars):
                raise FormulaError(
                    f"split {xs};{ys} does not cover free variables "
                    f"{sorted(self.free_vars)}")

    @property
    def free_vars(self) -> frozenset[str]:
        return free_vars(self.body)

    @property
    def arity(self) -> int:
        if self.split is None:
            raise FormulaError("formula has no free-variable split")
        return len(self.split[0])

    def require_split(self) -> Split:
        if self.split is None:
            raise FormulaError("formula has no free-variable split")
        return self.split

    def with_split(self, xs, ys) -> "Formula":
        return Formula(self.body, (tuple(xs), tuple(ys)))

    def instantiate(self, xs, ys) -> Node:
        """Body with the split variables replaced by ``xs`` and ``ys``."""
        sx, sy = self.require_split()
        return rename(self.body, dict(zip(sx + sy, tuple(xs) + tuple(ys))))

    @property
    def text(self) -> str:
        return to_text(self.body)

    def split_text(self) -> str | None:
        if self.split is None:
            return None
        return ",".join(self.split[0]) + ";" + ",".join(self.split[1])

    def __str__(self):
        return self.text


def parse_split(text: str) -> Split:
    """Parse ``"x0,x1;y0,y1"``."""
    if ";" not in text:
        raise FormulaError(f"split must contain ';': {text!r}")
    left, right = text.split(";", 1)
    xs = tuple(v.strip() for v in left.split(",") if v.strip())
    ys = tuple(v.strip() for v in right.split(",") if v.strip())
    return xs, ys


def as_node(f) -> Node:
    return f.body if isinstance(f, Formula) else f
