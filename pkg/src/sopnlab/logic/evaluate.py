"""Tarskian satisfaction on finite structures.

Quantifiers are evaluated by enumeration.  A block of consecutive existential
quantifiers over a conjunction is searched as a backtracking join: each
conjunct is tested as soon as all of its block variables are bound, and
equalities or binary atoms with one bound side narrow the candidate values.
Universal blocks reduce to the same search through ``forall v. A -> B ==
!exists v. A & !B``.
"""

from __future__ import annotations

from typing import Mapping

from ..core import Structure
from .ast import (And, Atom, Eq, Exists, Forall, FormulaError, Implies, Node, Not,
                  Or, as_node, free_vars)


class UnboundVariable(FormulaError):
    pass


def evaluate(s: Structure, f, assignment: Mapping[str, int] | None = None) -> bool:
    node = as_node(f)
    env = dict(assignment or {})
    missing = free_vars(node) - env.keys()
    if missing:
        raise UnboundVariable(f"unbound free variables: {sorted(missing)}")
    for v, e in env.items():
        if not 0 <= e < s.size:
            raise ValueError(f"{v} := {e} is outside the universe of size {s.size}")
    return _Evaluator(s).eval(node, env)


def satisfying_assignments(s: Structure, f, variables, fixed=None):
    """Yield all tuples of values for ``variables`` making ``f`` true."""
    node = as_node(f)
    env = dict(fixed or {})
    ev = _Evaluator(s)
    parts = list(node.parts) if isinstance(node, And) else [node]
    yield from ev.search(tuple(variables), parts, env)


def _conjuncts(node: Node) -> list[Node]:
    return list(node.parts) if isinstance(node, And) else [node]


class _Evaluator:
    def __init__(self, s: Structure):
        self.s = s
        self.tables = s.tables
        self._plans = {}

    def eval(self, node: Node, env: dict) -> bool:
        t = type(node)
        if t is Atom:
            return tuple(env[a] for a in node.args) in self.tables[node.rel]
        if t is Eq:
            return env[node.left] == env[node.right]
        if t is Not:
            return not self.eval(node.body, env)
        if t is And:
            return all(self.eval(p, env) for p in node.parts)
        if t is Or:
            return any(self.eval(p, env) for p in node.parts)
        if t is Implies:
            return (not self.eval(node.left, env)) or self.eval(node.right, env)
        if t is Exists:
            vars_, body = _block(node, Exists)
            return self._any(self.search(vars_, _conjuncts(body), env))
        if t is Forall:
            vars_, body = _block(node, Forall)
            if isinstance(body, Implies):
                parts = _conjuncts(body.left) + [Not(body.right)]
            else:
                parts = [Not(body)]
            return not self._any(self.search(vars_, parts, env))
        raise TypeError(f"not a formula node: {node!r}")

    @staticmethod
    def _any(gen) -> bool:
        try:
            for _ in gen:
                return True
            return False
        finally:
            gen.close()

    def _plan(self, vars_, parts):
        key = (vars_, tuple(parts))
        plan = self._plans.get(key)
        if plan is not None:
            return plan
        block = set(vars_)
        pos = {v: i for i, v in enumerate(vars_)}
        # check[i]: parts whose last block variable is vars_[i]; check[-1]: none
        check = [[] for _ in range(len(vars_) + 1)]
        hints = [[] for _ in vars_]
        for p in parts:
            fv = free_vars(p) & block
            last = max((pos[v] for v in fv), default=-1)
            check[last].append(p)
            if isinstance(p, Eq) and p.left != p.right:
                for a, b in ((p.left, p.right), (p.right, p.left)):
                    if a in block and (b not in block or pos[b] < pos[a]):
                        hints[pos[a]].append(("eq", b, None))
            elif (isinstance(p, Atom) and len(p.args) == 2
                  and p.args[0] != p.args[1] and p.rel in self.s.succ):
                a, b = p.args
                if b in block and (a not in block or pos[a] < pos[b]):
                    hints[pos[b]].append(("succ", a, p.rel))
                if a in block and (b not in block or pos[b] < pos[a]):
                    hints[pos[a]].append(("pred", b, p.rel))
        plan = (check, hints)
        self._plans[key] = plan
        return plan

    def search(self, vars_, parts, env):
        """Yield value tuples for ``vars_`` satisfying every part."""
        check, hints = self._plan(tuple(vars_), parts)
        saved = {v: env[v] for v in vars_ if v in env}
        universe = range(self.s.size)
        k = len(vars_)
        values = [0] * k

        for p in check[-1]:
            if not self.eval(p, env):
                return

        def candidates(i):
            best = None
            for kind, other, rel in hints[i]:
                if kind == "eq":
                    return (env[other],)
                nb = (self.s.succ if kind == "succ" else self.s.pred)[rel][env[other]]
                if best is None or len(nb) < len(best):
                    best = nb
            return universe if best is None else sorted(best)

        def rec(i):
            if i == k:
                yield tuple(values)
                return
            v = vars_[i]
            for c in candidates(i):
                env[v] = c
                values[i] = c
                if all(self.eval(p, env) for p in check[i]):
                    yield from rec(i + 1)

        try:
            yield from rec(0)
        finally:
            for v in vars_:
                env.pop(v, None)
            env.update(saved)


def _block(node, kind):
    vars_ = []
    while isinstance(node, kind) and node.var not in vars_:
        vars_.append(node.var)
        node = node.body
    return tuple(vars_), node
