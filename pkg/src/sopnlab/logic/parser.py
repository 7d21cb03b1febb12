"""Recursive-descent parser for the ASCII formula grammar.

    formula := 'forall' VAR '.' formula | 'exists' VAR '.' formula | imp
    imp     := disj ('->' imp)?
    disj    := conj ('|' conj)*
    conj    := unary ('&' unary)*
    unary   := '!' unary | '(' formula ')' | atom
    atom    := NAME '(' VAR (',' VAR)* ')' | VAR '=' VAR

A quantifier is also accepted in operand position; its body then extends as
far right as possible.
"""

from __future__ import annotations

import re

from ..core import Vocabulary
from .ast import (And, Atom, Eq, Exists, Forall, Formula, FormulaError, Implies,
                  Node, Not, Or)

_TOKEN = re.compile(r"\s*(?:(->)|([A-Za-z_][A-Za-z0-9_]*)|([()!&|,.=]))")
_KEYWORDS = {"forall", "exists"}


class FormulaSyntaxError(FormulaError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens, pos = [], 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = len(text) - len(text[pos:].lstrip())
            raise FormulaSyntaxError(f"unexpected character {text[start]!r}", start)
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append(("op", "->", start))
        elif m.group(2):
            word = m.group(2)
            tokens.append(("kw" if word in _KEYWORDS else "name", word, start))
        else:
            tokens.append(("op", m.group(3), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, vocab: Vocabulary | None):
        self.tokens = _tokenize(text)
        self.i = 0
        self.vocab = vocab

    def peek(self):
        return self.tokens[self.i]

    def take(self, value=None, kind=None):
        tok = self.tokens[self.i]
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            want = value or kind
            found = tok[1] or "end of input"
            raise FormulaSyntaxError(f"expected {want!r}, found {found!r}", tok[2])
        self.i += 1
        return tok

    def formula(self) -> Node:
        kind, value, _ = self.peek()
        if kind == "kw":
            self.take()
            var = self.take(kind="name")[1]
            self.take(".")
            body = self.formula()
            return Exists(var, body) if value == "exists" else Forall(var, body)
        return self.imp()

    def imp(self) -> Node:
        left = self.disj()
        if self.peek()[1] == "->":
            self.take()
            return Implies(left, self.imp())
        return left

    def disj(self) -> Node:
        parts = [self.conj()]
        while self.peek()[1] == "|":
            self.take()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self) -> Node:
        parts = [self.unary()]
        while self.peek()[1] == "&":
            self.take()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self) -> Node:
        kind, value, pos = self.peek()
        if value == "!" and kind == "op":
            self.take()
            return Not(self.unary())
        if value == "(" and kind == "op":
            self.take()
            inner = self.formula()
            self.take(")")
            return inner
        if kind == "kw":
            return self.formula()
        return self.atom()

    def atom(self) -> Node:
        kind, name, pos = self.take(kind="name")
        if self.peek()[1] == "(":
            self.take()
            args = [self.take(kind="name")[1]]
            while self.peek()[1] == ",":
                self.take()
                args.append(self.take(kind="name")[1])
            self.take(")")
            if self.vocab is not None:
                if name not in self.vocab:
                    raise FormulaSyntaxError(f"unknown symbol {name!r}", pos)
                if self.vocab[name].arity != len(args):
                    raise FormulaSyntaxError(
                        f"arity mismatch: {name} has arity {self.vocab[name].arity}, "
                        f"got {len(args)}", pos)
            return Atom(name, tuple(args))
        if self.peek()[1] == "=":
            self.take()
            return Eq(name, self.take(kind="name")[1])
        tok = self.peek()
        raise FormulaSyntaxError(f"expected '(' or '=' after {name!r}", tok[2])


def parse_node(text: str, vocab: Vocabulary | None = None) -> Node:
    p = _Parser(text, vocab)
    node = p.formula()
    kind, value, pos = p.peek()
    if kind != "end":
        raise FormulaSyntaxError(f"unexpected {value!r}", pos)
    return node


def parse_formula(text: str, vocab: Vocabulary | None = None, split=None) -> Formula:
    """Parse ``text``; ``split`` is ``(xs, ys)`` or a string ``"x0,x1;y0,y1"``."""
    from .ast import parse_split
    if isinstance(split, str):
        split = parse_split(split)
    return Formula(parse_node(text, vocab), split)
