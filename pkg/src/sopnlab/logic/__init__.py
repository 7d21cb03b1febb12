"""First-order formulas over finite relational structures."""

from .ast import (And, Atom, Eq, Exists, Forall, Formula, FormulaError, Implies, Node,
                  Not, Or, conj, depth, disj, exists, forall, free_vars,
                  is_quantifier_free, parse_split, relations, rename, to_text)
from .builders import (bounded_tc_formula, build_cycle_sentence, build_distance_formula,
                       conj_chain, converse, reduce_sop, relabel_split)
from .evaluate import UnboundVariable, evaluate, satisfying_assignments
from .parser import FormulaSyntaxError, parse_formula, parse_node

__all__ = [
    "And", "Atom", "Eq", "Exists", "Forall", "Formula", "FormulaError", "Implies",
    "Node", "Not", "Or", "conj", "depth", "disj", "exists", "forall", "free_vars",
    "is_quantifier_free", "parse_split", "relations", "rename", "to_text",
    "bounded_tc_formula", "build_cycle_sentence", "build_distance_formula",
    "conj_chain", "converse", "reduce_sop", "relabel_split",
    "UnboundVariable", "evaluate", "satisfying_assignments",
    "FormulaSyntaxError", "parse_formula", "parse_node",
]
