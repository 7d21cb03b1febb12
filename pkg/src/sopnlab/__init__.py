"""Finite relational structures, universal theories and witnesses for the
n-strong order properties."""

from .amalgam import (AmalgamProblem, Obstruction, closure_amalgam, cyclic_amalgam,
                      ordered_amalgam)
from .core import (Embedding, Structure, StructureError, Symbol, Vocabulary,
                   VocabularyMismatch, are_isomorphic, find_embeddings,
                   format_structure, induced_substructure, make_structure,
                   parse_structure)
from .generic import ExtensionProblem, ec_extend, enumerate_extensions
from .invariants import Cut, model_invariant, order_invariant
from .logic import (Formula, build_cycle_sentence, build_distance_formula, conj_chain,
                    bounded_tc_formula, evaluate, parse_formula, reduce_sop)
from .sop import (SopCertificate, WitnessChain, build_witness, check_2_20_instance,
                  check_chain, check_sop_sequence, check_strict_order, search_phi_cycle)
from .theories import TheorySpec, Violation, check_model, theory_spec

__version__ = "0.1.0"

__all__ = [
    "AmalgamProblem", "Obstruction", "closure_amalgam", "cyclic_amalgam", "ordered_amalgam",
    "Embedding", "Structure", "StructureError", "Symbol", "Vocabulary", "VocabularyMismatch",
    "are_isomorphic", "find_embeddings", "format_structure", "induced_substructure",
    "make_structure", "parse_structure",
    "ExtensionProblem", "ec_extend", "enumerate_extensions",
    "Cut", "model_invariant", "order_invariant",
    "Formula", "build_cycle_sentence", "build_distance_formula", "conj_chain",
    "bounded_tc_formula", "evaluate", "parse_formula", "reduce_sop",
    "SopCertificate", "WitnessChain", "build_witness", "check_2_20_instance", "check_chain",
    "check_sop_sequence", "check_strict_order", "search_phi_cycle",
    "TheorySpec", "Violation", "check_model", "theory_spec",
]
