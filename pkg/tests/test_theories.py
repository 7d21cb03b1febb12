import itertools
import random

import pytest

from sopnlab.core import (StructureError, VocabularyMismatch, digraph_vocab, directed_cycle,
                          graph_vocab, induced_substructure, make_structure,
                          transitive_tournament, undirected_cycle)
from sopnlab.logic import evaluate
from sopnlab.theories import (CATALOG, TheoryError, check_model, horn_closure, is_model,
                              iter_structures, linear_order_model, lt, theory_from_axioms,
                              theory_spec)

from oracles import dfs_shortest_cycle, random_structure, triangles


def test_catalog_ids():
    for tid in ("ord:2", "lev:3", "dcf:4", "ocf:5", "cf:4", "trf"):
        assert theory_spec(tid).id == tid
    assert theory_spec("dcf", 4) == theory_spec("dcf:4")
    assert set(CATALOG) == {"ord", "lev", "dcf", "ocf", "cf", "trf"}


@pytest.mark.parametrize("bad", ["foo", "dcf", "dcf:2", "trf:3", "ord:x", "ord:-1"])
def test_bad_ids(bad):
    with pytest.raises(TheoryError):
        theory_spec(bad)


def test_dcf3_patterns():
    t = theory_spec("dcf:3")
    assert t.forbidden_labels == ("loop", "directed 2-cycle", "directed 3-cycle")
    assert [p.size for p in t.forbidden] == [1, 2, 3]


def test_trf_is_triangle():
    t = theory_spec("trf")
    assert t.forbidden == (undirected_cycle(3),)


def test_ord2_vocabulary_and_axioms():
    t = theory_spec("ord:2")
    assert sorted(t.vocab.names) == sorted(lt(n, l) for n in range(3) for l in range(n + 1))
    assert len(t.vocab) == 6
    labels = set(t.labels)
    assert "(c) n=2" in labels or any(l.startswith("(c) n=2") for l in labels)
    assert all(any(l.startswith(f"({c})") for l in labels) for c in "abcd")


def test_check_model_examples():
    v = check_model(directed_cycle(3), theory_spec("dcf:3"))
    assert v is not None and v.label == "directed 3-cycle"
    assert v.embedding == (0, 1, 2)
    assert check_model(transitive_tournament(5), theory_spec("dcf:5")) is None


def test_vocabulary_mismatch():
    with pytest.raises(VocabularyMismatch):
        check_model(undirected_cycle(3), theory_spec("dcf:3"))


def test_dcf3_model_count_on_three_vertices():
    t = theory_spec("dcf:3")
    pairs = [(a, b) for a in range(3) for b in range(3) if a != b]
    count = 0
    for bits in itertools.product((0, 1), repeat=6):
        s = make_structure(digraph_vocab(), 3,
                           [("R", p) for p, on in zip(pairs, bits) if on])
        if dfs_shortest_cycle(s) is None:
            count += 1
    enumerated = sum(1 for s in iter_structures(t.vocab, 3) if is_model(s, t))
    assert count == enumerated == 25


def test_dcf_matches_cycle_oracle():
    rng = random.Random(17)
    for _ in range(300):
        s = random_structure(rng, digraph_vocab(), 6)
        for n in (3, 4, 5):
            girth = dfs_shortest_cycle(s)
            assert is_model(s, theory_spec("dcf", n)) == (girth is None or girth > n)


def test_trf_matches_triangle_scan():
    rng = random.Random(3)
    for _ in range(200):
        s = random_structure(rng, graph_vocab(), 6)
        assert is_model(s, theory_spec("trf")) == (not triangles(s))


def test_cf3_equals_ocf3():
    cf, ocf = theory_spec("cf:3"), theory_spec("ocf:3")
    for s in iter_structures(graph_vocab(), 4):
        assert is_model(s, cf) == is_model(s, ocf)


def test_ocf_allows_even_cycles():
    assert is_model(undirected_cycle(4), theory_spec("ocf:5"))
    assert not is_model(undirected_cycle(5), theory_spec("ocf:5"))
    assert not is_model(undirected_cycle(4), theory_spec("cf:4"))


@pytest.mark.parametrize("tid", ["dcf:3", "trf", "cf:4", "ocf:5"])
def test_closed_under_substructures(tid):
    t = theory_spec(tid)
    rng = random.Random(1)
    vocab = t.vocab
    seen = 0
    while seen < 40:
        s = random_structure(rng, vocab, 6)
        if not is_model(s, t):
            continue
        seen += 1
        for k in range(s.size + 1):
            for sub in itertools.combinations(range(s.size), k):
                assert is_model(induced_substructure(s, sub), t)


def test_ord_closed_under_substructures():
    from sopnlab.amalgam import random_ord_model
    import numpy as np
    t = theory_spec("ord:2")
    rng = np.random.default_rng(0)
    for _ in range(10):
        s = random_ord_model(t, 5, rng)
        assert is_model(s, t)
        for sub in itertools.combinations(range(5), 3):
            assert is_model(induced_substructure(s, sub), t)


@pytest.mark.parametrize("size", [0, 1, 4, 9])
def test_linear_order_realization(size):
    for top in (0, 1, 2, 3):
        t = theory_spec("ord", top)
        assert is_model(linear_order_model(t, size), t)


def test_ord_axiom_violation_reported():
    t = theory_spec("ord:1")
    s = linear_order_model(t, 2)
    s = make_structure(t.vocab, 2, list(s.tuples()) + [(lt(1, 0), (1, 1))])
    v = check_model(s, t)
    assert v is not None and v.kind == "axiom"
    assert v.label.startswith("(c) n=1") and dict(v.assignment) == {"x": 1}
    # the reported instance really falsifies the axiom
    env = dict(v.assignment)
    assert not evaluate(s, v.axiom.body.body, env)


def test_ord_axioms_by_brute_force():
    """Check model verdicts against a direct reading of (a)-(d)."""
    t = theory_spec("ord:1")
    names = [lt(0, 0), lt(1, 0), lt(1, 1)]

    def direct(s):
        r = lambda n, l, a, b: s.holds(lt(n, l), (a, b))   # noqa: E731
        U = range(s.size)
        for a, b in itertools.product(U, U):
            if r(1, 0, a, b) and not r(1, 1, a, b):
                return False
            if not r(0, 0, a, b) or not r(1, 1, a, b):
                return False
        if any(r(1, 0, a, a) for a in U):
            return False
        for a, b, c in itertools.product(U, U, U):
            if r(1, 0, a, b) and r(1, 0, b, c) and not r(1, 1, a, c):
                return False
        return True

    for s in iter_structures(t.vocab, 2, names):
        assert is_model(s, t) == direct(s)


def test_lev_witness_model():
    from sopnlab.sop import levelled_model
    for top in (1, 2):
        t = theory_spec("lev", top)
        assert is_model(levelled_model(t, 4), t)


def test_lev_functionality_is_structural():
    t = theory_spec("lev:1")
    with pytest.raises(StructureError):
        make_structure(t.vocab, 3, [("F0", (2, 0)), ("F0", (2, 1))])


def test_horn_closure_of_ord():
    t = theory_spec("ord:1")
    s = make_structure(t.vocab, 2, [(lt(1, 0), (0, 1))])
    c = horn_closure(s, t.rules)
    assert is_model(c, t)
    assert c.holds(lt(1, 1), (0, 1))


def test_theory_from_axioms():
    t = theory_from_axioms("irr", digraph_vocab(), ["forall x . !R(x,x)"])
    assert is_model(directed_cycle(3), t)
    assert not is_model(directed_cycle(1), t)


def test_focus_restricts_to_instances_through_focus():
    t = theory_spec("dcf:3")
    s = make_structure(digraph_vocab(), 4, [("R", (0, 1)), ("R", (1, 0))])
    assert check_model(s, t, focus=[3]) is None
    assert check_model(s, t, focus=[1]).embedding == (0, 1)
