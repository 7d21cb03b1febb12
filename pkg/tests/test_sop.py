import itertools
import random

import pytest

from sopnlab.core import (digraph_vocab, directed_cycle, directed_path, make_structure,
                          relabel, transitive_tournament)
from sopnlab.logic import (bounded_tc_formula, build_cycle_sentence, conj_chain, evaluate,
                           parse_formula, reduce_sop)
from sopnlab.sop import (ChainError, WitnessChain, build_witness, certify, check_2_20_instance,
                         check_chain, check_sop_sequence, check_strict_order, ord_formula,
                         search_phi_cycle, sequence_witness)
from sopnlab.theories import TheoryError, check_model, is_model, linear_order_model, theory_spec

from oracles import brute_phi_cycle, dfs_shortest_cycle, has_directed_cycle_dfs, random_structure

R_XY = parse_formula("R(x,y)", split="x;y")


def test_dcf3_two_tuple_witness():
    w = build_witness(theory_spec("dcf:3"), N=2)
    assert w.model.size == 6
    assert w.model.tables["R"] == {(0, 4), (1, 5), (2, 3)}
    assert w.holds(0, 1)


def test_ord2_witness():
    t = theory_spec("ord:2")
    w = build_witness(t, N=5)
    assert w.model == linear_order_model(t, 5)
    assert all(w.holds(i, j) for i in range(5) for j in range(i + 1, 5))


@pytest.mark.parametrize("n", [3, 4, 5])
def test_dcf_witness_against_cycle_oracle(n):
    w = build_witness(theory_spec("dcf", n), N=6)
    girth = dfs_shortest_cycle(w.model)
    assert girth is None or girth > n
    assert is_model(w.model, theory_spec("dcf", n))
    assert check_chain(w)
    assert search_phi_cycle(w.model, w.phi, n, restrict=w.tuples) is None


def test_witness_parameter_checks():
    with pytest.raises(TheoryError):
        build_witness(theory_spec("dcf:4"), n=3)
    with pytest.raises(TheoryError):
        build_witness(theory_spec("ocf:4"))
    with pytest.raises(TheoryError):
        build_witness(theory_spec("trf"))
    with pytest.raises(ChainError):
        build_witness(theory_spec("dcf:3"), N=1)


def test_ocf_witness():
    t = theory_spec("ocf:5")
    w = build_witness(t, N=5)
    assert is_model(w.model, t) and check_chain(w)


def test_swapped_chain_fails_at_first_pair():
    w = build_witness(theory_spec("dcf:3"), N=4)
    tuples = list(w.tuples)
    tuples[0], tuples[1] = tuples[1], tuples[0]
    r = check_chain(WitnessChain(w.model, w.phi, tuples))
    assert not r and r.failure == (0, 1)


def test_single_tuple_chain_is_vacuous():
    w = build_witness(theory_spec("dcf:3"), N=2)
    assert check_chain(WitnessChain(w.model, w.phi, w.tuples[:1]))


def test_chain_validation():
    w = build_witness(theory_spec("dcf:3"), N=2)
    with pytest.raises(ChainError):
        WitnessChain(w.model, w.phi, [(0, 1)])
    with pytest.raises(ChainError):
        WitnessChain(w.model, w.phi, [(0, 1, 99)])


def test_chain_json_round_trip():
    t = theory_spec("dcf:4")
    w = build_witness(t, N=4)
    text = w.to_json(t)
    back, t2 = WitnessChain.from_json(text)
    assert back == w and t2 == t
    assert back.to_json(t2) == text


def test_cycle_search_examples():
    assert search_phi_cycle(directed_cycle(3), R_XY, 3) == ((0,), (1,), (2,))
    assert search_phi_cycle(transitive_tournament(4), R_XY, 3) is None


def test_cycle_search_matches_sentence_and_brute_force():
    rng = random.Random(21)
    phis = [R_XY, parse_formula("R(x,y) | R(y,x)", split="x;y"),
            parse_formula("exists z . R(x,z) & R(z,y)", split="x;y")]
    for _ in range(60):
        s = random_structure(rng, digraph_vocab(), 4)
        for phi in phis:
            for n in (1, 2, 3):
                found = search_phi_cycle(s, phi, n)
                assert (found is not None) == evaluate(s, build_cycle_sentence(phi, n))
                assert (found is not None) == brute_phi_cycle(
                    s, phi, n, [(e,) for e in range(s.size)])
                if found:
                    assert all(evaluate(s, phi, {"x": found[i][0],
                                                 "y": found[(i + 1) % n][0]})
                               for i in range(n))


def test_strict_order_examples():
    t = theory_spec("ord:0")
    lin = transitive_tournament(20)
    r = check_strict_order(lin, R_XY)
    assert r.strict_partial_order and r.longest_chain == 20
    r = check_strict_order(directed_cycle(3), R_XY)
    assert not r.transitive
    w = build_witness(theory_spec("ord:2"), N=6)
    r = check_strict_order(w.model, w.phi, restrict=w.tuples)
    assert r.strict_partial_order and r.longest_chain == 6


def test_sop_sequence_passes_for_ord():
    t = theory_spec("ord:3")
    phis, array, s = sequence_witness(t, 5)
    r = check_sop_sequence(phis, array, s, 4, t)
    assert r.ok, [c.detail for _, c in r.clauses()]


def test_sop_sequence_passes_for_lev():
    t = theory_spec("lev:2")
    phis, array, s = sequence_witness(t, 4)
    r = check_sop_sequence(phis, array, s, 4, t)
    assert r.ok, [c.detail for _, c in r.clauses()]


def test_sop_sequence_entailment_failure():
    t = theory_spec("ord:2")
    phis, array, s = sequence_witness(t, 4)
    phis = [phis[0], phis[2], ord_formula(1)]   # phi_1 does not entail phi_2
    r = check_sop_sequence(phis, array, s, 3, t)
    assert not r.b.ok
    st, env = r.b.witness
    assert is_model(st, t)


def test_sop_sequence_restriction_failure():
    t = theory_spec("lev:1")
    phis, array, s = sequence_witness(t, 4)
    array[1][2] = (array[1][2][0] ^ 1,) + array[1][2][1:]
    r = check_sop_sequence(phis, array, s, 3, t)
    assert not r.d.ok and r.d.witness == (0, 2)


def test_sop_sequence_bad_shapes():
    t = theory_spec("ord:1")
    phis, array, s = sequence_witness(t, 3)
    phis = [phis[0], parse_formula("L0_0(u,v)", t.vocab, "u;v")]
    r = check_sop_sequence(phis, array, s, 2, t)
    assert not r.a.ok and not r.ok


def test_conj_chain_on_ord_witness():
    for top in (2, 3):
        t = theory_spec("ord", top)
        w = build_witness(t, n=top, N=6)
        phi = conj_chain([ord_formula(n) for n in range(top + 1)])
        w2 = WitnessChain(w.model, phi, w.tuples)
        assert check_chain(w2)
        for m in range(1, top + 1):
            assert search_phi_cycle(w.model, phi, m) is None


def test_reduce_on_cycle_vs_path():
    g = reduce_sop(R_XY, 3)
    for s in (directed_cycle(3), directed_path(3)):
        for a, b in itertools.product(range(3), repeat=2):
            closing = any(s.holds("R", (b, c)) and s.holds("R", (c, a)) for c in range(3))
            want = s.holds("R", (a, b)) and not closing
            assert evaluate(s, g, {"x": a, "y": b}) == want


@pytest.mark.parametrize("n, N", [(3, 5), (4, 3)])
def test_reduce_keeps_witness_chain(n, N):
    """The witness model has no phi-cycle of length n anywhere, so the reduced
    formula still holds along the chain."""
    w = build_witness(theory_spec("dcf", n), N=N)
    assert search_phi_cycle(w.model, w.phi, n) is None
    assert check_chain(WitnessChain(w.model, reduce_sop(w.phi, n), w.tuples))


def test_reduce_breaks_chain_only_through_a_cycle():
    """If the reduced chain fails, the failing pair lies on a phi-cycle."""
    s = make_structure(digraph_vocab(), 3, [("R", (0, 1)), ("R", (1, 2)), ("R", (0, 2)),
                                            ("R", (2, 0))])
    w = WitnessChain(s, reduce_sop(R_XY, 2), [(0,), (1,), (2,)])
    r = check_chain(w)
    assert not r and r.failure == (0, 2)
    assert search_phi_cycle(s, R_XY, 2) is not None


def test_220_trivial_cases():
    s = make_structure(digraph_vocab(), 2, [("R", (1, 0))])
    phi = R_XY
    psi = parse_formula("!R(x,y)", split="x;y")
    r = check_2_20_instance(s, [(0,)], [(1,)], phi, psi, [], [])
    assert r.conclusion
    r = check_2_20_instance(s, [(0,)], [(1,)], phi, psi, [0], [])
    assert r.hypotheses and r.conclusion and r.conclusion_witness == (1,)
    empty = make_structure(digraph_vocab(), 0)
    assert not check_2_20_instance(empty, [], [], phi, psi, [], []).conclusion


def test_220_counterexample_found_by_search():
    phi = R_XY
    psi = parse_formula("!R(x,y)", split="x;y")
    s = make_structure(digraph_vocab(), 4, [("R", (2, 0)), ("R", (3, 0)), ("R", (3, 1))])
    r = check_2_20_instance(s, [(0,), (1,)], [(2,), (3,)], phi, psi, [1], [0])
    assert r.contradictory and r.hypotheses and not r.conclusion and r.counterexample


def test_220_exhaustive_search_finds_instance():
    """Smallest digraphs where the hypotheses hold for R and !R with two a's
    and two b's but the conclusion fails for u={1}, v={0}."""
    phi, psi = R_XY, parse_formula("!R(x,y)", split="x;y")
    pairs = [(a, b) for a in range(4) for b in range(4) if a != b]
    hits = 0
    for bits in itertools.product((0, 1), repeat=len(pairs)):
        facts = [p for p, on in zip(pairs, bits) if on]
        if not {(2, 0), (3, 0), (3, 1)} <= set(facts) or (2, 1) in facts:
            continue
        s = make_structure(digraph_vocab(), 4, [("R", p) for p in facts])
        r = check_2_20_instance(s, [(0,), (1,)], [(2,), (3,)], phi, psi, [1], [0])
        hits += r.counterexample
    assert hits > 0


def test_220_argument_checks():
    s = directed_path(2)
    with pytest.raises(ValueError):
        check_2_20_instance(s, [(0,)], [], R_XY, R_XY, [0], [0])
    with pytest.raises(ValueError):
        check_2_20_instance(s, [(0,)], [], R_XY, R_XY, [3], [])


def test_certificates():
    t4 = theory_spec("dcf:4")
    w = build_witness(t4, N=7)
    assert certify(w, 4, t4).verdict == "SOP_4-witnessed-at-desk-scale"
    c = certify(w, 5, t4)
    assert c.verdict == "SOP_5-refuted-at-bound"
    assert is_model(c.cycle_report["gluing_model"], t4)


def test_certificate_with_extra_model_refutes():
    t = theory_spec("dcf:3")
    w = build_witness(t, N=2)
    m = build_witness(t, N=6)
    # a 4-cycle of chain tuples is impossible; but a short chain skips gluing
    c = certify(w, 3, t, [m.model])
    assert c.verdict in ("SOP_3-witnessed-at-desk-scale", "SOP_3-refuted-at-bound")
    assert c.cycle_report["gluing"].startswith("not applicable")


def test_certificate_is_isomorphism_invariant():
    t = theory_spec("dcf:3")
    w = build_witness(t, N=6)
    perm = list(reversed(range(w.model.size)))
    w2 = WitnessChain(relabel(w.model, perm), w.phi,
                      [tuple(perm[e] for e in tup) for tup in w.tuples])
    for n in (3, 4):
        assert certify(w, n, t).verdict == certify(w2, n, t).verdict


def test_broken_model_is_inconclusive():
    t = theory_spec("dcf:3")
    w = build_witness(theory_spec("dcf:3"), N=4)
    bad = make_structure(w.model.vocab, w.model.size,
                         list(w.model.tuples()) + [("R", (0, 0))])
    assert certify(WitnessChain(bad, w.phi, w.tuples), 3, t).verdict == "inconclusive"
