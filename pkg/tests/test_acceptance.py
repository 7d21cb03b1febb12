"""Acceptance criteria.  Each test prints one ``PASS``/``FAIL`` line.

Run ``pytest tests/test_acceptance.py`` or ``python3 tests/test_acceptance.py``.
"""
import itertools
import random
import subprocess
import sys
import time

import numpy as np
import pytest

from sopnlab.amalgam import (AmalgamProblem, Obstruction, cyclic_amalgam, ord_suite,
                             ordered_amalgam, random_ord_model)
from sopnlab.core import (digraph_vocab, directed_cycle, directed_path, empty_structure,
                          format_structure, is_embedding, make_structure, parse_structure,
                          relabel)
from sopnlab.generic import ec_extend, outstanding_problems
from sopnlab.invariants import (Cut, block_permutation, model_invariants, order_invariants,
                                permute)
from sopnlab.logic import (conj_chain, evaluate, free_vars, parse_node, parse_formula,
                           reduce_sop, to_text)
from sopnlab.sop import (WitnessChain, build_witness, check_chain, ord_formula,
                         search_phi_cycle)
from sopnlab.theories import check_model, is_model, linear_order_model, theory_spec

from oracles import (MIXED, dfs_shortest_cycle, naive_eval, random_formula,
                     random_structure, triangles)

R_XY = parse_formula("R(x,y)", split="x;y")


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_criterion_1_ordered_amalgam_suite(capsys):
    t0 = time.perf_counter()
    results = ord_suite(2, 2, 4)
    elapsed = time.perf_counter() - t0
    problems = sum(r.problems for r in results)
    bad = [r for r in results if not r.ok]
    # structure-level cross-check on random problems of the full size bound
    rng = np.random.default_rng(2024)
    t = theory_spec("ord:2")
    checked = 0
    for _ in range(200):
        s = int(rng.integers(0, 3))
        base = random_ord_model(t, s, rng)
        m1 = random_ord_model(t, int(rng.integers(s, 5)), rng, base)
        m2 = random_ord_model(t, int(rng.integers(s, 5)), rng, base)
        p = AmalgamProblem.over_prefix(base, m1, m2)
        out = ordered_amalgam(p, t)
        f1, f2 = p.pushout_maps()
        if not (is_model(out, t) and is_embedding(f1, m1, out) and is_embedding(f2, m2, out)):
            bad.append(p)
        checked += 1
    ok = not bad and elapsed < 300
    report(capsys, 1, ok, f"{problems} local problems, {checked} random full problems, "
                          f"{len(bad)} failures, {elapsed:.1f}s")


def test_criterion_2_sop_witnesses(capsys):
    t0 = time.perf_counter()
    notes = []
    ok = True
    for n in (3, 4, 5):
        t = theory_spec("dcf", n)
        w = build_witness(t, N=6)
        girth = dfs_shortest_cycle(w.model)
        pairs = [(i, j) for i in range(6) for j in range(i + 1, 6)]
        chain_ok = bool(check_chain(w)) and all(w.holds(i, j) for i, j in pairs)
        cyc = search_phi_cycle(w.model, w.phi, n, restrict=w.tuples)
        good = (check_model(w.model, t) is None and (girth is None or girth > n)
                and len(pairs) == 15 and chain_ok and cyc is None)
        ok &= good
        notes.append(f"n={n} girth={girth}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    report(capsys, 2, ok, ", ".join(notes) + f", {elapsed:.1f}s")


def test_criterion_3_cyclic_dichotomy(capsys):
    notes = []
    ok = True
    for n in (3, 4):
        t = theory_spec("dcf", n)
        w = build_witness(t, N=n + 3)
        bad = cyclic_amalgam(w, n, t)
        good = cyclic_amalgam(w, n + 1, t)
        short = isinstance(bad, Obstruction) and dfs_shortest_cycle(bad.structure) <= n
        fine = not isinstance(good, Obstruction) and check_model(good, t) is None
        ok &= short and fine
        notes.append(f"n={n}: m=n {'obstruction' if short else 'no obstruction'}, "
                     f"m=n+1 {'model' if fine else 'not a model'}")
    report(capsys, 3, ok, "; ".join(notes))


def test_criterion_4_reducer(capsys):
    ok = True
    for top in (2, 3):
        w = build_witness(theory_spec("ord", top), n=top, N=6)
        phi = conj_chain([ord_formula(n) for n in range(top + 1)])
        ok &= bool(check_chain(WitnessChain(w.model, phi, w.tuples)))
        ok &= all(search_phi_cycle(w.model, phi, m) is None for m in range(1, top + 1))
    g = reduce_sop(R_XY, 3)
    mismatches = 0
    for s in (directed_cycle(3), directed_path(3)):
        for a, b in itertools.product(range(s.size), repeat=2):
            closing = any(s.holds("R", (b, c)) and s.holds("R", (c, a)) for c in range(s.size))
            want = s.holds("R", (a, b)) and not closing
            mismatches += evaluate(s, g, {"x": a, "y": b}) != want
    ok &= mismatches == 0
    report(capsys, 4, ok, f"ord(2), ord(3) chains checked; reducer mismatches {mismatches}")


def test_criterion_5_evaluator_oracle(capsys):
    rng = random.Random(5)
    disagreements = checks = 0
    for _ in range(500):
        s = random_structure(rng, MIXED, 6)
        node = random_formula(rng, 3)
        fv = sorted(free_vars(node))
        env = {v: rng.randrange(s.size) for v in fv}
        checks += 1
        disagreements += evaluate(s, node, env) != naive_eval(s, node, env)
    report(capsys, 5, disagreements == 0, f"{checks} pairs, {disagreements} disagreements")


def test_criterion_6_generic_extension(capsys):
    t = theory_spec("trf")
    t0 = time.perf_counter()
    res = ec_extend(empty_structure(t.vocab), t, 2, 24, seed=0)
    elapsed = time.perf_counter() - t0
    m = res.structure
    left = outstanding_problems(m, t, 2)
    ok = (m.size == 24 and not triangles(m) and check_model(m, t) is None
          and not left and elapsed < 120)
    report(capsys, 6, ok, f"size {m.size}, {len(m.tables['R']) // 2} edges, "
                          f"{len(left)} unrealized extensions, {elapsed:.1f}s")


def _ranked_order(rank):
    n = len(rank)
    return make_structure(digraph_vocab(), n, [("R", (a, b)) for a in range(n)
                                               for b in range(n) if rank[a] < rank[b]])


def test_criterion_7_permutation_invariance(capsys):
    rng = random.Random(7)
    changed = 0
    for _ in range(200):
        n = rng.randint(3, 10)
        order = _ranked_order(rng.sample(range(n), n))
        graph = make_structure(digraph_vocab(), n, [("R", (a, b)) for a in range(n)
                                                    for b in range(n) if rng.random() < 0.3])
        delta = rng.randint(2, n)
        cut = Cut(delta, tuple(sorted(rng.sample(range(delta), rng.randint(1, delta)))))
        perm = block_permutation(cut, n, rng)
        same = (order_invariants(order, cut).aggregate
                == order_invariants(permute(order, perm), cut).aggregate)
        same &= (model_invariants(graph, R_XY, cut).aggregate
                 == model_invariants(permute(graph, perm), R_XY, cut).aggregate)
        changed += not same
    report(capsys, 7, changed == 0, f"200 permutations, {changed} changed an aggregate")


def containment_instance(seed):
    """A chain I of length 6..12 in random position order, a strict partial
    order M extending it on the first |I| points, phi = ord_formula(1)."""
    rng = random.Random(seed)
    t = theory_spec("ord:1")
    k = rng.randint(6, 12)
    rank = rng.sample(range(k), k)
    pos = [0] * k
    for e, r in enumerate(rank):
        pos[r] = e
    chain = relabel(linear_order_model(t, k), pos)
    m = random_ord_model(t, k + rng.randint(0, 6), np.random.default_rng(seed), chain)
    delta = rng.randint(2, k)
    cut = Cut(delta, tuple(sorted(rng.sample(range(delta), rng.randint(1, min(4, delta))))))
    return _ranked_order(rank), m, ord_formula(1), cut


def test_criterion_8_containment(capsys):
    failing, per_element = [], 0
    for seed in range(20):
        order, m, phi, cut = containment_instance(seed)
        assert is_model(m, theory_spec("ord:1"))
        oi, mi = order_invariants(order, cut), model_invariants(m, phi, cut)
        per_element += all(oi.of(x) <= mi.of(x) for x in range(order.size))
        missing = oi.aggregate - mi.aggregate
        if missing:
            failing.append((seed, sorted(sorted(v) for v in missing)))
    detail = (f"{20 - len(failing)}/20 instances contained; pointwise containment "
              f"in {per_element}/20; missing sets {failing}")
    report(capsys, 8, not failing, detail)


def test_criterion_9_round_trips(capsys, tmp_path):
    rng = random.Random(9)
    ok = True
    for _ in range(100):
        s = random_structure(rng, MIXED, 6)
        text = format_structure(s)
        ok &= format_structure(parse_structure(text)) == text and parse_structure(text) == s
        f = to_text(random_formula(rng, 4))
        ok &= to_text(parse_node(f)) == f
    runs = [["witness", "--theory", "dcf:4", "--length", "6"],
            ["generic", "--theory", "trf", "--size", "12", "--closure", "1", "--seed", "4"],
            ["sop-sequence", "--theory", "ord:2", "--length", "4", "--bound", "3"]]
    identical = 0
    for args in runs:
        outs = []
        for i in range(2):
            r = tmp_path / f"r{i}"
            subprocess.run([sys.executable, "-m", "sopnlab.cli", "--report", str(r)] + args,
                           capture_output=True, check=False)
            outs.append(r.read_bytes())
        identical += outs[0] == outs[1]
    ok &= identical == len(runs)
    report(capsys, 9, ok, f"100 structure and formula round trips, "
                          f"{identical}/{len(runs)} CLI reports byte-identical")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
