"""Build an SOP_n witness chain for dcf(n), certify it, and glue it into a cycle.

    python3 demos/witness_and_gluing.py 4
"""
import sys

from sopnlab.amalgam import Obstruction, cyclic_amalgam
from sopnlab.sop import build_witness, certify, check_chain
from sopnlab.theories import check_model, theory_spec

n = int(sys.argv[1]) if len(sys.argv) > 1 else 4
t = theory_spec("dcf", n)
w = build_witness(t, N=n + 3)
print(f"dcf({n}) witness: {w.model.size} points, {len(w.tuples)} tuples of arity {len(w.tuples[0])}")
print("model check:", check_model(w.model, t) or "ok")
print("chain condition:", "ok" if check_chain(w) else "broken")

for m in (n, n + 1):
    out = cyclic_amalgam(w, m, t)
    if isinstance(out, Obstruction):
        print(f"gluing {m} pieces: obstruction ({out.violation.label})")
    else:
        print(f"gluing {m} pieces: model on {out.size} points")

for k in (n, n + 1):
    print(f"certificate for SOP_{k}:", certify(w, k, t).verdict)
