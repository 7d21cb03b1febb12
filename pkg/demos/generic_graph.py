"""Grow a triangle-free graph in which every consistent one-point extension
over every pair of vertices is realized, then print its degree profile.

    python3 demos/generic_graph.py [size] [seed]
"""
import sys
from collections import Counter

from sopnlab.core import empty_structure
from sopnlab.generic import ec_extend, outstanding_problems
from sopnlab.theories import theory_spec

size = int(sys.argv[1]) if len(sys.argv) > 1 else 24
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0
t = theory_spec("trf")
res = ec_extend(empty_structure(t.vocab), t, 2, size, seed=seed)
g = res.structure
deg = Counter(a for a, _ in g.tables["R"])
print(f"status: {res.status}")
print(f"vertices {g.size}, edges {len(g.tables['R']) // 2}")
print("degrees:", sorted(deg[v] for v in range(g.size)))
print("unrealized extensions found afterwards:", len(outstanding_problems(g, t, 2)))
