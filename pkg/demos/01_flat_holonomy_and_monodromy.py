"""Flat cocycles, flatness measurement, and the monodromy round trip.

A cocycle assigns a unitary to every (cover-set pair, sample point) of
the star cover of a simplicial pair.  Flat ones are sample-independent;
almost flat ones vary a little.  The monodromy map alpha reads holonomies
of tree-based loops, and beta rounds generator values back into a
cocycle; on flat inputs the two are exact inverses.
"""

import numpy as np

from almostflat import families as fam
from almostflat.cocycles import flatness, normalize_tree, triangle_defect, cocycle_distance
from almostflat.quasireps import alpha, beta, rep_defect
from almostflat.unitary import haar_unitary, op_norm

# --- a flat circle bundle with prescribed holonomy -------------------------
pair, cover, tree, gens, oracle = fam.build_family("circle")
h = haar_unitary(2, np.random.default_rng(1))
edge = gens.generators[0]
v = fam.flat_normalized(cover, tree, gens, {edge: h}, 2)

pi = alpha(v, tree, gens)
print("holonomy read back exactly:", op_norm(pi.value(edge) - h))

w = beta(pi, tree, gens)
print("beta(alpha(v)) distance to v:", cocycle_distance(w, v))

# --- almost flat cocycles on the 7-vertex torus -----------------------------
pair, cover, tree, gens, oracle = fam.build_family("torus7")
for eps in (1e-1, 1e-2, 1e-3):
    v = fam.random_flat_cocycle("torus7", cover, 2, eps, seed=0)
    print(
        f"eps={eps:.0e}:  flatness {flatness(v):.3e}"
        f"  triangle defect {triangle_defect(v, tree):.3e}"
        f"  (bound 3*flatness = {3 * flatness(v):.3e})"
    )

# alpha of a normalized almost flat cocycle is an almost representation
v = fam.random_flat_cocycle("torus7", cover, 2, 1e-3, seed=1)
_, vn = normalize_tree(v, tree)
pi = alpha(vn, tree, gens)
print("multiplicativity defect of the monodromy:", rep_defect(pi, oracle))
print("ratio to flatness:", rep_defect(pi, oracle) / flatness(v))
