"""Clock-and-shift: almost commuting unitaries as a quasi-representation.

The d x d clock and shift matrices commute up to the scalar
exp(2 pi i / d), so they define a quasi-representation of the rank-2
free abelian group whose defect is exactly |exp(2 pi i / d) - 1|.
Rounding it through a triangulated torus produces an exact cocycle whose
flatness is controlled by eight times that defect.
"""

import numpy as np

from almostflat import families as fam
from almostflat.cocycles import flatness
from almostflat.quasireps import beta, rep_defect

pair, cover, tree, gens, _ = fam.build_family("torus7")
vec = fam.edge_vector_fn("torus7", pair)
classes = fam.generator_classes(tree, gens, vec)
basis = fam.lattice_basis(classes)
mat = np.array([classes[b] for b in basis], dtype=float).T
inv = np.linalg.inv(mat)
coords = {
    g: tuple(int(round(x)) for x in inv @ np.array(classes[g], dtype=float))
    for g in gens.generators
}

for d in (4, 8, 16, 32):
    pi, oracle = fam.almost_commuting(d)
    defect = rep_defect(pi, oracle)
    print(f"d={d:3d}: defect {defect:.6f}  |e^(2pi i/d)-1| = {abs(np.exp(2j*np.pi/d)-1):.6f}")
    rel = fam.rep_from_classes(d, coords, [pi.value("a"), pi.value("b")])
    v = beta(rel, tree, gens)
    print(f"        rounded cocycle: identity residual {v.validate():.1e}, flatness {flatness(v):.4f} <= {8*defect:.4f}")
