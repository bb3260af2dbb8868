"""Gauge correction: from approximate to exact intertwiners.

An eps-morphism u between two almost flat cocycles conjugates one onto
the other only approximately.  Compressing the frame projections of the
two bundles and taking the unitary polar factor produces a nearby family
that intertwines exactly at every sample, at distance at most
(|I|^2 + 1) * eps from u.
"""

import numpy as np

from almostflat import families as fam
from almostflat.cocycles import (
    Morphism,
    PartitionRoot,
    flatness,
    gauge_constant,
    gauge_correct,
    gauge_homotopy,
    hom_defect,
    unitary_act,
)
from almostflat.unitary import exp_skew, haar_unitary, random_skew

pair, cover, tree, gens, _ = fam.build_family("torus7")
c1 = gauge_constant(cover)
print(f"cover has {pair.n_vertices} sets, so the correction constant is |I|^2+1 = {c1}")

v1 = fam.random_flat_cocycle("torus7", cover, 2, 1e-3, seed=0)
g = {m: haar_unitary(2, np.random.default_rng(m)) for m in cover.vertices}
v2 = unitary_act(Morphism(2, g), v1)

rng = np.random.default_rng(7)
u = Morphism(2, {m: gm @ exp_skew(random_skew(2, rng, 2e-4)) for m, gm in g.items()})
eps = max(flatness(v1), flatness(v2), hom_defect(v1, v2, u))
print(f"measured eps = {eps:.3e}  (precondition bound 1/(3(|I|^2+1)) = {1/(3*c1):.3e})")

ubar = gauge_correct(v1, v2, u)
print("exact intertwining residual:", ubar.residual(v1, v2))
print("distance to the input morphism:", ubar.distance_to(u), "<=", c1 * eps)

# two corrections (different partitions of unity) are joined by a path of
# exact intertwiners staying near u
ubar2 = gauge_correct(v1, v2, u, eta=PartitionRoot({m: 1.0 + m % 2 for m in cover.vertices}))
path = gauge_homotopy(v1, v2, u, ubar, ubar2)
for s in (0.0, 0.5, 1.0):
    member = path(s)
    print(f"s={s}: residual {member.residual(v1, v2):.2e}  distance {member.distance_to(u):.3e}")
