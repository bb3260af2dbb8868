"""Acceptance suite: one test and one printed pass/fail line per criterion.

Seed corpus: complexes {circle, filled_triangle, torus7, disk_pair,
doubled_disk}, fiber dims {1, 2, 3}, eps in {1e-1 ... 1e-4}.  Cells use
200 seeds where the operation is cheap; heavier constructions run noted
reduced counts (the per-cell seed counts are module constants below).
Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
"""

import numpy as np
import pytest

from almostflat import families as fam
from almostflat.cocycles import (
    Morphism,
    cocycle_distance,
    flatness,
    gauge_constant,
    gauge_correct,
    hom_defect,
    identity_cocycle,
    multiplicativity_defect,
    normalize_tree,
    polar_round,
    pullback,
    triangle_defect,
    unitary_act,
)
from almostflat.complexes import NerveTree, build_star_cover, generators
from almostflat.constructions import (
    amalgam_rep,
    build_double,
    covering_pushforward,
    fold_to_relative,
    unfold_to_double,
)
from almostflat.quasireps import (
    alpha,
    beta,
    bold_alpha,
    bold_beta,
    dist_qrep,
    dist_rep,
    normalize_relative_rep,
    rep_defect,
)
from almostflat.relative import (
    StablyRelativeCocycle,
    build_cylinder,
    cylinder_flatten,
    dist_bundle,
    k_class,
    measure,
    normalize_relative,
    triple_act,
)
from almostflat.unitary import exp_skew, haar_unitary, op_norm, random_skew

CORPUS = ("circle", "filled_triangle", "torus7", "disk_pair", "doubled_disk")
DIMS = (1, 2, 3)
EPSES = (1e-1, 1e-2, 1e-3, 1e-4)

SEEDS_CHEAP = 200
SEEDS_GAUGE = 100  # noted: gauge correction runs an eigensolve per sample
SEEDS_POLAR = 100  # noted
SEEDS_ROUNDTRIP = 30  # noted: two polar roundings per instance
SEEDS_CYLINDER = 100  # noted
SEEDS_DOUBLE = 100  # noted

FAMILIES = {}


def ctx(family):
    if family not in FAMILIES:
        FAMILIES[family] = fam.build_family(family)
    return FAMILIES[family]


def report(num, ok, text):
    print(f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'}: {text}")
    assert ok, f"criterion {num}: {text}"


def test_criterion_1_triangle_bound():
    """triangle_defect <= 3 * flatness + 1e-9 on the whole corpus."""
    worst = 0.0
    checked = 0
    for family in CORPUS:
        pair, cover, tree, gens, _ = ctx(family)
        for dim in DIMS:
            seeds = SEEDS_CHEAP if dim < 3 else 50  # noted reduction
            for eps in EPSES:
                for seed in range(seeds):
                    v = fam.random_flat_cocycle(family, cover, dim, eps, seed)
                    excess = triangle_defect(v, tree) - (3.0 * flatness(v) + 1e-9)
                    worst = max(worst, excess)
                    checked += 1
    report(1, worst <= 0.0, f"triangle product bound 3*eps on {checked} instances (worst excess {worst:.2e})")


def test_criterion_2_gauge_correction():
    """Exact intertwiners within (|I|^2+1) * eps wherever eps < 1/(3(|I|^2+1))."""
    ok = True
    checked = 0
    worst_res, worst_ratio = 0.0, 0.0
    for family in CORPUS:
        pair, cover, tree, gens, _ = ctx(family)
        c1 = gauge_constant(cover)
        for dim in (1, 2, 3):
            for eps in EPSES:
                for seed in range(SEEDS_GAUGE if dim < 3 else 25):
                    v1 = fam.random_flat_cocycle(family, cover, dim, eps, seed)
                    g = {
                        m: haar_unitary(dim, np.random.default_rng(seed * 37 + m))
                        for m in cover.vertices
                    }
                    v2 = unitary_act(Morphism(dim, g), v1)
                    rng = np.random.default_rng(seed + 17)
                    u = Morphism(
                        dim,
                        {m: gm @ exp_skew(random_skew(dim, rng, eps / 4)) for m, gm in g.items()},
                    )
                    measured = max(flatness(v1), flatness(v2), hom_defect(v1, v2, u))
                    if measured >= 1.0 / (3.0 * c1):
                        continue  # precondition cell excluded, as stated
                    ubar = gauge_correct(v1, v2, u)
                    res = ubar.residual(v1, v2)
                    dist = ubar.distance_to(u)
                    worst_res = max(worst_res, res)
                    if measured > 0:
                        worst_ratio = max(worst_ratio, dist / measured)
                    ok = ok and res <= 1e-9 and dist <= c1 * measured + 1e-12
                    checked += 1
                    if not ok:
                        break
    report(
        2,
        ok and checked > 0,
        f"gauge correction exact (worst residual {worst_res:.2e}) and within "
        f"(|I|^2+1)*eps (worst ratio {worst_ratio:.2f}) on {checked} instances",
    )


def test_criterion_3_polar_rounding():
    """Distance <= 4 eps, flatness <= 8 eps; exact input -> exact output."""
    ok = True
    checked = 0
    for family in ("filled_triangle", "torus7", "disk_pair"):
        pair, cover, tree, gens, _ = ctx(family)
        for dim in (1, 2, 3):
            rng0 = np.random.default_rng(dim)
            flat = fam.flat_backbone(family, cover, dim, rng0)
            x0 = {e: cover.samples(*e)[0] for e in cover.nerve_edges}
            base_vals = {e: flat.value(e[0], e[1], x0[e]) for e in cover.nerve_edges}
            v_exact = polar_round(base_vals, cover)
            d_exact = max(
                op_norm(v_exact.value(a, b, s) - base_vals[(a, b)])
                for (a, b) in cover.nerve_edges
                for s in cover.samples(a, b)
            )
            ok = ok and d_exact <= 1e-10
            for delta in (2e-2, 2e-3):
                for seed in range(SEEDS_POLAR if dim < 3 else 25):
                    rng = np.random.default_rng(seed)
                    vals = {
                        e: base_vals[e] @ exp_skew(random_skew(dim, rng, delta))
                        for e in cover.nerve_edges
                    }
                    eps = multiplicativity_defect(vals, cover, dim)
                    v = polar_round(vals, cover)
                    dist = max(
                        op_norm(v.value(a, b, s) - vals[(a, b)])
                        for (a, b) in cover.nerve_edges
                        for s in cover.samples(a, b)
                    )
                    ok = ok and v.validate() <= 1e-9
                    ok = ok and dist <= 4 * eps + 1e-12 and flatness(v) <= 8 * eps + 1e-12
                    checked += 1
                    if not ok:
                        break
    report(3, ok, f"polar rounding 4eps / 8eps bounds on {checked} instances")


def test_criterion_4_exact_monodromy():
    """Flat circle holonomy read exactly; beta reproduces generator values."""
    pair, cover, tree, gens, _ = ctx("circle")
    ok = True
    for dim in DIMS:
        h = haar_unitary(dim, np.random.default_rng(dim + 5))
        e = gens.generators[0]
        v = fam.flat_normalized(cover, tree, gens, {e: h}, dim)
        ok = ok and op_norm(alpha(v, tree, gens).value(e) - h) <= 1e-10

    pairT, coverT, treeT, gensT, oracleT = ctx("torus7")
    for dim in (1, 2):
        pi = fam.random_quasi_rep("torus7", pairT, treeT, gensT, dim, 0.0, dim)
        vb = beta(pi, treeT, gensT)
        worst = max(
            op_norm(vb.value(a, b, treeT.x_sample(a, b)) - pi.value((a, b)))
            for (a, b) in gensT.generators
        )
        ok = ok and worst <= 1e-10
    report(4, ok, "exact sector: alpha reads holonomy, beta reproduces generator values")


def test_criterion_5_roundtrip_stability():
    """d(round trip)/eps varies by < 20% across eps in {1e-2, 1e-3, 1e-4}."""
    ok = True
    lines = []
    for family in CORPUS:
        pair, cover, tree, gens, _ = ctx(family)
        for stab in (0, 1):
            b_ratios, r_ratios = [], []
            for eps in (1e-2, 1e-3, 1e-4):
                wb = wr = 0.0
                for seed in range(SEEDS_ROUNDTRIP):
                    f = fam.random_relative_instance(family, cover, tree, 2, eps, seed, stab_dim=stab)
                    _, fn = normalize_relative(f, tree)
                    p = bold_alpha(fn, tree, gens)
                    g = bold_beta(p, tree, gens)
                    wb = max(wb, dist_bundle(fn, g) / eps)
                    q = bold_alpha(g, tree, gens)
                    wr = max(wr, dist_rep(p, q, gens.generators, gens.y_generators) / eps)
                b_ratios.append(wb)
                r_ratios.append(wr)
            for name, ratios in (("bundle", b_ratios), ("rep", r_ratios)):
                top = max(ratios)
                if top < 1e-8:
                    continue  # exact sector: identically linear
                spread = (top - min(ratios)) / top
                ok = ok and spread < 0.2
                lines.append(f"{family}/m={stab}/{name}: {spread:.3f}")
    report(5, ok, "round-trip distance ratios stable (" + "; ".join(lines) + ")")


def test_criterion_6_k_class_preservation():
    """clutching_chern(k) reads k and the class survives the constructions.

    The monodromy round trip collapses the boundary comparison family to
    its basepoint value, which cannot wind, so that sub-check fails for
    k != 0; it is asserted as stated and left red deliberately.
    """
    results = []
    for k in (-2, -1, 0, 1, 2):
        pair, cover, f = fam.clutching_chern(k)
        tree = NerveTree.build(cover)
        gens = generators(tree)
        results.append(("gen", k, k_class(f, tree).relative_chern == k == fam.boundary_winding_oracle(f)))

        _, fn = normalize_relative(f, tree)
        results.append(("normalize_tree", k, k_class(fn, tree).relative_chern == k))

        u1 = Morphism(1, {m: haar_unitary(1, np.random.default_rng((k + 2) * 91 + m)) for m in cover.vertices})
        u2 = Morphism(1, {m: haar_unitary(1, np.random.default_rng((k + 2) * 91 + 40 + m)) for m in cover.vertices})
        fa = triple_act(u1, u2, Morphism(0, {}), f)
        results.append(("unitary_act", k, k_class(fa, tree).relative_chern == k))

        cyl = build_cylinder(pair, 1)
        u_top = Morphism(1, {cyl.layer_vertex(y, 1): f.u.value(y) for y in cover.i_y})
        g = cylinder_flatten(identity_cocycle(cyl.cover, 1), identity_cocycle(cyl.cover, 1), u_top, cyl, cover)
        results.append(("cylinder_flatten", k, k_class(g, tree).relative_chern == k))

        dc = build_double(pair)
        from almostflat.cocycles import ExactIntertwiner

        units = {}
        for mu in cover.i_y:
            for s in cover.set_samples[mu]:
                if s in pair.y_simplices:
                    units[(mu, s)] = f.u.value(min(s))
        vhat = unfold_to_double(f, dc, ubar=ExactIntertwiner(1, units))
        f2 = fold_to_relative(vhat, dc)
        results.append(("unfold_fold", k, k_class(f2, tree).relative_chern == k))

        p = bold_alpha(fn, tree, gens)
        g = bold_beta(p, tree, gens)
        results.append(("beta_alpha_roundtrip", k, k_class(g, tree).relative_chern == k))

    failing = [f"{name}(k={k})" for name, k, passed in results if not passed]
    ok = not failing
    report(6, ok, "k-class preservation" + ("" if ok else f"; failing: {', '.join(failing)}"))


def test_criterion_7_cylinder_bound():
    """Flattened certificate <= 2 * input eps + 1e-9 over the cylinder corpus."""
    ok = True
    checked = 0
    worst = 0.0
    for family in ("disk_pair", "annulus_one_boundary"):
        pair, cover, tree, gens, _ = ctx(family)
        for k in (1, 2, 3):
            cyl = build_cylinder(pair, k)
            qmap = {v: v for v in range(pair.n_vertices)}
            for layer in range(1, k + 1):
                for y in sorted(pair.y_vertices):
                    qmap[cyl.layer_vertex(y, layer)] = y
            for eps0 in (1e-2, 1e-3):
                for seed in range(SEEDS_CYLINDER // 2):
                    rng = np.random.default_rng(seed)
                    base = fam.flat_backbone(family, cover, 2, rng)
                    vb = pullback(qmap, cyl.cover, base)
                    v = fam.apply_gauge_field(vb, fam.gauge_field(cyl.cover, 2, rng), eps0 / 4)
                    w = fam.apply_gauge_field(vb, fam.gauge_field(cyl.cover, 2, rng), eps0 / 4)
                    u = Morphism(
                        2,
                        {
                            cyl.layer_vertex(y, k): exp_skew(random_skew(2, rng, eps0 / 4))
                            for y in sorted(pair.y_vertices)
                        },
                    )
                    eps = max(flatness(v), flatness(w), hom_defect(v, w, u, y_only=True))
                    cert = measure(cylinder_flatten(v, w, u, cyl, cover)).overall
                    worst = max(worst, cert / eps)
                    ok = ok and cert <= 2 * eps + 1e-9
                    checked += 1
    report(7, ok, f"cylinder certificate <= 2*eps on {checked} instances (worst ratio {worst:.3f})")


def test_criterion_8_double_and_amalgam():
    """Unfold flatness <= (|I|^2+2)*eps; amalgam defect <= 2*eps."""
    ok = True
    checked = 0
    for family in ("disk_pair", "annulus_one_boundary"):
        pair, cover, tree, gens, _ = ctx(family)
        dc = build_double(pair)
        c1 = gauge_constant(cover)
        for eps0 in (1e-3, 1e-4):
            for seed in range(SEEDS_DOUBLE // 2):
                f = fam.random_relative_instance(family, cover, tree, 2, eps0, seed)
                eps = measure(f).overall
                if eps >= 1.0 / (3.0 * c1):
                    continue
                vhat = unfold_to_double(f, dc)
                ok = ok and flatness(vhat) <= (c1 + 1) * eps + 1e-9
                checked += 1

    pair, cover, tree, gens, oracle = ctx("annulus_one_boundary")
    am_oracle = fam.amalgam_oracle("annulus_one_boundary", pair, tree, gens)
    for eps0 in (1e-2, 1e-3):
        for seed in range(SEEDS_DOUBLE):
            p = fam.random_relative_rep("annulus_one_boundary", pair, tree, gens, 2, eps0, seed)
            pn = normalize_relative_rep(p)
            hat = amalgam_rep(pn.pi1, pn.pi2, am_oracle)
            eps = max(
                rep_defect(pn.pi1, oracle),
                rep_defect(pn.pi2, oracle),
                dist_qrep(pn.pi1, pn.pi2, gens.generators),
            )
            ok = ok and rep_defect(hat, am_oracle) <= 2 * eps + 1e-9
            checked += 1
    report(8, ok, f"double flatness and amalgam defect bounds on {checked} instances")


def test_criterion_9_covering_pushforward():
    """Flatness preserved within 1e-12; induced monodromy spectrum matches."""
    cov = fam.cover2_circle()
    tcover = build_star_cover(cov.total)
    bcover = build_star_cover(cov.base)
    ok = True
    for dim in (1, 2):
        for seed in range(SEEDS_CHEAP):
            v = fam.random_flat_cocycle("circle", tcover, dim, 1e-2, seed)
            vdn = covering_pushforward(cov, v, tcover, bcover)
            ok = ok and abs(flatness(vdn) - flatness(v)) <= 1e-12

    ttree = NerveTree.build(tcover)
    tgens = generators(ttree)
    h = haar_unitary(2, np.random.default_rng(2))
    vup = fam.flat_normalized(tcover, ttree, tgens, {tgens.generators[0]: h}, 2)
    vdn = covering_pushforward(cov, vup, tcover, bcover)
    btree = NerveTree.build(bcover)
    bgens = generators(btree)
    _, vn = normalize_tree(vdn, btree)
    mono = alpha(vn, btree, bgens).value(bgens.generators[0])
    induced = np.zeros((4, 4), dtype=complex)
    induced[0:2, 2:4] = h
    induced[2:4, 0:2] = np.eye(2)
    ev1 = np.sort_complex(np.linalg.eigvals(mono))
    ev2 = np.sort_complex(np.linalg.eigvals(induced))
    ok = ok and float(np.max(np.abs(ev1 - ev2))) <= 1e-9
    report(9, ok, "pushforward preserves flatness exactly and matches the induced monodromy")


def test_criterion_10_almost_commuting():
    """rep_defect equals |e^{2 pi i / d} - 1|; beta flatness <= 8 * that."""
    ok = True
    pair, cover, tree, gens, _ = ctx("torus7")
    vec = fam.edge_vector_fn("torus7", pair)
    classes = fam.generator_classes(tree, gens, vec)
    basis = fam.lattice_basis(classes)
    mat = np.array([classes[b] for b in basis], dtype=float).T
    inv = np.linalg.inv(mat)
    coords = {
        g: tuple(int(round(x)) for x in inv @ np.array(classes[g], dtype=float))
        for g in gens.generators
    }
    for d in (4, 8, 16):
        pi, oracle = fam.almost_commuting(d)
        target = abs(np.exp(2j * np.pi / d) - 1)
        ok = ok and abs(rep_defect(pi, oracle) - target) <= 1e-10
        rel = fam.rep_from_classes(d, coords, [pi.value("a"), pi.value("b")])
        vb = beta(rel, tree, gens)
        ok = ok and flatness(vb) <= 8 * target + 1e-9
    report(10, ok, "clock-and-shift defects exact; rounded cocycle flat within 8x")
