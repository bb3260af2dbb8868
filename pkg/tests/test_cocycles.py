import numpy as np
import pytest

from almostflat import families as fam
from almostflat.cocycles import (
    CechCocycle,
    Morphism,
    PartitionRoot,
    cocycle_distance,
    extend_morphism,
    extend_subcover,
    flatness,
    frame,
    gauge_correct,
    gauge_constant,
    gauge_homotopy,
    hom_defect,
    identity_cocycle,
    identity_morphism,
    is_normalized,
    multiplicativity_defect,
    normalize_tree,
    polar_round,
    pullback,
    subcover_flatness,
    subcover_restrict,
    triangle_defect,
    trivialize_simply_connected,
    unitary_act,
)
from almostflat.complexes import NerveTree, build_star_cover, generators, max_fill_count
from almostflat.errors import CannotExtend, EpsilonTooLarge, NotFillable
from almostflat.unitary import exp_skew, haar_unitary, op_norm, random_skew


@pytest.fixture(scope="module")
def torus():
    return fam.build_family("torus7")


@pytest.fixture(scope="module")
def disk():
    return fam.build_family("disk_pair")


def test_flatness_constant_and_identity(torus):
    _, cover, tree, _, _ = torus
    assert flatness(identity_cocycle(cover, 2)) == 0.0
    vf = fam.flat_backbone("torus7", cover, 2, np.random.default_rng(0))
    assert flatness(vf) == 0.0


def test_flatness_single_perturbed_entry(torus):
    _, cover, tree, _, _ = torus
    delta = 1e-3
    v = fam.flat_backbone("torus7", cover, 1, np.random.default_rng(1))
    edge = cover.nerve_edges[0]
    samples = cover.samples(*edge)
    assert len(samples) >= 2
    data = dict(v.data)
    data[(edge[0], edge[1], samples[0])] = data[
        (edge[0], edge[1], samples[0])
    ] @ np.array([[np.exp(1j * delta)]])
    v2 = CechCocycle(cover, 1, data)
    # perturbing one sample of one entry moves flatness by |e^{i d} - 1|
    assert 0.9e-3 <= flatness(v2) <= 1.1e-3


def test_triangle_defect_bound(torus):
    _, cover, tree, _, _ = torus
    vf = fam.flat_backbone("torus7", cover, 2, np.random.default_rng(3))
    assert triangle_defect(vf, tree) < 1e-12
    for seed in range(50):
        for eps in (1e-1, 1e-2, 1e-3):
            v = fam.random_flat_cocycle("torus7", cover, 2, eps, seed)
            assert triangle_defect(v, tree) <= 3.0 * flatness(v) + 1e-9


def test_hom_defect_cases(torus):
    _, cover, tree, _, _ = torus
    v = fam.random_flat_cocycle("torus7", cover, 2, 1e-2, seed=4)
    assert hom_defect(v, v, identity_morphism(2)) == 0.0
    w = Morphism(2, {m: haar_unitary(2, np.random.default_rng(m)) for m in cover.vertices})
    assert hom_defect(v, unitary_act(w, v), w) < 1e-13
    # a delta-perturbation of v2 moves the defect by at most 2x the
    # largest entry perturbation
    delta = 1e-3
    field = fam.gauge_field(cover, 2, np.random.default_rng(9))
    v2 = fam.apply_gauge_field(v, field, delta)
    assert hom_defect(v, v2, identity_morphism(2)) <= 2 * delta


def test_frame_invariants(torus):
    _, cover, tree, _, _ = torus
    eta = PartitionRoot()
    for v in (
        identity_cocycle(cover, 2),
        fam.random_flat_cocycle("torus7", cover, 2, 1e-2, seed=5),
    ):
        fr = frame(v, eta)
        for s in sorted(cover.pair.simplices)[:12]:
            p = fr.projection(s)
            assert op_norm(p @ p - p) < 1e-9
            assert op_norm(p - p.conj().T) < 1e-12
            for mu in s:
                psi = fr.trivialization(mu, s)
                assert op_norm(p @ psi - psi) < 1e-9
                for nu in s:
                    psj = fr.trivialization(nu, s)
                    assert op_norm(psi.conj().T @ psj - v.value(mu, nu, s)) < 1e-9


def test_unitary_act_properties(torus):
    _, cover, tree, _, _ = torus
    v = fam.random_flat_cocycle("torus7", cover, 2, 1e-2, seed=6)
    assert cocycle_distance(unitary_act(identity_morphism(2), v), v) == 0.0
    w = Morphism(2, {m: haar_unitary(2, np.random.default_rng(40 + m)) for m in cover.vertices})
    wv = unitary_act(w, v)
    assert abs(flatness(wv) - flatness(v)) <= 1e-12
    assert abs(triangle_defect(wv, tree) - triangle_defect(v, tree)) <= 1e-12
    back = unitary_act(w.adjoint(), wv)
    assert cocycle_distance(back, v) < 1e-13


def test_normalize_tree(torus):
    _, cover, tree, _, _ = torus
    v = fam.random_flat_cocycle("torus7", cover, 2, 1e-2, seed=7)
    u, vn = normalize_tree(v, tree)
    assert op_norm(u.value(tree.basepoint) - np.eye(2)) == 0.0
    for a, b in tree.tree_edges:
        assert op_norm(vn.value(a, b, tree.x_sample(a, b)) - np.eye(2)) <= 1e-12
        for s in cover.samples(a, b):
            assert op_norm(vn.value(a, b, s) - np.eye(2)) <= flatness(v) + 1e-12
    # normalizing an already normalized cocycle does nothing
    u2, vn2 = normalize_tree(vn, tree)
    assert cocycle_distance(vn2, vn) < 1e-12
    assert all(op_norm(u2.value(m) - np.eye(2)) < 1e-12 for m in cover.vertices)


def test_normalize_circle_holonomy_spectrum():
    pair, cover, tree, gens, _ = fam.build_family("circle")
    rng = np.random.default_rng(11)
    h = haar_unitary(2, rng)
    e = gens.generators[0]
    v = fam.flat_normalized(cover, tree, gens, {e: h}, 2)
    g = Morphism(2, {m: haar_unitary(2, np.random.default_rng(60 + m)) for m in cover.vertices})
    u, vn = normalize_tree(unitary_act(g, v), tree)
    val = vn.value(e[0], e[1], tree.x_sample(*e))
    ev1 = np.sort(np.angle(np.linalg.eigvals(val)))
    ev2 = np.sort(np.angle(np.linalg.eigvals(h)))
    assert np.max(np.abs(ev1 - ev2)) < 1e-10


def test_trivialize_simply_connected(disk):
    _, cover, tree, _, _ = disk
    vf = fam.flat_backbone("disk_pair", cover, 2, np.random.default_rng(0))
    _, defect = trivialize_simply_connected(vf, tree)
    assert defect <= 1e-10
    maxc = max_fill_count(tree)
    for seed in range(60):
        v = fam.random_flat_cocycle("disk_pair", cover, 2, 1e-2, seed)
        _, d = trivialize_simply_connected(v, tree)
        assert d <= 3 * maxc * flatness(v) + 1e-9


def test_trivialize_circle_not_fillable():
    _, cover, tree, _, _ = fam.build_family("circle")
    v = identity_cocycle(cover, 2)
    with pytest.raises(NotFillable):
        trivialize_simply_connected(v, tree)


def _gauge_instance(cover, dim, eps, seed):
    v1 = fam.random_flat_cocycle("torus7", cover, dim, eps, seed)
    rng = np.random.default_rng(seed + 991)
    g = {m: haar_unitary(dim, np.random.default_rng(seed * 31 + m)) for m in cover.vertices}
    v2 = unitary_act(Morphism(dim, g), v1)
    u = Morphism(dim, {m: gm @ exp_skew(random_skew(dim, rng, eps / 4)) for m, gm in g.items()})
    return v1, v2, u


def test_gauge_correct_identity_case(torus):
    _, cover, tree, _, _ = torus
    v = fam.random_flat_cocycle("torus7", cover, 2, 1e-3, seed=8)
    ub = gauge_correct(v, v, identity_morphism(2))
    assert ub.residual(v, v) <= 1e-12
    assert ub.distance_to(identity_morphism(2)) <= 1e-9


def test_gauge_correct_bounds(torus):
    _, cover, tree, _, _ = torus
    c1 = gauge_constant(cover)
    for seed in range(25):
        v1, v2, u = _gauge_instance(cover, 2, 1e-3, seed)
        eps = max(flatness(v1), flatness(v2), hom_defect(v1, v2, u))
        assert eps < 1 / (3 * c1)
        ub = gauge_correct(v1, v2, u)
        assert ub.residual(v1, v2) <= 1e-9
        assert ub.distance_to(u) <= c1 * eps


def test_gauge_correct_rejects_large_eps(torus):
    _, cover, tree, _, _ = torus
    v1, v2, u = _gauge_instance(cover, 2, 0.5, 0)
    with pytest.raises(EpsilonTooLarge):
        gauge_correct(v1, v2, u)


def test_gauge_homotopy(torus):
    _, cover, tree, _, _ = torus
    c1 = gauge_constant(cover)
    v1, v2, u = _gauge_instance(cover, 2, 1e-3, 3)
    eps = max(flatness(v1), flatness(v2), hom_defect(v1, v2, u))
    ua = gauge_correct(v1, v2, u)
    ub = gauge_correct(v1, v2, u, eta=PartitionRoot({m: 1.0 + 0.5 * (m % 3) for m in cover.vertices}))
    path = gauge_homotopy(v1, v2, u, ua, ua)
    assert path(0.7).residual(v1, v2) <= 1e-12  # constant family
    path = gauge_homotopy(v1, v2, u, ua, ub)
    for s in (0.0, 0.25, 0.5, 0.75, 1.0):
        member = path(s)
        assert member.residual(v1, v2) <= 1e-8
        assert member.distance_to(u) <= 3 * c1 * eps
    # endpoints reproduced
    end = path(1.0)
    worst = max(op_norm(end.units[k] - ub.units[k]) for k in ub.units)
    assert worst < 1e-10


def test_polar_round_bounds(torus):
    _, cover, tree, _, _ = torus
    rng = np.random.default_rng(12)
    flat = fam.flat_backbone("torus7", cover, 2, rng)
    x0 = {e: cover.samples(*e)[0] for e in cover.nerve_edges}
    exact_vals = {e: flat.value(e[0], e[1], x0[e]) for e in cover.nerve_edges}
    v = polar_round(exact_vals, cover)
    assert v.validate() <= 1e-10
    dist = max(
        op_norm(v.value(a, b, s) - exact_vals[(a, b)])
        for (a, b) in cover.nerve_edges
        for s in cover.samples(a, b)
    )
    assert dist <= 1e-10  # genuinely multiplicative input passes through

    for seed in range(20):
        rng = np.random.default_rng(100 + seed)
        vals = {
            e: exact_vals[e] @ exp_skew(random_skew(2, rng, 5e-3)) for e in cover.nerve_edges
        }
        eps = multiplicativity_defect(vals, cover, 2)
        w = polar_round(vals, cover)
        assert w.validate() <= 1e-9
        dist = max(
            op_norm(w.value(a, b, s) - vals[(a, b)])
            for (a, b) in cover.nerve_edges
            for s in cover.samples(a, b)
        )
        assert dist <= 4 * eps
        assert flatness(w) <= 8 * eps


def test_polar_round_rejects_half(torus):
    _, cover, tree, _, _ = torus
    rng = np.random.default_rng(13)
    vals = {e: haar_unitary(2, rng) for e in cover.nerve_edges}
    assert multiplicativity_defect(vals, cover, 2) >= 0.5
    with pytest.raises(EpsilonTooLarge):
        polar_round(vals, cover)


def test_extend_subcover_identity_and_flat(disk):
    pair, cover, tree, _, _ = disk
    j = set(cover.vertices)
    v = fam.random_flat_cocycle("disk_pair", cover, 2, 1e-2, seed=3)
    ext, _ = extend_subcover(v, j)
    assert cocycle_distance(ext, v) == 0.0
    vf = fam.flat_backbone("disk_pair", cover, 2, np.random.default_rng(4))
    ext2, _ = extend_subcover(subcover_restrict(vf, j - {2}), j - {2})
    assert flatness(ext2) <= 1e-10


def test_extend_subcover_bound_and_agreement(disk):
    pair, cover, tree, _, _ = disk
    j = set(cover.vertices) - {2}
    for seed in range(40):
        v = subcover_restrict(fam.random_flat_cocycle("disk_pair", cover, 2, 1e-2, seed), j)
        ext, report = extend_subcover(v, j)
        assert ext.validate() <= 1e-9
        for key, m in v.data.items():
            assert op_norm(ext.data[key] - m) == 0.0
        assert flatness(ext) <= report["c3"] * subcover_flatness(v, j) + 1e-9


def test_extend_subcover_3d(torus):
    pair, cover, tree, _, _ = fam.build_family("tetra")
    j = {0, 1, 2}
    v = subcover_restrict(fam.random_flat_cocycle("tetra", cover, 2, 1e-2, 5), j)
    ext, report = extend_subcover(v, j)
    assert ext.validate() <= 1e-9


def test_extend_subcover_torus_interior_rejected(torus):
    _, cover, tree, _, _ = torus
    j = set(range(6))
    v = subcover_restrict(fam.random_flat_cocycle("torus7", cover, 2, 1e-2, 1), j)
    # the punctured star nerve is a circle without 2-cells
    with pytest.raises(CannotExtend):
        extend_subcover(v, j)


def test_extend_morphism(disk):
    pair, cover, tree, _, _ = disk
    j = set(cover.vertices) - {2}
    for seed in range(20):
        v = subcover_restrict(fam.random_flat_cocycle("disk_pair", cover, 2, 1e-2, seed), j)
        vp = subcover_restrict(
            fam.random_flat_cocycle("disk_pair", cover, 2, 1e-2, seed + 500), j
        )
        ext, report = extend_subcover(v, j)
        extp, _ = extend_subcover(vp, j)
        rng = np.random.default_rng(seed)
        u = Morphism(2, {m: exp_skew(random_skew(2, rng, 1e-2)) for m in j})
        eps = max(subcover_flatness(v, j), subcover_flatness(vp, j))
        for (a, b), samples in cover.overlap_samples.items():
            if a in j and b in j:
                for s in samples:
                    eps = max(
                        eps,
                        op_norm(
                            u.value(a) @ v.value(a, b, s) @ u.value(b).conj().T
                            - vp.value(a, b, s)
                        ),
                    )
        ut = extend_morphism(ext, extp, u, j, tree)
        for m in j:
            assert op_norm(ut.value(m) - u.value(m)) == 0.0
        assert hom_defect(ext, extp, ut) <= (4 * report["c3"] + 1) * eps + 1e-9
    # J = I leaves the morphism untouched
    full = set(cover.vertices)
    v = fam.random_flat_cocycle("disk_pair", cover, 2, 1e-2, 0)
    u = Morphism(2, {m: haar_unitary(2, np.random.default_rng(m)) for m in full})
    ut = extend_morphism(v, v, u, full, tree)
    assert all(op_norm(ut.value(m) - u.value(m)) == 0.0 for m in full)


def test_pullback_identity_constant_and_cover():
    pair, cover, tree, gens, _ = fam.build_family("circle")
    rng = np.random.default_rng(14)
    h = haar_unitary(2, rng)
    v = fam.flat_normalized(cover, tree, gens, {gens.generators[0]: h}, 2)
    ident = pullback({m: m for m in cover.vertices}, cover, v)
    assert cocycle_distance(ident, v) == 0.0
    const = pullback({m: 0 for m in cover.vertices}, cover, v)
    assert cocycle_distance(const, identity_cocycle(cover, 2)) == 0.0

    # double cover of the circle pulls the holonomy back to its square
    big = fam.circle(6)
    big_cover = build_star_cover(big)
    vmap = {m: m % 3 for m in range(6)}
    pv = pullback(vmap, big_cover, v)
    assert pv.validate() < 1e-12
    big_tree = NerveTree.build(big_cover)
    big_gens = generators(big_tree)
    from almostflat.quasireps import alpha
    from almostflat.cocycles import normalize_tree as nt

    _, pvn = nt(pv, big_tree)
    pi = alpha(pvn, big_tree, big_gens)
    val = pi.value(big_gens.generators[0])
    ev1 = np.sort(np.angle(np.linalg.eigvals(val)))
    ev2 = np.sort(np.angle(np.linalg.eigvals(h @ h)))
    assert np.max(np.abs(np.exp(1j * ev1) - np.exp(1j * ev2))) < 1e-9
