"""Instance families: example complexes, flat backbones, random instances.

Every generator is deterministic in (family, params, seed).  Random
almost-flat cocycles are built as per-sample gauge jiggles of a flat
backbone, which keeps the cocycle identity exact at samples while the
jiggle scale controls flatness; scaling the same jiggle field by
different epsilons yields comparable instances for stability tests.
"""

from __future__ import annotations

import numpy as np

from .complexes import GeneratorData, NerveTree, SimplicialPair, build_star_cover, generators
from .cocycles import CechCocycle, Morphism, identity_cocycle
from .constructions import DiscreteConnection, FiniteCovering
from .errors import UnknownFamily
from .quasireps import QuasiRep, WordOracle, abelian_oracle, free_oracle, trivial_oracle
from .relative import StablyRelativeCocycle, build_cylinder
from .unitary import haar_unitary, random_skew, exp_skew

# ---------------------------------------------------------------------------
# complexes


def circle(n: int = 3, y=(0,)) -> SimplicialPair:
    edges = [tuple(sorted((i, (i + 1) % n))) for i in range(n)]
    return SimplicialPair.from_maximal(n, edges, y)


def filled_triangle() -> SimplicialPair:
    return SimplicialPair.from_maximal(3, [(0, 1, 2)], (0,))


def tetra_solid() -> SimplicialPair:
    return SimplicialPair.from_maximal(4, [(0, 1, 2, 3)], (0,))


def cone_over_polygon(n_rim: int = 6) -> SimplicialPair:
    """Disk pair: cone over an n-gon, Y = the rim circle."""
    apex = n_rim
    tris = [tuple(sorted((i, (i + 1) % n_rim, apex))) for i in range(n_rim)]
    return SimplicialPair.from_maximal(n_rim + 1, tris, range(n_rim))


def disk_pair() -> SimplicialPair:
    return cone_over_polygon(6)


def torus7() -> SimplicialPair:
    tris = [tuple(sorted((i, (i + 1) % 7, (i + 3) % 7))) for i in range(7)]
    tris += [tuple(sorted((i, (i + 2) % 7, (i + 3) % 7))) for i in range(7)]
    return SimplicialPair.from_maximal(7, tris, (0,))


def torus_grid(g: int = 3) -> SimplicialPair:
    def vid(i, j):
        return (i % g) * g + (j % g)

    tris = []
    for i in range(g):
        for j in range(g):
            tris.append(tuple(sorted((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)))))
            tris.append(tuple(sorted((vid(i, j), vid(i, j + 1), vid(i + 1, j + 1)))))
    return SimplicialPair.from_maximal(g * g, tris, (0,))


def annulus_pair(n: int = 6, both_boundaries: bool = False) -> SimplicialPair:
    """Triangulated annulus; Y is the outer rim (or both rims).

    The two-boundary variant inserts a middle ring so that the full
    subcomplex on the boundary vertices really is two disjoint circles.
    """
    rings = 3 if both_boundaries else 2
    tris = []
    for t in range(rings - 1):
        lo, hi = t * n, (t + 1) * n
        for i in range(n):
            j = (i + 1) % n
            tris.append(tuple(sorted((lo + i, lo + j, hi + i))))
            tris.append(tuple(sorted((lo + j, hi + i, hi + j))))
    y = list(range(n)) + (list(range((rings - 1) * n, rings * n)) if both_boundaries else [])
    return SimplicialPair.from_maximal(rings * n, tris, y)


def doubled_disk_base() -> SimplicialPair:
    return disk_pair()


# ---------------------------------------------------------------------------
# integer homology data (lattice classes of directed edges)


def _rep_mod(x: int, g: int) -> int:
    x %= g
    return x - g if x > g // 2 else x


def edge_vector_fn(family: str, pair: SimplicialPair):
    """Directed-edge lattice vectors for abelian families, or None."""
    if family in ("circle",):
        n = pair.n_vertices

        def vec(a, b):
            return (_rep_mod(b - a, n),)

        return vec
    if family == "annulus_one_boundary":
        n = pair.n_vertices // 2

        def vec(a, b):
            return (_rep_mod((b % n) - (a % n), n),)

        return vec
    if family == "torus7":

        table = {1: (1, 0), 2: (-1, 1), 3: (0, 1)}

        def vec(a, b):
            d = (b - a) % 7
            if d == 0:
                return (0, 0)
            if d in table:
                return table[d]
            x, y = table[7 - d]
            return (-x, -y)

        return vec
    if family.startswith("torus_grid"):
        g = int(round(pair.n_vertices**0.5))

        def vec(a, b):
            ai, aj = divmod(a, g)
            bi, bj = divmod(b, g)
            return (_rep_mod(bi - ai, g), _rep_mod(bj - aj, g))

        return vec
    return None


def generator_classes(tree: NerveTree, gens: GeneratorData, vec) -> dict:
    """Lattice class of each generator loop: path to a, the edge, back from b."""
    def path_vec(m):
        p = tree.paths[m]
        total = None
        for i in range(len(p) - 1):
            step = vec(p[i], p[i + 1])
            total = step if total is None else tuple(x + y for x, y in zip(total, step))
        return total if total is not None else (0,) * len(vec(0, 0))

    out = {}
    for a, b in gens.generators:
        ca, cb, e = path_vec(a), path_vec(b), vec(a, b)
        out[(a, b)] = tuple(x + y - z for x, y, z in zip(ca, e, cb))
    return out


def lattice_basis(classes: dict):
    """Two generator classes forming a basis of the lattice they span."""
    items = [(k, v) for k, v in classes.items() if any(v)]
    if not items:
        return None
    dim = len(items[0][1])
    if dim == 1:
        g = min(abs(v[0]) for _, v in items)
        key = next(k for k, v in items if abs(v[0]) == g)
        if all(v[0] % g == 0 for _, v in items):
            return (key,)
        return None
    best = None
    for i in range(len(items)):
        for j in range(len(items)):
            if i == j:
                continue
            det = items[i][1][0] * items[j][1][1] - items[i][1][1] * items[j][1][0]
            if det == 0:
                continue
            mat = np.array([items[i][1], items[j][1]], dtype=float).T
            inv = np.linalg.inv(mat)
            coords = [inv @ np.array(v, dtype=float) for _, v in items]
            if all(np.max(np.abs(c - np.rint(c))) < 1e-9 for c in coords):
                score = abs(det)
                if best is None or score < best[0]:
                    best = (score, (items[i][0], items[j][0]))
    return best[1] if best else None


def oracle_for(family: str, pair: SimplicialPair, tree: NerveTree, gens: GeneratorData) -> WordOracle:
    vec = edge_vector_fn(family, pair)
    if vec is None:
        if family in ("filled_triangle", "disk_pair", "tetra", "clutching_chern"):
            return trivial_oracle(gens.generators)
        return free_oracle(gens.generators)
    classes = generator_classes(tree, gens, vec)
    basis = lattice_basis(classes)
    if basis is None:
        return free_oracle(gens.generators)
    return abelian_oracle(gens.generators, classes, basis)


def y_oracle_for(family: str, pair: SimplicialPair, tree: NerveTree, gens: GeneratorData) -> WordOracle:
    """Oracle for the Y-generator subset (our Y's are circles or points)."""
    return free_oracle(gens.y_generators)


# ---------------------------------------------------------------------------
# flat backbones and jiggles


def commuting_unitaries(dim: int, rank: int, rng: np.random.Generator):
    """A tuple of commuting unitaries: common eigenbasis, random phases."""
    basis = haar_unitary(dim, rng) if dim else np.zeros((0, 0), complex)
    out = []
    for _ in range(rank):
        phases = np.exp(1j * rng.uniform(-np.pi, np.pi, size=dim))
        out.append(basis @ np.diag(phases) @ basis.conj().T)
    return tuple(out)


def flat_from_lattice(cover, dim: int, vec, images) -> CechCocycle:
    """Flat cocycle v_{a,b} = prod images[k]^{vec(a->b)[k]} (commuting images)."""
    powers: dict = {}

    def rho(z):
        key = tuple(z)
        if key not in powers:
            m = np.eye(dim, dtype=complex)
            for u, e in zip(images, z):
                if e:
                    step = u if e > 0 else u.conj().T
                    for _ in range(abs(e)):
                        m = m @ step
            powers[key] = m
        return powers[key]

    data = {}
    for (a, b), samples in cover.overlap_samples.items():
        val = rho(vec(a, b))
        for s in samples:
            data[(a, b, s)] = val
    return CechCocycle(cover, dim, data)


def flat_normalized(cover, tree: NerveTree, gens: GeneratorData, values: dict, dim: int) -> CechCocycle:
    """Flat cocycle with the given generator values and tree edges = 1.

    Only valid when the nerve has no 2-cells through non-tree edges with
    inconsistent values; used for circles, where no 2-cells exist.
    """
    data = {}
    for (a, b), samples in cover.overlap_samples.items():
        val = values.get((a, b), np.eye(dim, dtype=complex))
        for s in samples:
            data[(a, b, s)] = val
    return CechCocycle(cover, dim, data)


def gauge_field(cover, dim: int, rng: np.random.Generator) -> dict:
    """Unit-norm skew directions per (vertex, sample), for scalable jiggles."""
    field = {}
    for s in sorted(cover.pair.simplices):
        for v in s:
            field[(v, s)] = random_skew(dim, rng, 1.0)
    return field


def apply_gauge_field(v: CechCocycle, field: dict, scale: float) -> CechCocycle:
    """Per-sample gauge twist exp(scale * H) keeping sample-exactness."""
    if scale == 0.0:
        return v
    cache = {}

    def g(vertex, s):
        if (vertex, s) not in cache:
            cache[(vertex, s)] = exp_skew(scale * field[(vertex, s)])
        return cache[(vertex, s)]

    data = {}
    for (a, b), samples in v.cover.overlap_samples.items():
        for s in samples:
            data[(a, b, s)] = g(a, s) @ v.value(a, b, s) @ g(b, s).conj().T
    return CechCocycle(v.cover, v.dim, data)


def flat_backbone(family: str, cover, dim: int, rng: np.random.Generator) -> CechCocycle:
    vec = edge_vector_fn(family, cover.pair)
    if vec is None:
        return identity_cocycle(cover, dim)
    rank = len(vec(0, 0))
    images = commuting_unitaries(dim, rank, rng)
    return flat_from_lattice(cover, dim, vec, images)


def random_flat_cocycle(
    family: str, cover, dim: int, eps: float, seed: int
) -> CechCocycle:
    """Jiggled flat backbone with flatness of order eps (at most eps)."""
    rng = np.random.default_rng(seed)
    base = flat_backbone(family, cover, dim, rng)
    field = gauge_field(cover, dim, rng)
    return apply_gauge_field(base, field, eps / 4.0)


def random_relative_instance(
    family: str,
    cover,
    tree: NerveTree,
    dim: int,
    eps: float,
    seed: int,
    stab_dim: int = 0,
) -> StablyRelativeCocycle:
    """Random (eps, U)-flat stably relative cocycle over a named pair.

    v1 and v2 are independent jiggles of one flat backbone; u is a
    backbone-commuting constant morphism with a per-vertex jiggle, so the
    measured certificate is of order eps.
    """
    rng = np.random.default_rng(seed)
    base = flat_backbone(family, cover, dim, rng)
    f1 = gauge_field(cover, dim, rng)
    f2 = gauge_field(cover, dim, rng)
    v1 = apply_gauge_field(base, f1, eps / 4.0)
    v2 = apply_gauge_field(base, f2, eps / 4.0)
    if stab_dim:
        base0 = flat_backbone(family, cover, stab_dim, rng)
        f0 = gauge_field(cover, stab_dim, rng)
        v0_full = apply_gauge_field(base0, f0, eps / 4.0)
        from .relative import restrict_to_y

        v0 = restrict_to_y(v0_full)
    else:
        v0 = identity_cocycle(cover, 0)

    n_total = dim + stab_dim
    units = {}
    for mu in cover.i_y:
        units[mu] = exp_skew(random_skew(n_total, rng, eps / 4.0))
    return StablyRelativeCocycle(v1, v2, v0, Morphism(n_total, units))


def random_quasi_rep(
    family: str,
    pair: SimplicialPair,
    tree: NerveTree,
    gens: GeneratorData,
    dim: int,
    eps: float,
    seed: int,
) -> QuasiRep:
    """Genuine representation values jiggled by eps-scaled unitaries."""
    rng = np.random.default_rng(seed)
    vec = edge_vector_fn(family, pair)
    values = {}
    if vec is None:
        base = {g: np.eye(dim, dtype=complex) for g in gens.generators}
    else:
        classes = generator_classes(tree, gens, vec)
        basis = lattice_basis(classes)
        images = commuting_unitaries(dim, len(basis or ()), rng)
        if basis is None:
            base = {g: np.eye(dim, dtype=complex) for g in gens.generators}
        else:
            mat = np.array([classes[b] for b in basis], dtype=float).T
            inv = np.linalg.inv(mat)
            coords = {
                g: tuple(int(round(x)) for x in inv @ np.array(classes[g], dtype=float))
                for g in gens.generators
            }
            base = rep_from_classes(dim, coords, images).gen_values
    for g in gens.generators:
        values[g] = base[g] @ exp_skew(random_skew(dim, rng, eps / 2.0))
    return QuasiRep(dim, values)


def random_relative_rep(
    family: str,
    pair: SimplicialPair,
    tree: NerveTree,
    gens: GeneratorData,
    dim: int,
    eps: float,
    seed: int,
    stab_dim: int = 0,
):
    """Random stably relative quasi-representation over a named pair.

    pi1 and pi2 jiggle one genuine representation, pi0 jiggles a genuine
    representation of the Y-generators, and u is an eps-jiggled identity,
    so every measured defect is of order eps.
    """
    from .quasireps import StablyRelativeQuasiRep

    rng = np.random.default_rng(seed)
    pi1 = random_quasi_rep(family, pair, tree, gens, dim, eps, seed + 1)
    pi2 = random_quasi_rep(family, pair, tree, gens, dim, eps, seed + 2)
    if stab_dim:
        rng0 = np.random.default_rng(seed + 3)
        hol = commuting_unitaries(stab_dim, 1, rng0)[0]
        vals = {}
        for g in gens.y_generators:
            vals[g] = hol @ exp_skew(random_skew(stab_dim, rng0, eps / 2.0))
        pi0 = QuasiRep(stab_dim, vals)
    else:
        pi0 = QuasiRep(0, {})
    u = exp_skew(random_skew(dim + stab_dim, rng, eps / 2.0))
    return StablyRelativeQuasiRep(pi1, pi2, pi0, u)


# ---------------------------------------------------------------------------
# named special instances


def clutching_chern(k: int, n_rim: int = 6):
    """Disk-pair relative cocycle whose boundary winding is k.

    Scalar sides equal to 1 and u_j = exp(2 pi i k j / n) around the rim;
    needs |k| < n/2 so each jump stays under half a turn.
    """
    if abs(k) * 2 >= n_rim:
        raise UnknownFamily(f"winding {k} too large for a {n_rim}-gon rim")
    pair = cone_over_polygon(n_rim)
    cover = build_star_cover(pair)
    units = {
        j: np.array([[np.exp(2.0j * np.pi * k * j / n_rim)]], dtype=complex)
        for j in range(n_rim)
    }
    f = StablyRelativeCocycle(
        identity_cocycle(cover, 1),
        identity_cocycle(cover, 1),
        identity_cocycle(cover, 0),
        Morphism(1, units),
    )
    return pair, cover, f


def boundary_winding_oracle(f: StablyRelativeCocycle) -> int:
    """Brute-force winding count of det(u) around the boundary circle(s)."""
    from .complexes import boundary_loops, orient_surface

    _, boundary = orient_surface(f.cover.pair)
    total = 0.0
    for mu, nu in boundary:
        d1 = np.linalg.det(f.u.value(mu))
        d2 = np.linalg.det(f.u.value(nu))
        total += np.angle(d2 / d1)
    return round(total / (2 * np.pi))


def clock_and_shift(d: int):
    omega = np.exp(2j * np.pi / d)
    clock = np.diag(omega ** np.arange(d))
    shift = np.zeros((d, d), dtype=complex)
    for j in range(d):
        shift[(j + 1) % d, j] = 1.0
    return clock, shift


def almost_commuting(d: int):
    """Clock-and-shift quasi-representation of Z^2 on two generators."""
    clock, shift = clock_and_shift(d)
    pi = QuasiRep(d, {"a": clock, "b": shift})
    oracle = abelian_oracle(("a", "b"), {"a": (1, 0), "b": (0, 1)}, ("a", "b"))
    return pi, oracle


def rep_from_classes(dim: int, classes: dict, images) -> QuasiRep:
    """Generator values prod images^coords for lattice-classed generators."""
    values = {}
    for sym, z in classes.items():
        m = np.eye(dim, dtype=complex)
        for u, e in zip(images, z):
            if e:
                step = u if e > 0 else u.conj().T
                for _ in range(abs(e)):
                    m = m @ step
        values[sym] = m
    return QuasiRep(dim, values)


def amalgam_oracle(family: str, pair: SimplicialPair, tree: NerveTree, gens: GeneratorData) -> WordOracle:
    """Oracle for the glued group of the double of a named pair.

    Symbols are (side, generator).  For pairs whose groups are trivial the
    glued group is trivial; for the annulus with one boundary circle both
    sides are infinite cyclic glued along an isomorphism, so words reduce
    by total winding spelled in a side-1 basis generator.
    """
    symbols = tuple((i, e) for i in (1, 2) for e in gens.generators)
    vec = edge_vector_fn(family, pair)
    if vec is None:
        return trivial_oracle(symbols)
    classes = generator_classes(tree, gens, vec)
    if len(next(iter(classes.values()))) != 1:
        raise UnknownFamily("amalgam oracle only provided for cyclic families")
    both = {(i, e): classes[e] for i in (1, 2) for e in gens.generators}
    basis_edge = lattice_basis(classes)
    if basis_edge is None:
        return trivial_oracle(symbols)
    return abelian_oracle(symbols, both, ((1, basis_edge[0]),))


def cover2_circle():
    """Connected 2-sheet cover of the 3-circle by the 6-circle."""
    base = circle(3)
    total = circle(6)
    proj = tuple(v % 3 for v in range(6))
    return FiniteCovering(total, base, proj, 2)


def scalar_plaquette_connection(pair: SimplicialPair, theta: float) -> DiscreteConnection:
    """Scalar connection on a grid torus with uniform triangle curvature.

    The diagonal edges carry exp(i theta); both triangles of each square
    then have holonomy exp(-+ i theta), so the curvature defect is exactly
    |exp(i theta) - 1| while the net flux still cancels on the torus.
    """
    g = int(round(pair.n_vertices**0.5))
    units = {}
    for a, b in pair.edges:
        ai, aj = divmod(a, g)
        bi, bj = divmod(b, g)
        diagonal = (bi - ai) % g in (1, g - 1) and (bj - aj) % g in (1, g - 1)
        if diagonal:
            units[(a, b)] = np.array([[np.exp(1j * theta)]], dtype=complex)
        else:
            units[(a, b)] = np.eye(1, dtype=complex)
    return DiscreteConnection(1, units)


# ---------------------------------------------------------------------------
# registry


PAIR_BUILDERS = {
    "circle": circle,
    "filled_triangle": filled_triangle,
    "torus7": torus7,
    "torus_grid": torus_grid,
    "disk_pair": disk_pair,
    "annulus_one_boundary": annulus_pair,
    "tetra": tetra_solid,
}


def build_family(family: str, **params):
    """(pair, cover, tree, gens, oracle) for a named complex family."""
    if family == "doubled_disk":
        from .constructions import build_double

        dc = build_double(disk_pair())
        pair, cover = dc.pair, dc.cover
    elif family in PAIR_BUILDERS:
        pair = PAIR_BUILDERS[family](**params)
        cover = build_star_cover(pair)
    else:
        raise UnknownFamily(f"unknown family {family!r}")
    tree = NerveTree.build(cover)
    gens = generators(tree)
    oracle = oracle_for(family, pair, tree, gens)
    return pair, cover, tree, gens, oracle
