"""Stably relative cocycles: quadruples (v1, v2, v0, u) on a pair (X, Y).

v1 and v2 live on all of X with a common fiber dimension n; v0 is a
Y-supported cocycle of dimension m (possibly 0) and u is a morphism on
the cover sets meeting Y, valued in U(n+m), approximately conjugating
v1|_Y + v0 onto v2|_Y + v0.  The m = 0 case is a relative cocycle.

The surface-level K-class readout is the relative first Chern number:
determinant angle sums over coherently oriented 2-cells (v1 minus v2)
plus the winding of the stabilized boundary comparison loop built from u
and v0.  The result must round to an integer with small residue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .complexes import (
    NerveTree,
    SimplicialPair,
    StarCover,
    boundary_loops,
    orient_surface,
    prism_simplices,
)
from .cocycles import (
    CechCocycle,
    ExactIntertwiner,
    Morphism,
    cocycle_distance,
    flatness,
    gauge_constant,
    gauge_correct,
    hom_defect,
    identity_cocycle,
    identity_morphism,
    morphism_distance,
    unitary_act,
    y_flatness,
)
from .errors import (
    ComplexMismatch,
    DimMismatch,
    ClassUnresolved,
    EpsilonTooLarge,
    NotCylinder,
    NotIntertwiner,
    NotKillable,
    NotSurface,
)
from .policy import DEFAULT_POLICY, NumericPolicy
from .unitary import exp_skew, op_norm, principal_log_unitary

__all__ = [
    "StablyRelativeCocycle",
    "FlatnessCertificate",
    "SurfaceKClass",
    "measure",
    "direct_sum",
    "inverse",
    "k_class",
    "move_collapse",
    "move_kill",
    "homotopy_path",
    "CylinderComplex",
    "build_cylinder",
    "cylinder_flatten",
    "restrict_to_y",
    "stabilized",
    "dist_bundle",
]


def _eye(n):
    return np.eye(n, dtype=complex)


def _blockdiag(a, b):
    n, m = a.shape[0], b.shape[0]
    out = np.zeros((n + m, n + m), dtype=complex)
    out[:n, :n] = a
    out[n:, n:] = b
    return out


@dataclass(frozen=True)
class StablyRelativeCocycle:
    v1: CechCocycle
    v2: CechCocycle
    v0: CechCocycle  # Y-supported, dimension m (0 allowed)
    u: Morphism  # on I_Y, dimension n + m

    def __post_init__(self):
        if self.v1.dim != self.v2.dim:
            raise DimMismatch("v1 and v2 must share a fiber dimension")
        if self.u.dim != self.v1.dim + self.v0.dim:
            raise DimMismatch("morphism must act on the stabilized fiber")

    @property
    def cover(self) -> StarCover:
        return self.v1.cover

    @property
    def dims(self) -> tuple[int, int]:
        return self.v1.dim, self.v0.dim


@dataclass(frozen=True)
class FlatnessCertificate:
    eps_v1: float
    eps_v2: float
    eps_v0: float
    eps_u: float

    @property
    def overall(self) -> float:
        return max(self.eps_v1, self.eps_v2, self.eps_v0, self.eps_u)


@dataclass(frozen=True)
class SurfaceKClass:
    relative_chern: int
    residue: float


def restrict_to_y(v: CechCocycle) -> CechCocycle:
    """Keep only the entries over Y-edges at Y-samples."""
    cov = v.cover
    ys = cov.pair.y_simplices
    data = {k: m for k, m in v.data.items() if k[2] in ys}
    return CechCocycle(cov, v.dim, data)


def stabilized(v: CechCocycle, v0: CechCocycle) -> CechCocycle:
    """Y-supported direct sum (v|_Y) + v0 with fiber n + m."""
    cov = v.cover
    data = {}
    for a, b in cov.y_nerve_edges:
        for s in cov.y_samples(a, b):
            data[(a, b, s)] = _blockdiag(v.value(a, b, s), v0.value(a, b, s))
    return CechCocycle(cov, v.dim + v0.dim, data)


def measure(f: StablyRelativeCocycle) -> FlatnessCertificate:
    s1, s2 = stabilized(f.v1, f.v0), stabilized(f.v2, f.v0)
    return FlatnessCertificate(
        eps_v1=flatness(f.v1),
        eps_v2=flatness(f.v2),
        eps_v0=y_flatness(f.v0),
        eps_u=hom_defect(s1, s2, f.u, y_only=True),
    )


# ---------------------------------------------------------------------------
# monoid structure


def _interleave(n, m, np_, mp_):
    """Permutation taking [P, Q, P', Q'] coordinates to [P+P', Q+Q']."""
    src = list(range(n)) + list(range(n + m, n + m + np_))
    src += list(range(n, n + m)) + list(range(n + m + np_, n + m + np_ + mp_))
    p = np.zeros((len(src), len(src)))
    for row, col in enumerate(src):
        p[row, col] = 1.0
    return p


def direct_sum(f: StablyRelativeCocycle, g: StablyRelativeCocycle) -> StablyRelativeCocycle:
    if f.cover.pair != g.cover.pair:
        raise ComplexMismatch("summands live on different pairs")
    cov = f.cover
    n, m = f.dims
    np_, mp_ = g.dims

    def sum_cocycle(a: CechCocycle, b: CechCocycle, y_only: bool) -> CechCocycle:
        data = {}
        edges = cov.y_nerve_edges if y_only else cov.nerve_edges
        for e in edges:
            samples = cov.y_samples(*e) if y_only else cov.samples(*e)
            for s in samples:
                data[(e[0], e[1], s)] = _blockdiag(a.value(*e, s), b.value(*e, s))
        return CechCocycle(cov, a.dim + b.dim, data)

    perm = _interleave(n, m, np_, mp_)
    units = {
        mu: perm @ _blockdiag(f.u.value(mu), g.u.value(mu)) @ perm.T
        for mu in cov.i_y
    }
    return StablyRelativeCocycle(
        sum_cocycle(f.v1, g.v1, False),
        sum_cocycle(f.v2, g.v2, False),
        sum_cocycle(f.v0, g.v0, True),
        Morphism(n + np_ + m + mp_, units),
    )


def inverse(f: StablyRelativeCocycle) -> StablyRelativeCocycle:
    return StablyRelativeCocycle(f.v2, f.v1, f.v0, f.u.adjoint())


def triple_act(
    u1: Morphism, u2: Morphism, u0: Morphism, f: StablyRelativeCocycle
) -> StablyRelativeCocycle:
    """Unitary equivalence of quadruples: act on each component and
    transport the morphism by diag(u2, u0) u diag(u1, u0)*."""
    units = {}
    for mu in f.cover.i_y:
        src = _blockdiag(u1.value(mu), u0.value(mu))
        dst = _blockdiag(u2.value(mu), u0.value(mu))
        units[mu] = dst @ f.u.value(mu) @ src.conj().T
    return StablyRelativeCocycle(
        unitary_act(u1, f.v1),
        unitary_act(u2, f.v2),
        unitary_act_y(u0, f.v0),
        Morphism(f.u.dim, units),
    )


def unitary_act_y(u: Morphism, v0: CechCocycle) -> CechCocycle:
    """unitary_act for a Y-supported cocycle (touches Y-entries only)."""
    cov = v0.cover
    data = {}
    for a, b in cov.y_nerve_edges:
        ua, ub = u.value(a), u.value(b).conj().T
        for s in cov.y_samples(a, b):
            data[(a, b, s)] = ua @ v0.value(a, b, s) @ ub
    return CechCocycle(cov, v0.dim, data)


def normalize_tree_y(v0: CechCocycle, tree: NerveTree) -> tuple[Morphism, CechCocycle]:
    """normalize_tree for a Y-supported cocycle over the Y-part of the tree."""
    cov = v0.cover
    units = {}
    base = tree.basepoint
    if base in cov.i_y:
        units[base] = _eye(v0.dim)
    order = sorted(cov.i_y, key=lambda m: len(tree.paths[m]))
    for m in order:
        if m in units:
            continue
        p = tree.parent.get(m)
        if p in units and (min(m, p), max(m, p)) in tree.tree_edges:
            units[m] = units[p] @ v0.value(m, p, tree.x_sample(m, p)).conj().T
        else:
            units[m] = _eye(v0.dim)
    u = Morphism(v0.dim, units)
    return u, unitary_act_y(u, v0)


def normalize_relative(
    f: StablyRelativeCocycle, tree: NerveTree
) -> tuple[tuple[Morphism, Morphism, Morphism], StablyRelativeCocycle]:
    """Componentwise tree normalization of a quadruple."""
    from .cocycles import normalize_tree

    u1, v1 = normalize_tree(f.v1, tree)
    u2, v2 = normalize_tree(f.v2, tree)
    u0, v0 = normalize_tree_y(f.v0, tree)
    g = triple_act(u1, u2, u0, f)
    return (u1, u2, u0), StablyRelativeCocycle(v1, v2, v0, g.u)


def dist_bundle(f: StablyRelativeCocycle, g: StablyRelativeCocycle) -> float:
    return max(
        cocycle_distance(f.v1, g.v1),
        cocycle_distance(f.v2, g.v2),
        cocycle_distance(f.v0, g.v0, y_only=True),
        morphism_distance(f.u, g.u, f.cover.i_y),
    )


# ---------------------------------------------------------------------------
# K-class readout on oriented surfaces


def _eig_arg_sum(m: np.ndarray) -> float:
    """Sum of principal arguments of the eigenvalues of a unitary."""
    if m.shape[0] == 0:
        return 0.0
    return float(np.sum(np.angle(np.linalg.eigvals(m))))


def _round_class(total: float, residue_tol: float) -> SurfaceKClass:
    value = total / (2.0 * math.pi)
    k = round(value)
    residue = abs(value - k)
    if residue >= residue_tol:
        raise ClassUnresolved(f"winding residue {residue:.3f} too large for a class readout")
    return SurfaceKClass(int(k), residue)


def k_class(
    f: StablyRelativeCocycle,
    tree: NerveTree,
    residue_tol: float = 0.1,
) -> SurfaceKClass:
    """Relative first Chern number of a quadruple on an oriented 2-pair.

    Interior part: determinant angle sums of v1 minus v2 over coherently
    oriented 2-cells, one angle branch fixed per sorted edge.  Boundary
    part: each induced boundary edge mu -> nu contributes the eigenvalue
    angle sum of u_nu (v1 + v0)_{nu,mu}(x) u_mu* ((v2 + v0)_{nu,mu}(x))*,
    the discrete winding of the stabilized comparison loop, minus the
    very branch angles the adjacent cell already added for this edge.
    That subtraction makes the total independent of every per-edge branch
    choice, hence exactly invariant under unitary equivalence of the
    quadruple.  The total must land within ``residue_tol`` of an integer
    multiple of 2 pi.
    """
    cov = f.cover
    pair = cov.pair
    if pair.dimension != 2:
        raise NotSurface("K-class readout needs a 2-dimensional pair")
    orientation, boundary = orient_surface(pair)
    boundary_loops(boundary)  # validates the boundary is a union of loops

    branch: dict = {}

    def arg_det(v: CechCocycle, which: int, a: int, b: int) -> float:
        key = (which, min(a, b), max(a, b))
        if key not in branch:
            lo, hi = key[1], key[2]
            branch[key] = float(
                np.angle(np.linalg.det(v.value(lo, hi, tree.x_sample(lo, hi))))
            )
        return branch[key] if a < b else -branch[key]

    total = 0.0
    if f.v1.dim:
        for (a, b, c), sgn in orientation.items():
            w1 = arg_det(f.v1, 1, a, b) + arg_det(f.v1, 1, b, c) + arg_det(f.v1, 1, c, a)
            w2 = arg_det(f.v2, 2, a, b) + arg_det(f.v2, 2, b, c) + arg_det(f.v2, 2, c, a)
            total += sgn * (w1 - w2)

    for mu, nu in boundary:
        x = tree.x_sample(mu, nu)
        w1 = _blockdiag(f.v1.value(nu, mu, x), f.v0.value(nu, mu, x))
        w2 = _blockdiag(f.v2.value(nu, mu, x), f.v0.value(nu, mu, x))
        m = f.u.value(nu) @ w1 @ f.u.value(mu).conj().T @ w2.conj().T
        total += _eig_arg_sum(m)
        if f.v1.dim:
            total -= arg_det(f.v1, 1, mu, nu) - arg_det(f.v2, 2, mu, nu)

    return _round_class(total, residue_tol)


# ---------------------------------------------------------------------------
# equivalence moves


def move_collapse(
    f: StablyRelativeCocycle,
    w: ExactIntertwiner,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> StablyRelativeCocycle:
    """Collapse a globally isomorphic pair: (v1,v2,v0,u) ~ (0,0,v1|_Y+v0,(w|_Y+1)*u)."""
    if w.residual(f.v1, f.v2) > policy.intertwiner_tol:
        raise NotIntertwiner("w does not conjugate v1 to v2 exactly")
    cov = f.cover
    n, m = f.dims
    v0_new = stabilized(f.v1, f.v0)  # v1|_Y + v0, Y-supported
    units = {}
    for mu in cov.i_y:
        w_mu = w.value(mu, (mu,))
        units[mu] = _blockdiag(w_mu, _eye(m)).conj().T @ f.u.value(mu)
    zero = identity_cocycle(cov, 0)
    return StablyRelativeCocycle(zero, zero, v0_new, Morphism(n + m, units))


def move_kill(
    f: StablyRelativeCocycle, policy: NumericPolicy = DEFAULT_POLICY
) -> StablyRelativeCocycle:
    """(0, 0, v0, 1) ~ 0; anything else refuses to die."""
    if f.v1.dim != 0:
        raise NotKillable("X-rank must be zero")
    worst = max(
        (op_norm(f.u.value(mu) - _eye(f.u.dim)) for mu in f.cover.i_y), default=0.0
    )
    if worst > 1e-10:
        raise NotKillable(f"morphism is {worst:.3e} away from the identity")
    zero = identity_cocycle(f.cover, 0)
    return StablyRelativeCocycle(zero, zero, zero, Morphism(0, {}))


# ---------------------------------------------------------------------------
# homotopy


def homotopy_path(
    f: StablyRelativeCocycle,
    g: StablyRelativeCocycle,
    policy: NumericPolicy = DEFAULT_POLICY,
):
    """Path s -> quadruple joining f and g when they are close.

    Componentwise: an exact intertwiner from each component of f to the
    matching component of g is gauge-corrected from the identity, and the
    path conjugates by exp(s log ubar); the morphism part interpolates
    u_mu exp(s log(u_mu* u'_mu)).  Members stay within (4 C1 + 1) eps.
    """
    eps = dist_bundle(f, g)
    c1 = gauge_constant(f.cover)
    if eps >= 1.0 / (3.0 * c1):
        raise EpsilonTooLarge(f"distance {eps:.3e} too large for a controlled homotopy")

    def corrected(a: CechCocycle, b: CechCocycle, y_only: bool):
        if a.dim == 0:
            return None
        ident = identity_morphism(a.dim)
        return gauge_correct(a, b, ident, y_only=y_only, policy=policy)

    bars = (
        corrected(f.v1, g.v1, False),
        corrected(f.v2, g.v2, False),
        corrected(f.v0, g.v0, True),
    )
    logs_bar = []
    for bar in bars:
        logs_bar.append(
            None
            if bar is None
            else {key: principal_log_unitary(val, policy) for key, val in bar.units.items()}
        )
    logs_u = {
        mu: principal_log_unitary(
            f.u.value(mu).conj().T @ g.u.value(mu), policy
        )
        for mu in f.cover.i_y
    }

    def act_partial(v: CechCocycle, logs, s: float, y_only: bool) -> CechCocycle:
        if logs is None:
            return v
        cov = v.cover
        data = {}
        edges = cov.y_nerve_edges if y_only else cov.nerve_edges
        for a, b in edges:
            samples = cov.y_samples(a, b) if y_only else cov.samples(a, b)
            for x in samples:
                ua = exp_skew(s * logs[(a, x)], policy)
                ub = exp_skew(s * logs[(b, x)], policy)
                data[(a, b, x)] = ua @ v.value(a, b, x) @ ub.conj().T
        return CechCocycle(cov, v.dim, data)

    def member(s: float) -> StablyRelativeCocycle:
        units = {
            mu: f.u.value(mu) @ exp_skew(s * logs_u[mu], policy) for mu in f.cover.i_y
        }
        return StablyRelativeCocycle(
            act_partial(f.v1, logs_bar[0], s, False),
            act_partial(f.v2, logs_bar[1], s, False),
            act_partial(f.v0, logs_bar[2], s, True),
            Morphism(f.u.dim, units),
        )

    return member


# ---------------------------------------------------------------------------
# cylinders


@dataclass(frozen=True)
class CylinderComplex:
    """Simplicial model of X with k collar layers stacked on Y.

    Layer 0 is Y inside X; layer l >= 1 vertex ids come in blocks after
    the X vertices, ordered by the sorted Y-vertex list, so prisms come
    out sorted.  The boundary of the extended pair is the top layer.
    """

    base: SimplicialPair
    k: int
    pair: SimplicialPair
    cover: StarCover

    @property
    def y_sorted(self) -> list:
        return sorted(self.base.y_vertices)

    def layer_vertex(self, y: int, layer: int) -> int:
        if layer == 0:
            return y
        rank = self.y_sorted.index(y)
        return self.base.n_vertices + (layer - 1) * len(self.y_sorted) + rank

    def layer_simplex(self, s, layer: int):
        return tuple(sorted(self.layer_vertex(v, layer) for v in s))

    def vertical_edge(self, y: int, layer: int):
        a, b = self.layer_vertex(y, layer), self.layer_vertex(y, layer + 1)
        return (a, b)


def build_cylinder(base: SimplicialPair, k: int) -> CylinderComplex:
    if not base.y_vertices:
        raise NotCylinder("cylinder needs a nonempty boundary subcomplex")
    if k < 1:
        raise NotCylinder("need at least one layer")
    ys = sorted(base.y_vertices)
    n = base.n_vertices

    def lv(layer):
        return lambda v: v if layer == 0 else n + (layer - 1) * len(ys) + ys.index(v)

    maximal = set(base.simplices)
    y_simp = [s for s in base.y_simplices]
    for layer in range(k):
        maximal |= prism_simplices(y_simp, lv(layer), lv(layer + 1))
    top = frozenset(lv(k)(v) for v in ys)
    pair = SimplicialPair.from_maximal(n + k * len(ys), maximal, top)
    from .complexes import build_star_cover

    return CylinderComplex(base, k, pair, build_star_cover(pair))


def cylinder_flatten(
    v: CechCocycle,
    w: CechCocycle,
    u: Morphism,
    cyl: CylinderComplex,
    base_cover: StarCover,
) -> StablyRelativeCocycle:
    """Flatten a relative cocycle on the collar extension onto (X, Y).

    The two X-restrictions keep their values; the stabilizer collects the
    2k collar slice restrictions v_1 .. v_k, w_k .. w_1, and the morphism
    is the cyclic block shift through the slice comparison unitaries
    u_{l,mu} = v_{(mu,l+1),(mu,l)}(x_{mu,l}) (vertical edge values), the
    given u at the top, and the mirrored w-values on the way back down.
    """
    if v.cover.pair != cyl.pair or w.cover.pair != cyl.pair:
        raise NotCylinder("inputs do not live on the cylinder cover")
    if base_cover.pair != cyl.base:
        raise NotCylinder("base cover does not match the cylinder base")
    if v.dim != w.dim or u.dim != v.dim:
        raise DimMismatch("cylinder inputs must share one fiber dimension")
    n, k = v.dim, cyl.k

    def x_restrict(c: CechCocycle) -> CechCocycle:
        data = {}
        for (a, b), samples in base_cover.overlap_samples.items():
            for s in samples:
                data[(a, b, s)] = c.value(a, b, s)
        return CechCocycle(base_cover, n, data)

    def slice_restrict(c: CechCocycle, layer: int) -> CechCocycle:
        data = {}
        for a, b in base_cover.y_nerve_edges:
            for s in base_cover.y_samples(a, b):
                la, lb = cyl.layer_vertex(a, layer), cyl.layer_vertex(b, layer)
                data[(a, b, s)] = c.value(la, lb, cyl.layer_simplex(s, layer))
        return CechCocycle(base_cover, n, data)

    slices = [slice_restrict(v, l) for l in range(1, k + 1)]
    slices += [slice_restrict(w, l) for l in range(k, 0, -1)]

    def chain_unit(level: int, mu: int) -> np.ndarray:
        if level < k:
            a, b = cyl.vertical_edge(mu, level)
            return v.value(b, a, (a, b))
        if level == k:
            return u.value(cyl.layer_vertex(mu, k))
        lw = 2 * k - level
        a, b = cyl.vertical_edge(mu, lw)
        return w.value(a, b, (a, b))

    units = {}
    for mu in base_cover.i_y:
        big = np.zeros((n * (2 * k + 1), n * (2 * k + 1)), dtype=complex)
        # block rows/cols: 0 = the X-fiber slot, 1..2k = the slices
        big[0:n, 2 * k * n :] = chain_unit(2 * k, mu)
        for level in range(2 * k):
            r = (level + 1) * n
            big[r : r + n, level * n : (level + 1) * n] = chain_unit(level, mu)
        units[mu] = big

    v0_data = {}
    for a, b in base_cover.y_nerve_edges:
        for s in base_cover.y_samples(a, b):
            blocks = [sl.value(a, b, s) for sl in slices]
            out = np.zeros((2 * k * n, 2 * k * n), dtype=complex)
            for i, blk in enumerate(blocks):
                out[i * n : (i + 1) * n, i * n : (i + 1) * n] = blk
            v0_data[(a, b, s)] = out
    v0 = CechCocycle(base_cover, 2 * k * n, v0_data)

    return StablyRelativeCocycle(
        x_restrict(v), x_restrict(w), v0, Morphism(n * (2 * k + 1), units)
    )
