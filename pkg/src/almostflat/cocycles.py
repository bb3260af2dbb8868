"""Unitary Cech cocycles on star covers and their gauge operations.

A cocycle stores one unitary per (ordered cover-set pair, sample point);
only keys with mu < nu are kept, the rest follow from v_{nu,mu} = v_{mu,nu}*
and v_{mu,mu} = 1.  Missing entries default to the identity.  The cocycle
identity v_{mu,nu} v_{nu,sigma} = v_{mu,sigma} holds exactly (to float
tolerance) at every sample point; flatness is the only quantity allowed
to be merely small.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .complexes import (
    NerveTree,
    SimplicialPair,
    StarCover,
    fill_table,
    max_fill_count,
)
from .errors import (
    CannotExtend,
    DimMismatch,
    EpsilonTooLarge,
    NotFillable,
    NotIntertwiner,
    NotSimplicial,
    SingularPolar,
)
from .policy import DEFAULT_POLICY, NumericPolicy
from .unitary import exp_skew, op_norm, polar_isometry, principal_log_unitary

__all__ = [
    "CechCocycle",
    "PartitionRoot",
    "Morphism",
    "ExactIntertwiner",
    "Frame",
    "identity_cocycle",
    "identity_morphism",
    "flatness",
    "y_flatness",
    "triangle_defect",
    "hom_defect",
    "frame",
    "unitary_act",
    "normalize_tree",
    "trivialize_simply_connected",
    "gauge_correct",
    "gauge_homotopy",
    "polar_round",
    "subcover_restrict",
    "extend_subcover",
    "extend_morphism",
    "pullback",
    "cocycle_distance",
    "morphism_distance",
]


def _eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex)


@dataclass(frozen=True)
class CechCocycle:
    cover: StarCover
    dim: int
    data: dict = field(hash=False)  # (mu, nu, sample) with mu < nu -> unitary

    def value(self, mu: int, nu: int, sample) -> np.ndarray:
        if mu == nu:
            return _eye(self.dim)
        if mu < nu:
            v = self.data.get((mu, nu, sample))
            return _eye(self.dim) if v is None else v
        v = self.data.get((nu, mu, sample))
        return _eye(self.dim) if v is None else v.conj().T

    def map_values(self, fn) -> "CechCocycle":
        return CechCocycle(
            self.cover,
            self.dim,
            {(a, b, s): fn(a, b, s, v) for (a, b, s), v in self.data.items()},
        )

    def validate(self, policy: NumericPolicy = DEFAULT_POLICY, y_only: bool = False) -> float:
        """Max unitarity / cocycle-identity residual over all samples."""
        worst = 0.0
        eye = _eye(self.dim)
        simplices = self.cover.pair.y_simplices if y_only else self.cover.pair.simplices
        for s in simplices:
            vals = {(a, b): self.value(a, b, s) for a, b in itertools.combinations(s, 2)}
            for (a, b), v in vals.items():
                worst = max(worst, op_norm(v.conj().T @ v - eye))
            for a, b, c in itertools.combinations(s, 3):
                worst = max(worst, op_norm(vals[(a, b)] @ vals[(b, c)] - vals[(a, c)]))
        return worst


def identity_cocycle(cover: StarCover, dim: int) -> CechCocycle:
    return CechCocycle(cover, dim, {})


@dataclass(frozen=True)
class PartitionRoot:
    """Square root of a partition of unity subordinate to the star cover.

    The default weights give eta_mu(x)^2 = 1/(k+1) on the k-simplex sample
    x, i.e. barycentric weights; custom positive vertex weights are
    renormalized per sample so that sum_mu eta_mu(x)^2 = 1 always holds.
    """

    weights: dict | None = None

    def eta(self, mu: int, sample) -> float:
        if mu not in sample:
            return 0.0
        if self.weights is None:
            return (1.0 / len(sample)) ** 0.5
        total = sum(self.weights.get(v, 1.0) for v in sample)
        return (self.weights.get(mu, 1.0) / total) ** 0.5


@dataclass(frozen=True)
class Morphism:
    """Family of unitaries u_mu, one per cover set it is defined on."""

    dim: int
    units: dict = field(hash=False)  # mu -> unitary

    def value(self, mu: int) -> np.ndarray:
        u = self.units.get(mu)
        return _eye(self.dim) if u is None else u

    def adjoint(self) -> "Morphism":
        return Morphism(self.dim, {m: u.conj().T for m, u in self.units.items()})


def identity_morphism(dim: int) -> Morphism:
    return Morphism(dim, {})


@dataclass(frozen=True)
class ExactIntertwiner:
    """Per-sample unitaries conjugating one cocycle exactly onto another."""

    dim: int
    units: dict = field(hash=False)  # (mu, sample) -> unitary

    def value(self, mu: int, sample) -> np.ndarray:
        u = self.units.get((mu, sample))
        return _eye(self.dim) if u is None else u

    def residual(self, v1: CechCocycle, v2: CechCocycle, y_only: bool = False) -> float:
        worst = 0.0
        for (a, b), samples in v1.cover.overlap_samples.items():
            for s in samples:
                if y_only and s not in v1.cover.pair.y_simplices:
                    continue
                lhs = self.value(a, s) @ v1.value(a, b, s) @ self.value(b, s).conj().T
                worst = max(worst, op_norm(lhs - v2.value(a, b, s)))
        return worst

    def distance_to(self, u: Morphism) -> float:
        return max(
            (op_norm(ub - u.value(mu)) for (mu, _), ub in self.units.items()),
            default=0.0,
        )


# ---------------------------------------------------------------------------
# measurements


def flatness(v: CechCocycle) -> float:
    """Max variation of one transition unitary across its overlap samples."""
    worst = 0.0
    for (a, b), samples in v.cover.overlap_samples.items():
        vals = [v.value(a, b, s) for s in samples]
        for i in range(len(vals)):
            for j in range(i + 1, len(vals)):
                worst = max(worst, op_norm(vals[i] - vals[j]))
    return worst


def y_flatness(v: CechCocycle) -> float:
    worst = 0.0
    cov = v.cover
    for a, b in cov.y_nerve_edges:
        vals = [v.value(a, b, s) for s in cov.y_samples(a, b)]
        for i in range(len(vals)):
            for j in range(i + 1, len(vals)):
                worst = max(worst, op_norm(vals[i] - vals[j]))
    return worst


def triangle_defect(v: CechCocycle, tree: NerveTree) -> float:
    """Multiplicativity defect at the chosen points x_{mu,nu}, over 2-cells."""
    worst = 0.0
    for a, b, c in v.cover.nerve_triangles:
        lhs = v.value(a, b, tree.x_sample(a, b)) @ v.value(b, c, tree.x_sample(b, c))
        worst = max(worst, op_norm(lhs - v.value(a, c, tree.x_sample(a, c))))
    return worst


def hom_defect(v1: CechCocycle, v2: CechCocycle, u: Morphism, y_only: bool = False) -> float:
    """sup over overlap samples of ||u_mu v1_{mu,nu}(x) u_nu* - v2_{mu,nu}(x)||."""
    if v1.dim != v2.dim or v1.dim != u.dim:
        raise DimMismatch("hom_defect needs equal fiber dimensions")
    if v1.cover is not v2.cover and v1.cover.pair != v2.cover.pair:
        raise DimMismatch("cocycles live on different covers")
    worst = 0.0
    cov = v1.cover
    edges = cov.y_nerve_edges if y_only else cov.nerve_edges
    for a, b in edges:
        samples = cov.y_samples(a, b) if y_only else cov.samples(a, b)
        ua, ub = u.value(a), u.value(b).conj().T
        for s in samples:
            worst = max(worst, op_norm(ua @ v1.value(a, b, s) @ ub - v2.value(a, b, s)))
    return worst


def cocycle_distance(v: CechCocycle, w: CechCocycle, y_only: bool = False) -> float:
    if v.dim != w.dim:
        raise DimMismatch("distance needs equal fiber dimensions")
    worst = 0.0
    cov = v.cover
    edges = cov.y_nerve_edges if y_only else cov.nerve_edges
    for a, b in edges:
        samples = cov.y_samples(a, b) if y_only else cov.samples(a, b)
        for s in samples:
            worst = max(worst, op_norm(v.value(a, b, s) - w.value(a, b, s)))
    return worst


def morphism_distance(u: Morphism, w: Morphism, vertices) -> float:
    if u.dim != w.dim:
        raise DimMismatch("distance needs equal fiber dimensions")
    return max((op_norm(u.value(m) - w.value(m)) for m in vertices), default=0.0)


# ---------------------------------------------------------------------------
# frames


class Frame:
    """Projection p and local trivializations psi over the sample points.

    At a sample x with vertex set S the only nonzero block of
    p(x) = sum eta_mu eta_nu v_{mu,nu}(x) (x) e_{mu,nu} is the S-block, so
    everything is assembled on fiber_dim * |S| rows; ``block_vertices``
    names the rows.
    """

    def __init__(self, v: CechCocycle, eta: PartitionRoot):
        self.v = v
        self.eta = eta

    def block_vertices(self, sample):
        return list(sample)

    def projection(self, sample) -> np.ndarray:
        verts = self.block_vertices(sample)
        n = self.v.dim
        p = np.zeros((n * len(verts), n * len(verts)), dtype=complex)
        for i, a in enumerate(verts):
            for j, b in enumerate(verts):
                w = self.eta.eta(a, sample) * self.eta.eta(b, sample)
                p[i * n : (i + 1) * n, j * n : (j + 1) * n] = w * self.v.value(a, b, sample)
        return p

    def trivialization(self, mu: int, sample) -> np.ndarray:
        verts = self.block_vertices(sample)
        n = self.v.dim
        psi = np.zeros((n * len(verts), n), dtype=complex)
        for i, a in enumerate(verts):
            psi[i * n : (i + 1) * n, :] = self.eta.eta(a, sample) * self.v.value(a, mu, sample)
        return psi


def frame(v: CechCocycle, eta: PartitionRoot | None = None) -> Frame:
    return Frame(v, eta or PartitionRoot())


# ---------------------------------------------------------------------------
# gauge operations


def unitary_act(u: Morphism, v: CechCocycle) -> CechCocycle:
    """The cohomologous cocycle { u_mu v_{mu,nu} u_nu* }."""
    if u.dim != v.dim:
        raise DimMismatch("morphism and cocycle dimensions differ")
    out = {}
    for (a, b), samples in v.cover.overlap_samples.items():
        ua, ub = u.value(a), u.value(b).conj().T
        for s in samples:
            out[(a, b, s)] = ua @ v.value(a, b, s) @ ub
    return CechCocycle(v.cover, v.dim, out)


def normalize_tree(v: CechCocycle, tree: NerveTree) -> tuple[Morphism, CechCocycle]:
    """Gauge v so every tree edge takes the value 1 at its chosen point.

    Walking the tree from the basepoint, u_mu := u_parent v_{mu,parent}(x)*
    makes (u . v) exactly 1 at x_{mu,parent}; the basepoint keeps u = 1.
    """
    units = {tree.basepoint: _eye(v.dim)}
    order = sorted(tree.cover.vertices, key=lambda m: len(tree.paths[m]))
    for m in order:
        if m == tree.basepoint:
            continue
        p = tree.parent[m]
        units[m] = units[p] @ v.value(m, p, tree.x_sample(m, p)).conj().T
    u = Morphism(v.dim, units)
    return u, unitary_act(u, v)


def is_normalized(v: CechCocycle, tree: NerveTree, tol: float = 1e-9) -> bool:
    eye = _eye(v.dim)
    return all(
        op_norm(v.value(a, b, tree.x_sample(a, b)) - eye) <= tol for a, b in tree.tree_edges
    )


def tree_transport(v: CechCocycle, tree: NerveTree, mu: int) -> np.ndarray:
    """Ordered product of transition values along the tree path to mu."""
    path = tree.paths[mu]
    u = _eye(v.dim)
    for i in range(len(path) - 1):
        a, b = path[i], path[i + 1]
        u = v.value(b, a, tree.x_sample(a, b)) @ u
    return u


def trivialize_simply_connected(
    v: CechCocycle, tree: NerveTree
) -> tuple[Morphism, float]:
    """Morphism from the trivial cocycle to v on a simply connected nerve.

    u_mu is the ordered transport along the tree path; the measured defect
    is bounded by 3 * max C_{mu,nu} * flatness(v), with C from loop_fill.
    """
    max_fill_count(tree)  # raises NotFillable when some loop does not bound
    units = {m: tree_transport(v, tree, m) for m in tree.cover.vertices}
    u = Morphism(v.dim, units)
    defect = hom_defect(identity_cocycle(v.cover, v.dim), v, u)
    return u, defect


def _spectral_projector(h: np.ndarray, cut: float = 0.5) -> tuple[np.ndarray, int]:
    w, vec = np.linalg.eigh(h)
    keep = w > cut
    p = (vec[:, keep]) @ (vec[:, keep].conj().T)
    return p, int(keep.sum())


def _partial_inv_sqrt(h: np.ndarray, cut: float = 0.5) -> np.ndarray:
    """h^{-1/2} on the spectral part above ``cut``, zero elsewhere."""
    w, vec = np.linalg.eigh(h)
    inv = np.zeros_like(w)
    keep = w > cut
    inv[keep] = w[keep] ** -0.5
    return (vec * inv) @ vec.conj().T


def gauge_constant(cover: StarCover) -> int:
    """|I|^2 + 1 for the cover in play."""
    return cover.pair.n_vertices**2 + 1


def gauge_correct(
    v1: CechCocycle,
    v2: CechCocycle,
    u: Morphism,
    eta: PartitionRoot | None = None,
    y_only: bool = False,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> ExactIntertwiner:
    """Replace an approximate intertwiner by an exact one nearby.

    Reduces to u = 1 by conjugating v1, then takes per sample the unitary
    part w = p2 p1 (p1 p2 p1)^{-1/2} of the compressed projection product
    and reads it back through the trivializations:
    ubar_mu(x) = psi2_mu(x)* w(x) psi1_mu(x).  The result conjugates v1 to
    v2 exactly at every sample and stays within (|I|^2 + 1) * eps of u.
    """
    if v1.dim != v2.dim or v1.dim != u.dim:
        raise DimMismatch("gauge_correct needs equal fiber dimensions")
    c1 = gauge_constant(v1.cover)
    if y_only:
        eps = max(y_flatness(v1), y_flatness(v2), hom_defect(v1, v2, u, y_only=True))
    else:
        eps = max(flatness(v1), flatness(v2), hom_defect(v1, v2, u))
    if eps >= 1.0 / (3.0 * c1):
        raise EpsilonTooLarge(f"measured eps {eps:.3e} >= 1/(3(|I|^2+1)) = {1/(3*c1):.3e}")

    eta = eta or PartitionRoot()
    w1 = unitary_act(u, v1)
    f1, f2 = Frame(w1, eta), Frame(v2, eta)
    n = v1.dim
    units: dict = {}
    simplices = v1.cover.pair.y_simplices if y_only else v1.cover.pair.simplices
    for s in sorted(simplices):
        p1, p2 = f1.projection(s), f2.projection(s)
        h = p1 @ p2 @ p1
        r = _partial_inv_sqrt(h)
        if np.count_nonzero(np.linalg.eigvalsh(h) > 0.5) != n:
            raise SingularPolar("compressed product p1 p2 p1 lost rank")
        w = p2 @ p1 @ r
        for mu in s:
            psi1 = f1.trivialization(mu, s)
            psi2 = f2.trivialization(mu, s)
            units[(mu, s)] = psi2.conj().T @ w @ psi1 @ u.value(mu)
    ubar = ExactIntertwiner(n, units)
    res = ubar.residual(v1, v2, y_only=y_only)
    if res > policy.intertwiner_tol:
        raise NotIntertwiner(f"gauge correction residual {res:.3e} too large")
    return ubar


def gauge_homotopy(
    v1: CechCocycle,
    v2: CechCocycle,
    u: Morphism,
    ubar_a: ExactIntertwiner,
    ubar_b: ExactIntertwiner,
    policy: NumericPolicy = DEFAULT_POLICY,
):
    """Path s -> exact intertwiner joining two gauge corrections.

    c_mu(x) := ubar_a_mu(x)* ubar_b_mu(x) intertwines v1 with itself, so
    ubar_a exp(s log c) stays an exact intertwiner for every s in [0,1].
    """
    logs = {}
    for key, ua in ubar_a.units.items():
        ub = ubar_b.units.get(key)
        if ub is None:
            ub = _eye(ubar_b.dim)
        logs[key] = principal_log_unitary(ua.conj().T @ ub, policy)

    def member(s: float) -> ExactIntertwiner:
        units = {
            key: ubar_a.units[key] @ exp_skew(s * logs[key], policy) for key in ubar_a.units
        }
        return ExactIntertwiner(ubar_a.dim, units)

    return member


# ---------------------------------------------------------------------------
# polar rounding


def multiplicativity_defect(
    values: dict, cover: StarCover, dim: int, y_only: bool = False
) -> float:
    """Triangle defect of a sample-independent almost-cocycle family."""
    eye = _eye(dim)

    def get(a, b):
        if a == b:
            return eye
        if a < b:
            v = values.get((a, b))
            return eye if v is None else v
        v = values.get((b, a))
        return eye if v is None else v.conj().T

    worst = 0.0
    y = cover.pair.y_vertices
    for a, b, c in cover.nerve_triangles:
        if y_only and not {a, b, c} <= y:
            continue
        worst = max(worst, op_norm(get(a, b) @ get(b, c) - get(a, c)))
    return worst


def polar_round(
    values: dict,
    cover: StarCover,
    eta: PartitionRoot | None = None,
    dim: int | None = None,
    policy: NumericPolicy = DEFAULT_POLICY,
    y_only: bool = False,
    strict: bool = True,
) -> CechCocycle:
    """Exact cocycle within 4*eps of an almost multiplicative unitary family.

    ``values`` maps nerve edges (mu, nu) with mu < nu to unitaries (missing
    edges mean the identity); eps is the measured triangle defect and must
    be < 1/2.  Per sample the frames psi_mu = sum eta_nu v'_{nu,mu} (x) e_nu
    are compressed onto the range projection of the almost-projection
    p = sum eta_mu eta_nu v'_{mu,nu} (x) e_{mu,nu} and orthonormalized, so
    the resulting transition unitaries v_{mu,nu} = phi_mu* phi_nu satisfy
    the cocycle identity exactly; distance and flatness bounds (4 eps and
    8 eps) follow from the defect of the input family.
    """
    if dim is None:
        if not values:
            raise DimMismatch("cannot infer fiber dimension from empty family")
        dim = next(iter(values.values())).shape[0]
    eps = multiplicativity_defect(values, cover, dim, y_only=y_only)
    if eps >= 0.5 and strict:
        # < 1/2 guarantees the frame projections keep their rank; callers
        # may disable the gate and rely on the per-sample gap check below
        raise EpsilonTooLarge(f"family defect {eps:.3f} >= 1/2")
    eta = eta or PartitionRoot()
    eye = _eye(dim)

    def get(a, b):
        if a == b:
            return eye
        if a < b:
            v = values.get((a, b))
            return eye if v is None else v
        v = values.get((b, a))
        return eye if v is None else v.conj().T

    if dim == 0:
        return identity_cocycle(cover, 0)

    data: dict = {}
    simplices = cover.pair.y_simplices if y_only else cover.pair.simplices
    for s in sorted(simplices):
        verts = list(s)
        k = len(verts)
        etas = [eta.eta(a, s) for a in verts]
        p = np.zeros((dim * k, dim * k), dtype=complex)
        for i in range(k):
            for j in range(k):
                p[i * dim : (i + 1) * dim, j * dim : (j + 1) * dim] = (
                    etas[i] * etas[j] * get(verts[i], verts[j])
                )
        proj, rank = _spectral_projector(p)
        if rank != dim:
            raise EpsilonTooLarge("range projection of the frame lost rank")
        phis = {}
        for mu in verts:
            psi = np.zeros((dim * k, dim), dtype=complex)
            for i in range(k):
                psi[i * dim : (i + 1) * dim, :] = etas[i] * get(verts[i], mu)
            phis[mu] = polar_isometry(proj @ psi, policy)
        for a, b in itertools.combinations(verts, 2):
            data[(a, b, s)] = phis[a].conj().T @ phis[b]
    return CechCocycle(cover, dim, data)


# ---------------------------------------------------------------------------
# subcover extension


def subcover_restrict(v: CechCocycle, j) -> CechCocycle:
    """Forget every entry touching a vertex outside j."""
    j = set(j)
    data = {k: m for k, m in v.data.items() if k[0] in j and k[1] in j}
    return CechCocycle(v.cover, v.dim, data)


def subcover_flatness(v: CechCocycle, j) -> float:
    j = set(j)
    worst = 0.0
    for (a, b), samples in v.cover.overlap_samples.items():
        if a not in j or b not in j:
            continue
        vals = [v.value(a, b, s) for s in samples]
        for i in range(len(vals)):
            for jj in range(i + 1, len(vals)):
                worst = max(worst, op_norm(vals[i] - vals[jj]))
    return worst


def _subnerve(cover: StarCover, j: set, sigma: int):
    """Nerve of { U_sigma * U_mu : mu in j } with its 2-cells."""
    nbs = sorted(
        mu for mu in j if (min(mu, sigma), max(mu, sigma)) in cover.overlap_samples
    )
    nb_set = set(nbs)
    edges, triangles = set(), set()
    for s in cover.set_samples[sigma]:
        inside = [v for v in s if v in nb_set]
        edges.update(itertools.combinations(inside, 2))
        triangles.update(itertools.combinations(inside, 3))
    return nbs, sorted(edges), sorted(triangles)


def _subnerve_tree(nbs, edges):
    adj: dict[int, list] = {v: [] for v in nbs}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    root = nbs[0]
    parent, order = {root: -1}, [root]
    queue = [root]
    while queue:
        v = queue.pop(0)
        for w in sorted(adj[v]):
            if w not in parent:
                parent[w] = v
                order.append(w)
                queue.append(w)
    if len(parent) != len(nbs):
        raise CannotExtend("subcover nerve is disconnected")
    tree = {(min(v, p), max(v, p)) for v, p in parent.items() if p != -1}
    paths = {}
    for v in nbs:
        path = [v]
        while path[-1] != root:
            path.append(parent[path[-1]])
        paths[v] = tuple(reversed(path))
    return tree, paths


def extend_subcover(
    v: CechCocycle,
    j,
    eta: PartitionRoot | None = None,
    policy: NumericPolicy = DEFAULT_POLICY,
):
    """Extend a cocycle given on the subcover indexed by j to the full cover.

    Every sample simplex must contain a vertex of j (the subcover still
    covers), and for each added set the nerve of its intersections with
    the subcover must be connected and simply connected.  For each added
    sigma a trivialization of v over U_sigma is built by tree transport
    and gauge-corrected to an exact one; the new transition values are
    read off from it.  Returns (extended cocycle, report) where the report
    carries the per-set constants and their product bound.
    """
    cover = v.cover
    j = set(j)
    missing = sorted(set(cover.vertices) - j)
    # transition data lives on overlap samples; each needs a subcover vertex
    for s in cover.pair.simplices:
        if len(s) >= 2 and not set(s) & j:
            raise CannotExtend(f"sample {s} not covered by the subcover")
    eta = eta or PartitionRoot()
    n = v.dim
    data = {k: m for k, m in v.data.items() if k[0] in j and k[1] in j}
    trivs: dict[int, dict] = {}
    report = {"per_set": {}, "c3": 0.0}

    for sigma in missing:
        nbs, edges, triangles = _subnerve(cover, j, sigma)
        if not nbs:
            raise CannotExtend(f"added set {sigma} meets no subcover set")
        tree, paths = _subnerve_tree(nbs, edges)
        table = fill_table(edges, triangles, tree)
        fills = [c for c in table.values() if c is None]
        if fills:
            raise CannotExtend(f"subcover nerve over set {sigma} is not simply connected")
        c2 = max(3 * max([c for c in table.values()], default=0), 1)
        c1 = len(nbs) ** 2 + 1

        # basepoint samples inside U_sigma for the tree-path transports
        def x_of(a, b):
            common = [s for s in cover.set_samples[sigma] if a in s and b in s]
            return min(common)

        units: dict[int, np.ndarray] = {}
        for mu in nbs:
            path = paths[mu]
            t = _eye(n)
            for i in range(len(path) - 1):
                a, b = path[i], path[i + 1]
                t = v.value(b, a, x_of(a, b)) @ t
            units[mu] = t

        # gauge-correct the transport to an exact trivialization on the
        # samples containing sigma
        exact: dict = {}
        for s in cover.set_samples[sigma]:
            inside = [w for w in s if w in set(nbs)]
            if not inside:
                if len(s) >= 2:
                    raise CannotExtend(f"sample {s} has no subcover vertex next to {sigma}")
                continue  # the bare vertex carries no transition data
            etas = [1.0 / len(inside) ** 0.5] * len(inside)
            k = len(inside)
            p1 = np.zeros((n * k, n * k), dtype=complex)  # trivial side, conjugated by units
            p2 = np.zeros_like(p1)
            for a in range(k):
                for b in range(k):
                    w1 = units[inside[a]] @ units[inside[b]].conj().T
                    p1[a * n : (a + 1) * n, b * n : (b + 1) * n] = etas[a] * etas[b] * w1
                    p2[a * n : (a + 1) * n, b * n : (b + 1) * n] = (
                        etas[a] * etas[b] * v.value(inside[a], inside[b], s)
                    )
            h = p1 @ p2 @ p1
            if np.count_nonzero(np.linalg.eigvalsh(h) > 0.5) != n:
                raise CannotExtend(f"trivialization over set {sigma} too far from v")
            w = p2 @ p1 @ _partial_inv_sqrt(h)
            for idx, mu in enumerate(inside):
                psi1 = np.zeros((n * k, n), dtype=complex)
                psi2 = np.zeros_like(psi1)
                for a in range(k):
                    psi1[a * n : (a + 1) * n, :] = (
                        etas[a] * units[inside[a]] @ units[mu].conj().T
                    )
                    psi2[a * n : (a + 1) * n, :] = etas[a] * v.value(inside[a], mu, s)
                exact[(mu, s)] = psi2.conj().T @ w @ psi1 @ units[mu]
        trivs[sigma] = exact
        report["per_set"][sigma] = {"c1": c1, "c2": c2}
        report["c3"] = max(report["c3"], 2.0 * c1 * c2)

    # assemble new entries
    for (a, b), samples in cover.overlap_samples.items():
        if a in j and b in j:
            continue
        for s in samples:
            if a in j:  # b is new: transition from U_b's frame to U_a
                data[(a, b, s)] = trivs[b][(a, s)]
            elif b in j:
                data[(a, b, s)] = trivs[a][(b, s)].conj().T
            else:
                mu = min(w for w in s if w in j)
                data[(a, b, s)] = trivs[a][(mu, s)].conj().T @ trivs[b][(mu, s)]
    out = CechCocycle(cover, n, data)
    res = out.validate(policy)
    if res > policy.intertwiner_tol:
        raise CannotExtend(f"extension failed exactness check ({res:.3e})")
    return out, report


def extend_morphism(
    v: CechCocycle,
    vp: CechCocycle,
    u: Morphism,
    j,
    tree: NerveTree,
) -> Morphism:
    """Extend a subcover morphism u in Hom(v, v') across the added sets.

    For mu outside j, pick the smallest neighbour sigma_mu in j and set
    u_mu := v'_{mu,sigma}(x) u_sigma v_{mu,sigma}(x)*.
    """
    j = set(j)
    units = {m: u.value(m) for m in j}
    for mu in sorted(set(v.cover.vertices) - j):
        nbs = [
            w
            for w in j
            if (min(mu, w), max(mu, w)) in v.cover.overlap_samples
        ]
        if not nbs:
            raise CannotExtend(f"no subcover neighbour for {mu}")
        sig = min(nbs)
        x = tree.x_sample(mu, sig)
        units[mu] = vp.value(mu, sig, x) @ u.value(sig) @ v.value(mu, sig, x).conj().T
    return Morphism(u.dim, units)


# ---------------------------------------------------------------------------
# pullback


def pullback(
    vertex_map: dict,
    source: StarCover,
    v: CechCocycle,
) -> CechCocycle:
    """Pull a cocycle back along a simplicial map of pairs.

    ``vertex_map`` sends source vertices to target vertices; each source
    simplex must map onto a target simplex.  Pulled-back samples are the
    image simplices, so flatness can only shrink.
    """
    target = v.cover

    def image(s):
        return tuple(sorted({vertex_map[x] for x in s}))

    for s in source.pair.simplices:
        if image(s) not in target.pair.simplices:
            raise NotSimplicial(f"simplex {s} maps to non-simplex {image(s)}")
    data = {}
    for (a, b), samples in source.overlap_samples.items():
        fa, fb = vertex_map[a], vertex_map[b]
        for s in samples:
            data[(a, b, s)] = v.value(fa, fb, image(s))
    return CechCocycle(source, v.dim, data)
