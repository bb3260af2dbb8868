"""Derived constructions: doubles, finite coverings, discrete holonomy.

The double of a pair glues two copies of X along a triangulated prism
over Y; relative cocycles unfold to cocycles on the double through an
exact intertwiner and fold back by reading the cross-side values on the
vertical edges.  Finite coverings push cocycles down as deck-permuted
block cocycles.  Discrete connections assign unitaries to oriented edges
and convert to Cech data by parallel transport inside each star.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .complexes import SimplicialPair, StarCover, build_star_cover, prism_simplices
from .cocycles import (
    CechCocycle,
    ExactIntertwiner,
    Morphism,
    gauge_correct,
    identity_cocycle,
)
from .errors import (
    BadCovering,
    DimMismatch,
    NoBoundary,
    NotSimplicial,
)
from .policy import DEFAULT_POLICY, NumericPolicy
from .quasireps import QuasiRep, WordOracle
from .relative import StablyRelativeCocycle, restrict_to_y
from .unitary import op_norm

__all__ = [
    "DoubleComplex",
    "build_double",
    "unfold_to_double",
    "fold_to_relative",
    "amalgam_rep",
    "FiniteCovering",
    "covering_pushforward",
    "DiscreteConnection",
    "curvature_defect",
    "holonomy_to_cech",
    "gauge_transform_connection",
]


def _eye(n):
    return np.eye(n, dtype=complex)


# ---------------------------------------------------------------------------
# the double


@dataclass(frozen=True)
class DoubleComplex:
    """X glued to a mirror copy of itself along a prism over Y.

    Side-1 vertices keep their ids; side-2 vertex v becomes v + n.  The
    prism over each Y-simplex fills the collar, so the cover sets of the
    two copies of a Y-vertex overlap exactly there.
    """

    base: SimplicialPair
    pair: SimplicialPair
    cover: StarCover

    @property
    def n(self) -> int:
        return self.base.n_vertices

    def side_vertex(self, v: int, side: int) -> int:
        return v if side == 1 else v + self.n

    def side_of(self, vertex: int) -> tuple[int, int]:
        return (1, vertex) if vertex < self.n else (2, vertex - self.n)

    def base_sample(self, sample) -> tuple:
        """Original simplex under a sample of the double."""
        return tuple(sorted({v % self.n for v in sample}))

    def side_simplex(self, s, side: int):
        return tuple(sorted(self.side_vertex(v, side) for v in s))


def build_double(base: SimplicialPair) -> DoubleComplex:
    if not base.y_vertices:
        raise NoBoundary("double needs a nonempty Y")
    if len(base.y_vertices) == base.n_vertices:
        raise NoBoundary("Y must be a proper subcomplex")
    if not base.y_is_connected():
        raise NoBoundary("Y must be connected")
    n = base.n_vertices
    maximal = set(base.simplices)
    maximal |= {tuple(v + n for v in s) for s in base.simplices}
    maximal |= prism_simplices(base.y_simplices, lambda v: v, lambda v: v + n)
    pair = SimplicialPair.from_maximal(2 * n, maximal, ())
    return DoubleComplex(base, pair, build_star_cover(pair))


def unfold_to_double(
    f: StablyRelativeCocycle,
    dc: DoubleComplex,
    ubar: ExactIntertwiner | None = None,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> CechCocycle:
    """Glue a relative cocycle (m = 0) into a cocycle on the double.

    Same-side values restrict the respective cocycle; cross-side values
    over a collar sample with base simplex s are
    v1_{a,b}(s) ubar_b(s)* (side 1 to side 2) and v2_{a,b}(s) ubar_b(s)
    (side 2 to side 1), with ubar an exact intertwiner v1|_Y -> v2|_Y
    (gauge-corrected from u by default).  The result satisfies the
    cocycle identity exactly and its flatness is controlled by
    (|I|^2 + 2) times the input defect.
    """
    if f.v0.dim != 0:
        raise DimMismatch("unfolding is defined for relative cocycles (m = 0)")
    if dc.base != f.cover.pair:
        raise NoBoundary("double was built over a different pair")
    if ubar is None:
        ubar = gauge_correct(f.v1, f.v2, f.u, y_only=True, policy=policy)
    n = dc.n
    data = {}
    for (a, b), samples in dc.cover.overlap_samples.items():
        (sa, va), (sb, vb) = dc.side_of(a), dc.side_of(b)
        for s in samples:
            base_s = dc.base_sample(s)
            if sa == sb:
                val = (f.v1 if sa == 1 else f.v2).value(va, vb, base_s)
            elif sa == 1 and sb == 2:
                val = f.v1.value(va, vb, base_s) @ ubar.value(vb, base_s).conj().T
            else:  # sa == 2, sb == 1 cannot happen with sorted keys (a < b)
                val = f.v2.value(va, vb, base_s) @ ubar.value(vb, base_s)
            data[(a, b, s)] = val
    return CechCocycle(dc.cover, f.v1.dim, data)


def fold_to_relative(vhat: CechCocycle, dc: DoubleComplex) -> StablyRelativeCocycle:
    """Read a relative cocycle off a cocycle on the double.

    The side restrictions give v1 and v2; the morphism takes, per Y
    vertex, the cross-side value on the vertical edge of the collar.
    """
    if vhat.cover.pair != dc.pair:
        raise NoBoundary("cocycle does not live on this double")
    base_cover = build_star_cover(dc.base)
    n = vhat.dim

    def side_restrict(side: int) -> CechCocycle:
        data = {}
        for (a, b), samples in base_cover.overlap_samples.items():
            sa, sb = dc.side_vertex(a, side), dc.side_vertex(b, side)
            for s in samples:
                data[(a, b, s)] = vhat.value(sa, sb, dc.side_simplex(s, side))
        return CechCocycle(base_cover, n, data)

    units = {}
    for mu in base_cover.i_y:
        edge = (mu, dc.side_vertex(mu, 2))
        units[mu] = vhat.value(edge[1], edge[0], edge)
    return StablyRelativeCocycle(
        side_restrict(1),
        side_restrict(2),
        identity_cocycle(base_cover, 0),
        Morphism(n, units),
    )


def amalgam_rep(
    pi1: QuasiRep, pi2: QuasiRep, oracle: WordOracle
) -> QuasiRep:
    """Quasi-representation of the doubled generator set.

    Generator symbols are (side, symbol); values come from the matching
    component.  ``oracle`` must speak normal forms of the glued group.
    """
    if pi1.dim != pi2.dim:
        raise DimMismatch("amalgam components must share a dimension")
    values = {}
    for sym, val in pi1.gen_values.items():
        values[(1, sym)] = val
    for sym, val in pi2.gen_values.items():
        values[(2, sym)] = val
    return QuasiRep(pi1.dim, values)


# ---------------------------------------------------------------------------
# finite coverings


@dataclass(frozen=True)
class FiniteCovering:
    """Simplicial covering map with a finite fiber.

    ``projection`` maps total-space vertices onto base vertices; every
    base simplex must have exactly ``sheets`` disjoint lifts and every
    lift must map bijectively.  Sheets over a vertex are numbered in
    increasing vertex order (the fixed local trivialization).
    """

    total: SimplicialPair
    base: SimplicialPair
    projection: tuple  # total vertex -> base vertex
    sheets: int

    def validate(self) -> None:
        proj = self.projection
        fibers: dict[int, list] = {}
        for v in range(self.total.n_vertices):
            fibers.setdefault(proj[v], []).append(v)
        if set(fibers) != set(range(self.base.n_vertices)):
            raise BadCovering("projection is not onto the base vertex set")
        if any(len(f) != self.sheets for f in fibers.values()):
            raise BadCovering("fiber cardinality is not constant")
        for s in self.base.simplices:
            lifts = [
                t
                for t in self.total.simplices
                if len(t) == len(s) and tuple(sorted({proj[v] for v in t})) == s
            ]
            if len(lifts) != self.sheets:
                raise BadCovering(f"simplex {s} has {len(lifts)} lifts, wanted {self.sheets}")

    def fiber_over(self, mu: int) -> list:
        return sorted(
            v for v in range(self.total.n_vertices) if self.projection[v] == mu
        )

    def lift_of_sample(self, sample, total_vertex: int):
        """The unique lift of a base simplex through a given total vertex."""
        for t in self.total.simplices:
            if len(t) == len(sample) and total_vertex in t:
                if tuple(sorted({self.projection[v] for v in t})) == sample:
                    return t
        raise BadCovering(f"no lift of {sample} through {total_vertex}")


def covering_pushforward(
    cov: FiniteCovering, v: CechCocycle, total_cover: StarCover, base_cover: StarCover
) -> CechCocycle:
    """Assemble an upstairs cocycle into a deck-twisted block cocycle.

    Block (i, j) of the pushed-forward value at a base sample holds the
    upstairs value on the unique lift joining sheet i over mu to sheet j
    over nu (zero if those sheets do not meet over the sample), so each
    value is a block permutation twisted by the upstairs transitions and
    flatness is preserved exactly.
    """
    cov.validate()
    if v.cover.pair != cov.total:
        raise BadCovering("cocycle does not live on the covering space")
    n, f = v.dim, cov.sheets
    data = {}
    for (a, b), samples in base_cover.overlap_samples.items():
        fa, fb = cov.fiber_over(a), cov.fiber_over(b)
        for s in samples:
            big = np.zeros((n * f, n * f), dtype=complex)
            for i, abar in enumerate(fa):
                lift = cov.lift_of_sample(s, abar)
                bbar = next(w for w in lift if cov.projection[w] == b)
                j = fb.index(bbar)
                big[i * n : (i + 1) * n, j * n : (j + 1) * n] = v.value(abar, bbar, lift)
            data[(a, b, s)] = big
    return CechCocycle(base_cover, n * f, data)


def deck_monodromy(cov: FiniteCovering, base_loop) -> list:
    """Sheet permutation of a closed base vertex loop (list of vertices)."""
    perm = []
    for start in cov.fiber_over(base_loop[0]):
        cur = start
        for a, b in zip(base_loop, base_loop[1:]):
            lift = cov.lift_of_sample(tuple(sorted((a, b))), cur)
            cur = next(w for w in lift if cov.projection[w] == b)
        perm.append(cov.fiber_over(base_loop[0]).index(cur))
    return perm


# ---------------------------------------------------------------------------
# discrete connections


@dataclass(frozen=True)
class DiscreteConnection:
    """Edge-unitary field: transport along oriented 1-simplices.

    ``edge_units`` maps sorted edges (a, b) to the transport from the
    fiber over a to the fiber over b; the reversed edge transports by the
    adjoint, so adjoint consistency is structural.
    """

    dim: int
    edge_units: dict  # (a, b) sorted -> unitary (a -> b transport)

    def transport(self, a: int, b: int) -> np.ndarray:
        if a == b:
            return _eye(self.dim)
        if a < b:
            u = self.edge_units.get((a, b))
            return _eye(self.dim) if u is None else u
        u = self.edge_units.get((b, a))
        return _eye(self.dim) if u is None else u.conj().T


def curvature_defect(conn: DiscreteConnection, pair: SimplicialPair) -> float:
    """Max distance of triangle holonomies from the identity."""
    worst = 0.0
    eye = _eye(conn.dim)
    for s in pair.simplices:
        if len(s) != 3:
            continue
        a, b, c = s
        hol = conn.transport(c, a) @ conn.transport(b, c) @ conn.transport(a, b)
        worst = max(worst, op_norm(hol - eye))
    return worst


def gauge_transform_connection(
    conn: DiscreteConnection, units: dict
) -> DiscreteConnection:
    """Conjugate a connection by per-vertex unitaries g: a->b becomes g_b t g_a*."""
    out = {}
    for (a, b), t in conn.edge_units.items():
        ga = units.get(a, _eye(conn.dim))
        gb = units.get(b, _eye(conn.dim))
        out[(a, b)] = gb @ t @ ga.conj().T
    return DiscreteConnection(conn.dim, out)


def holonomy_to_cech(conn: DiscreteConnection, cover: StarCover) -> CechCocycle:
    """Cech cocycle of a connection via transport to the star centers.

    Each sample simplex s is anchored at its smallest vertex; the local
    trivialization over U_mu at s transports along the edge from the
    anchor to mu (an edge of s, so one hop).  Transition values
    v_{mu,nu}(s) = T_mu(s) T_nu(s)* then satisfy the cocycle identity
    exactly, and two samples of one overlap differ by the holonomy of a
    bigon spanned by at most two triangles, so flatness is bounded by
    twice the curvature defect.
    """
    data = {}
    for (a, b), samples in cover.overlap_samples.items():
        for s in samples:
            anchor = s[0]
            ta = conn.transport(anchor, a)
            tb = conn.transport(anchor, b)
            data[(a, b, s)] = ta @ tb.conj().T
    return CechCocycle(cover, conn.dim, data)
