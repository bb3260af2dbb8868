"""Finite simplicial pairs, star covers, nerve trees and loop fillings.

A complex is stored as the face-closed set of its simplices, each a
sorted tuple of vertex indices.  The open cover in play is always the
family of open vertex stars; its nerve combinatorics reduce to simplex
incidence:

* the overlap U_mu * U_nu is nonempty iff {mu, nu} is an edge,
* a simplex containing both mu and nu is one sample point of that
  overlap (think of its barycenter),
* {mu, nu, sigma} spans a nerve 2-cell iff some simplex contains all
  three vertices.

All constructions are deterministic for a fixed vertex numbering.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

from .errors import NotConnected, NotFillable, NotSurface

Simplex = tuple[int, ...]
Edge = tuple[int, int]


def close_faces(maximal) -> frozenset:
    """Face closure of a collection of simplices."""
    out = set()
    for s in maximal:
        s = tuple(sorted(set(s)))
        for k in range(1, len(s) + 1):
            out.update(itertools.combinations(s, k))
    return frozenset(out)


def _components(vertices, edges) -> list[set]:
    adj: dict[int, set] = {v: set() for v in vertices}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen, comps = set(), []
    for v in sorted(vertices):
        if v in seen:
            continue
        stack, comp = [v], set()
        while stack:
            w = stack.pop()
            if w in comp:
                continue
            comp.add(w)
            stack.extend(adj[w] - comp)
        seen |= comp
        comps.append(comp)
    return comps


@dataclass(frozen=True)
class SimplicialPair:
    """Finite complex X with a full subcomplex Y spanned by ``y_vertices``."""

    n_vertices: int
    simplices: frozenset
    y_vertices: frozenset

    @staticmethod
    def from_maximal(n_vertices: int, maximal, y_vertices=()) -> "SimplicialPair":
        simp = close_faces(maximal)
        pair = SimplicialPair(n_vertices, simp, frozenset(y_vertices))
        pair.validate()
        return pair

    def validate(self) -> None:
        verts = {s[0] for s in self.simplices if len(s) == 1}
        if verts != set(range(self.n_vertices)):
            raise ValueError("every vertex index must appear as a 0-simplex")
        if not self.y_vertices <= set(range(self.n_vertices)):
            raise ValueError("y_vertices out of range")
        if not self.is_connected():
            raise NotConnected("complex is not connected")

    @cached_property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(sorted(s for s in self.simplices if len(s) == 2))

    @cached_property
    def y_simplices(self) -> frozenset:
        y = self.y_vertices
        return frozenset(s for s in self.simplices if set(s) <= y)

    @cached_property
    def dimension(self) -> int:
        return max(len(s) for s in self.simplices) - 1

    def euler_characteristic(self) -> int:
        return sum((-1) ** (len(s) - 1) for s in self.simplices)

    def is_connected(self) -> bool:
        return len(_components(range(self.n_vertices), self.edges)) == 1

    def y_is_connected(self) -> bool:
        if not self.y_vertices:
            return True
        y_edges = [s for s in self.y_simplices if len(s) == 2]
        return len(_components(self.y_vertices, y_edges)) == 1


@dataclass(frozen=True)
class StarCover:
    """Vertex-star cover of a pair, with simplex-indexed sample points."""

    pair: SimplicialPair

    @cached_property
    def vertices(self) -> range:
        return range(self.pair.n_vertices)

    @cached_property
    def set_samples(self) -> dict:
        out: dict[int, tuple] = {v: [] for v in self.vertices}
        for s in sorted(self.pair.simplices):
            for v in s:
                out[v].append(s)
        return {v: tuple(lst) for v, lst in out.items()}

    @cached_property
    def overlap_samples(self) -> dict:
        """(mu, nu) with mu < nu -> samples of U_mu * U_nu."""
        out: dict[Edge, list] = {}
        for s in sorted(self.pair.simplices):
            if len(s) < 2:
                continue
            for a, b in itertools.combinations(s, 2):
                out.setdefault((a, b), []).append(s)
        return {e: tuple(v) for e, v in sorted(out.items())}

    @cached_property
    def nerve_edges(self) -> tuple[Edge, ...]:
        return tuple(sorted(self.overlap_samples))

    @cached_property
    def nerve_triangles(self) -> tuple[Simplex, ...]:
        tris = set()
        for s in self.pair.simplices:
            if len(s) >= 3:
                tris.update(itertools.combinations(s, 3))
        return tuple(sorted(tris))

    @cached_property
    def i_y(self) -> frozenset:
        # Y is a full subcomplex, so a star meets Y exactly when its
        # center lies in Y.
        return self.pair.y_vertices

    def samples(self, mu: int, nu: int) -> tuple:
        if mu == nu:
            return self.set_samples[mu]
        key = (mu, nu) if mu < nu else (nu, mu)
        return self.overlap_samples.get(key, ())

    def y_samples(self, mu: int, nu: int) -> tuple:
        ys = self.pair.y_simplices
        return tuple(s for s in self.samples(mu, nu) if s in ys)

    @cached_property
    def y_nerve_edges(self) -> tuple[Edge, ...]:
        return tuple(e for e in self.nerve_edges if self.y_samples(*e))


def build_star_cover(pair: SimplicialPair) -> StarCover:
    if not pair.is_connected():
        raise NotConnected("complex is not connected")
    return StarCover(pair)


@dataclass(frozen=True)
class NerveTree:
    """Spanning tree of the nerve, Y-compatible, with fixed tree paths.

    ``basepoint_samples`` realizes the choice of one sample x_{mu,nu} per
    nerve edge with x_{mu,nu} = x_{nu,mu}: the lexicographically smallest
    sample, preferring samples inside Y when the edge lies in the Y-nerve.
    """

    cover: StarCover
    basepoint: int
    tree_edges: frozenset
    parent: dict = field(hash=False)

    @staticmethod
    def build(cover: StarCover, basepoint: int | None = None) -> "NerveTree":
        pair = cover.pair
        if basepoint is None:
            basepoint = min(pair.y_vertices) if pair.y_vertices else 0
        if not pair.y_is_connected():
            raise NotConnected("Y-subcomplex is not connected")

        adj_y: dict[int, list] = {}
        for a, b in cover.y_nerve_edges:
            adj_y.setdefault(a, []).append(b)
            adj_y.setdefault(b, []).append(a)
        adj: dict[int, list] = {v: [] for v in cover.vertices}
        for a, b in cover.nerve_edges:
            adj[a].append(b)
            adj[b].append(a)

        parent: dict[int, int] = {basepoint: -1}
        tree: set[Edge] = set()
        order = [basepoint]

        def bfs(sources, neighbours):
            queue = list(sources)
            while queue:
                v = queue.pop(0)
                for w in sorted(neighbours.get(v, ())):
                    if w not in parent:
                        parent[w] = v
                        tree.add((min(v, w), max(v, w)))
                        order.append(w)
                        queue.append(w)

        # span the Y-nerve first so that T restricted to Y is a maximal
        # subtree there, then grow out to the rest of the nerve
        if basepoint in adj_y or basepoint in pair.y_vertices:
            bfs([basepoint], adj_y)
        bfs(list(order), adj)
        if len(parent) != pair.n_vertices:
            raise NotConnected("nerve is not connected")
        return NerveTree(cover, basepoint, frozenset(tree), parent)

    @cached_property
    def paths(self) -> dict:
        """Vertex -> tuple of vertices of the reduced tree path from the basepoint."""
        out = {}
        for v in self.cover.vertices:
            path = [v]
            while path[-1] != self.basepoint:
                path.append(self.parent[path[-1]])
            out[v] = tuple(reversed(path))
        return out

    @cached_property
    def diameter(self) -> int:
        depth = {v: len(p) - 1 for v, p in self.paths.items()}
        return 2 * max(depth.values()) if depth else 0

    @cached_property
    def basepoint_samples(self) -> dict:
        out = {}
        for e in self.cover.nerve_edges:
            ys = self.cover.y_samples(*e)
            out[e] = min(ys) if ys else min(self.cover.samples(*e))
        return out

    def x_sample(self, mu: int, nu: int) -> Simplex:
        key = (mu, nu) if mu < nu else (nu, mu)
        return self.basepoint_samples[key]

    @cached_property
    def non_tree_edges(self) -> tuple[Edge, ...]:
        return tuple(e for e in self.cover.nerve_edges if e not in self.tree_edges)


def build_tree(cover: StarCover, basepoint: int | None = None) -> NerveTree:
    return NerveTree.build(cover, basepoint)


@dataclass(frozen=True)
class GeneratorData:
    """Fundamental-group generator bookkeeping for a nerve tree.

    One symbol per non-tree nerve edge; the symbol for edge (mu, nu) with
    mu < nu stands for the class of the based loop running from the
    basepoint to mu along the tree, across the edge to nu, and back.
    Words are tuples of (edge, exponent) with exponent +-1.
    """

    tree: NerveTree

    @cached_property
    def generators(self) -> tuple[Edge, ...]:
        return self.tree.non_tree_edges

    @cached_property
    def y_generators(self) -> tuple[Edge, ...]:
        y_edges = set(self.tree.cover.y_nerve_edges)
        return tuple(e for e in self.generators if e in y_edges)

    def index(self, edge: Edge) -> int:
        return self.generators.index(edge)


def generators(tree: NerveTree) -> GeneratorData:
    return GeneratorData(tree)


# ---------------------------------------------------------------------------
# loop filling


def fill_table(edges, triangles, tree_edges) -> dict:
    """Minimal number of 2-cells needed to fill each edge loop.

    Bellman-Ford style relaxation over the triangle hypergraph:
    W(ab) <= W(ac) + W(cb) + 1 whenever {a,b,c} is a 2-cell.  Tree edges
    fill for free; unreachable edges keep weight None.
    """
    inf = float("inf")
    w = {e: (0 if e in tree_edges else inf) for e in edges}

    def get(a, b):
        return w[(a, b) if a < b else (b, a)]

    changed = True
    while changed:
        changed = False
        for a, b, c in triangles:
            for x, y, z in ((a, b, c), (a, c, b), (b, c, a)):
                cand = get(x, z) + get(z, y) + 1
                key = (x, y)
                if cand < w[key]:
                    w[key] = cand
                    changed = True
    return {e: (None if v == inf else int(v)) for e, v in w.items()}


def _decompose(a, b, table, triangles, tree_edges, paths):
    """Filling of the based loop through the directed edge a -> b.

    Returns a list of (conjugator_path, (p, q, r)) entries; each entry is
    the loop p -> q -> r -> p conjugated by the tree path to p.  Built by
    splitting a -> b into a -> c -> b across a minimizing 2-cell.
    """
    key = (a, b) if a < b else (b, a)
    if key in tree_edges:
        return []
    best = None
    for tri in triangles:
        if a in tri and b in tri:
            (c,) = [v for v in tri if v != a and v != b]
            ka = (a, c) if a < c else (c, a)
            kb = (c, b) if c < b else (b, c)
            if table[ka] is None or table[kb] is None:
                continue
            cost = table[ka] + table[kb] + 1
            if best is None or cost < best[0]:
                best = (cost, c)
    if best is None or (table[key] is not None and best[0] > table[key]):
        # no triangle route matching the table; only consistent if the
        # table already says unreachable
        if table[key] is None:
            raise NotFillable(f"loop through edge {key} is not null-homotopic")
    if best is None:
        raise NotFillable(f"loop through edge {key} is not null-homotopic")
    c = best[1]
    out = _decompose(a, c, table, triangles, tree_edges, paths)
    out += _decompose(c, b, table, triangles, tree_edges, paths)
    out.append((paths[b], (b, c, a)))
    return out


def loop_fill(tree: NerveTree, edge: Edge):
    """Decompose the generator loop of a non-tree nerve edge into 2-cells.

    The loop through edge (a, b) equals, in the free group on directed
    nerve edges, the product of the loops through (a, c) and (c, b) times
    one conjugated triangle boundary; recursing down to tree edges yields
    a filling whose cell count is minimized by the relaxation table.
    """
    cover = tree.cover
    a, b = edge
    key = (a, b) if a < b else (b, a)
    if key not in set(cover.nerve_edges):
        raise KeyError(f"{edge} is not a nerve edge")
    table = fill_table(cover.nerve_edges, cover.nerve_triangles, tree.tree_edges)
    if table[key] is None:
        raise NotFillable(f"loop through edge {key} is not null-homotopic")
    return _decompose(a, b, table, cover.nerve_triangles, tree.tree_edges, tree.paths)


def max_fill_count(tree: NerveTree) -> int:
    """max C_{mu,nu} over non-tree edges; NotFillable if some loop is not."""
    cover = tree.cover
    table = fill_table(cover.nerve_edges, cover.nerve_triangles, tree.tree_edges)
    counts = []
    for e in tree.non_tree_edges:
        if table[e] is None:
            raise NotFillable(f"loop through edge {e} is not null-homotopic")
        counts.append(table[e])
    return max(counts, default=0)


# ---------------------------------------------------------------------------
# free-group words on directed edges (replay oracle for fillings)


def reduce_word(word):
    """Free reduction of a word of directed edges [(a, b), ...]."""
    out = []
    for a, b in word:
        if out and out[-1] == (b, a):
            out.pop()
        else:
            out.append((a, b))
    return tuple(out)


def path_word(path):
    return [(path[i], path[i + 1]) for i in range(len(path) - 1)]


def loop_word(tree: NerveTree, a: int, b: int):
    """Based loop word for the directed edge a -> b."""
    to_a = path_word(tree.paths[a])
    from_b = [(q, p) for p, q in reversed(path_word(tree.paths[b]))]
    return to_a + [(a, b)] + from_b


def replay_filling(tree: NerveTree, filling):
    """Word of the product of conjugated triangle boundaries in a filling."""
    word = []
    for conj_path, (p, q, r) in filling:
        to_p = path_word(conj_path)
        word += to_p + [(p, q), (q, r), (r, p)] + [(y, x) for x, y in reversed(to_p)]
    return word


def strip_tree_edges(word, tree_edges):
    return [e for e in word if (min(e), max(e)) not in tree_edges]


def prism_simplices(y_simplices, bottom, top):
    """Triangulated prism over a complex, between two vertex embeddings.

    For a simplex (y_0 < ... < y_k) the pieces are the simplices
    (b_0 .. b_i, t_i .. t_k); the maps ``bottom`` and ``top`` must be
    strictly increasing with every bottom id below every top id within a
    simplex, so the output tuples come out sorted.
    """
    out = set()
    for s in y_simplices:
        k = len(s)
        for i in range(k):
            piece = tuple([bottom(v) for v in s[: i + 1]] + [top(v) for v in s[i:]])
            if list(piece) != sorted(piece):
                raise ValueError("prism vertex maps must preserve order")
            out.add(piece)
    return out


# ---------------------------------------------------------------------------
# orientations of 2-dimensional relative cycles


def orient_surface(pair: SimplicialPair):
    """Coherent orientation of the 2-cells plus the induced boundary.

    Returns (orientation, boundary) where orientation maps each sorted
    2-simplex (a, b, c) to +-1 (+1 meaning the cycle a->b->c->a) and
    boundary is the sorted tuple of induced directed Y-edges.  Fails with
    NotSurface when the 2-cells do not form a relative cycle mod Y.
    """
    cells = sorted(s for s in pair.simplices if len(s) == 3)
    if not cells:
        raise NotSurface("pair has no 2-cells")
    edge_cells: dict[Edge, list] = {}
    for s in cells:
        for e in itertools.combinations(s, 2):
            edge_cells.setdefault(e, []).append(s)
    y_edge = {e for e in edge_cells if set(e) <= pair.y_vertices}
    for e, cs in edge_cells.items():
        if len(cs) > 2 or (len(cs) == 1 and e not in y_edge):
            raise NotSurface(f"edge {e} lies in {len(cs)} 2-cells")

    def boundary_dirs(cell, sign):
        a, b, c = cell
        dirs = [(a, b), (b, c), (c, a)]
        return dirs if sign > 0 else [(b, a), (c, b), (a, c)]

    orientation: dict[Simplex, int] = {}
    for start in cells:
        if start in orientation:
            continue
        orientation[start] = 1
        queue = [start]
        while queue:
            s = queue.pop(0)
            for e in itertools.combinations(s, 2):
                for t in edge_cells[e]:
                    if t is s or t == s:
                        continue
                    # shared edge must inherit opposite directions
                    d_s = [d for d in boundary_dirs(s, orientation[s]) if set(d) == set(e)][0]
                    want = -1 if d_s in boundary_dirs(t, 1) else 1
                    if t in orientation:
                        if orientation[t] != want:
                            raise NotSurface("2-cells are not coherently orientable")
                    else:
                        orientation[t] = want
                        queue.append(t)

    boundary = []
    for e, cs in edge_cells.items():
        dirs = []
        for s in cs:
            dirs += [d for d in boundary_dirs(s, orientation[s]) if set(d) == set(e)]
        if len(dirs) == 1:
            boundary.append(dirs[0])
        elif len(dirs) == 2 and dirs[0] == dirs[1]:
            raise NotSurface("incoherent orientation across an interior edge")
    return orientation, tuple(sorted(boundary))


def boundary_loops(boundary) -> list[list[int]]:
    """Split directed boundary edges into closed vertex loops."""
    nxt = {a: b for a, b in boundary}
    if len(nxt) != len(boundary):
        raise NotSurface("boundary is not a disjoint union of simple loops")
    loops, seen = [], set()
    for a in sorted(nxt):
        if a in seen:
            continue
        loop, v = [a], nxt[a]
        seen.add(a)
        while v != a:
            loop.append(v)
            seen.add(v)
            v = nxt[v]
        loops.append(loop)
    return loops
