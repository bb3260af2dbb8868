"""Quasi-representations and the almost monodromy correspondence.

Group elements are handled as words over generator symbols; a per-family
word oracle supplies normal forms (free reduction, abelianization, ...)
standing in for a set-theoretic section of the quotient map from the
free group.  Generator symbols for nerve data are the non-tree nerve
edges; a word is a tuple of (symbol, +-1) letters and evaluation is the
ordered product of generator unitaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .complexes import GeneratorData, NerveTree
from .cocycles import (
    CechCocycle,
    Morphism,
    PartitionRoot,
    identity_cocycle,
    is_normalized,
    polar_round,
    tree_transport,
)
from .errors import DimMismatch, NotNormalized, OracleIncomplete, StabilizedRep
from .policy import DEFAULT_POLICY, NumericPolicy
from .unitary import op_norm

Word = tuple  # tuple of (symbol, exponent) with exponent +-1


def _eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex)


def free_reduce(word) -> Word:
    out = []
    for sym, e in word:
        if out and out[-1][0] == sym and out[-1][1] == -e:
            out.pop()
        else:
            out.append((sym, e))
    return tuple(out)


@dataclass(frozen=True)
class WordOracle:
    """Normal forms for words over a fixed generator list.

    ``gens`` lists the generator symbols; ``nf`` maps an arbitrary word to
    the canonical word of the group element it spells.  The default is
    free reduction (free group); abelian families supply lattice classes
    per generator together with a basis used to spell normal forms.
    """

    gens: tuple
    nf_fn: object = None  # callable word -> word, None = free reduction

    def normal_form(self, word) -> Word:
        if self.nf_fn is None:
            return free_reduce(word)
        res = self.nf_fn(tuple(word))
        if res is None:
            raise OracleIncomplete(f"no normal form for word {word}")
        return tuple(res)

    def letters(self):
        return tuple((g, 1) for g in self.gens)


def free_oracle(gens) -> WordOracle:
    return WordOracle(tuple(gens), None)


def trivial_oracle(gens) -> WordOracle:
    """Every word is the identity (simply connected families)."""
    return WordOracle(tuple(gens), lambda w: ())


def abelian_oracle(gens, classes: dict, basis: tuple) -> WordOracle:
    """Normal forms through a free-abelian quotient.

    ``classes`` maps each generator symbol to an integer lattice vector;
    ``basis`` is a list of generator symbols whose classes form a basis of
    the lattice so every class can be respelled basis-first.
    """
    mat = np.array([classes[b] for b in basis], dtype=float).T
    inv = np.linalg.inv(mat)

    def nf(word):
        total = np.zeros(len(next(iter(classes.values()))), dtype=float)
        for sym, e in word:
            if sym not in classes:
                return None
            total += e * np.asarray(classes[sym], dtype=float)
        coeff = inv @ total
        ints = np.rint(coeff)
        if np.max(np.abs(coeff - ints)) > 1e-9:
            return None
        out = []
        for b, c in zip(basis, ints.astype(int)):
            out.extend([(b, 1 if c > 0 else -1)] * abs(c))
        return tuple(out)

    return WordOracle(tuple(gens), nf)


@dataclass(frozen=True)
class QuasiRep:
    """Unitary generator values with evaluation by ordered products."""

    dim: int
    gen_values: dict = field(hash=False)  # symbol -> unitary

    def value(self, sym) -> np.ndarray:
        if self.dim == 0:
            return _eye(0)
        try:
            return self.gen_values[sym]
        except KeyError:
            raise OracleIncomplete(f"no value for generator {sym}") from None

    def word_eval(self, word) -> np.ndarray:
        out = _eye(self.dim)
        for sym, e in word:
            v = self.value(sym)
            out = out @ (v if e == 1 else v.conj().T)
        return out

    def conjugate(self, u: np.ndarray) -> "QuasiRep":
        return QuasiRep(self.dim, {s: u @ v @ u.conj().T for s, v in self.gen_values.items()})


def rep_defect(pi: QuasiRep, oracle: WordOracle) -> float:
    """max over generator pairs (g, h) of ||pi(g) pi(h) - pi(nf(gh))||."""
    worst = 0.0
    letters = oracle.letters()
    for g in letters:
        pg = pi.word_eval([g])
        for h in letters:
            prod = pg @ pi.word_eval([h])
            target = pi.word_eval(oracle.normal_form([g, h]))
            worst = max(worst, op_norm(prod - target))
    return worst


def intertwiner_defect(pi1: QuasiRep, pi2: QuasiRep, u: np.ndarray, oracle: WordOracle) -> float:
    if pi1.dim != pi2.dim or u.shape[0] != pi1.dim:
        raise DimMismatch("intertwiner_defect needs matching dimensions")
    worst = 0.0
    for g in oracle.gens:
        worst = max(worst, op_norm(u @ pi1.value(g) @ u.conj().T - pi2.value(g)))
    return worst


def dist_qrep(pi1: QuasiRep, pi2: QuasiRep, gens=None) -> float:
    syms = gens if gens is not None else sorted(pi1.gen_values)
    return max((op_norm(pi1.value(g) - pi2.value(g)) for g in syms), default=0.0)


# ---------------------------------------------------------------------------
# alpha and beta


def alpha(
    v: CechCocycle,
    tree: NerveTree,
    gens: GeneratorData,
    normalized_tol: float = 0.5,
) -> QuasiRep:
    """Monodromy quasi-representation of a cocycle normalized on the tree.

    The generator of a non-tree edge (mu, nu) is sent to
    t_mu* v_{mu,nu}(x_{mu,nu}) t_nu with t the tree-path transport, the
    holonomy of the based loop through that edge; for a cocycle with tree
    values exactly 1 the transports drop out.
    """
    if not is_normalized(v, tree, normalized_tol):
        raise NotNormalized("cocycle is not normalized on the tree")
    transports = {m: tree_transport(v, tree, m) for m in tree.cover.vertices}
    values = {}
    for a, b in gens.generators:
        values[(a, b)] = (
            transports[a].conj().T @ v.value(a, b, tree.x_sample(a, b)) @ transports[b]
        )
    return QuasiRep(v.dim, values)


def beta(
    pi: QuasiRep,
    tree: NerveTree,
    gens: GeneratorData,
    eta: PartitionRoot | None = None,
    y_only: bool = False,
    policy: NumericPolicy = DEFAULT_POLICY,
    strict: bool = False,
) -> CechCocycle:
    """Cocycle rounded from generator values (tree edges take the identity).

    Assembles the almost multiplicative family v'_{mu,nu} = pi(gamma) over
    nerve edges and polar-rounds it into an exact cocycle normalized on
    the tree, with flatness at most eight times the family defect.  The
    rounding is attempted even past the defect-1/2 guarantee (the frame
    rank check still protects correctness); pass strict=True to refuse.
    """
    cover = tree.cover
    if pi.dim == 0:
        return identity_cocycle(cover, 0)
    non_tree = set(gens.generators)
    values = {}
    edges = cover.y_nerve_edges if y_only else cover.nerve_edges
    for e in edges:
        if e in non_tree:
            values[e] = pi.value(e)
    return polar_round(
        values, cover, eta, pi.dim, policy=policy, y_only=y_only, strict=strict
    )


# ---------------------------------------------------------------------------
# stably relative quasi-representations


@dataclass(frozen=True)
class StablyRelativeQuasiRep:
    pi1: QuasiRep
    pi2: QuasiRep
    pi0: QuasiRep
    u: np.ndarray

    def __post_init__(self):
        if self.pi1.dim != self.pi2.dim:
            raise DimMismatch("pi1 and pi2 must share a dimension")
        if self.u.shape[0] != self.pi1.dim + self.pi0.dim:
            raise DimMismatch("intertwiner must act on the stabilized fiber")

    @property
    def dims(self) -> tuple[int, int]:
        return self.pi1.dim, self.pi0.dim


def dist_rep(p: StablyRelativeQuasiRep, q: StablyRelativeQuasiRep, gens_g, gens_l) -> float:
    return max(
        dist_qrep(p.pi1, q.pi1, gens_g),
        dist_qrep(p.pi2, q.pi2, gens_g),
        dist_qrep(p.pi0, q.pi0, gens_l),
        op_norm(p.u - q.u),
    )


def normalize_relative_rep(p: StablyRelativeQuasiRep) -> StablyRelativeQuasiRep:
    """Move the intertwiner into pi2 (only for m = 0)."""
    if p.pi0.dim != 0:
        raise StabilizedRep("u = 1 normalization needs a zero-rank stabilizer")
    return StablyRelativeQuasiRep(
        p.pi1, p.pi2.conjugate(p.u.conj().T), p.pi0, _eye(p.pi1.dim)
    )


def bold_alpha(f, tree: NerveTree, gens: GeneratorData) -> StablyRelativeQuasiRep:
    """Componentwise alpha; the intertwiner is read off at the basepoint."""
    if tree.cover.i_y and tree.basepoint not in tree.cover.i_y:
        raise NotNormalized("basepoint must lie in a cover set meeting Y")
    pi1 = alpha(f.v1, tree, gens)
    pi2 = alpha(f.v2, tree, gens)
    pi0 = alpha_y(f.v0, tree, gens) if f.v0.dim else QuasiRep(0, {})
    u = f.u.value(tree.basepoint) if tree.cover.i_y else _eye(pi1.dim + pi0.dim)
    return StablyRelativeQuasiRep(pi1, pi2, pi0, u)


def alpha_y(v0: CechCocycle, tree: NerveTree, gens: GeneratorData) -> QuasiRep:
    """alpha for a Y-supported cocycle over the Y-part of the tree."""
    cover = tree.cover
    transports = {}
    for m in cover.i_y:
        path = tree.paths[m]
        t = _eye(v0.dim)
        for i in range(len(path) - 1):
            a, b = path[i], path[i + 1]
            t = v0.value(b, a, tree.x_sample(a, b)) @ t
        transports[m] = t
    values = {}
    for a, b in gens.y_generators:
        values[(a, b)] = (
            transports[a].conj().T @ v0.value(a, b, tree.x_sample(a, b)) @ transports[b]
        )
    return QuasiRep(v0.dim, values)


def bold_beta(
    p: StablyRelativeQuasiRep,
    tree: NerveTree,
    gens: GeneratorData,
    eta: PartitionRoot | None = None,
    policy: NumericPolicy = DEFAULT_POLICY,
):
    """Componentwise beta with the constant intertwiner Delta_I(u)."""
    from .relative import StablyRelativeCocycle

    v1 = beta(p.pi1, tree, gens, eta, policy=policy)
    v2 = beta(p.pi2, tree, gens, eta, policy=policy)
    if p.pi0.dim:
        pi0_full = QuasiRep(p.pi0.dim, dict(p.pi0.gen_values))
        v0 = beta(pi0_full, tree, gens, eta, y_only=True, policy=policy)
    else:
        v0 = identity_cocycle(tree.cover, 0)
    u = Morphism(p.u.shape[0], {m: p.u for m in tree.cover.i_y})
    return StablyRelativeCocycle(v1, v2, v0, u)
