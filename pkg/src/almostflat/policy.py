"""Numeric tolerance policy.

Every strict inequality in the underlying constructions holds for exact
reals; floating point needs explicit slack.  All tolerances live here so
tests and operations agree on one set of numbers.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class NumericPolicy:
    # admissible deviation of U*U from 1 for matrices claiming unitarity
    unitarity_tol: float = 1e-10
    # smallest singular value accepted by polar / inverse square root
    singularity_tol: float = 1e-8
    # Hermiticity / skewness residual accepted by functional calculus
    hermitian_tol: float = 1e-10
    # distance of a unitary eigenvalue from -1 below which the principal
    # log refuses to pick a branch (radians)
    angle_tol: float = 1e-9
    # residual allowed for "exact" cocycle identities at sample points
    cocycle_tol: float = 1e-10
    # residual allowed for exact intertwiners produced by gauge correction
    intertwiner_tol: float = 1e-9


DEFAULT_POLICY = NumericPolicy()
