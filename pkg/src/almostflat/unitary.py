"""Dense complex matrix calculus for unitary-valued transition data.

Everything here works on plain ``numpy`` arrays of shape (n, n) with
dtype complex128.  Matrices are small (a few dozen rows at most after
tensor products), so O(n^3) eigenvalue methods are used throughout: the
polar decomposition and inverse square roots go through the Hermitian
eigendecomposition of A*A, mirroring the functional-calculus route of
the constructions they implement.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import (
    InvalidMatrix,
    LogBranchCut,
    NotPositiveDefinite,
    NotSkewHermitian,
    SingularPolar,
)
from .policy import DEFAULT_POLICY, NumericPolicy

__all__ = [
    "op_norm",
    "is_unitary",
    "check_unitary",
    "polar_unitary",
    "polar_isometry",
    "inv_sqrt_psd",
    "principal_log_unitary",
    "exp_skew",
    "haar_unitary",
    "random_skew",
]


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise InvalidMatrix(f"expected a matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise InvalidMatrix("matrix has non-finite entries")
    return m


def op_norm(a) -> float:
    """Operator norm (largest singular value); realizes every ||.|| used here."""
    m = _as_matrix(a)
    if m.size == 0:
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False)[0])


def is_unitary(u, tol: float | None = None, policy: NumericPolicy = DEFAULT_POLICY) -> bool:
    m = _as_matrix(u)
    if m.shape[0] != m.shape[1]:
        return False
    t = policy.unitarity_tol if tol is None else tol
    return op_norm(m.conj().T @ m - np.eye(m.shape[0])) <= t


def check_unitary(u, what: str = "matrix", policy: NumericPolicy = DEFAULT_POLICY) -> np.ndarray:
    m = _as_matrix(u)
    if m.shape[0] != m.shape[1] or not is_unitary(m, policy=policy):
        raise InvalidMatrix(f"{what} is not unitary within {policy.unitarity_tol}")
    return m


def polar_unitary(a, policy: NumericPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Unitary factor W = A (A*A)^{-1/2} of an invertible square matrix.

    W is the unitary closest to A in operator norm.  Raises SingularPolar
    when the smallest singular value of A is below ``singularity_tol``.
    """
    m = _as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise InvalidMatrix("polar_unitary needs a square matrix")
    h = m.conj().T @ m
    w, v = np.linalg.eigh(h)
    if w[0] <= policy.singularity_tol**2:
        raise SingularPolar(f"smallest singular value {np.sqrt(max(w[0], 0.0)):.3e} too small")
    return m @ (v * (w ** -0.5)) @ v.conj().T


def polar_isometry(a, policy: NumericPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Isometry factor A (A*A)^{-1/2} of a tall full-column-rank matrix."""
    m = _as_matrix(a)
    h = m.conj().T @ m
    w, v = np.linalg.eigh(h)
    if w.size and w[0] <= policy.singularity_tol**2:
        raise SingularPolar("matrix does not have full column rank")
    return m @ (v * (w ** -0.5)) @ v.conj().T


def inv_sqrt_psd(h, policy: NumericPolicy = DEFAULT_POLICY) -> np.ndarray:
    """H^{-1/2} for Hermitian positive definite H, via eigendecomposition."""
    m = _as_matrix(h)
    if m.shape[0] != m.shape[1]:
        raise InvalidMatrix("inv_sqrt_psd needs a square matrix")
    if op_norm(m - m.conj().T) > policy.hermitian_tol * max(1.0, op_norm(m)):
        raise NotPositiveDefinite("matrix is not Hermitian")
    w, v = np.linalg.eigh(m)
    if w[0] <= policy.singularity_tol:
        raise NotPositiveDefinite(f"spectrum reaches down to {w[0]:.3e}")
    return (v * (w ** -0.5)) @ v.conj().T


def principal_log_unitary(u, policy: NumericPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Skew-Hermitian H with exp(H) = U and eigenangles in (-pi, pi).

    Uses a complex Schur form (diagonal for the normal matrix U) so that
    clustered eigenvalues stay numerically orthogonal.  Raises LogBranchCut
    when an eigenvalue sits within ``angle_tol`` of -1.
    """
    m = check_unitary(u, "log argument", policy)
    t, z = scipy.linalg.schur(m, output="complex")
    lam = np.diag(t)
    ang = np.angle(lam)
    if np.any(np.pi - np.abs(ang) <= policy.angle_tol):
        raise LogBranchCut("eigenvalue on the branch cut at -1")
    h = (z * (1j * ang)) @ z.conj().T
    return 0.5 * (h - h.conj().T)


def exp_skew(h, policy: NumericPolicy = DEFAULT_POLICY) -> np.ndarray:
    """exp(H) for skew-Hermitian H; exactly unitary by construction."""
    m = _as_matrix(h)
    if m.shape[0] != m.shape[1]:
        raise InvalidMatrix("exp_skew needs a square matrix")
    if op_norm(m + m.conj().T) > policy.hermitian_tol * max(1.0, op_norm(m)):
        raise NotSkewHermitian("matrix is not skew-Hermitian")
    w, v = np.linalg.eigh(1j * m)  # iH is Hermitian, H = -i (iH)
    return (v * np.exp(-1j * w)) @ v.conj().T


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via phase-fixed QR of a complex Gaussian."""
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_skew(n: int, rng: np.random.Generator, norm: float = 1.0) -> np.ndarray:
    """Random skew-Hermitian matrix scaled to the requested operator norm."""
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = 0.5 * (a - a.conj().T)
    nrm = op_norm(h)
    if nrm == 0.0:
        return h
    return h * (norm / nrm)
