"""Dense linear-algebra kernel with explicit tolerance contracts.

Everything here is a pure function of its inputs. Symmetric matrices are plain
``numpy`` arrays that went through :func:`as_symmetric`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (
    InvalidInput,
    NotPositiveDefinite,
    NotPositiveSemidefinite,
    NumericalFailure,
    RiccatiFailure,
)


@dataclass(frozen=True)
class Tolerance:
    """Numerical margins shared by the decision procedures.

    Attributes:
        pd_eps: relative margin of the positive-definiteness test.
        eig_eps: absolute clipping margin for near-zero negative eigenvalues.
        ode_step: default integration step in seconds.
    """

    pd_eps: float = 1e-9
    eig_eps: float = 1e-10
    ode_step: float = 1e-3

    def __post_init__(self):
        for name in ("pd_eps", "eig_eps", "ode_step"):
            if not getattr(self, name) > 0:
                raise InvalidInput(f"tolerance {name} must be strictly positive")


DEFAULT_TOL = Tolerance()


def as_symmetric(M, rtol: float = 1e-12) -> np.ndarray:
    """Validate ``M`` as symmetric and return an exactly symmetric copy."""
    M = np.array(M, dtype=float, ndmin=2)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {M.shape}")
    scale = np.max(np.abs(M)) if M.size else 0.0
    if np.max(np.abs(M - M.T), initial=0.0) > rtol * scale:
        raise InvalidInput("matrix is not symmetric")
    return 0.5 * (M + M.T)


def sym_eigh(M) -> tuple[np.ndarray, np.ndarray]:
    M = as_symmetric(M)
    try:
        return np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"symmetric eigensolver did not converge: {exc}") from exc


def sym_eigenvalues(M) -> np.ndarray:
    """Ascending eigenvalues of a symmetric matrix."""
    return sym_eigh(M)[0]


def pd_threshold(M, tol: Tolerance = DEFAULT_TOL) -> float:
    """Smallest eigenvalue a matrix must exceed to count as positive definite."""
    M = np.asarray(M, dtype=float)
    return tol.pd_eps * (1.0 + np.max(np.abs(np.diag(M)), initial=0.0))


def is_positive_definite(M, tol: Tolerance = DEFAULT_TOL) -> bool:
    lam = sym_eigenvalues(M)
    return bool(lam[0] > pd_threshold(M, tol))


def compact_svd(M) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Compact SVD ``M = U diag(D) V`` of a wide matrix.

    Returns ``U`` (n x n orthogonal), ``D`` (n nonnegative values, descending)
    and ``V`` (n x m with orthonormal rows).
    """
    M = np.array(M, dtype=float, ndmin=2)
    n, m = M.shape
    if m < n:
        raise InvalidInput(f"compact SVD needs m >= n, got {n}x{m}")
    try:
        U, D, V = np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc
    return U, D, V


def max_singular_value(M) -> float:
    M = np.array(M, dtype=float, ndmin=2)
    if M.size == 0:
        return 0.0
    try:
        return float(np.linalg.norm(M, 2))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc


def solve_spd(M, rhs) -> np.ndarray:
    """Solve ``M x = rhs`` for symmetric positive definite ``M``."""
    M = as_symmetric(M)
    try:
        factor = sla.cho_factor(M, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    return sla.cho_solve(factor, np.asarray(rhs, dtype=float))


def spd_sqrt(M, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Symmetric square root of a positive semidefinite matrix.

    Eigenvalues in ``[-eig_eps, 0)`` are clipped to zero; anything more
    negative raises :class:`NotPositiveSemidefinite`.
    """
    lam, V = sym_eigh(M)
    if lam[0] < -tol.eig_eps:
        raise NotPositiveSemidefinite(f"eigenvalue {lam[0]:.3e} < -{tol.eig_eps:g}")
    root = (V * np.sqrt(np.clip(lam, 0.0, None))) @ V.T
    return 0.5 * (root + root.T)


def spectral_abscissa(A) -> float:
    """Largest real part among the eigenvalues of ``A``."""
    A = np.array(A, dtype=float, ndmin=2)
    return float(np.max(np.linalg.eigvals(A).real))


def _care_residual(A, G, Q, X):
    return A.T @ X + X @ A - X @ G @ X + Q


def care_solve(A, B, Q, R, newton_steps: int = 20) -> np.ndarray:
    """Stabilizing solution of ``A^T X + X A - X B R^-1 B^T X + Q = 0``.

    The stable invariant subspace of the Hamiltonian matrix gives a first
    estimate which Newton-Kleinman steps then polish.
    """
    A = np.array(A, dtype=float, ndmin=2)
    B = np.array(B, dtype=float, ndmin=2)
    Q = as_symmetric(Q)
    R = as_symmetric(R)
    n = A.shape[0]
    if B.shape[0] != n or Q.shape != (n, n) or R.shape[0] != B.shape[1]:
        raise InvalidInput("inconsistent CARE dimensions")
    try:
        G = B @ solve_spd(R, B.T)
    except NotPositiveDefinite as exc:
        raise RiccatiFailure("R must be positive definite") from exc

    H = np.block([[A, -G], [-Q, -A.T]])
    try:
        T, Z, sdim = sla.schur(H, output="real", sort="lhp")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise RiccatiFailure(f"Hamiltonian Schur form failed: {exc}") from exc
    if sdim != n:
        raise RiccatiFailure("Hamiltonian has eigenvalues on the imaginary axis; (A, B) not stabilizable")
    Z11, Z21 = Z[:n, :n], Z[n:, :n]
    try:
        X = np.linalg.solve(Z11.T, Z21.T).T
    except np.linalg.LinAlgError as exc:
        raise RiccatiFailure("stable subspace is not a graph; (A, B) not stabilizable") from exc
    X = 0.5 * (X + X.T)

    scale = 1.0 + np.linalg.norm(Q) + np.linalg.norm(A)
    for _ in range(newton_steps):
        if np.linalg.norm(_care_residual(A, G, Q, X)) <= 1e-13 * scale:
            break
        Acl = A - G @ X
        X_next = sla.solve_continuous_lyapunov(Acl.T, -(Q + X @ G @ X))
        X_next = 0.5 * (X_next + X_next.T)
        if not np.all(np.isfinite(X_next)):
            break
        if np.linalg.norm(X_next - X) <= 1e-15 * (1.0 + np.linalg.norm(X)):
            X = X_next
            break
        X = X_next

    if np.linalg.norm(_care_residual(A, G, Q, X)) > 1e-6 or spectral_abscissa(A - G @ X) >= 0:
        raise RiccatiFailure("CARE solution failed the residual or stability check")
    return X


def care_lqr_gain(A, B, Q, R) -> np.ndarray:
    """LQR state-feedback gain ``K = R^-1 B^T X`` for ``u = -K x``."""
    X = care_solve(A, B, Q, R)
    B = np.array(B, dtype=float, ndmin=2)
    return solve_spd(R, B.T @ X)
