"""Dense complex eigensolver: Householder Hessenberg reduction followed by
single-shift QR (Wilkinson shifts, deflation) to complex Schur form, with
eigenvectors recovered by back substitution.
"""
import numpy as np

from nhqw import _backend
from nhqw.constants import QR_MAX_ITER_PER_EIGENVALUE, SOLVER_TOL
from nhqw.errors import ConvergenceError, NumericalError, ValidationError

__all__ = ["schur", "eig_dense", "eigen_residuals"]


def schur(M):
    """Complex Schur decomposition ``M = Q T Q^H``.

    Returns
    -------
    T : ndarray
        Upper triangular; ``diag(T)`` holds the eigenvalues.
    Q : ndarray
        Unitary.

    Raises
    ------
    ConvergenceError
        When an eigenvalue fails to converge; ``exc.index`` names it.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValidationError("matrix has non-finite entries")
    n = M.shape[0]
    T = np.array(M, dtype=np.complex128, order="C")
    Q = np.eye(n, dtype=np.complex128)
    kern = _backend.kernels()
    kern.hessenberg(T, Q)
    status, index = kern.schur_qr(T, Q, QR_MAX_ITER_PER_EIGENVALUE)
    if status:
        raise ConvergenceError(
            f"QR iteration did not converge for eigenvalue {index} "
            f"after {QR_MAX_ITER_PER_EIGENVALUE} iterations",
            index,
        )
    return T, Q


def eigen_residuals(M, w, V):
    """``||M v_i - w_i v_i||`` for every column ``v_i`` of ``V``."""
    M = np.asarray(M)
    return np.linalg.norm(M @ V - V * w[np.newaxis, :], axis=0)


def eig_dense(M, *, vectors=True, check=True):
    """All eigenvalues (and right eigenvectors) of a dense complex matrix.

    Each eigenvector is normalized to unit 2-norm. With ``check`` the
    residual contract ``||M v - w v|| <= 1e-8 ||M||_F`` is verified for
    every pair.

    Returns
    -------
    w : ndarray, shape (n,)
    V : ndarray, shape (n, n) or None
    """
    T, Q = schur(M)
    w = np.diag(T).copy()
    if not vectors:
        return w, None
    V = _backend.kernels().schur_vectors(T, Q)
    if check:
        res = eigen_residuals(M, w, V)
        bound = SOLVER_TOL * max(np.linalg.norm(M), np.finfo(float).tiny)
        bad = np.flatnonzero(res > bound)
        if bad.size:
            raise NumericalError(
                f"eigen-residual {res[bad[0]]:.3e} exceeds {bound:.3e} at index {bad[0]}"
            )
    return w, V
