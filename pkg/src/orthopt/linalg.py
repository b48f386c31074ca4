"""Small dense linear-algebra kernels."""

import numpy as np


class NoUniqueSolutionError(np.linalg.LinAlgError):
    """The vectorized Sylvester system is singular."""


def sym(M):
    return 0.5 * (M + M.T)


def skew(M):
    return 0.5 * (M - M.T)


def lyapunov_solve(A, B, Q):
    """Solve A S + S B = Q by dense Kronecker vectorization.

    Meant for modest p (the solve is O(p^6)); requires the spectra of A and
    -B to be disjoint, otherwise NoUniqueSolutionError is raised.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    Q = np.asarray(Q, dtype=float)
    p = A.shape[0]
    if A.shape != (p, p) or B.shape != (p, p) or Q.shape != (p, p):
        raise ValueError(f"incompatible shapes {A.shape}, {B.shape}, {Q.shape}")
    K = np.kron(np.eye(p), A) + np.kron(B.T, np.eye(p))
    try:
        s = np.linalg.solve(K, Q.ravel(order="F"))
    except np.linalg.LinAlgError as exc:
        raise NoUniqueSolutionError("spectra of A and -B intersect") from exc
    S = s.reshape((p, p), order="F")
    resid = np.linalg.norm(A @ S + S @ B - Q)
    scale = (np.linalg.norm(A) + np.linalg.norm(B)) * max(np.linalg.norm(S), 1e-300)
    if not np.isfinite(resid) or resid > 1e-10 * max(scale, np.linalg.norm(Q)):
        raise NoUniqueSolutionError(f"ill-conditioned Sylvester system, residual {resid:.2e}")
    return S
