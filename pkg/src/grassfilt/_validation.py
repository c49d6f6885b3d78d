"""Input validation helpers shared across modules."""

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import norm as sparse_norm

from .exceptions import DimensionMismatch, NotSymmetric

ORTHO_TOL = 1e-10


def check_stiefel(V, name="V", tol=ORTHO_TOL):
    """Return ``V`` as a 2-D float array after checking ``V.T @ V == I``."""
    V = np.asarray(V, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    if V.ndim != 2 or V.shape[0] < V.shape[1]:
        raise DimensionMismatch(f"{name} must be n x k with n >= k, got {V.shape}")
    err = np.linalg.norm(V.T @ V - np.eye(V.shape[1]))
    if err > tol:
        raise ValueError(f"{name} is not column-orthonormal (||V^T V - I||_F = {err:.2e})")
    return V


def check_same_shape(a, b, names=("a", "b")):
    if a.shape != b.shape:
        raise DimensionMismatch(f"{names[0]} has shape {a.shape} but {names[1]} has shape {b.shape}")


def matrix_norm(S):
    """Frobenius norm for dense or sparse matrices."""
    if sp.issparse(S):
        return float(sparse_norm(S))
    return float(np.linalg.norm(S))


def check_symmetric(S, tol=1e-10, name="S"):
    """Return ``S`` (dense float array or CSR matrix) after a symmetry check
    relative to its Frobenius norm."""
    if sp.issparse(S):
        S = sp.csr_matrix(S, dtype=float)
        asym = float(sparse_norm(S - S.T)) if S.nnz else 0.0
    else:
        S = np.asarray(S, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise DimensionMismatch(f"{name} must be square, got {S.shape}")
        asym = float(np.linalg.norm(S - S.T))
    scale = max(matrix_norm(S), 1.0)
    if asym > tol * scale:
        raise NotSymmetric(f"{name} is not symmetric (||S - S^T||_F = {asym:.2e})")
    return S


def check_signal(x, n, name="x"):
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise DimensionMismatch(f"{name} must have shape ({n},), got {x.shape}")
    return x


def fix_column_signs(V):
    """Flip columns in place so each column's largest-magnitude entry is positive."""
    if V.size == 0:
        return V
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    V *= signs
    return V
