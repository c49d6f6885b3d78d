"""Thin SVD and extremal symmetric eigenpairs."""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from ._validation import check_symmetric, fix_column_signs, matrix_norm
from .exceptions import KOutOfRange

logger = logging.getLogger(__name__)

#: above this size ``extremal_eigenpairs`` switches to the iterative solver
DENSE_LIMIT = 2000
EIGENGAP_TOL = 1e-10
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class SpectralPair:
    """``k`` eigenvalues with an orthonormal ``n x k`` block of eigenvectors.

    Attributes
    ----------
    values : ndarray of shape (k,)
        Ascending for ``which="smallest"``, descending for ``"largest"``.
    vectors : ndarray of shape (n, k)
    residual : float
        Largest ``||S v_i - lambda_i v_i||`` over the returned pairs.
    broken_eigenspace : bool
        Set when ``|lambda_k - lambda_{k+1}|`` is below ``1e-10 ||S||``, i.e.
        the k-dimensional eigenspace splits an eigenvalue cluster.
    """

    values: np.ndarray
    vectors: np.ndarray
    residual: float = 0.0
    broken_eigenspace: bool = False

    @property
    def k(self):
        return self.values.shape[0]


def thin_svd(M):
    """Thin SVD ``M = U diag(xi) W^T`` of an ``n x k`` matrix with ``n >= k``.

    Returns ``(U, xi, W)`` with ``W`` (not ``W^T``) as a ``k x k`` orthogonal
    matrix and ``xi`` nonincreasing.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] < M.shape[1]:
        raise ValueError(f"thin_svd expects n x k with n >= k, got {M.shape}")
    U, xi, Wt = np.linalg.svd(M, full_matrices=False)
    return U, xi, Wt.T


def extremal_eigenpairs(S, k, which="smallest"):
    """The ``k`` smallest or largest eigenpairs of a symmetric matrix.

    Dense matrices up to :data:`DENSE_LIMIT` rows go through LAPACK's
    subset ``eigh``; larger (or sparse, large) inputs use ARPACK. Each
    eigenvector column is sign-normalized so its largest-magnitude entry is
    positive; callers working with subspaces must not rely on that.
    """
    if which not in ("smallest", "largest"):
        raise ValueError("which must be 'smallest' or 'largest'")
    S = check_symmetric(S)
    n = S.shape[0]
    k = int(k)
    if not 1 <= k < n:
        raise KOutOfRange(f"k must satisfy 1 <= k < n={n}, got {k}")
    scale = matrix_norm(S)
    kk = k + 1  # one extra eigenvalue to test the gap

    if n <= DENSE_LIMIT:
        Sd = S.toarray() if sp.issparse(S) else S
        Sd = 0.5 * (Sd + Sd.T)
        lo, hi = (0, kk - 1) if which == "smallest" else (n - kk, n - 1)
        vals, vecs = scipy.linalg.eigh(Sd, subset_by_index=(lo, hi))
    else:
        vals, vecs = eigsh(S, k=kk, which="SA" if which == "smallest" else "LA", tol=1e-12)
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]

    if which == "largest":
        vals, vecs = vals[::-1], vecs[:, ::-1]
    gap = abs(vals[k] - vals[k - 1])
    values = np.array(vals[:k])
    vectors = fix_column_signs(np.array(vecs[:, :k]))

    res = np.linalg.norm(S @ vectors - vectors * values, axis=0)
    residual = float(res.max())
    if residual > RESIDUAL_TOL * max(scale, 1.0):
        logger.warning("eigenpair residual %.2e exceeds %.0e * ||S||", residual, RESIDUAL_TOL)
    broken = bool(gap < EIGENGAP_TOL * scale)
    if broken:
        logger.info("eigenvalues %d and %d coincide; eigenspace is broken", k, k + 1)
    return SpectralPair(values, vectors, residual, broken)
