"""Polynomial low-pass graph filters kept in factored form."""

import csv
import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_stiefel, check_symmetric
from .exceptions import BrokenEigenspaceWarning, DimensionMismatch
from .interpolation import (
    build_anchor_set,
    chebyshev_nodes,
    choose_base_point,
    interpolate_subspace,
    random_base_point,
)
from .spectral import extremal_eigenpairs


#: largest n for which a filter may be materialized as a dense matrix
DENSE_FILTER_LIMIT = 64


def as_taps(h):
    h = np.atleast_1d(np.asarray(h, dtype=float))
    if h.ndim != 1 or h.size < 1 or not np.all(np.isfinite(h)):
        raise ValueError("filter taps must be a nonempty finite 1-D sequence")
    return h


def vandermonde(lam, M):
    """``k x M`` matrix with entries ``lam_i ** j`` for ``j = 0..M-1``."""
    M = int(M)
    if M < 1:
        raise ValueError("M must be >= 1")
    return np.vander(np.asarray(lam, dtype=float), M, increasing=True)


@dataclass(frozen=True)
class FactoredFilter:
    """Filter ``H = V diag(vandermonde(lam) @ taps) V^T`` held as its factors."""

    basis: np.ndarray
    lam: np.ndarray
    taps: np.ndarray

    @property
    def n(self):
        return self.basis.shape[0]

    @property
    def k(self):
        return self.basis.shape[1]

    def response(self):
        return vandermonde(self.lam, self.taps.size) @ self.taps

    def apply(self, x):
        return apply_filter(self, x)

    def to_dense(self, force=False):
        """Materialize ``H``; refused above ``DENSE_FILTER_LIMIT`` unless forced."""
        if self.n > DENSE_FILTER_LIMIT and not force:
            raise MemoryError(f"refusing to densify a filter with n={self.n} > {DENSE_FILTER_LIMIT}")
        return (self.basis * self.response()) @ self.basis.T

    def frobenius_norm(self):
        return float(np.linalg.norm(self.response()))


def build_lowpass(pair, taps):
    """Wrap the ``k`` smallest eigenpairs and taps into a :class:`FactoredFilter`."""
    if pair.broken_eigenspace:
        warnings.warn("k-th eigenvalue is repeated beyond the cut; the low-pass "
                      "filter depends on the chosen eigenvectors", BrokenEigenspaceWarning,
                      stacklevel=2)
    return FactoredFilter(pair.vectors, np.asarray(pair.values, float), as_taps(taps))


def apply_filter(f, x):
    """``y = V (r * (V^T x))`` in ``O(nk + kM)``."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != f.n:
        raise DimensionMismatch(f"signal has {x.shape[0]} entries, filter acts on {f.n}")
    r = f.response()
    coeff = f.basis.T @ x
    coeff = coeff * (r if x.ndim == 1 else r[:, None])
    return f.basis @ coeff


def filter_distance(f, g):
    """``||H_f - H_g||_F`` computed from the factors.

    A QR factorization of ``[V_f | V_g]`` reduces the problem to a
    ``2k x 2k`` matrix, so nothing of size ``n x n`` is formed and no
    cancellation occurs for nearly equal filters.
    """
    if f.n != g.n:
        raise DimensionMismatch("filters act on different vertex counts")
    Q, R = np.linalg.qr(np.hstack([f.basis, g.basis]))
    d = np.concatenate([f.response(), -g.response()])
    return float(np.linalg.norm((R * d) @ R.T))


def rayleigh_ritz_align(vtilde, S):
    """Ritz values of ``S`` on ``span(vtilde)`` and the aligning rotation.

    Returns ``(lam, O)`` with ``vtilde.T @ S @ vtilde = O diag(lam) O^T``,
    ``lam`` ascending. Each column of ``O`` has its largest-magnitude entry
    made positive.
    """
    vtilde = check_stiefel(vtilde, "vtilde")
    S = check_symmetric(S)
    if S.shape[0] != vtilde.shape[0]:
        raise DimensionMismatch("S and vtilde disagree on n")
    B = vtilde.T @ (S @ vtilde)
    B = 0.5 * (B + B.T)
    lam, O = np.linalg.eigh(B)
    idx = np.argmax(np.abs(O), axis=0)
    O = O * np.sign(O[idx, np.arange(O.shape[1])])
    return lam, O


def interpolate_filter(anchors, base, taps, t, S_t, warn=True):
    """Low-pass filter at ``t`` from interpolated eigenspaces.

    The subspace is interpolated, its spectrum re-estimated on ``S_t`` by
    Rayleigh-Ritz, and the basis rotated onto the Ritz vectors. ``taps``
    may be a fixed sequence or a callable ``t -> taps``. ``warn`` is passed
    on to :func:`interpolate_subspace`.
    """
    h = as_taps(taps(t) if callable(taps) else taps)
    V = interpolate_subspace(anchors, base, t, warn)
    lam, O = rayleigh_ritz_align(V, S_t)
    return FactoredFilter(V @ O, lam, h)


def write_response_csv(f, path):
    """Export ``lambda,response`` pairs of a filter."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda", "response"])
        for lam, r in zip(f.lam, f.response()):
            w.writerow([repr(float(lam)), repr(float(r))])


class GraphFilterInterpolator(BaseEstimator):
    """Interpolated low-pass filters along a parametric shift-operator family.

    Parameters
    ----------
    k : int
        Dimension of the low-frequency subspace.
    taps : sequence of float or callable
        Filter taps ``h_0..h_{M-1}``, or a callable returning them per ``t``.
    n_nodes : int
        Anchors are the ``n_nodes`` Chebyshev points of ``interval``.
    interval : tuple of float
    base_point : {"middle_anchor", "random"}, int or ndarray
    random_state : int, optional

    Notes
    -----
    ``fit`` takes a callable ``family(t)`` returning the shift operator at
    ``t``; it solves the eigenproblem only at the anchors.
    """

    def __init__(self, k=8, taps=(1.0,), n_nodes=10, interval=(-1.0, 1.0),
                 base_point="middle_anchor", random_state=None):
        self.k = k
        self.taps = taps
        self.n_nodes = n_nodes
        self.interval = interval
        self.base_point = base_point
        self.random_state = random_state

    def fit(self, family, y=None):
        a, b = self.interval
        self.family_ = family
        self.anchors_ = build_anchor_set(family, chebyshev_nodes(self.n_nodes - 1, a, b), self.k)
        if isinstance(self.base_point, str) and self.base_point == "random":
            self.base_ = random_base_point(self.anchors_, self.random_state)
        else:
            self.base_ = choose_base_point(self.anchors_, self.base_point)
        self.anchors_.tangents(self.base_)
        return self

    def subspace(self, t):
        check_is_fitted(self, "anchors_")
        return interpolate_subspace(self.anchors_, self.base_, t)

    def predict(self, t, S_t=None):
        """Interpolated :class:`FactoredFilter` at ``t``."""
        check_is_fitted(self, "anchors_")
        S_t = self.family_(t) if S_t is None else S_t
        return interpolate_filter(self.anchors_, self.base_, self.taps, t, S_t)

    def exact(self, t, S_t=None):
        """Filter from a fresh eigensolve, for comparison."""
        S_t = self.family_(t) if S_t is None else S_t
        h = self.taps(t) if callable(self.taps) else self.taps
        return build_lowpass(extremal_eigenpairs(S_t, self.k), h)

    def transform(self, X, t):
        """Filter the signals in ``X`` (``n`` or ``n x c``) at parameter ``t``."""
        return apply_filter(self.predict(t), X)
