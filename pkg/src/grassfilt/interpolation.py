"""Subspace interpolation in normal coordinates on the Grassmann manifold."""

import logging
import threading
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_stiefel
from .exceptions import DuplicateNodes, ExtrapolationWarning, IndexOutOfRange
from .grassmann import grassmann_exp, grassmann_log, random_stiefel
from .spectral import extremal_eigenpairs

logger = logging.getLogger(__name__)

CUT_LOCUS_WARN = 0.1


def chebyshev_nodes(N, a=-1.0, b=1.0):
    """The ``N + 1`` Chebyshev points ``cos((2i+1) pi / (2N+2))`` mapped
    affinely to ``[a, b]``, ascending.

    Evaluated as ``sin(pi (N - 2i) / (2N + 2))``, which is exactly
    symmetric and puts the middle node exactly at 0 for even ``N``.
    """
    N = int(N)
    if N < 0:
        raise ValueError("N must be >= 0")
    if not a < b:
        raise ValueError("need a < b")
    x = np.sin(np.pi * (N - 2 * np.arange(N + 1)) / (2 * N + 2))[::-1]
    return 0.5 * (a + b) + 0.5 * (b - a) * x


def barycentric_weights(nodes):
    nodes = np.asarray(nodes, dtype=float)
    if np.unique(nodes).size != nodes.size:
        raise DuplicateNodes("interpolation nodes must be pairwise distinct")
    if nodes.size == 1:
        return np.ones(1)
    # rescale to [-1, 1]; barycentric weights are scale-free up to a constant
    c, h = 0.5 * (nodes.max() + nodes.min()), 0.5 * (nodes.max() - nodes.min())
    x = (nodes - c) / h
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    w = 1.0 / np.prod(diff, axis=1)
    return w / np.abs(w).max()


def lagrange_basis(nodes, t, weights=None):
    """Values ``l_j(t)`` of all Lagrange cardinal polynomials on ``nodes``.

    Evaluated in the second barycentric form, so ``sum(l) == 1`` up to
    rounding and ``t == nodes[j]`` gives the ``j``-th unit vector exactly.
    """
    nodes = np.asarray(nodes, dtype=float)
    w = barycentric_weights(nodes) if weights is None else weights
    hit = np.flatnonzero(nodes == t)
    if hit.size:
        out = np.zeros(nodes.size)
        out[hit[0]] = 1.0
        return out
    diff = t - nodes
    # scaling by the nearest difference keeps w / diff finite as t nears a node
    terms = w * (diff[np.argmin(np.abs(diff))] / diff)
    return terms / terms.sum()


@dataclass(eq=False)
class AnchorSet:
    """Exactly computed subspaces at anchor parameters.

    Parameters
    ----------
    times : array of shape (N,)
        Strictly increasing anchor parameters.
    reps : array of shape (N, n, k)
        Orthonormal bases of the anchor subspaces.
    spectra : array of shape (N, k), optional
        Ascending eigenvalues belonging to ``reps``.
    residuals : array of shape (N,), optional
        Eigenpair residuals recorded by the solver.
    """

    times: np.ndarray
    reps: np.ndarray
    spectra: np.ndarray = None
    residuals: np.ndarray = None
    _cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.reps = np.stack([check_stiefel(V, f"reps[{i}]") for i, V in enumerate(self.reps)])
        if self.times.ndim != 1 or self.times.size != self.reps.shape[0]:
            raise ValueError("need exactly one representative per anchor time")
        if self.times.size == 0:
            raise ValueError("anchor set is empty")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("anchor times must be strictly increasing")
        self.weights = barycentric_weights(self.times)

    def __len__(self):
        return self.times.size

    @property
    def shape(self):
        return self.reps.shape[1:]

    def tangents(self, base):
        """Logarithms of every anchor at ``base``, computed once per base."""
        key = (base.shape, base.tobytes())
        with self._lock:
            if key not in self._cache:
                deltas = np.stack([grassmann_log(base, V).delta for V in self.reps])
                sk = np.linalg.svd(deltas, compute_uv=False).min(axis=1)
                low = np.flatnonzero(sk < 1e-10)
                if low.size:
                    logger.info("anchors %s have rank-deficient tangents at the base point",
                                low.tolist())
                self._cache[key] = deltas
            return self._cache[key]


def build_anchor_set(family, times, k, which="smallest"):
    """Solve the eigenproblem of ``family(t)`` exactly at each anchor time."""
    times = np.asarray(times, dtype=float)
    pairs = [extremal_eigenpairs(family(t), k, which) for t in times]
    return AnchorSet(
        times,
        np.stack([p.vectors for p in pairs]),
        np.stack([p.values for p in pairs]),
        np.array([p.residual for p in pairs]),
    )


def choose_base_point(anchors, policy="middle_anchor"):
    """Pick the base point of the normal coordinates.

    ``policy`` is ``"middle_anchor"`` (index ``N // 2``), an integer anchor
    index, or an explicit orthonormal ``n x k`` array.
    """
    if isinstance(policy, str):
        if policy != "middle_anchor":
            raise ValueError(f"unknown base policy {policy!r}")
        return anchors.reps[len(anchors) // 2]
    if isinstance(policy, (int, np.integer)):
        if not -len(anchors) <= policy < len(anchors):
            raise IndexOutOfRange(f"anchor index {policy} out of range")
        return anchors.reps[policy]
    V = check_stiefel(policy, "base")
    if V.shape != anchors.shape:
        raise ValueError(f"base has shape {V.shape}, anchors have {anchors.shape}")
    smin = np.array([np.linalg.svd(V.T @ R, compute_uv=False).min() for R in anchors.reps])
    if smin.min() < CUT_LOCUS_WARN:
        logger.warning("external base point is close to the cut locus of anchor %d "
                       "(sigma_min = %.3g)", int(smin.argmin()), smin.min())
    return V


def random_base_point(anchors, rng=None, min_sigma=0.3, max_tries=1000):
    """Random orthonormal base point kept away from every anchor's cut locus."""
    rng = np.random.default_rng(rng)
    n, k = anchors.shape
    for _ in range(max_tries):
        V = random_stiefel(n, k, rng)
        smin = min(np.linalg.svd(V.T @ R, compute_uv=False).min() for R in anchors.reps)
        if smin >= min_sigma:
            return V
    raise RuntimeError("could not draw a base point away from the cut locus")


def interpolate_subspace(anchors, base, t, warn=True):
    """Interpolated orthonormal basis of the subspace at parameter ``t``.

    The anchor logarithms at ``base`` are combined with Lagrange weights and
    mapped back with the exponential. Queries outside the anchor span emit
    an :class:`ExtrapolationWarning` unless ``warn`` is false.
    """
    t = float(t)
    if warn and (t < anchors.times[0] or t > anchors.times[-1]):
        warnings.warn(f"t={t} outside anchor range [{anchors.times[0]}, {anchors.times[-1]}]",
                      ExtrapolationWarning, stacklevel=2)
    deltas = anchors.tangents(base)
    ell = lagrange_basis(anchors.times, t, anchors.weights)
    return grassmann_exp(base, np.tensordot(ell, deltas, axes=1))


class SubspaceInterpolator(BaseEstimator):
    """Estimator wrapper around :func:`interpolate_subspace`.

    Parameters
    ----------
    base_point : {"middle_anchor", "random"}, int or ndarray
        Base point policy; ``"random"`` draws one seeded by ``random_state``.
    random_state : int, optional

    Examples
    --------
    >>> interp = SubspaceInterpolator().fit(times, bases)
    >>> V = interp.predict(0.3)
    """

    def __init__(self, base_point="middle_anchor", random_state=None):
        self.base_point = base_point
        self.random_state = random_state

    def fit(self, times, reps, spectra=None):
        anchors = reps if isinstance(reps, AnchorSet) else AnchorSet(times, reps, spectra)
        self.anchors_ = anchors
        if isinstance(self.base_point, str) and self.base_point == "random":
            self.base_ = random_base_point(anchors, self.random_state)
        else:
            self.base_ = choose_base_point(anchors, self.base_point)
        anchors.tangents(self.base_)
        self.n_features_in_, self.k_ = anchors.shape
        return self

    def predict(self, t):
        """Basis at a scalar ``t``, or a stacked ``(len(t), n, k)`` array."""
        check_is_fitted(self, "anchors_")
        if np.ndim(t) == 0:
            return interpolate_subspace(self.anchors_, self.base_, t)
        return np.stack([interpolate_subspace(self.anchors_, self.base_, s) for s in t])
